//! One-body potentials `v = f + ∇g`, pair interactions, and the many-body
//! Hamiltonian `H_v = T + W + V` on a [`FockBasis`].
//!
//! Potentials live in Fourier space with `v(x) = Σ_k v̂_k e^{i2πkx}`. Only
//! `k ≥ 1` is stored; `v̂_{-k} = conj(v̂_k)` and `v̂_0 = 0` fixes the additive
//! constant. Distributional parts `∇g` enter exactly as `i2πk ĝ_k`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{Determinant, FockBasis};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A representative of a potential class `[v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    /// `v̂_k` for `k = 1..=cutoff`, stored at index `k - 1`.
    coeffs: Vec<Complex64>,
    regular_part: Option<Vec<Complex64>>,
    gradient_part: Option<Vec<Complex64>>,
    /// Constant offset `v̂_0`. Zero for every gauge-fixed potential; only
    /// [`PotentialField::shifted`] sets it.
    constant: f64,
}

impl PotentialField {
    pub fn zero() -> Self {
        PotentialField {
            coeffs: Vec::new(),
            regular_part: None,
            gradient_part: None,
            constant: 0.0,
        }
    }

    /// Builds a potential from `v̂_k`, `k = 1..=coeffs.len()`.
    pub fn from_coefficients(coeffs: Vec<Complex64>) -> Result<Self> {
        for (i, c) in coeffs.iter().enumerate() {
            check_finite(i + 1, *c)?;
        }
        Ok(PotentialField {
            coeffs,
            regular_part: None,
            gradient_part: None,
            constant: 0.0,
        })
    }

    /// Inverse of [`PotentialField::coordinates`].
    pub fn from_coordinates(coords: &[f64]) -> Result<Self> {
        if !coords.len().is_multiple_of(2) {
            return Err(Error::DimensionMismatch(format!(
                "coordinate vector has odd length {}",
                coords.len()
            )));
        }
        Self::from_coefficients(
            coords
                .chunks(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len()
    }

    /// `v̂_k` for any integer `k`; conjugate symmetry supplies negative modes.
    pub fn coefficient(&self, k: i32) -> Complex64 {
        match k {
            0 => Complex64::new(self.constant, 0.0),
            k if k > 0 => self.coeffs.get(k as usize - 1).copied().unwrap_or(ZERO),
            k => self
                .coeffs
                .get((-k) as usize - 1)
                .map(|c| c.conj())
                .unwrap_or(ZERO),
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn regular_part(&self) -> Option<&[Complex64]> {
        self.regular_part.as_deref()
    }

    pub fn gradient_part(&self) -> Option<&[Complex64]> {
        self.gradient_part.as_deref()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Real coordinates `(Re v̂_1, Im v̂_1, Re v̂_2, ...)`.
    pub fn coordinates(&self) -> Vec<f64> {
        self.coeffs.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    /// Same class with the representative moved by `+c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.constant += c;
        out
    }

    /// Drops the constant offset, returning the canonical representative.
    pub fn gauge_fixed(&self) -> Self {
        let mut out = self.clone();
        out.constant = 0.0;
        out
    }

    /// Restricts or pads the potential to `cutoff` modes.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(cutoff, ZERO);
        PotentialField {
            coeffs,
            regular_part: None,
            gradient_part: None,
            constant: self.constant,
        }
    }

    /// `a·self + b·other`, without the regular/gradient split.
    pub fn combine(&self, a: f64, other: &PotentialField, b: f64) -> Self {
        let n = self.cutoff().max(other.cutoff());
        let coeffs = (1..=n as i32)
            .map(|k| self.coefficient(k) * a + other.coefficient(k) * b)
            .collect();
        PotentialField {
            coeffs,
            regular_part: None,
            gradient_part: None,
            constant: a * self.constant + b * other.constant,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.combine(a, &PotentialField::zero(), 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.coeffs.iter().all(|c| *c == ZERO)
    }

    /// Pointwise value of the Fourier series (meaningful only for regular
    /// potentials; distributional parts are evaluated through their
    /// truncated series).
    pub fn evaluate(&self, x: f64) -> f64 {
        let mut v = self.constant;
        for (i, c) in self.coeffs.iter().enumerate() {
            let phase = 2.0 * PI * (i + 1) as f64 * x;
            v += 2.0 * (c.re * phase.cos() - c.im * phase.sin());
        }
        v
    }
}

fn check_finite(mode: usize, c: Complex64) -> Result<()> {
    if !c.re.is_finite() {
        return Err(Error::NonFiniteCoefficient { mode, value: c.re });
    }
    if !c.im.is_finite() {
        return Err(Error::NonFiniteCoefficient { mode, value: c.im });
    }
    Ok(())
}

/// Combines a regular part `f` and a distributional part `∇g` into
/// `v̂_k = f̂_k + i2πk ĝ_k`. Both slices are indexed by `k`; entry 0 is the
/// constant mode and is ignored.
pub fn potential_from_parts(f_coeffs: &[Complex64], g_coeffs: &[Complex64]) -> Result<PotentialField> {
    for (k, c) in f_coeffs.iter().chain(g_coeffs.iter()).enumerate() {
        let k = if k < f_coeffs.len() { k } else { k - f_coeffs.len() };
        check_finite(k, *c)?;
    }
    let n = f_coeffs.len().max(g_coeffs.len()).saturating_sub(1);
    let f = |k: usize| f_coeffs.get(k).copied().unwrap_or(ZERO);
    let g = |k: usize| g_coeffs.get(k).copied().unwrap_or(ZERO);
    let coeffs: Vec<Complex64> = (1..=n)
        .map(|k| f(k) + Complex64::new(0.0, 2.0 * PI * k as f64) * g(k))
        .collect();
    Ok(PotentialField {
        coeffs,
        regular_part: Some((1..=n).map(f).collect()),
        gradient_part: Some((1..=n).map(g).collect()),
        constant: 0.0,
    })
}

/// `H^{-1}` norm `sqrt(Σ_{k≠0} |v̂_k|² / (1 + 4π²k²))`.
pub fn dual_norm(v: &PotentialField) -> f64 {
    v.coefficients()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = (i + 1) as f64;
            2.0 * c.norm_sqr() / (1.0 + 4.0 * PI * PI * k * k)
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    None,
    FourierPair,
}

/// Spin-independent pair potential `w(x_i - x_j) = Σ_k ŵ_k e^{i2πk(x_i - x_j)}`
/// with real, even coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionSpec {
    kind: InteractionKind,
    /// `ŵ_k` for `k = 0..=cutoff`.
    coeffs: Vec<f64>,
    label: String,
}

impl InteractionSpec {
    pub fn none() -> Self {
        InteractionSpec {
            kind: InteractionKind::None,
            coeffs: vec![0.0],
            label: "none".into(),
        }
    }

    /// `ŵ_{±1} = strength`.
    pub fn cosine(strength: f64) -> Result<Self> {
        let mut s = Self::from_coefficients(vec![0.0, strength])?;
        s.label = format!("cosine({strength})");
        Ok(s)
    }

    /// Band-limited contact interaction, `ŵ_k = strength` for `|k| ≤ cutoff`.
    pub fn contact(strength: f64, cutoff: usize) -> Result<Self> {
        let mut s = Self::from_coefficients(vec![strength; cutoff + 1])?;
        s.label = format!("contact({strength},{cutoff})");
        Ok(s)
    }

    /// `ŵ_k` for `k = 0..coeffs.len()`.
    pub fn from_coefficients(coeffs: Vec<f64>) -> Result<Self> {
        for (k, c) in coeffs.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFiniteCoefficient { mode: k, value: *c });
            }
        }
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        let kind = if coeffs.iter().all(|&c| c == 0.0) {
            InteractionKind::None
        } else {
            InteractionKind::FourierPair
        };
        Ok(InteractionSpec {
            kind,
            label: "fourier_pair".into(),
            coeffs,
        })
    }

    pub fn kind(&self) -> InteractionKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficient(&self, k: i32) -> f64 {
        self.coeffs.get(k.unsigned_abs() as usize).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMetadata {
    pub cutoff: usize,
    pub particles: usize,
    pub potential_cutoff: usize,
    pub interaction: String,
    pub klmn: Option<(f64, f64)>,
}

/// Dense Hermitian matrix of `H_v` in the determinant basis.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    entries: DMatrix<Complex64>,
    metadata: HamiltonianMetadata,
}

impl HamiltonianMatrix {
    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn metadata(&self) -> &HamiltonianMetadata {
        &self.metadata
    }

    pub fn with_klmn(mut self, a: f64, b: f64) -> Self {
        self.metadata.klmn = Some((a, b));
        self
    }

    /// Wraps an arbitrary Hermitian matrix (used for diagnostics and tests).
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch("matrix is not square".into()));
        }
        Ok(HamiltonianMatrix {
            entries: hermitize(entries),
            metadata: HamiltonianMetadata {
                cutoff: 0,
                particles: 0,
                potential_cutoff: 0,
                interaction: "external".into(),
                klmn: None,
            },
        })
    }

    /// Largest entry of `|H - H†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let h = &self.entries;
        let mut worst: f64 = 0.0;
        for i in 0..h.nrows() {
            for j in 0..h.ncols() {
                worst = worst.max((h[(i, j)] - h[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// Averages `H` with `H†` and mirrors the upper triangle so the result is
/// Hermitian bit-for-bit.
fn hermitize(mut h: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = h.nrows();
    for i in 0..d {
        h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
        for j in (i + 1)..d {
            let avg = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            h[(i, j)] = avg;
            h[(j, i)] = avg.conj();
        }
    }
    h
}

/// Kinetic operator as a (diagonal) matrix.
pub fn kinetic_matrix(basis: &FockBasis) -> DMatrix<Complex64> {
    let diag = basis.kinetic_diagonal();
    DMatrix::from_fn(diag.len(), diag.len(), |i, j| {
        if i == j {
            Complex64::new(diag[i], 0.0)
        } else {
            ZERO
        }
    })
}

/// One-body operator `Σ_{p,k,σ} c_k a†_{p+k,σ} a_{p,σ}` for a coefficient
/// function `c` on nonzero transfers; transfers leaving the basis are dropped.
fn one_body_transfer_matrix(
    basis: &FockBasis,
    max_transfer: usize,
    coefficient: impl Fn(i32) -> Complex64,
) -> DMatrix<Complex64> {
    let d = basis.dimension();
    let mut m = DMatrix::from_element(d, d, ZERO);
    let kmax = max_transfer.min(2 * basis.cutoff()) as i32;
    for (col, &det) in basis.determinants().iter().enumerate() {
        for from in det.occupied() {
            let orb = basis.orbital(from);
            for k in (-kmax..=kmax).filter(|&k| k != 0) {
                let c = coefficient(k);
                if c == ZERO {
                    continue;
                }
                let Some(to) = basis.orbital_index(orb.momentum + k, orb.spin) else {
                    continue;
                };
                if let Some((target, sign)) = det.excite(from, to) {
                    let row = basis.index_of(target).expect("excitation stays in basis");
                    m[(row, col)] += c * sign;
                }
            }
        }
    }
    m
}

/// Matrix of `V = Σ_j v(x_j)` including any constant offset.
pub fn potential_matrix(basis: &FockBasis, v: &PotentialField) -> Result<DMatrix<Complex64>> {
    if v.cutoff() > 2 * basis.cutoff() {
        return Err(Error::DimensionMismatch(format!(
            "potential cutoff {} exceeds the largest momentum transfer 2K = {} of the basis",
            v.cutoff(),
            2 * basis.cutoff()
        )));
    }
    let mut m = one_body_transfer_matrix(basis, v.cutoff(), |k| v.coefficient(k));
    if v.constant() != 0.0 {
        let shift = v.constant() * basis.particle_count() as f64;
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
    }
    Ok(m)
}

/// Fourier component `ρ̂_k = Σ_{p,σ} a†_{p,σ} a_{p+k,σ}` of the density
/// operator, so that `⟨ρ̂_k⟩` is the `k`-th coefficient of the density.
pub fn density_mode_matrix(basis: &FockBasis, k: i32) -> DMatrix<Complex64> {
    // a†_p a_{p+k} is a transfer of -k
    one_body_transfer_matrix(basis, k.unsigned_abs() as usize, |t| {
        if t == -k {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    })
}

/// Matrix of `W = ½ Σ ŵ_k a†_{p+k,σ} a†_{q-k,τ} a_{q,τ} a_{p,σ}`.
pub fn interaction_matrix(basis: &FockBasis, w: &InteractionSpec) -> DMatrix<Complex64> {
    let d = basis.dimension();
    let mut m = DMatrix::from_element(d, d, ZERO);
    if w.kind() == InteractionKind::None {
        return m;
    }
    let kmax = w.cutoff().min(2 * basis.cutoff()) as i32;
    for (col, &det) in basis.determinants().iter().enumerate() {
        let occ: Vec<usize> = det.occupied().collect();
        for &i in &occ {
            for &j in &occ {
                if i == j {
                    continue;
                }
                let oi = basis.orbital(i);
                let oj = basis.orbital(j);
                for k in -kmax..=kmax {
                    let wk = w.coefficient(k);
                    if wk == 0.0 {
                        continue;
                    }
                    let (Some(i2), Some(j2)) = (
                        basis.orbital_index(oi.momentum + k, oi.spin),
                        basis.orbital_index(oj.momentum - k, oj.spin),
                    ) else {
                        continue;
                    };
                    if let Some(target) = apply_pair(det, i, j, i2, j2) {
                        let (t, sign) = target;
                        let row = basis.index_of(t).expect("pair transfer stays in basis");
                        m[(row, col)] += Complex64::new(0.5 * wk * sign, 0.0);
                    }
                }
            }
        }
    }
    m
}

/// `a†_{i2} a†_{j2} a_j a_i |det⟩`.
fn apply_pair(det: Determinant, i: usize, j: usize, i2: usize, j2: usize) -> Option<(Determinant, f64)> {
    let (d, s1) = det.annihilate(i)?;
    let (d, s2) = d.annihilate(j)?;
    let (d, s3) = d.create(j2)?;
    let (d, s4) = d.create(i2)?;
    Some((d, s1 * s2 * s3 * s4))
}

/// Assembles `H_v = T + W + V` via second-quantized matrix elements
/// (equivalent to the Slater–Condon rules).
pub fn assemble_hamiltonian(
    basis: &FockBasis,
    v: &PotentialField,
    w: &InteractionSpec,
) -> Result<HamiltonianMatrix> {
    let mut h = potential_matrix(basis, v)?;
    h += interaction_matrix(basis, w);
    for (i, t) in basis.kinetic_diagonal().into_iter().enumerate() {
        h[(i, i)] += t;
    }
    Ok(HamiltonianMatrix {
        entries: hermitize(h),
        metadata: HamiltonianMetadata {
            cutoff: basis.cutoff(),
            particles: basis.particle_count(),
            potential_cutoff: v.cutoff(),
            interaction: w.label().to_string(),
            klmn: None,
        },
    })
}

/// Smallest `b ≥ 0` with `±X ≤ a T + b` on the truncated space, for a
/// Hermitian perturbation `X` and diagonal kinetic operator `T`.
pub fn klmn_bound(perturbation: &DMatrix<Complex64>, kinetic: &[f64], a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidRelativeBound(a));
    }
    if perturbation.nrows() != kinetic.len() {
        return Err(Error::DimensionMismatch(format!(
            "perturbation is {}x{}, kinetic diagonal has {} entries",
            perturbation.nrows(),
            perturbation.ncols(),
            kinetic.len()
        )));
    }
    let mut b: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let mut m = hermitize(perturbation * Complex64::new(sign, 0.0));
        for (i, t) in kinetic.iter().enumerate() {
            m[(i, i)] -= a * t;
        }
        let top = SymmetricEigen::new(m)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        b = b.max(top);
    }
    Ok(b.max(0.0))
}

/// KLMN constant `b` of the interaction for relative bound `a`.
pub fn klmn_estimate(basis: &FockBasis, w: &InteractionSpec, a: f64) -> Result<f64> {
    klmn_bound(&interaction_matrix(basis, w), &basis.kinetic_diagonal(), a)
}

/// KLMN constant `b` of the combined perturbation `W + V`.
pub fn klmn_estimate_combined(
    basis: &FockBasis,
    v: &PotentialField,
    w: &InteractionSpec,
    a: f64,
) -> Result<f64> {
    let x = potential_matrix(basis, v)? + interaction_matrix(basis, w);
    klmn_bound(&x, &basis.kinetic_diagonal(), a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, Spin};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parts_combine_into_fourier_coefficients() {
        let v = potential_from_parts(&[ZERO, c(0.5, 0.0)], &[]).unwrap();
        assert_eq!(v.coefficient(1), c(0.5, 0.0));
        assert_eq!(v.coefficient(-1), c(0.5, 0.0));
        assert_eq!(v.coefficient(0), ZERO);

        let v = potential_from_parts(&[], &[ZERO, c(1.0, 0.0)]).unwrap();
        assert_relative_eq!(v.coefficient(1).im, 2.0 * PI, epsilon = 1e-15);
        assert_eq!(v.coefficient(1).re, 0.0);
        assert_relative_eq!(v.coefficient(-1).im, -2.0 * PI, epsilon = 1e-15);

        let v = potential_from_parts(&[ZERO, c(0.5, 0.0)], &[ZERO, c(0.5 / PI, 0.0)]).unwrap();
        assert_relative_eq!(v.coefficient(1).re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(v.coefficient(1).im, 1.0, epsilon = 1e-15);
        assert_eq!(v.regular_part().unwrap(), &[c(0.5, 0.0)]);
    }

    #[test]
    fn constant_mode_is_ignored() {
        let v = potential_from_parts(&[c(3.0, 0.0), c(1.0, 0.0)], &[c(7.0, 0.0)]).unwrap();
        assert_eq!(v.coefficient(0), ZERO);
        assert_eq!(v.cutoff(), 1);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(potential_from_parts(&[ZERO, c(f64::NAN, 0.0)], &[]).is_err());
        assert!(potential_from_parts(&[], &[ZERO, c(0.0, f64::INFINITY)]).is_err());
        assert!(InteractionSpec::from_coefficients(vec![f64::NAN]).is_err());
    }

    #[test]
    fn dual_norm_examples() {
        assert_eq!(dual_norm(&PotentialField::zero()), 0.0);
        let v = PotentialField::from_coefficients(vec![c(1.0, 0.0)]).unwrap();
        let expected = (2.0 / (1.0 + 4.0 * PI * PI)).sqrt();
        assert_relative_eq!(dual_norm(&v), expected, max_relative = 1e-15);
        let w = PotentialField::from_coefficients(vec![c(0.3, -0.2), c(0.1, 0.7)]).unwrap();
        assert_relative_eq!(dual_norm(&w.scaled(2.0)), 2.0 * dual_norm(&w), max_relative = 1e-15);
    }

    #[test]
    fn coordinates_round_trip() {
        let v = PotentialField::from_coefficients(vec![c(0.3, -0.2), c(0.1, 0.7)]).unwrap();
        let x = v.coordinates();
        assert_eq!(x, vec![0.3, -0.2, 0.1, 0.7]);
        assert_eq!(PotentialField::from_coordinates(&x).unwrap(), v);
        assert!(PotentialField::from_coordinates(&[1.0]).is_err());
    }

    #[test]
    fn evaluate_matches_cosine() {
        let v = PotentialField::from_coefficients(vec![c(0.5, 0.0)]).unwrap();
        for x in [0.0, 0.1, 0.37] {
            assert_relative_eq!(v.evaluate(x), (2.0 * PI * x).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn free_hamiltonian_is_kinetic_diagonal() {
        let basis = build_basis(2, 2).unwrap();
        let h = assemble_hamiltonian(&basis, &PotentialField::zero(), &InteractionSpec::none()).unwrap();
        let t = basis.kinetic_diagonal();
        for (i, &ti) in t.iter().enumerate() {
            for j in 0..basis.dimension() {
                let expected = if i == j { ti } else { 0.0 };
                assert_eq!(h.entries()[(i, j)], c(expected, 0.0));
            }
        }
    }

    #[test]
    fn single_particle_cosine_block() {
        // spatial block per spin: momenta (-1, 0, 1) with off-diagonal 1/2
        let basis = build_basis(1, 1).unwrap();
        let v = PotentialField::from_coefficients(vec![c(0.5, 0.0)]).unwrap();
        let h = assemble_hamiltonian(&basis, &v, &InteractionSpec::none()).unwrap();
        let e1 = 2.0 * PI * PI;
        for spin in [Spin::Up, Spin::Down] {
            let idx: Vec<usize> = (-1..=1)
                .map(|p| {
                    let orb = basis.orbital_index(p, spin).unwrap();
                    basis.index_of(Determinant::from_orbitals(&[orb])).unwrap()
                })
                .collect();
            let expected = [[e1, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, e1]];
            for a in 0..3 {
                for b in 0..3 {
                    assert_relative_eq!(h.entries()[(idx[a], idx[b])].re, expected[a][b], epsilon = 1e-14);
                    assert_eq!(h.entries()[(idx[a], idx[b])].im, 0.0);
                }
            }
        }
        // no coupling between spins
        let up = basis.index_of(Determinant::from_orbitals(&[basis.orbital_index(0, Spin::Up).unwrap()])).unwrap();
        let dn = basis.index_of(Determinant::from_orbitals(&[basis.orbital_index(1, Spin::Down).unwrap()])).unwrap();
        assert_eq!(h.entries()[(up, dn)], ZERO);
    }

    #[test]
    fn momentum_independent_interaction_shifts_diagonal() {
        let basis = build_basis(1, 2).unwrap();
        let w0 = 0.8;
        let w = InteractionSpec::from_coefficients(vec![w0]).unwrap();
        let h = assemble_hamiltonian(&basis, &PotentialField::zero(), &w).unwrap();
        let t = basis.kinetic_diagonal();
        for (i, &ti) in t.iter().enumerate() {
            for j in 0..basis.dimension() {
                let expected = if i == j { ti + w0 } else { 0.0 };
                assert_relative_eq!(h.entries()[(i, j)].re, expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn hamiltonian_is_exactly_hermitian() {
        let basis = build_basis(2, 2).unwrap();
        let v = potential_from_parts(&[ZERO, c(0.3, -0.4), c(0.1, 0.2)], &[ZERO, ZERO, c(0.05, 0.01)]).unwrap();
        let w = InteractionSpec::contact(0.7, 3).unwrap();
        let h = assemble_hamiltonian(&basis, &v, &w).unwrap();
        assert_eq!(h.hermiticity_defect(), 0.0);
    }

    #[test]
    fn spin_sectors_decouple() {
        let basis = build_basis(1, 2).unwrap();
        let v = PotentialField::from_coefficients(vec![c(0.3, 0.2), c(-0.1, 0.4)]).unwrap();
        let w = InteractionSpec::cosine(0.6).unwrap();
        let h = assemble_hamiltonian(&basis, &v, &w).unwrap();
        let dets = basis.determinants();
        for i in 0..dets.len() {
            for j in 0..dets.len() {
                if basis.spin_projection(dets[i]) != basis.spin_projection(dets[j]) {
                    assert_eq!(h.entries()[(i, j)], ZERO);
                }
            }
        }
    }

    #[test]
    fn interaction_conserves_momentum() {
        let basis = build_basis(2, 2).unwrap();
        let w = InteractionSpec::contact(1.0, 4).unwrap();
        let h = assemble_hamiltonian(&basis, &PotentialField::zero(), &w).unwrap();
        let dets = basis.determinants();
        let mut offdiag = 0;
        for i in 0..dets.len() {
            for j in 0..dets.len() {
                if h.entries()[(i, j)] != ZERO {
                    assert_eq!(basis.total_momentum(dets[i]), basis.total_momentum(dets[j]));
                    if i != j {
                        offdiag += 1;
                    }
                }
            }
        }
        assert!(offdiag > 0);
    }

    #[test]
    fn potential_beyond_basis_is_rejected() {
        let basis = build_basis(1, 1).unwrap();
        let v = PotentialField::from_coefficients(vec![ZERO, ZERO, c(1.0, 0.0)]).unwrap();
        assert!(matches!(
            assemble_hamiltonian(&basis, &v, &InteractionSpec::none()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn klmn_examples() {
        let basis = build_basis(2, 2).unwrap();
        assert_eq!(klmn_estimate(&basis, &InteractionSpec::none(), 0.3).unwrap(), 0.0);
        assert!(klmn_estimate(&basis, &InteractionSpec::none(), 1.0).is_err());
        assert!(klmn_estimate(&basis, &InteractionSpec::none(), 0.0).is_err());

        // X = 0.1 T is dominated by 0.5 T
        let t = basis.kinetic_diagonal();
        let x = kinetic_matrix(&basis) * c(0.1, 0.0);
        assert_eq!(klmn_bound(&x, &t, 0.5).unwrap(), 0.0);

        let b = klmn_estimate(&basis, &InteractionSpec::cosine(1.5).unwrap(), 0.5).unwrap();
        assert!(b > 0.0);
    }
}
