//! Gibbs ensembles `Γ_v = e^{-βH_v} / Z(v)` from a dense spectral
//! decomposition of `H_v`, and everything derived from them: partition
//! function, free energy, entropy, one-body reduced density matrix, density.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::basis::{FockBasis, TorusGrid};
use crate::density::DensityProfile;
use crate::error::{Error, Result};
use crate::operators::{assemble_hamiltonian, HamiltonianMatrix, InteractionSpec, PotentialField};

pub const DEFAULT_EIGEN_TOLERANCE: f64 = 1e-10;

/// Relative spacing below which two eigenvalues are reported as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Column `j` is the eigenvector of `eigenvalues[j]`.
    eigenvectors: DMatrix<Complex64>,
    residual: f64,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest `‖Hψ_j - λ_jψ_j‖` relative to `max(1, max|λ|)`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Groups of eigenvalue indices that are equal within
    /// [`DEGENERACY_TOLERANCE`].
    pub fn degenerate_levels(&self) -> Vec<Vec<usize>> {
        let mut levels: Vec<Vec<usize>> = Vec::new();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            match levels.last_mut() {
                Some(level)
                    if (l - self.eigenvalues[level[0]]).abs()
                        < DEGENERACY_TOLERANCE * l.abs().max(1.0) =>
                {
                    level.push(j)
                }
                _ => levels.push(vec![j]),
            }
        }
        levels
    }
}

pub fn solve_spectrum(h: &HamiltonianMatrix) -> Result<SpectralDecomposition> {
    solve_spectrum_with_tolerance(h, DEFAULT_EIGEN_TOLERANCE)
}

/// Full dense Hermitian eigendecomposition.
///
/// The matrix is split into the connected components of its sparsity
/// pattern (spin and, for `v = 0`, momentum sectors) and each block is
/// diagonalized separately.
pub fn solve_spectrum_with_tolerance(h: &HamiltonianMatrix, tolerance: f64) -> Result<SpectralDecomposition> {
    let m = h.entries();
    let d = m.nrows();
    let blocks = connected_blocks(m);

    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(d);
    let mut block_vectors = Vec::with_capacity(blocks.len());
    let mut worst_residual: f64 = 0.0;
    let mut worst_orthogonality: f64 = 0.0;
    let mut scale: f64 = 1.0;

    for (b, idx) in blocks.iter().enumerate() {
        let n = idx.len();
        let sub = DMatrix::from_fn(n, n, |i, j| m[(idx[i], idx[j])]);
        let eig = SymmetricEigen::try_new(sub.clone(), f64::EPSILON, 0).ok_or(
            Error::EigensolverFailure {
                residual: f64::NAN,
                tolerance,
            },
        )?;
        let vectors = eig.eigenvectors;
        let values = eig.eigenvalues;

        let hv = &sub * &vectors;
        for j in 0..n {
            let lam = values[j];
            scale = scale.max(lam.abs());
            let r = (hv.column(j) - vectors.column(j) * Complex64::new(lam, 0.0)).norm();
            worst_residual = worst_residual.max(r);
            pairs.push((lam, b, j));
        }
        let gram = vectors.adjoint() * &vectors;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst_orthogonality = worst_orthogonality.max((gram[(i, j)] - target).norm());
            }
        }
        block_vectors.push(vectors);
    }

    let relative = worst_residual / scale;
    if relative > tolerance || worst_orthogonality > tolerance || !relative.is_finite() {
        return Err(Error::EigensolverFailure {
            residual: relative.max(worst_orthogonality),
            tolerance,
        });
    }

    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut eigenvectors = DMatrix::from_element(d, d, ZERO);
    let mut eigenvalues = Vec::with_capacity(d);
    for (col, &(lam, b, j)) in pairs.iter().enumerate() {
        eigenvalues.push(lam);
        for (local, &global) in blocks[b].iter().enumerate() {
            eigenvectors[(global, col)] = block_vectors[b][(local, j)];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        residual: relative,
    })
}

fn connected_blocks(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let d = m.nrows();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if m[(i, j)] != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut roots: Vec<Option<usize>> = vec![None; d];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..d {
        let r = find(&mut parent, i);
        let b = *roots[r].get_or_insert_with(|| {
            blocks.push(Vec::new());
            blocks.len() - 1
        });
        blocks[b].push(i);
    }
    blocks
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}

/// `log Z = -βλ_min + log Σ_j e^{-β(λ_j - λ_min)}`.
pub fn partition_function(spec: &SpectralDecomposition, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let lmin = spec.ground_energy();
    let sum: f64 = spec
        .eigenvalues
        .iter()
        .map(|&l| (-beta * (l - lmin)).exp())
        .sum();
    Ok(-beta * lmin + sum.ln())
}

/// `Ω = -log Z / β`.
pub fn helmholtz_free_energy(log_z: f64, beta: f64) -> f64 {
    -log_z / beta
}

/// Boltzmann weights of the eigenstates, kept alongside their logarithms so
/// that weights below the smallest double stay representable.
#[derive(Debug, Clone, PartialEq)]
pub struct BoltzmannWeights {
    beta: f64,
    values: Vec<f64>,
    log_values: Vec<f64>,
}

impl BoltzmannWeights {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn gibbs_weights(spec: &SpectralDecomposition, beta: f64) -> Result<BoltzmannWeights> {
    check_beta(beta)?;
    let lmin = spec.ground_energy();
    let exponents: Vec<f64> = spec.eigenvalues.iter().map(|&l| -beta * (l - lmin)).collect();
    let log_sum = exponents.iter().map(|e| e.exp()).sum::<f64>().ln();
    let log_values: Vec<f64> = exponents.iter().map(|e| e - log_sum).collect();
    let values = log_values.iter().map(|l| l.exp()).collect();
    Ok(BoltzmannWeights {
        beta,
        values,
        log_values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thermodynamics {
    /// `S = -Σ w log w`.
    pub entropy: f64,
    /// `E = Σ w λ`.
    pub internal_energy: f64,
    /// `E - S/β`.
    pub omega_check: f64,
}

pub fn entropy_and_energy(
    spec: &SpectralDecomposition,
    weights: &BoltzmannWeights,
    beta: f64,
) -> Result<Thermodynamics> {
    check_beta(beta)?;
    if weights.len() != spec.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} eigenvalues",
            weights.len(),
            spec.dimension()
        )));
    }
    let entropy = -weights
        .values
        .iter()
        .zip(&weights.log_values)
        .map(|(w, l)| if *w == 0.0 { 0.0 } else { w * l })
        .sum::<f64>();
    let internal_energy = weights
        .values
        .iter()
        .zip(&spec.eigenvalues)
        .map(|(w, l)| w * l)
        .sum::<f64>();
    Ok(Thermodynamics {
        entropy,
        internal_energy,
        omega_check: internal_energy - entropy / beta,
    })
}

/// `Tr{T Γ} = Σ_j w_j ⟨ψ_j|T|ψ_j⟩`.
pub fn kinetic_expectation(basis: &FockBasis, spec: &SpectralDecomposition, weights: &BoltzmannWeights) -> f64 {
    let t = basis.kinetic_diagonal();
    let u = spec.eigenvectors();
    weights
        .values
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(j, w)| {
            w * u
                .column(j)
                .iter()
                .zip(&t)
                .map(|(c, ti)| c.norm_sqr() * ti)
                .sum::<f64>()
        })
        .sum()
}

/// Many-body density matrix `Γ = Σ_j w_j |ψ_j⟩⟨ψ_j|` in the determinant basis.
pub fn density_matrix(spec: &SpectralDecomposition, weights: &BoltzmannWeights) -> DMatrix<Complex64> {
    let u = spec.eigenvectors();
    let mut scaled = u.clone();
    for (j, w) in weights.values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*w);
    }
    scaled * u.adjoint()
}

/// One-body reduced density matrix over spin orbitals,
/// `D[a, b] = Tr{Γ a†_b a_a}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneBodyRdm {
    matrix: DMatrix<Complex64>,
}

impl OneBodyRdm {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|c| c.re).sum()
    }

    /// Natural occupation numbers, ascending.
    pub fn occupations(&self) -> Vec<f64> {
        let mut occ: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        occ.sort_by(f64::total_cmp);
        occ
    }

    /// `ρ̂_k = Σ_{p,σ} D[(p+k,σ), (p,σ)]` for `k = 0..=2K`.
    pub fn density_coefficients(&self, basis: &FockBasis) -> Vec<Complex64> {
        let k_max = 2 * basis.cutoff() as i32;
        (0..=k_max)
            .map(|k| {
                let mut acc = ZERO;
                for (b, orb) in basis.orbitals().iter().enumerate() {
                    if let Some(a) = basis.orbital_index(orb.momentum + k, orb.spin) {
                        acc += self.matrix[(a, b)];
                    }
                }
                acc
            })
            .collect()
    }
}

pub fn one_body_rdm(basis: &FockBasis, gamma: &DMatrix<Complex64>) -> Result<OneBodyRdm> {
    let d = basis.dimension();
    if gamma.nrows() != d || gamma.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "density matrix is {}x{}, basis dimension is {d}",
            gamma.nrows(),
            gamma.ncols()
        )));
    }
    let n_orb = basis.orbital_count();
    let mut m = DMatrix::from_element(n_orb, n_orb, ZERO);
    // Tr{Γ O} = Σ_{I,J} Γ[I,J] ⟨J|O|I⟩ with O = a†_b a_a, spin conserving
    for (col, &det) in basis.determinants().iter().enumerate() {
        for a in det.occupied() {
            let spin = basis.orbital(a).spin;
            for (b, orb_b) in basis.orbitals().iter().enumerate() {
                if orb_b.spin != spin {
                    continue;
                }
                if let Some((target, sign)) = det.excite(a, b) {
                    let row = basis.index_of(target).expect("excitation stays in basis");
                    m[(a, b)] += gamma[(col, row)] * sign;
                }
            }
        }
    }
    Ok(OneBodyRdm { matrix: m })
}

/// Density of the ensemble described by `spec` and `weights`.
pub fn gibbs_density(
    basis: &FockBasis,
    spec: &SpectralDecomposition,
    weights: &BoltzmannWeights,
    grid: TorusGrid,
) -> Result<DensityProfile> {
    if spec.dimension() != basis.dimension() || weights.len() != basis.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "basis dimension {}, spectrum dimension {}, {} weights",
            basis.dimension(),
            spec.dimension(),
            weights.len()
        )));
    }
    let rdm = one_body_rdm(basis, &density_matrix(spec, weights))?;
    DensityProfile::new(basis.particle_count(), rdm.density_coefficients(basis), grid)
}

/// Everything computed from one Gibbs state.
#[derive(Debug, Clone)]
pub struct GibbsEnsemble {
    pub beta: f64,
    pub log_z: f64,
    pub omega: f64,
    pub weights: BoltzmannWeights,
    pub entropy: f64,
    pub internal_energy: f64,
    pub kinetic_energy: f64,
    pub one_rdm: OneBodyRdm,
    pub density: DensityProfile,
    pub spectrum: SpectralDecomposition,
}

impl GibbsEnsemble {
    pub fn new(basis: &FockBasis, h: &HamiltonianMatrix, beta: f64, grid: TorusGrid) -> Result<Self> {
        let spectrum = solve_spectrum(h)?;
        Self::from_spectrum(basis, spectrum, beta, grid)
    }

    pub fn from_spectrum(
        basis: &FockBasis,
        spectrum: SpectralDecomposition,
        beta: f64,
        grid: TorusGrid,
    ) -> Result<Self> {
        let log_z = partition_function(&spectrum, beta)?;
        let weights = gibbs_weights(&spectrum, beta)?;
        let thermo = entropy_and_energy(&spectrum, &weights, beta)?;
        let kinetic_energy = kinetic_expectation(basis, &spectrum, &weights);
        let gamma = density_matrix(&spectrum, &weights);
        let one_rdm = one_body_rdm(basis, &gamma)?;
        let trace = one_rdm.trace();
        let n = basis.particle_count() as f64;
        if (trace - n).abs() > 1e-10 * n {
            return Err(Error::Normalization {
                found: trace,
                expected: n,
            });
        }
        let density = DensityProfile::new(basis.particle_count(), one_rdm.density_coefficients(basis), grid)?;
        Ok(GibbsEnsemble {
            beta,
            log_z,
            omega: helmholtz_free_energy(log_z, beta),
            weights,
            entropy: thermo.entropy,
            internal_energy: thermo.internal_energy,
            kinetic_energy,
            one_rdm,
            density,
            spectrum,
        })
    }

    /// `|Ω - (E - S/β)|` relative to the largest of the three terms.
    pub fn thermodynamic_identity_residual(&self) -> f64 {
        let check = self.internal_energy - self.entropy / self.beta;
        let scale = self
            .omega
            .abs()
            .max(self.internal_energy.abs())
            .max((self.entropy / self.beta).abs())
            .max(f64::MIN_POSITIVE);
        (self.omega - check).abs() / scale
    }
}

/// Assembles `H_v`, diagonalizes it, and builds the Gibbs ensemble.
pub fn forward(
    basis: &FockBasis,
    v: &PotentialField,
    w: &InteractionSpec,
    beta: f64,
    grid: TorusGrid,
) -> Result<GibbsEnsemble> {
    check_beta(beta)?;
    let h = assemble_hamiltonian(basis, v, w)?;
    GibbsEnsemble::new(basis, &h, beta, grid)
}

/// `Ω^β(v)` alone.
pub fn free_energy(basis: &FockBasis, v: &PotentialField, w: &InteractionSpec, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let h = assemble_hamiltonian(basis, v, w)?;
    let spec = solve_spectrum(&h)?;
    Ok(helmholtz_free_energy(partition_function(&spec, beta)?, beta))
}
