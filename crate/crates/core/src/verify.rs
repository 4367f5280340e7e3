//! Named, parameterized checks of the structural statements about Gibbs
//! states on the torus, each returning a [`CheckReport`] with the residual
//! that decided it.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::{build_basis, FockBasis, TorusGrid};
use crate::error::{Error, Result};
use crate::gibbs::{
    forward, free_energy, gibbs_weights, partition_function, solve_spectrum, GibbsEnsemble, SpectralDecomposition,
};
use crate::inversion::{invert_density, InversionOptions};
use crate::operators::{
    assemble_hamiltonian, dual_norm, klmn_estimate_combined, potential_from_parts, InteractionSpec, PotentialField,
};

pub const SANDWICH_SLACK: f64 = 1e-9;
pub const MINIMALITY_SLACK: f64 = 1e-10;
pub const RELATIVE_ENTROPY_TOL: f64 = 1e-10;
pub const CONCAVITY_FLOOR: f64 = 1e-13;
pub const MEMBERSHIP_SLACK: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-12;
pub const KINETIC_SPECTRUM_TOL: f64 = 1e-10;
pub const ROUND_TRIP_TOL: f64 = 1e-6;
pub const LOWER_BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The decisive quantity is below the numerical floor.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckParameters {
    pub cutoff: usize,
    pub particles: usize,
    pub beta: Option<f64>,
    pub potential_id: String,
    pub interaction_id: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    #[serde(flatten)]
    pub parameters: CheckParameters,
    pub residual: f64,
    pub threshold: f64,
    pub status: CheckStatus,
    pub passed: bool,
    pub notes: String,
}

impl CheckReport {
    fn new(
        name: &str,
        parameters: CheckParameters,
        residual: f64,
        threshold: f64,
        status: CheckStatus,
        notes: impl Into<String>,
    ) -> Self {
        CheckReport {
            check_name: name.to_string(),
            parameters,
            residual,
            threshold,
            status,
            passed: status == CheckStatus::Pass,
            notes: notes.into(),
        }
    }

    fn decided(name: &str, parameters: CheckParameters, residual: f64, threshold: f64, ok: bool, notes: impl Into<String>) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        Self::new(name, parameters, residual, threshold, status, notes)
    }

    /// Report for a check that could not be evaluated.
    pub fn errored(name: &str, parameters: CheckParameters, err: &Error) -> Self {
        Self::new(name, parameters, f64::NAN, f64::NAN, CheckStatus::Fail, format!("error: {err}"))
    }
}

fn params(basis: &FockBasis, beta: Option<f64>, potential_id: &str, interaction_id: &str, seed: Option<u64>) -> CheckParameters {
    CheckParameters {
        cutoff: basis.cutoff(),
        particles: basis.particle_count(),
        beta,
        potential_id: potential_id.to_string(),
        interaction_id: interaction_id.to_string(),
        seed,
    }
}

/// Plain-language statement each check tests.
pub fn check_manifest() -> Vec<(&'static str, &'static str)> {
    vec![
        ("kinetic_spectrum", "Without potential and interaction the many-body spectrum is the set of sums of 2π²p² over occupied modes."),
        ("thermodynamic_identity", "Ω = -β⁻¹ log Z equals E - β⁻¹ S."),
        ("partition_bound", "For v = 0, W = 0, Z ≤ [2 Σ_{|p|≤K} e^{-2βπ²p²}]^N."),
        ("strict_positivity", "The density of every Gibbs state is strictly positive, including for distributional potentials."),
        ("density_membership", "Gibbs densities integrate to N, are non-negative and obey ‖∇√ρ‖² ≤ 2 Tr{TΓ}."),
        ("eigenvalue_sandwich", "With a KLMN pair (a, b) for W + V, (1-a)μ_n - b ≤ λ_n ≤ (1+a)μ_n + b."),
        ("relative_entropy_identity", "S(Γ|Γ_v) + Tr{Γ - Γ_v} = βΩ_v(Γ) - βΩ(v) Tr{Γ} for positive trace-class Γ."),
        ("gibbs_minimality", "Γ_v minimizes Γ ↦ Tr{Γ(H_v + β⁻¹ log Γ)} over density matrices."),
        ("concavity_omega", "v ↦ Ω^β(v) is strictly concave modulo constants."),
        ("inversion_round_trip", "Every strictly positive Gibbs density is represented by a unique potential class, recovered by the dual ascent."),
        ("functional_lower_bound", "F^β(ρ) ≥ Ω^β(0) for every representable density."),
        ("eigenvalue_sandwich_negative_control", "An undersized b breaks the eigenvalue sandwich; this check is expected to fail."),
    ]
}

/// Minimum of the Gibbs density over `grid`; passes iff strictly positive.
pub fn check_positivity(
    v: &PotentialField,
    w: &InteractionSpec,
    beta: f64,
    basis: &FockBasis,
    grid: TorusGrid,
) -> Result<CheckReport> {
    let ens = forward(basis, v, w, beta, grid)?;
    let min = ens.density.min_value();
    Ok(CheckReport::decided(
        "strict_positivity",
        params(basis, Some(beta), "", w.label(), None),
        min,
        0.0,
        min > 0.0,
        format!("min over {} grid points", grid.point_count()),
    ))
}

/// Worst signed slack of `(1-a)μ_n - b ≤ λ_n ≤ (1+a)μ_n + b`.
pub fn sandwich_slack(spectrum: &[f64], kinetic_sorted: &[f64], a: f64, b: f64) -> f64 {
    spectrum
        .iter()
        .zip(kinetic_sorted)
        .map(|(&l, &mu)| (l - ((1.0 - a) * mu - b)).min((1.0 + a) * mu + b - l))
        .fold(f64::INFINITY, f64::min)
}

/// Sorted eigenvalues of `T` on the basis.
pub fn kinetic_spectrum(basis: &FockBasis) -> Vec<f64> {
    let mut mu = basis.kinetic_diagonal();
    mu.sort_by(f64::total_cmp);
    mu
}

/// Smallest `b` for which the sandwich holds with relative bound `a`.
pub fn minimal_sandwich_b(spectrum: &[f64], kinetic_sorted: &[f64], a: f64) -> f64 {
    spectrum
        .iter()
        .zip(kinetic_sorted)
        .map(|(&l, &mu)| ((1.0 - a) * mu - l).max(l - (1.0 + a) * mu))
        .fold(0.0, f64::max)
}

pub fn check_eigenvalue_sandwich(
    v: &PotentialField,
    w: &InteractionSpec,
    a: f64,
    b: f64,
    basis: &FockBasis,
) -> Result<CheckReport> {
    let spec = solve_spectrum(&assemble_hamiltonian(basis, v, w)?)?;
    let slack = sandwich_slack(spec.eigenvalues(), &kinetic_spectrum(basis), a, b);
    Ok(CheckReport::decided(
        "eigenvalue_sandwich",
        params(basis, None, "", w.label(), None),
        slack,
        -SANDWICH_SLACK,
        slack >= -SANDWICH_SLACK,
        format!("a = {a}, b = {b:e}, {} levels", spec.dimension()),
    ))
}

/// A positive trace-class operator `Σ_i p_i |u_i⟩⟨u_i|` in the determinant
/// basis, with `log p_i` kept separately for weights that underflow.
#[derive(Debug, Clone)]
pub struct TrialState {
    pub frame: DMatrix<Complex64>,
    pub weights: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl TrialState {
    pub fn trace(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        weighted_projector(&self.frame, &self.weights)
    }

    pub fn log_matrix(&self) -> DMatrix<Complex64> {
        weighted_projector(&self.frame, &self.log_weights)
    }

    /// `Tr{Γ log Γ}` from the weights.
    pub fn neg_entropy(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.log_weights)
            .map(|(p, l)| if *p == 0.0 { 0.0 } else { p * l })
            .sum()
    }

    /// `Tr{Γ H}` from the frame columns.
    pub fn energy(&self, h: &DMatrix<Complex64>) -> f64 {
        let hu = h * &self.frame;
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != 0.0)
            .map(|(i, p)| p * self.frame.column(i).dotc(&hu.column(i)).re)
            .sum()
    }

    /// `Tr{Γ(H + β⁻¹ log Γ)}`.
    pub fn helmholtz(&self, h: &DMatrix<Complex64>, beta: f64) -> f64 {
        self.energy(h) + self.neg_entropy() / beta
    }

    pub fn gibbs(spec: &SpectralDecomposition, beta: f64) -> Result<Self> {
        let w = gibbs_weights(spec, beta)?;
        Ok(TrialState {
            frame: spec.eigenvectors().clone(),
            weights: w.values().to_vec(),
            log_weights: w.log_values().to_vec(),
        })
    }

    /// Random unitary frame (QR of a complex Gaussian matrix) with softmax
    /// weights at a random sharpness, scaled to `trace`.
    pub fn random(dim: usize, trace: f64, rng: &mut ChaCha8Rng) -> Self {
        let frame = random_unitary(dim, rng);
        let sharpness: f64 = rng.random_range(0.0..6.0);
        let logits: Vec<f64> = (0..dim)
            .map(|_| sharpness * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_norm = top + logits.iter().map(|l| (l - top).exp()).sum::<f64>().ln() - trace.ln();
        let log_weights: Vec<f64> = logits.iter().map(|l| l - log_norm).collect();
        TrialState {
            frame,
            weights: log_weights.iter().map(|l| l.exp()).collect(),
            log_weights,
        }
    }

    /// A random pure state.
    pub fn random_pure(dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let frame = random_unitary(dim, rng);
        let mut weights = vec![0.0; dim];
        weights[0] = 1.0;
        let mut log_weights = vec![f64::NEG_INFINITY; dim];
        log_weights[0] = 0.0;
        TrialState {
            frame,
            weights,
            log_weights,
        }
    }
}

fn weighted_projector(frame: &DMatrix<Complex64>, values: &[f64]) -> DMatrix<Complex64> {
    let mut scaled = frame.clone();
    for (j, x) in values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*x);
    }
    scaled * frame.adjoint()
}

pub fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    g.qr().q()
}

/// Which `Γ` enters the relative-entropy identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateRecipe {
    /// `Γ = Γ_v`.
    Gibbs,
    /// Gibbs state of the same Hamiltonian at another inverse temperature.
    GibbsAt(f64),
    /// Random full-rank state with the given trace.
    Random { trace: f64, seed: u64 },
}

impl StateRecipe {
    fn label(&self) -> String {
        match self {
            StateRecipe::Gibbs => "gibbs".into(),
            StateRecipe::GibbsAt(b) => format!("gibbs_at_beta_{b}"),
            StateRecipe::Random { trace, .. } => format!("random_trace_{trace}"),
        }
    }
}

/// Both sides of `S(Γ|Γ_v) + Tr{Γ - Γ_v} = βΩ_v(Γ) - βΩ(v) Tr{Γ}`.
///
/// The left side uses matrix logarithms assembled in the determinant basis,
/// `S(A|B) = Tr{A(log A - log B) + B - A}`; the right side uses `Tr{ΓH}` and
/// the spectral entropy of `Γ`.
pub fn relative_entropy_sides(
    h: &DMatrix<Complex64>,
    spec: &SpectralDecomposition,
    beta: f64,
    gamma: &TrialState,
) -> Result<(f64, f64)> {
    let gibbs = TrialState::gibbs(spec, beta)?;
    let g = gamma.matrix();
    let gv = gibbs.matrix();
    let diff_log = gamma.log_matrix() - gibbs.log_matrix();
    let relative = (&g * &diff_log).trace().re + gv.trace().re - g.trace().re;
    let lhs = relative + g.trace().re - gv.trace().re;
    let omega = -partition_function(spec, beta)? / beta;
    let rhs = beta * gamma.helmholtz(h, beta) - beta * omega * gamma.trace();
    Ok((lhs, rhs))
}

pub fn check_relative_entropy(
    v: &PotentialField,
    w: &InteractionSpec,
    beta: f64,
    basis: &FockBasis,
    recipe: StateRecipe,
) -> Result<CheckReport> {
    let h = assemble_hamiltonian(basis, v, w)?;
    let spec = solve_spectrum(&h)?;
    let (gamma, seed) = match recipe {
        StateRecipe::Gibbs => (TrialState::gibbs(&spec, beta)?, None),
        StateRecipe::GibbsAt(other) => (TrialState::gibbs(&spec, other)?, None),
        StateRecipe::Random { trace, seed } => {
            if !(trace > 0.0 && trace.is_finite()) {
                return Err(Error::Config(format!("trial trace must be positive, got {trace}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (TrialState::random(basis.dimension(), trace, &mut rng), Some(seed))
        }
    };
    let (lhs, rhs) = relative_entropy_sides(h.entries(), &spec, beta, &gamma)?;
    let scale = 1f64.max(lhs.abs()).max(rhs.abs()).max(beta * gamma.energy(h.entries()).abs());
    let residual = (lhs - rhs).abs();
    let threshold = RELATIVE_ENTROPY_TOL * scale;
    Ok(CheckReport::decided(
        "relative_entropy_identity",
        params(basis, Some(beta), "", w.label(), seed),
        residual,
        threshold,
        residual <= threshold,
        format!("state {}, lhs {lhs:.6e}, rhs {rhs:.6e}", recipe.label()),
    ))
}

/// Smallest gap `Ω_v(Γ) - Ω(v)` over `trials` random mixed states, one
/// random pure state and `Γ_v` itself.
pub fn check_gibbs_minimality(
    v: &PotentialField,
    w: &InteractionSpec,
    beta: f64,
    basis: &FockBasis,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    if trials == 0 {
        return Err(Error::Config("gibbs minimality needs at least one trial".into()));
    }
    let h = assemble_hamiltonian(basis, v, w)?;
    let spec = solve_spectrum(&h)?;
    let omega = -partition_function(&spec, beta)? / beta;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = basis.dimension();

    let at_gibbs = TrialState::gibbs(&spec, beta)?.helmholtz(h.entries(), beta) - omega;
    let mut min_random = f64::INFINITY;
    for _ in 0..trials {
        let gamma = TrialState::random(d, 1.0, &mut rng);
        min_random = min_random.min(gamma.helmholtz(h.entries(), beta) - omega);
    }
    let pure_gap = TrialState::random_pure(d, &mut rng).helmholtz(h.entries(), beta) - omega;
    let residual = at_gibbs.min(min_random).min(pure_gap);
    let ok = residual >= -MINIMALITY_SLACK && min_random > 0.0 && pure_gap > 0.0;
    Ok(CheckReport::decided(
        "gibbs_minimality",
        params(basis, Some(beta), "", w.label(), Some(seed)),
        residual,
        -MINIMALITY_SLACK,
        ok,
        format!("gap at Γ_v {at_gibbs:.3e}, smallest random gap {min_random:.3e}, pure-state gap {pure_gap:.3e}, {trials} mixed trials"),
    ))
}

/// Midpoint gap `Ω((v1+v2)/2) - ½Ω(v1) - ½Ω(v2)`.
pub fn check_concavity_omega(
    v1: &PotentialField,
    v2: &PotentialField,
    w: &InteractionSpec,
    beta: f64,
    basis: &FockBasis,
) -> Result<CheckReport> {
    let a = v1.gauge_fixed();
    let b = v2.gauge_fixed();
    if a.combine(1.0, &b, -1.0).is_zero() {
        return Err(Error::Degenerate("the two potentials coincide modulo constants".into()));
    }
    let mid = a.combine(0.5, &b, 0.5);
    let gap = free_energy(basis, &mid, w, beta)?
        - 0.5 * free_energy(basis, &a, w, beta)?
        - 0.5 * free_energy(basis, &b, w, beta)?;
    let status = if gap > CONCAVITY_FLOOR {
        CheckStatus::Pass
    } else if gap > -CONCAVITY_FLOOR {
        CheckStatus::Inconclusive
    } else {
        CheckStatus::Fail
    };
    Ok(CheckReport::new(
        "concavity_omega",
        params(basis, Some(beta), "", w.label(), None),
        gap,
        CONCAVITY_FLOOR,
        status,
        format!("dual-norm separation {:.3e}", dual_norm(&a.combine(1.0, &b, -1.0))),
    ))
}

/// `‖∇√ρ‖² - 2 Tr{TΓ}` together with the exact normalization and sign checks.
pub fn membership_residual(ens: &GibbsEnsemble) -> (f64, bool, bool) {
    let d = &ens.density;
    let normalized = d.fourier()[0] == Complex64::new(d.particle_count() as f64, 0.0);
    let nonnegative = d.min_value() >= 0.0;
    let residual = match d.sqrt_seminorm_squared() {
        Some(s) => s - 2.0 * ens.kinetic_energy,
        None => f64::INFINITY,
    };
    (residual, normalized, nonnegative)
}

pub fn check_density_membership(
    v: &PotentialField,
    w: &InteractionSpec,
    beta: f64,
    basis: &FockBasis,
) -> Result<CheckReport> {
    let ens = forward(basis, v, w, beta, TorusGrid::for_basis(basis))?;
    let (residual, normalized, nonnegative) = membership_residual(&ens);
    Ok(CheckReport::decided(
        "density_membership",
        params(basis, Some(beta), "", w.label(), None),
        residual,
        MEMBERSHIP_SLACK,
        normalized && nonnegative && residual <= MEMBERSHIP_SLACK,
        format!(
            "‖∇√ρ‖² = {:.6e}, 2Tr{{TΓ}} = {:.6e}, min ρ = {:.3e}",
            residual + 2.0 * ens.kinetic_energy,
            2.0 * ens.kinetic_energy,
            ens.density.min_value()
        ),
    ))
}

pub fn check_thermodynamic_identity(
    v: &PotentialField,
    w: &InteractionSpec,
    beta: f64,
    basis: &FockBasis,
) -> Result<CheckReport> {
    let ens = forward(basis, v, w, beta, TorusGrid::for_basis(basis))?;
    let residual = ens.thermodynamic_identity_residual();
    Ok(CheckReport::decided(
        "thermodynamic_identity",
        params(basis, Some(beta), "", w.label(), None),
        residual,
        IDENTITY_TOL,
        residual <= IDENTITY_TOL,
        format!("Ω = {:.12e}, E = {:.6e}, S = {:.6e}", ens.omega, ens.internal_energy, ens.entropy),
    ))
}

/// `log Z(0) - N log(2 Σ_{|p|≤K} e^{-2βπ²p²})` for the free system.
pub fn check_partition_bound(beta: f64, basis: &FockBasis) -> Result<CheckReport> {
    let h = assemble_hamiltonian(basis, &PotentialField::zero(), &InteractionSpec::none())?;
    let log_z = partition_function(&solve_spectrum(&h)?, beta)?;
    let k = basis.cutoff() as i32;
    let single: f64 = (-k..=k).map(|p| 2.0 * (-2.0 * beta * PI * PI * (p * p) as f64).exp()).sum();
    let log_bound = basis.particle_count() as f64 * single.ln();
    let residual = log_z - log_bound;
    let threshold = 1e-12 * log_bound.abs().max(1.0);
    Ok(CheckReport::decided(
        "partition_bound",
        params(basis, Some(beta), "zero", "none", None),
        residual,
        threshold,
        residual <= threshold,
        format!("log Z = {log_z:.12e}, log bound = {log_bound:.12e}"),
    ))
}

pub fn check_kinetic_spectrum(basis: &FockBasis) -> Result<CheckReport> {
    let h = assemble_hamiltonian(basis, &PotentialField::zero(), &InteractionSpec::none())?;
    let spec = solve_spectrum(&h)?;
    let expected: Vec<f64> = {
        let mut e: Vec<f64> = basis
            .determinants()
            .iter()
            .map(|det| {
                det.occupied()
                    .map(|i| {
                        let p = basis.orbital(i).momentum as f64;
                        2.0 * PI * PI * p * p
                    })
                    .sum()
            })
            .collect();
        e.sort_by(f64::total_cmp);
        e
    };
    let residual = spec
        .eigenvalues()
        .iter()
        .zip(&expected)
        .map(|(l, m)| (l - m).abs() / m.abs().max(1.0))
        .fold(0.0, f64::max);
    Ok(CheckReport::decided(
        "kinetic_spectrum",
        params(basis, None, "zero", "none", None),
        residual,
        KINETIC_SPECTRUM_TOL,
        residual <= KINETIC_SPECTRUM_TOL,
        format!("{} levels", expected.len()),
    ))
}

/// Inverts the Gibbs density of `v_star` over the potential space of
/// `v_star` and reports the dual-norm distance of the recovered potential.
pub fn check_inversion_round_trip(
    v_star: &PotentialField,
    w: &InteractionSpec,
    beta: f64,
    basis: &FockBasis,
    opts: &InversionOptions,
) -> Result<(CheckReport, CheckReport)> {
    let grid = TorusGrid::for_basis(basis);
    let target = forward(basis, v_star, w, beta, grid)?.density;
    let opts = InversionOptions {
        potential_cutoff: Some(opts.potential_cutoff.unwrap_or(v_star.cutoff().max(1))),
        ..opts.clone()
    };
    let result = invert_density(&target, beta, basis, w, &opts)?;
    let err = dual_norm(&result.potential.combine(1.0, &v_star.gauge_fixed(), -1.0));
    let round_trip = CheckReport::decided(
        "inversion_round_trip",
        params(basis, Some(beta), "", w.label(), None),
        err,
        ROUND_TRIP_TOL,
        result.converged && err <= ROUND_TRIP_TOL,
        format!(
            "converged {} after {} iterations, density residual {:.3e}, gradient {:.3e}",
            result.converged, result.iterations, result.density_residual, result.gradient_norm
        ),
    );
    let omega0 = free_energy(basis, &PotentialField::zero(), w, beta)?;
    let gap = result.f_value - omega0;
    let bound = CheckReport::decided(
        "functional_lower_bound",
        params(basis, Some(beta), "", w.label(), None),
        gap,
        -LOWER_BOUND_SLACK,
        gap >= -LOWER_BOUND_SLACK,
        format!("F = {:.12e}, Ω(0) = {omega0:.12e}", result.f_value),
    );
    Ok((round_trip, bound))
}

/// Parameter matrix and options for [`run_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub cutoffs: Vec<usize>,
    pub particles: Vec<usize>,
    pub betas: Vec<f64>,
    pub seed: u64,
    pub minimality_trials: usize,
    pub interaction_strength: f64,
    pub klmn_a: f64,
    pub include_inversion: bool,
    /// Adds an eigenvalue-sandwich check with a deliberately undersized `b`.
    pub negative_control: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            cutoffs: vec![1, 2, 3],
            particles: vec![1, 2],
            betas: vec![0.5, 1.0, 5.0],
            seed: 2024,
            minimality_trials: 100,
            interaction_strength: 0.5,
            klmn_a: 0.5,
            include_inversion: true,
            negative_control: false,
        }
    }
}

/// Deterministic random potential with modes `1..=cutoff`, each component
/// uniform in `[-scale, scale]`.
pub fn random_potential(rng: &mut ChaCha8Rng, cutoff: usize, scale: f64) -> PotentialField {
    let coeffs = (0..cutoff)
        .map(|_| Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect();
    PotentialField::from_coefficients(coeffs).expect("finite coefficients")
}

/// Purely distributional potential `∇g` with `ĝ_1` of modulus `strength`
/// and random phase.
pub fn random_distributional_potential(rng: &mut ChaCha8Rng, strength: f64) -> PotentialField {
    let phase: f64 = rng.random_range(0.0..2.0 * PI);
    let g1 = Complex64::from_polar(strength, phase);
    potential_from_parts(&[], &[Complex64::new(0.0, 0.0), g1]).expect("finite coefficients")
}

fn capture(name: &str, p: CheckParameters, r: Result<CheckReport>) -> CheckReport {
    match r {
        Ok(mut report) => {
            report.parameters.potential_id = p.potential_id;
            report.parameters.interaction_id = p.interaction_id;
            if report.parameters.seed.is_none() {
                report.parameters.seed = p.seed;
            }
            report
        }
        Err(e) => CheckReport::errored(name, p, &e),
    }
}

/// Runs every check over the parameter matrix. Errors inside a check are
/// recorded in its report.
pub fn run_suite(config: &SuiteConfig) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    for &k in &config.cutoffs {
        for &n in &config.particles {
            let point_seed = config
                .seed
                .wrapping_mul(1_000_003)
                .wrapping_add((k as u64) << 32 | n as u64);
            let basis = match build_basis(k, n) {
                Ok(b) => b,
                Err(e) => {
                    let p = CheckParameters {
                        cutoff: k,
                        particles: n,
                        beta: None,
                        potential_id: String::new(),
                        interaction_id: String::new(),
                        seed: Some(point_seed),
                    };
                    reports.push(CheckReport::errored("basis", p, &e));
                    continue;
                }
            };
            let mut rng = ChaCha8Rng::seed_from_u64(point_seed);
            let smooth = random_potential(&mut rng, k, 0.5);
            let distributional = random_distributional_potential(&mut rng, 1.0);
            let w = match InteractionSpec::cosine(config.interaction_strength) {
                Ok(w) => w,
                Err(e) => {
                    let p = params(&basis, None, "", "cosine", Some(point_seed));
                    reports.push(CheckReport::errored("interaction", p, &e));
                    continue;
                }
            };
            let free = InteractionSpec::none();
            let potentials = [
                ("zero", PotentialField::zero()),
                ("random_smooth", smooth.clone()),
                ("distributional", distributional.clone()),
            ];
            let p = |beta: Option<f64>, pid: &str, wid: &str| params(&basis, beta, pid, wid, Some(point_seed));

            reports.push(capture("kinetic_spectrum", p(None, "zero", "none"), check_kinetic_spectrum(&basis)));
            for (pid, v) in &potentials {
                let r = klmn_estimate_combined(&basis, v, &w, config.klmn_a)
                    .and_then(|b| check_eigenvalue_sandwich(v, &w, config.klmn_a, b, &basis));
                reports.push(capture("eigenvalue_sandwich", p(None, pid, w.label()), r));
            }
            if config.negative_control {
                let r = (|| {
                    // a·T may absorb a weak potential (minimal b = 0), which would make the control vacuous
                    let mut v = smooth.clone();
                    let mut b_min = 0.0;
                    for _ in 0..8 {
                        let spec = solve_spectrum(&assemble_hamiltonian(&basis, &v, &free)?)?;
                        b_min = minimal_sandwich_b(spec.eigenvalues(), &kinetic_spectrum(&basis), config.klmn_a);
                        if b_min > 1e-6 {
                            break;
                        }
                        v = v.scaled(4.0);
                    }
                    let mut report = check_eigenvalue_sandwich(&v, &free, config.klmn_a, 0.5 * b_min, &basis)?;
                    report.check_name = "eigenvalue_sandwich_negative_control".into();
                    Ok(report)
                })();
                reports.push(capture(
                    "eigenvalue_sandwich_negative_control",
                    p(None, "random_smooth", free.label()),
                    r,
                ));
            }

            for (bi, &beta) in config.betas.iter().enumerate() {
                let beta_seed = point_seed.wrapping_add(97 * bi as u64 + 1);
                let grid = TorusGrid::for_basis(&basis);
                reports.push(capture(
                    "partition_bound",
                    p(Some(beta), "zero", "none"),
                    check_partition_bound(beta, &basis),
                ));
                for (pid, v) in &potentials {
                    let pp = || p(Some(beta), pid, w.label());
                    reports.push(capture("thermodynamic_identity", pp(), check_thermodynamic_identity(v, &w, beta, &basis)));
                    reports.push(capture("strict_positivity", pp(), check_positivity(v, &w, beta, &basis, grid)));
                    reports.push(capture("density_membership", pp(), check_density_membership(v, &w, beta, &basis)));
                }
                let recipes = [
                    StateRecipe::Gibbs,
                    StateRecipe::GibbsAt(2.0 * beta),
                    StateRecipe::Random { trace: 0.7, seed: beta_seed },
                    StateRecipe::Random { trace: 1.6, seed: beta_seed + 1 },
                ];
                for recipe in recipes {
                    reports.push(capture(
                        "relative_entropy_identity",
                        p(Some(beta), "random_smooth", w.label()),
                        check_relative_entropy(&smooth, &w, beta, &basis, recipe),
                    ));
                }
                reports.push(capture(
                    "gibbs_minimality",
                    p(Some(beta), "random_smooth", w.label()),
                    check_gibbs_minimality(&smooth, &w, beta, &basis, config.minimality_trials, beta_seed),
                ));
                reports.push(capture(
                    "concavity_omega",
                    p(Some(beta), "random_smooth+distributional", w.label()),
                    check_concavity_omega(&smooth, &distributional, &w, beta, &basis),
                ));
                if config.include_inversion {
                    match check_inversion_round_trip(&smooth, &w, beta, &basis, &InversionOptions::default()) {
                        Ok((a, b)) => {
                            reports.push(capture("inversion_round_trip", p(Some(beta), "random_smooth", w.label()), Ok(a)));
                            reports.push(capture("functional_lower_bound", p(Some(beta), "random_smooth", w.label()), Ok(b)));
                        }
                        Err(e) => reports.push(CheckReport::errored(
                            "inversion_round_trip",
                            p(Some(beta), "random_smooth", w.label()),
                            &e,
                        )),
                    }
                }
            }
        }
    }
    reports
}

/// True when no report has status [`CheckStatus::Fail`].
pub fn suite_passed(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.status != CheckStatus::Fail)
}
