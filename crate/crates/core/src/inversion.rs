//! Density-to-potential inversion.
//!
//! For a strictly positive target `ρ` the representing potential maximizes
//! the concave dual `G(v) = Ω^β(v) - ⟨v, ρ⟩`, whose gradient is the pairing
//! of `ρ_v - ρ`. The maximum value is the universal functional `F^β(ρ)`.
//!
//! Potentials are parameterized by `(Re v̂_1, Im v̂_1, ..., Re v̂_{K_v}, Im v̂_{K_v})`
//! with `v̂_0 = 0`.

use std::collections::VecDeque;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::FockBasis;
use crate::density::DensityProfile;
use crate::error::{Error, Result};
use crate::gibbs::forward;
use crate::operators::{InteractionSpec, PotentialField};

/// Content of the target above `2K` tolerated as rounding, relative to `N`.
const BEYOND_BASIS_TOL: f64 = 1e-12;
const ARMIJO_C1: f64 = 1e-4;
/// Relative size of the rounding noise in `G`.
const VALUE_NOISE: f64 = 1e-13;
const MIN_STEP: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq)]
pub struct DualObjectiveState {
    pub potential_coords: Vec<f64>,
    /// `G(v)`.
    pub value: f64,
    /// `∂G/∂coords`, pointing uphill.
    pub gradient: Vec<f64>,
    /// `Ω^β(v)`.
    pub omega: f64,
    /// Gibbs density of `v`.
    pub density: DensityProfile,
}

impl DualObjectiveState {
    pub fn gradient_norm(&self) -> f64 {
        norm(&self.gradient)
    }
}

fn validate_target(target: &DensityProfile, basis: &FockBasis) -> Result<()> {
    let n = basis.particle_count();
    if target.particle_count() != n {
        return Err(Error::Normalization {
            found: target.particle_count() as f64,
            expected: n as f64,
        });
    }
    let k_max = 2 * basis.cutoff();
    for (k, c) in target.fourier().iter().enumerate().skip(k_max + 1) {
        if c.norm() > BEYOND_BASIS_TOL * n as f64 {
            return Err(Error::BeyondBasis {
                mode: k,
                magnitude: c.norm(),
            });
        }
    }
    let minimum = target.min_value();
    if minimum.is_nan() || minimum <= 0.0 {
        return Err(Error::NotStrictlyPositive { minimum });
    }
    Ok(())
}

/// `G(v)` and its gradient. Only the modes `1..=v.cutoff()` are coordinates.
pub fn dual_objective(
    v: &PotentialField,
    target: &DensityProfile,
    beta: f64,
    basis: &FockBasis,
    w: &InteractionSpec,
) -> Result<DualObjectiveState> {
    validate_target(target, basis)?;
    evaluate(v, target, beta, basis, w)
}

fn evaluate(
    v: &PotentialField,
    target: &DensityProfile,
    beta: f64,
    basis: &FockBasis,
    w: &InteractionSpec,
) -> Result<DualObjectiveState> {
    let v = v.gauge_fixed();
    let ens = forward(basis, &v, w, beta, target.grid())?;
    let value = ens.omega - target.pairing(&v);
    let gradient = (1..=v.cutoff() as i32)
        .flat_map(|k| {
            let d = ens.density.coefficient(k) - target.coefficient(k);
            [2.0 * d.re, 2.0 * d.im]
        })
        .collect();
    Ok(DualObjectiveState {
        potential_coords: v.coordinates(),
        value,
        gradient,
        omega: ens.omega,
        density: ens.density,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionOptions {
    pub tol_rho: f64,
    pub tol_grad: f64,
    pub max_iter: usize,
    /// Number of stored L-BFGS correction pairs.
    pub memory: usize,
    /// `K_v`; defaults to `2K`.
    pub potential_cutoff: Option<usize>,
    /// Starting potential; defaults to `v = 0`.
    pub initial: Option<PotentialField>,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions {
            tol_rho: 1e-8,
            tol_grad: 1e-9,
            max_iter: 500,
            memory: 12,
            potential_cutoff: None,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub value: f64,
    pub density_residual: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionResult {
    pub potential: PotentialField,
    /// Converged `G`, i.e. `F^β(ρ)` over the truncated potential space.
    pub f_value: f64,
    /// `‖ρ_v - ρ_target‖_{L²}` over all modes.
    pub density_residual: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<IterationRecord>,
    /// Gibbs density of the returned potential.
    pub density: DensityProfile,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// L-BFGS two-loop recursion applied to `q`, returning `H q`.
fn apply_inverse_hessian(q: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, gamma: f64) -> Vec<f64> {
    let mut q = q.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    for qi in q.iter_mut() {
        *qi *= gamma;
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q
}

/// Maximizes `G` by L-BFGS on `-G` with Armijo backtracking.
///
/// Once the predicted change of `G` drops below its rounding noise, a step
/// is accepted when `G` does not fall by more than that noise and the
/// gradient shrinks.
pub fn invert_density(
    target: &DensityProfile,
    beta: f64,
    basis: &FockBasis,
    w: &InteractionSpec,
    opts: &InversionOptions,
) -> Result<InversionResult> {
    validate_target(target, basis)?;
    let k_v = opts.potential_cutoff.unwrap_or(2 * basis.cutoff());
    if k_v > 2 * basis.cutoff() {
        return Err(Error::DimensionMismatch(format!(
            "potential cutoff {k_v} exceeds 2K = {}",
            2 * basis.cutoff()
        )));
    }
    if !(opts.tol_rho > 0.0 && opts.tol_grad > 0.0) {
        return Err(Error::Config("inversion tolerances must be positive".into()));
    }
    let start = opts
        .initial
        .as_ref()
        .map(|v| v.gauge_fixed().with_cutoff(k_v))
        .unwrap_or_else(|| PotentialField::zero().with_cutoff(k_v));

    let mut state = evaluate(&start, target, beta, basis, w)?;
    let mut residual = state.density.l2_distance(target);
    let mut history = vec![IterationRecord {
        iteration: 0,
        value: state.value,
        density_residual: residual,
        gradient_norm: state.gradient_norm(),
    }];
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut gamma = 1.0 / beta.max(1e-3);
    let mut iterations = 0;
    let done = |res: f64, g: f64| res <= opts.tol_rho && g <= opts.tol_grad;

    while iterations < opts.max_iter && !done(residual, state.gradient_norm()) {
        // Minimizing f = -G: ∇f = -g, descent direction d = H g.
        let g = &state.gradient;
        let mut d = apply_inverse_hessian(g, &pairs, gamma);
        if dot(&d, g) <= 0.0 {
            pairs.clear();
            d = g.iter().map(|x| x * gamma).collect();
        }
        let slope = dot(&d, g);
        let noise = VALUE_NOISE * (1.0 + state.value.abs());
        let g_norm = state.gradient_norm();

        let mut step = 1.0;
        let mut accepted = None;
        while step >= MIN_STEP {
            let coords: Vec<f64> = state
                .potential_coords
                .iter()
                .zip(&d)
                .map(|(x, di)| x + step * di)
                .collect();
            let trial = evaluate(&PotentialField::from_coordinates(&coords)?, target, beta, basis, w)?;
            let gain = trial.value - state.value;
            let armijo = gain >= ARMIJO_C1 * step * slope;
            let in_noise = step * slope < noise && gain >= -noise && trial.gradient_norm() < g_norm;
            if armijo || in_noise {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = accepted else {
            if pairs.is_empty() {
                break;
            }
            // stale curvature pairs: restart from steepest ascent
            pairs.clear();
            continue;
        };

        let s: Vec<f64> = next
            .potential_coords
            .iter()
            .zip(&state.potential_coords)
            .map(|(a, b)| a - b)
            .collect();
        // y = ∇f_next - ∇f = g - g_next
        let y: Vec<f64> = state.gradient.iter().zip(&next.gradient).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-30 {
            gamma = sy / dot(&y, &y);
            pairs.push_back((s, y, 1.0 / sy));
            if pairs.len() > opts.memory.max(1) {
                pairs.pop_front();
            }
        }
        state = next;
        iterations += 1;
        residual = state.density.l2_distance(target);
        history.push(IterationRecord {
            iteration: iterations,
            value: state.value,
            density_residual: residual,
            gradient_norm: state.gradient_norm(),
        });
    }

    let gradient_norm = state.gradient_norm();
    Ok(InversionResult {
        potential: PotentialField::from_coordinates(&state.potential_coords)?,
        f_value: state.value,
        density_residual: residual,
        gradient_norm,
        iterations,
        converged: done(residual, gradient_norm),
        history,
        density: state.density,
    })
}

/// `F^β(ρ)` evaluated as the maximum of the dual.
pub fn universal_functional(
    target: &DensityProfile,
    beta: f64,
    basis: &FockBasis,
    w: &InteractionSpec,
) -> Result<f64> {
    universal_functional_with(target, beta, basis, w, &InversionOptions::default())
}

pub fn universal_functional_with(
    target: &DensityProfile,
    beta: f64,
    basis: &FockBasis,
    w: &InteractionSpec,
    opts: &InversionOptions,
) -> Result<f64> {
    let result = invert_density(target, beta, basis, w, opts)?;
    if !result.converged {
        return Err(Error::Degenerate(format!(
            "inversion did not converge in {} iterations (residual {:e}, gradient {:e})",
            result.iterations, result.density_residual, result.gradient_norm
        )));
    }
    Ok(result.f_value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientSample {
    /// `F(ρ') + ⟨v, ρ'⟩ - F(ρ) - ⟨v, ρ⟩`.
    pub difference: f64,
    pub distance: f64,
}

/// Samples the subgradient inequality `F(ρ) + ⟨v,ρ⟩ ≤ F(ρ') + ⟨v,ρ'⟩` with
/// `v` the inversion output for `ρ`. Each `ρ'` is the Gibbs density of a
/// random potential of dual size up to `spread`, and `F(ρ')` is obtained
/// by a separate inversion. Returns the most negative difference together
/// with all samples.
#[allow(clippy::too_many_arguments)]
pub fn subgradient_check(
    target: &DensityProfile,
    v: &PotentialField,
    beta: f64,
    basis: &FockBasis,
    w: &InteractionSpec,
    samples: usize,
    spread: f64,
    seed: u64,
    opts: &InversionOptions,
) -> Result<(f64, Vec<SubgradientSample>)> {
    let f_rho = universal_functional_with(target, beta, basis, w, opts)?;
    let base = f_rho + target.pairing(v);
    let k_v = opts.potential_cutoff.unwrap_or(2 * basis.cutoff());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let coeffs: Vec<Complex64> = (0..k_v)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * spread)
            .collect();
        let u = PotentialField::from_coefficients(coeffs)?;
        let other = forward(basis, &u, w, beta, target.grid())?.density;
        let f_other = universal_functional_with(&other, beta, basis, w, opts)?;
        let difference = f_other + other.pairing(v) - base;
        worst = worst.min(difference);
        out.push(SubgradientSample {
            difference,
            distance: other.l2_distance(target),
        });
    }
    Ok((worst, out))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateauxEstimate {
    /// `[F(ρ + hδ) - F(ρ - hδ)] / 2h`.
    pub finite_difference: f64,
    /// `⟨-v, δ⟩`.
    pub predicted: f64,
    /// `|finite_difference - predicted| / max(|predicted|, 1)`.
    pub error: f64,
}

/// Central difference of `F` along the zero-mean direction `δ̂_k`
/// (`k = 1..`) compared with `⟨-v, δ⟩`.
#[allow(clippy::too_many_arguments)]
pub fn gateaux_check(
    target: &DensityProfile,
    v: &PotentialField,
    direction: &[Complex64],
    h: f64,
    beta: f64,
    basis: &FockBasis,
    w: &InteractionSpec,
    opts: &InversionOptions,
) -> Result<GateauxEstimate> {
    let predicted = -2.0
        * direction
            .iter()
            .enumerate()
            .map(|(i, d)| (v.coefficient(i as i32 + 1) * d.conj()).re)
            .sum::<f64>();
    if direction.iter().all(|d| *d == Complex64::new(0.0, 0.0)) {
        return Ok(GateauxEstimate {
            finite_difference: 0.0,
            predicted,
            error: predicted.abs(),
        });
    }
    let plus = target.perturbed(direction, h)?;
    let minus = target.perturbed(direction, -h)?;
    for p in [&plus, &minus] {
        if !p.is_strictly_positive() {
            return Err(Error::StepTooLarge {
                minimum: p.min_value(),
            });
        }
    }
    let f_plus = universal_functional_with(&plus, beta, basis, w, opts)?;
    let f_minus = universal_functional_with(&minus, beta, basis, w, opts)?;
    let finite_difference = (f_plus - f_minus) / (2.0 * h);
    Ok(GateauxEstimate {
        finite_difference,
        predicted,
        error: (finite_difference - predicted).abs() / predicted.abs().max(1.0),
    })
}
