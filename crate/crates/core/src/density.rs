//! Densities on the torus, stored as Fourier coefficients `ρ̂_k`
//! (`ρ(x) = Σ_k ρ̂_k e^{i2πkx}`, `ρ̂_{-k} = conj(ρ̂_k)`) plus grid samples.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::basis::TorusGrid;
use crate::error::{Error, Result};
use crate::operators::PotentialField;

/// Relative tolerance on `ρ̂_0 = N` for coefficients handed in by callers.
const NORMALIZATION_TOL: f64 = 1e-10;
/// Relative tolerance on `∫ρ = N` for sampled densities before renormalizing.
const SAMPLED_NORMALIZATION_TOL: f64 = 1e-6;
/// Fourier content allowed above the basis cutoff in sampled densities.
const BEYOND_BASIS_TOL: f64 = 1e-9;
const SEMINORM_REL_TOL: f64 = 1e-8;
const SEMINORM_MAX_POINTS: usize = 1 << 17;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityProfile {
    particle_count: usize,
    /// `ρ̂_k` for `k = 0..=cutoff`; entry 0 is exactly `N`.
    fourier: Vec<Complex64>,
    grid: TorusGrid,
    grid_values: Vec<f64>,
    gradient_seminorm: f64,
    sqrt_seminorm_squared: Option<f64>,
}

impl DensityProfile {
    /// Builds a density from `ρ̂_k`, `k = 0..coeffs.len()`. The zeroth
    /// coefficient must equal `N` (up to rounding) and is then pinned to `N`.
    pub fn new(particle_count: usize, mut fourier: Vec<Complex64>, grid: TorusGrid) -> Result<Self> {
        let n = particle_count as f64;
        if fourier.is_empty() {
            fourier.push(Complex64::new(n, 0.0));
        }
        for (k, c) in fourier.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFiniteCoefficient {
                    mode: k,
                    value: if c.re.is_finite() { c.im } else { c.re },
                });
            }
        }
        let c0 = fourier[0];
        if (c0.re - n).abs() > NORMALIZATION_TOL * n.max(1.0) || c0.im.abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization {
                found: c0.re,
                expected: n,
            });
        }
        fourier[0] = Complex64::new(n, 0.0);
        Ok(Self::assemble(particle_count, fourier, grid))
    }

    pub fn uniform(particle_count: usize, grid: TorusGrid) -> Self {
        Self::assemble(
            particle_count,
            vec![Complex64::new(particle_count as f64, 0.0)],
            grid,
        )
    }

    /// Projects samples `ρ(m/M)` onto Fourier modes with the trapezoidal rule,
    /// rejects content above `max_mode`, and renormalizes `ρ̂_0` to `N`.
    pub fn from_grid_samples(particle_count: usize, samples: &[f64], max_mode: usize) -> Result<Self> {
        let m = samples.len();
        if m <= 2 * max_mode {
            return Err(Error::InvalidGrid(format!(
                "{m} samples cannot resolve Fourier modes up to {max_mode}; need more than {}",
                2 * max_mode
            )));
        }
        if let Some(bad) = samples.iter().find(|s| !s.is_finite()) {
            return Err(Error::NonFiniteCoefficient { mode: 0, value: *bad });
        }
        let grid = TorusGrid::new(m)?;
        let project = |k: usize| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &s) in samples.iter().enumerate() {
                let phase = -2.0 * PI * ((k * j) % m) as f64 / m as f64;
                acc += Complex64::from_polar(s, phase);
            }
            acc / m as f64
        };
        let n = particle_count as f64;
        let mean = project(0).re;
        if (mean - n).abs() > SAMPLED_NORMALIZATION_TOL * n {
            return Err(Error::Normalization {
                found: mean,
                expected: n,
            });
        }
        for k in (max_mode + 1)..=(m / 2) {
            let magnitude = project(k).norm();
            if magnitude > BEYOND_BASIS_TOL * n {
                return Err(Error::BeyondBasis { mode: k, magnitude });
            }
        }
        let mut fourier: Vec<Complex64> = (0..=max_mode).map(project).collect();
        fourier[0] = Complex64::new(n, 0.0);
        trim_trailing_zeros(&mut fourier);
        Ok(Self::assemble(particle_count, fourier, grid))
    }

    fn assemble(particle_count: usize, fourier: Vec<Complex64>, grid: TorusGrid) -> Self {
        let grid_values = grid.points().map(|x| evaluate_series(&fourier, x)).collect();
        let gradient_seminorm = fourier
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| 2.0 * (2.0 * PI * k as f64).powi(2) * c.norm_sqr())
            .sum::<f64>()
            .sqrt();
        let sqrt_seminorm_squared = sqrt_seminorm_squared(&fourier, grid.point_count());
        DensityProfile {
            particle_count,
            fourier,
            grid,
            grid_values,
            gradient_seminorm,
            sqrt_seminorm_squared,
        }
    }

    pub fn particle_count(&self) -> usize {
        self.particle_count
    }

    /// Highest stored Fourier mode.
    pub fn cutoff(&self) -> usize {
        self.fourier.len() - 1
    }

    pub fn fourier(&self) -> &[Complex64] {
        &self.fourier
    }

    pub fn coefficient(&self, k: i32) -> Complex64 {
        let c = self
            .fourier
            .get(k.unsigned_abs() as usize)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0));
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn grid_values(&self) -> &[f64] {
        &self.grid_values
    }

    pub fn with_grid(&self, grid: TorusGrid) -> Self {
        Self::assemble(self.particle_count, self.fourier.clone(), grid)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        evaluate_series(&self.fourier, x)
    }

    /// `∫ρ`, which is `ρ̂_0` by construction.
    pub fn integral(&self) -> f64 {
        self.fourier[0].re
    }

    pub fn min_value(&self) -> f64 {
        self.grid_values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `‖∇ρ‖_{L²}`.
    pub fn gradient_seminorm(&self) -> f64 {
        self.gradient_seminorm
    }

    /// `‖∇√ρ‖²_{L²}`, or `None` if the density takes negative values.
    pub fn sqrt_seminorm_squared(&self) -> Option<f64> {
        self.sqrt_seminorm_squared
    }

    pub fn sqrt_seminorm(&self) -> Option<f64> {
        self.sqrt_seminorm_squared.map(f64::sqrt)
    }

    /// Member of the strictly positive set: `min ρ > 0` on the grid.
    pub fn is_strictly_positive(&self) -> bool {
        self.min_value() > 0.0
    }

    /// Member of the admissible set: `ρ ≥ 0` with finite `‖∇√ρ‖`.
    pub fn is_admissible(&self) -> bool {
        self.min_value() >= 0.0 && self.sqrt_seminorm_squared.is_some_and(f64::is_finite)
    }

    /// `‖ρ - other‖_{L²}` via Parseval.
    pub fn l2_distance(&self, other: &DensityProfile) -> f64 {
        let n = self.fourier.len().max(other.fourier.len());
        (0..n as i32)
            .map(|k| {
                let d = (self.coefficient(k) - other.coefficient(k)).norm_sqr();
                if k == 0 {
                    d
                } else {
                    2.0 * d
                }
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `⟨v, ρ⟩ = ∫ v ρ = Σ_k v̂_k conj(ρ̂_k)`.
    pub fn pairing(&self, v: &PotentialField) -> f64 {
        let mut total = v.constant() * self.particle_count as f64;
        for k in 1..=v.cutoff() as i32 {
            total += 2.0 * (v.coefficient(k) * self.coefficient(k).conj()).re;
        }
        total
    }

    /// `a·self + b·other`; the particle count must be preserved.
    pub fn combine(&self, a: f64, other: &DensityProfile, b: f64) -> Result<Self> {
        let n = self.fourier.len().max(other.fourier.len());
        let fourier: Vec<Complex64> = (0..n as i32)
            .map(|k| self.coefficient(k) * a + other.coefficient(k) * b)
            .collect();
        Self::new(self.particle_count, fourier, self.grid)
    }

    /// `ρ + h δ` for a zero-mean perturbation given by `δ̂_k`, `k = 1..`.
    pub fn perturbed(&self, delta: &[Complex64], h: f64) -> Result<Self> {
        let n = self.fourier.len().max(delta.len() + 1);
        let mut fourier: Vec<Complex64> = (0..n as i32).map(|k| self.coefficient(k)).collect();
        for (i, d) in delta.iter().enumerate() {
            fourier[i + 1] += d * h;
        }
        Self::new(self.particle_count, fourier, self.grid)
    }
}

fn trim_trailing_zeros(fourier: &mut Vec<Complex64>) {
    while fourier.len() > 1 && fourier.last().is_some_and(|c| c.norm() == 0.0) {
        fourier.pop();
    }
}

fn evaluate_series(fourier: &[Complex64], x: f64) -> f64 {
    let mut value = fourier[0].re;
    for (k, c) in fourier.iter().enumerate().skip(1) {
        let phase = 2.0 * PI * k as f64 * x;
        value += 2.0 * (c.re * phase.cos() - c.im * phase.sin());
    }
    value
}

fn evaluate_derivative(fourier: &[Complex64], x: f64) -> f64 {
    let mut value = 0.0;
    for (k, c) in fourier.iter().enumerate().skip(1) {
        let w = 2.0 * PI * k as f64;
        let phase = w * x;
        value += 2.0 * w * (-c.re * phase.sin() - c.im * phase.cos());
    }
    value
}

/// `∫ |∇√ρ|² = ∫ (ρ')² / (4ρ)` by the trapezoidal rule, doubling the grid
/// until the value is stable.
fn sqrt_seminorm_squared(fourier: &[Complex64], base_points: usize) -> Option<f64> {
    if fourier.len() == 1 {
        return (fourier[0].re >= 0.0).then_some(0.0);
    }
    let mut m = base_points.max(8 * fourier.len()).next_power_of_two();
    let mut previous: Option<f64> = None;
    loop {
        let mut sum = 0.0;
        for j in 0..m {
            let x = j as f64 / m as f64;
            let rho = evaluate_series(fourier, x);
            if rho < 0.0 {
                return None;
            }
            let d = evaluate_derivative(fourier, x);
            if rho > 0.0 {
                sum += d * d / (4.0 * rho);
            } else if d != 0.0 {
                return Some(f64::INFINITY);
            }
        }
        let value = sum / m as f64;
        if let Some(p) = previous {
            if (value - p).abs() <= SEMINORM_REL_TOL * value.abs().max(f64::MIN_POSITIVE)
                || m >= SEMINORM_MAX_POINTS
            {
                return Some(value);
            }
        }
        previous = Some(value);
        m *= 2;
    }
}
