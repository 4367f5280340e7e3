//! Independent reference computations used by the integration tests.
//! Nothing here calls into the library's solvers.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Single-particle free energies `2π²p²` of one spatial mode.
pub fn mode_energy(p: i32) -> f64 {
    2.0 * PI * PI * (p * p) as f64
}

/// Sorted many-body free spectrum: all ways of putting `n` fermions into the
/// `2(2K+1)` spin orbitals, each contributing `2π²p²`.
pub fn free_spectrum(cutoff: usize, n: usize) -> Vec<f64> {
    let k = cutoff as i32;
    let energies: Vec<f64> = (-k..=k).flat_map(|p| [mode_energy(p), mode_energy(p)]).collect();
    let mut out = Vec::new();
    fn rec(e: &[f64], start: usize, left: usize, acc: f64, out: &mut Vec<f64>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for i in start..e.len() {
            if e.len() - i < left {
                break;
            }
            rec(e, i + 1, left - 1, acc + e[i], out);
        }
    }
    rec(&energies, 0, n, 0.0, &mut out);
    out.sort_by(f64::total_cmp);
    out
}

/// `log Σ e^{-βλ}` evaluated with a max shift.
pub fn log_sum_exp(levels: &[f64], beta: f64) -> f64 {
    let top = levels.iter().map(|l| -beta * l).fold(f64::NEG_INFINITY, f64::max);
    top + levels.iter().map(|l| (-beta * l - top).exp()).sum::<f64>().ln()
}

/// `Z` for one particle with `K = 1`, `v = 0`: `2(1 + 2e^{-2π²β})`.
pub fn single_particle_k1_partition(beta: f64) -> f64 {
    2.0 * (1.0 + 2.0 * (-2.0 * PI * PI * beta).exp())
}

/// `Tr{TΓ}` for one particle with `K = 1`, `v = 0`.
pub fn single_particle_k1_kinetic(beta: f64) -> f64 {
    let e = 2.0 * PI * PI;
    let q = (-beta * e).exp();
    (2.0 * e * 2.0 * q) / (2.0 + 4.0 * q)
}

/// Entropy and internal energy of the same six-level system.
pub fn single_particle_k1_entropy_energy(beta: f64) -> (f64, f64) {
    let levels = [0.0, 0.0, mode_energy(1), mode_energy(1), mode_energy(1), mode_energy(1)];
    let z: f64 = levels.iter().map(|l| (-beta * l).exp()).sum();
    let mut s = 0.0;
    let mut e = 0.0;
    for l in levels {
        let w = (-beta * l).exp() / z;
        e += w * l;
        if w > 0.0 {
            s -= w * w.ln();
        }
    }
    (s, e)
}

/// First-order response `ρ̂_1 = -χ v̂_1` of one particle with `K = 1` from
/// the unperturbed levels: `χ = 4(w_0 - w_1) / 2π²` with `w_p` the Boltzmann
/// weight of a single spin orbital of momentum `p`.
pub fn single_particle_k1_susceptibility(beta: f64) -> f64 {
    let z = single_particle_k1_partition(beta);
    let w0 = 1.0 / z;
    let w1 = (-beta * mode_energy(1)).exp() / z;
    4.0 * (w0 - w1) / mode_energy(1)
}

/// `[2 Σ_{|p|≤K} e^{-2βπ²p²}]^N`, returned as its logarithm.
pub fn log_free_partition_bound(cutoff: usize, n: usize, beta: f64) -> f64 {
    let k = cutoff as i32;
    let single: f64 = (-k..=k).map(|p| 2.0 * (-beta * mode_energy(p)).exp()).sum();
    n as f64 * single.ln()
}

/// Symmetric tridiagonal matrix with diagonal `d` and off-diagonal `e`.
pub struct Tridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.d.len() {
            let off = if i == 0 { 0.0 } else { self.e[i - 1] * self.e[i - 1] };
            q = self.d[i] - x - if i == 0 { 0.0 } else { off / q };
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `j`-th smallest eigenvalue by bisection.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let bound = self
            .d
            .iter()
            .enumerate()
            .map(|(i, di)| {
                let l = if i > 0 { self.e[i - 1].abs() } else { 0.0 };
                let r = if i < self.e.len() { self.e[i].abs() } else { 0.0 };
                di.abs() + l + r
            })
            .fold(0.0, f64::max);
        let (mut lo, mut hi) = (-bound, bound);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an eigenvalue estimate by inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.d.len();
        let shift = lambda + 1e-10 * lambda.abs().max(1.0);
        let mut x = vec![1.0; n];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += 0.01 * (i as f64).sin();
        }
        for _ in 0..4 {
            // Thomas algorithm on (T - shift) y = x
            let mut c = vec![0.0; n];
            let mut r = vec![0.0; n];
            let mut denom = self.d[0] - shift;
            c[0] = if n > 1 { self.e[0] / denom } else { 0.0 };
            r[0] = x[0] / denom;
            for i in 1..n {
                denom = self.d[i] - shift - self.e[i - 1] * c[i - 1];
                if i < n - 1 {
                    c[i] = self.e[i] / denom;
                }
                r[i] = (x[i] - self.e[i - 1] * r[i - 1]) / denom;
            }
            let mut y = vec![0.0; n];
            y[n - 1] = r[n - 1];
            for i in (0..n - 1).rev() {
                y[i] = r[i] - c[i] * y[i + 1];
            }
            let nrm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
            x = y.into_iter().map(|a| a / nrm).collect();
        }
        x
    }
}

/// One single-particle level of `-½ d²/dx² + 2A cos(2πx)` on the periodic
/// grid `x_m = m/M`, with the wavefunction sampled on all `M` points and
/// normalized to `Σ|ψ|² h = 1`.
pub struct GridLevel {
    pub energy: f64,
    pub psi: Vec<f64>,
}

/// Lowest levels of the cosine potential by second-order finite differences.
/// The even-parity problem lives on `m = 0..=M/2` (end couplings symmetrized
/// with a `√2` rescaling), the odd one on `m = 1..M/2-1` with Dirichlet ends.
pub fn cosine_levels(amplitude: f64, m_points: usize, levels_per_parity: usize) -> Vec<GridLevel> {
    assert!(m_points.is_multiple_of(2));
    let h = 1.0 / m_points as f64;
    let c = 0.5 / (h * h);
    let half = m_points / 2;
    let v = |m: usize| 2.0 * amplitude * (2.0 * PI * m as f64 * h).cos();

    let even = Tridiagonal {
        d: (0..=half).map(|m| 2.0 * c + v(m)).collect(),
        e: (0..half)
            .map(|i| if i == 0 || i == half - 1 { -(2f64.sqrt()) * c } else { -c })
            .collect(),
    };
    let odd = Tridiagonal {
        d: (1..half).map(|m| 2.0 * c + v(m)).collect(),
        e: vec![-c; half - 2],
    };

    let mut out = Vec::new();
    for j in 0..levels_per_parity {
        let lambda = even.eigenvalue(j);
        let mut phi = even.eigenvector(lambda);
        phi[0] *= 2f64.sqrt();
        phi[half] *= 2f64.sqrt();
        let mut psi = vec![0.0; m_points];
        for m in 0..=half {
            psi[m] = phi[m];
            psi[(m_points - m) % m_points] = phi[m];
        }
        out.push(GridLevel { energy: lambda, psi: normalized(psi, h) });

        let lambda = odd.eigenvalue(j);
        let phi = odd.eigenvector(lambda);
        let mut psi = vec![0.0; m_points];
        for (i, val) in phi.iter().enumerate() {
            let m = i + 1;
            psi[m] = *val;
            psi[m_points - m] = -*val;
        }
        out.push(GridLevel { energy: lambda, psi: normalized(psi, h) });
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    out
}

fn normalized(psi: Vec<f64>, h: f64) -> Vec<f64> {
    let nrm = (psi.iter().map(|a| a * a).sum::<f64>() * h).sqrt();
    psi.into_iter().map(|a| a / nrm).collect()
}

/// Thermal density of one particle in `2A cos(2πx)` on the grid `m/M`
/// (spin degeneracy cancels between numerator and denominator).
pub fn cosine_thermal_density(amplitude: f64, beta: f64, m_points: usize, levels_per_parity: usize) -> Vec<f64> {
    let levels = cosine_levels(amplitude, m_points, levels_per_parity);
    let e0 = levels[0].energy;
    let weights: Vec<f64> = levels.iter().map(|l| (-beta * (l.energy - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    (0..m_points)
        .map(|m| {
            levels
                .iter()
                .zip(&weights)
                .map(|(l, w)| w * l.psi[m] * l.psi[m])
                .sum::<f64>()
                / z
        })
        .collect()
}

/// Richardson extrapolation of second-order results on grids `M` and `2M`,
/// sampled at the points of the coarse grid.
pub fn richardson(coarse: &[f64], fine: &[f64]) -> Vec<f64> {
    coarse
        .iter()
        .enumerate()
        .map(|(m, c)| (4.0 * fine[2 * m] - c) / 3.0)
        .collect()
}
