//! Plane-wave spin orbitals on the unit torus and the antisymmetric
//! N-particle determinant space built from them.
//!
//! Orbitals are ordered by momentum ascending, spin up before down, so the
//! orbital index is `2 (p + K) + s`. Determinants are fixed-width bit sets
//! enumerated lexicographically over sorted orbital indices.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest orbital count representable in a [`Determinant`].
pub const MAX_ORBITALS: usize = 64;

/// Largest determinant space the dense solvers accept.
pub const MAX_DIMENSION: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    fn offset(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinOrbital {
    pub momentum: i32,
    pub spin: Spin,
}

impl fmt::Display for SpinOrbital {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = match self.spin {
            Spin::Up => '↑',
            Spin::Down => '↓',
        };
        write!(f, "({},{})", self.momentum, arrow)
    }
}

/// Kinetic energy `2π²p²` of the plane wave `e^{i2πpx}`.
pub fn kinetic_energy_of_mode(p: i32) -> f64 {
    let p = p as f64;
    2.0 * PI * PI * p * p
}

/// Occupation bit set; bit `i` is set iff orbital `i` is occupied.
///
/// The state is `a†_{i1} a†_{i2} ... |0⟩` with `i1 < i2 < ...`, which fixes
/// the fermionic sign conventions of [`Determinant::annihilate`] and
/// [`Determinant::create`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Determinant(u64);

impl Determinant {
    pub fn from_bits(bits: u64) -> Self {
        Determinant(bits)
    }

    pub fn from_orbitals(orbitals: &[usize]) -> Self {
        Determinant(orbitals.iter().fold(0u64, |acc, &i| acc | (1u64 << i)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_occupied(self, orbital: usize) -> bool {
        self.0 & (1u64 << orbital) != 0
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn occupied(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }

    fn parity_below(self, orbital: usize) -> f64 {
        let mask = (1u64 << orbital) - 1;
        if (self.0 & mask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn annihilate(self, orbital: usize) -> Option<(Determinant, f64)> {
        if !self.is_occupied(orbital) {
            return None;
        }
        let sign = self.parity_below(orbital);
        Some((Determinant(self.0 & !(1u64 << orbital)), sign))
    }

    pub fn create(self, orbital: usize) -> Option<(Determinant, f64)> {
        if self.is_occupied(orbital) {
            return None;
        }
        let sign = self.parity_below(orbital);
        Some((Determinant(self.0 | (1u64 << orbital)), sign))
    }

    /// Applies `a†_to a_from`.
    pub fn excite(self, from: usize, to: usize) -> Option<(Determinant, f64)> {
        let (d, s1) = self.annihilate(from)?;
        let (d, s2) = d.create(to)?;
        Some((d, s1 * s2))
    }
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    cutoff: usize,
    particle_count: usize,
    orbitals: Vec<SpinOrbital>,
    determinants: Vec<Determinant>,
    index: HashMap<Determinant, usize>,
}

/// Builds the truncated basis with momenta `|p| ≤ cutoff` and `particles`
/// fermions.
pub fn build_basis(cutoff: usize, particles: usize) -> Result<FockBasis> {
    FockBasis::new(cutoff, particles)
}

impl FockBasis {
    pub fn new(cutoff: usize, particles: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidBasis("cutoff must be at least 1".into()));
        }
        if particles < 1 {
            return Err(Error::InvalidBasis("particle count must be at least 1".into()));
        }
        let n_orb = 2 * (2 * cutoff + 1);
        if n_orb > MAX_ORBITALS {
            return Err(Error::InvalidBasis(format!(
                "cutoff {cutoff} gives {n_orb} spin orbitals, more than {MAX_ORBITALS}"
            )));
        }
        if particles > n_orb {
            return Err(Error::InvalidBasis(format!(
                "{particles} fermions cannot occupy {n_orb} spin orbitals"
            )));
        }
        let dim = binomial(n_orb, particles);
        if dim > MAX_DIMENSION as u128 {
            return Err(Error::InvalidBasis(format!(
                "determinant space of dimension {dim} exceeds the dense limit {MAX_DIMENSION}"
            )));
        }

        let k = cutoff as i32;
        let orbitals: Vec<SpinOrbital> = (-k..=k)
            .flat_map(|p| {
                [Spin::Up, Spin::Down]
                    .into_iter()
                    .map(move |spin| SpinOrbital { momentum: p, spin })
            })
            .collect();

        let mut determinants = Vec::with_capacity(dim as usize);
        let mut current = Vec::with_capacity(particles);
        enumerate_combinations(n_orb, particles, 0, &mut current, &mut determinants);
        let index = determinants
            .iter()
            .enumerate()
            .map(|(i, &d)| (d, i))
            .collect();

        Ok(FockBasis {
            cutoff,
            particle_count: particles,
            orbitals,
            determinants,
            index,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn particle_count(&self) -> usize {
        self.particle_count
    }

    pub fn orbitals(&self) -> &[SpinOrbital] {
        &self.orbitals
    }

    pub fn orbital_count(&self) -> usize {
        self.orbitals.len()
    }

    pub fn determinants(&self) -> &[Determinant] {
        &self.determinants
    }

    pub fn dimension(&self) -> usize {
        self.determinants.len()
    }

    pub fn index_of(&self, det: Determinant) -> Option<usize> {
        self.index.get(&det).copied()
    }

    /// Orbital index of `(p, spin)`, or `None` when `|p|` exceeds the cutoff.
    pub fn orbital_index(&self, momentum: i32, spin: Spin) -> Option<usize> {
        let k = self.cutoff as i32;
        if momentum.abs() > k {
            return None;
        }
        Some(2 * (momentum + k) as usize + spin.offset())
    }

    pub fn orbital(&self, index: usize) -> SpinOrbital {
        self.orbitals[index]
    }

    pub fn determinant_kinetic_energy(&self, det: Determinant) -> f64 {
        det.occupied()
            .map(|i| kinetic_energy_of_mode(self.orbitals[i].momentum))
            .sum()
    }

    pub fn total_momentum(&self, det: Determinant) -> i32 {
        det.occupied().map(|i| self.orbitals[i].momentum).sum()
    }

    /// Twice the total S_z, i.e. `n_up - n_down`.
    pub fn spin_projection(&self, det: Determinant) -> i32 {
        det.occupied()
            .map(|i| match self.orbitals[i].spin {
                Spin::Up => 1,
                Spin::Down => -1,
            })
            .sum()
    }

    /// Kinetic energies of all determinants, in basis order.
    pub fn kinetic_diagonal(&self) -> Vec<f64> {
        self.determinants
            .iter()
            .map(|&d| self.determinant_kinetic_energy(d))
            .collect()
    }
}

/// Sum of `2π²p²` over the occupied orbitals of `det`.
pub fn determinant_kinetic_energy(basis: &FockBasis, det: Determinant) -> f64 {
    basis.determinant_kinetic_energy(det)
}

fn enumerate_combinations(
    n: usize,
    r: usize,
    start: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Determinant>,
) {
    if current.len() == r {
        out.push(Determinant::from_orbitals(current));
        return;
    }
    let remaining = r - current.len();
    for i in start..=(n - remaining) {
        current.push(i);
        enumerate_combinations(n, r, i + 1, current, out);
        current.pop();
    }
}

pub fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Uniform evaluation grid `x_m = m / M` on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    point_count: usize,
}

impl TorusGrid {
    pub fn new(point_count: usize) -> Result<Self> {
        if point_count == 0 {
            return Err(Error::InvalidGrid("grid needs at least one point".into()));
        }
        Ok(TorusGrid { point_count })
    }

    /// Default grid for a basis: `8K` points.
    pub fn for_basis(basis: &FockBasis) -> Self {
        TorusGrid {
            point_count: 8 * basis.cutoff(),
        }
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.point_count as f64
    }

    pub fn point(&self, m: usize) -> f64 {
        m as f64 / self.point_count as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.point_count).map(move |m| self.point(m))
    }
}
