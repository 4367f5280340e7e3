//! Finite-temperature density functional theory on the one-dimensional torus.
//!
//! Particles of spin one half live on `[0, 1)` with periodic boundary
//! conditions and `H_v = T + W + V`. The many-body problem is solved exactly
//! in a truncated plane-wave Fock basis, Gibbs states are built from the full
//! spectrum, and target densities are inverted by maximizing the concave dual
//! `v ↦ Ω^β(v) - ⟨v, ρ⟩`.

pub mod basis;
pub mod cli;
pub mod density;
pub mod error;
pub mod gibbs;
pub mod inversion;
pub mod io;
pub mod operators;
pub mod verify;

pub use basis::{build_basis, Determinant, FockBasis, Spin, SpinOrbital, TorusGrid};
pub use density::DensityProfile;
pub use error::{Error, Result};
pub use gibbs::{forward, GibbsEnsemble, SpectralDecomposition};
pub use inversion::{invert_density, universal_functional, InversionOptions, InversionResult};
pub use verify::{run_suite, CheckReport, CheckStatus, SuiteConfig};
pub use operators::{
    assemble_hamiltonian, dual_norm, potential_from_parts, HamiltonianMatrix, InteractionKind, InteractionSpec,
    PotentialField,
};
