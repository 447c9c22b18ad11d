//! Axially symmetric Landau-de Gennes droplet states: obstacle-
//! constrained energy minimization on the quarter disk, and the
//! structural analysis of the resulting ring and split-core
//! disclinations.

pub mod analysis;
pub mod energy;
pub mod grid;
pub mod io;
pub mod profile;
pub mod solver;
pub mod tensor;

pub use energy::{energy, energy_gradient, limit_energy, localized_energy, EnergyBreakdown};
pub use grid::{gradient, integrate, restrict_to_t, Grid, NodeTag, OrderField};
pub use profile::{c_mu, shoot_profile, RadialProfile};
pub use solver::{
    continuation, initialize, project_constraints, solve, ConstraintMode, Family, SeedKind,
    SolveLog, SolverConfig,
};
pub use tensor::{
    amplitude_constant, assemble_q, boundary_value, bulk_offset, classify, director, eigen_data,
    eigenvalues_formula, lift, p_invariant, radial_potential, s_invariant, tangent_map_eval,
    EigenData, Obstacle, Params, Phase, TangentMapKind, TangentValue, UVec,
};
