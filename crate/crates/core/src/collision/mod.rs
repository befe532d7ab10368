//! Isotropic Boltzmann collision operator on a radial grid.

mod geometry;
mod grid;
mod norms;
mod operator;

pub use geometry::{post_collision_speeds, post_collision_squares, povzner_sample_check, povzner_terms, sample_geometry, CollisionGeometry};
pub use grid::{GridKind, Interp, Interpolant, RadialDistribution, RadialGrid, SquareTable};
pub use norms::{entropy, l1k_norm, llogl, w11k_seminorm};
pub use operator::{
    eval_q, loss_frequency, max_loss_frequency, CollisionOperator, Kernel, LossFrequency, QEvaluation, QuadCounts,
    SolverConfig, MAX_SOFTNESS,
};
