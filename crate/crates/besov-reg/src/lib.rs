//! Tikhonov regularization in Besov scales.
//!
//! The crate works in the wavelet sequence model throughout: a function is
//! a finite dyadic coefficient field, Besov norms are weighted `l^p` sums
//! over levels, and a smoothing operator is a per-level multiplier.
//!
//! Three layers build on each other:
//!
//! * [`space`] and [`field`]: the Besov-scale calculus. Spaces `(s, p, d)`,
//!   sequence norms, duality, differential dimensions, the embedding
//!   criterion, and coefficient fields.
//! * [`planner`]: given the smoothness data of an inverse problem, derives
//!   admissible and optimal penalty spaces `B_R` together with the Sobolev
//!   exponent `sigma` of the `O(sqrt(delta))` convergence rate, in exact
//!   rational arithmetic.
//! * [`sequence`], [`solver`], and [`rate`]: synthetic problems, exact and
//!   iterative minimization of `||F u - v||^2 + alpha ||u||_{B_R}^{p_R}`,
//!   and delta-grid experiments that measure the rate empirically.

pub mod devore;
pub mod field;
pub mod fixtures;
pub mod io;
pub mod planner;
pub mod rate;
pub mod scalar;
pub mod sequence;
pub mod solver;
pub mod space;
mod stats;

pub use field::{CoefField, DyadicIndex};
pub use planner::{
    compare_sources, feasible_weakened_sources, plan_direct, plan_optimal, plan_weakened,
    sigma_hat, GridSpec, PlanProvenance, ProblemSignature, RegularizationPlan, SourceComparison,
};
pub use rate::{run_rate_experiment, ExperimentConfig, PlanChoice, RateReport};
pub use scalar::Rational;
pub use sequence::{add_noise, make_source, DiagonalScaleOperator, NoisyData};
pub use solver::{
    bregman_distance, check_source_condition, penalty_gradient, scalar_prox, solve_diagonal,
    solve_general, LinearOperator, PenaltySpec, SolveReport,
};
pub use space::{besov_norm, embeds, level_weight, sobolev_norm, BesovSpace};
