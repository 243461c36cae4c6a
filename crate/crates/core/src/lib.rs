//! Randomized row/column-action solvers for the minimum-norm least-squares
//! solution `A†b` of an arbitrary linear system.
//!
//! ```
//! use rebk_core::{gen_type1, make_rhs, run, Algorithm, SolverConfig, Stepsize};
//!
//! let a = gen_type1(60, 40, 20, 2.0, 1).unwrap();
//! let problem = make_rhs(a, 2, true, 1.0).unwrap();
//! let config = SolverConfig::new(Algorithm::Rebk)
//!     .with_tau(&problem.a, 5)
//!     .unwrap()
//!     .stepsize(Stepsize::BetaMultiple(1.0))
//!     .seed(3);
//! let trace = run(&problem, &config).unwrap();
//! assert!(trace.converged);
//! ```

pub mod bench;
pub mod error;
pub mod factorizations;
pub mod io;
pub mod matrix;
pub mod partition;
pub mod problem_gen;
pub mod rates;
pub mod solvers;

pub use error::{Error, Result};
pub use factorizations::{numerical_rank, pinv_apply, residual_split, svd, Svd};
pub use matrix::{Axis, BlockView, IndexSet, Matrix};
pub use partition::{child_seed, BlockSampler, CellSampler, Partition, Rng};
pub use problem_gen::{gen_type1, gen_type2, make_rhs, make_rhs_with_svd, ProblemInstance, ProblemMeta};
pub use rates::{
    compute_beta_max, compute_delta, compute_eta_rho, optimal_alpha, theorem_bounds, BetaMax, Bounds,
    EtaRho, InitialErrors, RateConstants,
};
pub use solvers::{
    run, Algorithm, RunTrace, RunWarning, Solver, SolverConfig, SolverState, Stepsize, StopMode,
    StoppingRule,
};
