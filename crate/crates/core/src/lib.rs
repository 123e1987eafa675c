//! Proximal point solver for vector optimization on Hadamard manifolds.
//!
//! The solver minimizes a vector objective `F: M -> R^m` with respect to a
//! polyhedral ordering cone by iterating
//!
//! `p^{k+1} = argmin { f_k(F(p)) + (lambda_k/2) dist(p, p^k)^2 : F(p) <= F(p^k) }`
//!
//! where `f_k` is the max-over-generators scalarization along a direction
//! interior to the cone. Two geometries ship out of the box: flat Euclidean
//! space and the hyperboloid model of hyperbolic space, both with
//! closed-form exponential/logarithm maps.
//!
//! Module map:
//! - [`manifold`]: points, tangents, dist/exp/log, curvature comparison.
//! - [`cone`]: generator sets, cone order, scalarization (two routes).
//! - [`problem`]: objectives, built-in fixtures, convexity audit.
//! - [`subsolver`]: one proximal subproblem (subgradient + Newton polish).
//! - [`proxpoint`]: the outer loop, traces, descent/monotonicity audits.
//! - [`sharpness`]: weak-sharp-minimum diagnostics.
//! - [`checks`]: seeded property suites behind `check`.
//! - [`config`]: the JSON run-configuration format.
//! - [`grid`], [`par`]: brute-force lattice oracles and the parallel/serial
//!   kernels they run on (rayon behind the default `parallel` feature).

pub mod checks;
pub mod cone;
pub mod config;
pub mod error;
pub mod grid;
pub mod manifold;
pub mod par;
pub mod problem;
pub mod proxpoint;
pub mod sharpness;
pub mod subsolver;
pub mod trace_io;

pub use error::{Error, Result};
pub use manifold::{ManifoldId, ManifoldPoint, TangentVector};
pub use problem::{ProblemInstance, VectorObjective};
pub use proxpoint::{OuterConfig, RunStatus, SolveTrace};
pub use subsolver::{InnerConfig, SubproblemResult};
