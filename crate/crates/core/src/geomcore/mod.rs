//! Embedded manifolds, smooth maps between them, and the numerics used to
//! probe them: forward-mode derivatives, a damped Gauss-Newton solver,
//! SVD ranks, sampled submersion checks and fiber products.

pub mod expr;
pub mod linalg;
pub mod localdim;
pub mod map;
pub mod parse;
pub mod product;
pub mod solve;
pub mod space;
pub mod spaces;
pub mod submersion;

use thiserror::Error;

pub use expr::{DomainError, Dual, Expr, Func};
pub use localdim::{local_dimension_estimate, LocalDimHistogram};
pub use map::SmoothMap;
pub use parse::{parse_expr, ParseError};
pub use product::{fiber_product, fiber_product_checked, product, product_map, FiberProduct};
pub use solve::{derive_seed, SolverConfig, SOLVE_TOL};
pub use space::Space;
pub use submersion::{check_surjective_submersion, SubmersionVerdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("solver did not converge (best residual {best_residual:e})")]
    SolveDiverged { best_residual: f64 },
    #[error("map targets do not match")]
    TargetMismatch,
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("declared dimension {expected} but residual rank gives {found}")]
    DimensionMismatch { expected: usize, found: usize, point: Vec<f64> },
    #[error("image leaves the target (residual {residual:e})")]
    IllTyped { point: Vec<f64>, residual: f64 },
    #[error("invalid space: {0}")]
    BadSpace(String),
}
