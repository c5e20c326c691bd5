//! Lie algebras of planar and spatial motions, their subalgebras, and
//! which relative-motion sets arise from pairs of equivariant projections.

pub mod algebra;
pub mod group;
pub mod motion;
pub mod normal;

use thiserror::Error;

use crate::geomcore::GeomError;

pub use algebra::{is_subalgebra, search_subalgebras, AlgebraName, LieAlgebra, Subalgebra, SubalgebraSearch};
pub use group::{rotation, Group};
pub use motion::{closure_translation_span, motion_set_subgroup_check, realizable_as_pair, MotionSet, Realizability, SubgroupVerdict, TranslationSpan};
pub use normal::{pair_normal_form, PairNormalForm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LieError {
    #[error("expected a vector of length {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("basis vectors are linearly dependent")]
    DegenerateBasis,
    #[error("projections are not equivariant (residual {residual:e})")]
    NotEquivariant { residual: f64 },
    #[error("induced action is not transitive")]
    NotTransitive,
    #[error("bad map: {0}")]
    BadMap(String),
    #[error("bad motion set: {0}")]
    BadMotionSet(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}
