//! Actor index categories and diagrams over them.

pub mod diagram;
pub mod ext;
pub mod shape;
pub mod skeleton;
pub mod subdiagram;

use thiserror::Error;

use crate::geomcore::GeomError;

pub use diagram::{AcmDiagram, Axiom, AxiomCheck, AxiomReport, Block, DiagramBuilder, PairVerdict};
pub use ext::{check_ext_identities, ext_of_set, ext_set, shared_constraints};
pub use shape::{ActorId, ActorIndexCategory, ConstraintId, Index, STAR};
pub use skeleton::Skeleton;
pub use subdiagram::{intersect, union_over, Glue, Inclusion, Intersection, SubDiagram};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AcmError {
    #[error("id {0:?} is reserved")]
    ReservedId(String),
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("unknown actor {0:?}")]
    UnknownActor(String),
    #[error("unknown constraint {0:?}")]
    UnknownConstraint(String),
    #[error("constraint {0:?} belongs to no actor")]
    UnusedConstraint(String),
    #[error("{constraint:?} is not a constraint of {actor:?}")]
    NotAMember { actor: String, constraint: String },
    #[error("bad constraint map {actor} -> {constraint}: {reason}")]
    BadMap { actor: String, constraint: String, reason: String },
    #[error("cannot weld {0:?} with itself")]
    SelfWeld(String),
    #[error("bad inclusion: {0}")]
    BadInclusion(String),
    #[error("incompatible overlap: {0}")]
    IncompatibleOverlap(String),
    #[error("shared-constraint maps of {left} and {right} are not surjective submersions")]
    PairwiseSubmersionFailure { left: String, right: String },
    #[error(transparent)]
    Geom(#[from] GeomError),
}
