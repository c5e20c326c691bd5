//! Welding, reduction chains, configuration spaces and rigid inclusions.

pub mod limit;
pub mod rigid;
pub mod weld;

use thiserror::Error;

use crate::acm::{AcmError, ActorId};
use crate::geomcore::{GeomError, LocalDimHistogram, SubmersionVerdict};

pub use limit::{
    compare_configuration_spaces, decomposes_external, decomposes_into_constraints, f_limit, raw_equalizer,
    weld_order_invariance_check, ConfigurationSpace, DecompositionReport, IntoConstraintsReport, InvarianceReport,
    LimitOptions, ObstructionReport, Provenance, Strategy, StrategyAttempt, UnionDecl,
};
pub use rigid::{compose_rigid, include_subsystem, iso_witness, reduction_witness, Renaming, RigidInclusion, SimpleStep};
pub use weld::{admissible_orders, reduce_acyclic, weld, ChainTranscript, ReductionChain, TranscriptStep, WeldStep};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReduceError {
    #[error(transparent)]
    Acm(#[from] AcmError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("weld breaks the interaction with {witness}: {}", weld::verdict_summary(verdict))]
    WeldObstruction { witness: ActorId, verdict: Box<SubmersionVerdict> },
    #[error("skeleton has a cycle")]
    NotAcyclic,
    #[error("replay diverges from the transcript at step {step}")]
    ReplayMismatch { step: usize },
    #[error("diagram has no actors")]
    EmptyDiagram,
    #[error("does not decompose: {0}")]
    NotDecomposing(String),
    #[error("raw equalizer has non-constant local dimension {:?}", .0.estimates)]
    NonConstantLocalDim(LocalDimHistogram),
    #[error("target of the first inclusion is not the source of the second")]
    SourceTargetMismatch,
    #[error("invalid step {step}: {reason}")]
    InvalidStep { step: usize, reason: String },
    #[error("steps do not end at the declared target")]
    WrongTarget,
    #[error("target diagram does not decompose external constraints")]
    TargetNotDecomposing,
    #[error("intermediate diagram {step} fails the axioms: {reason}")]
    IntermediateInvalid { step: usize, reason: String },
}
