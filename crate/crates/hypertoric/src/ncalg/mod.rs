//! Finitely presented associative algebras over the integers on a finite
//! vertex set, with formal inverses and degree-bounded rewriting.

mod ops;
mod poly;
mod presentation;
mod rewrite;

use thiserror::Error;

pub use ops::{
    amalgamate, center_up_to, iso_check, morita_collapse, morita_collapse_all, quotient_central,
    tensor_product, TensorProduct,
    tensor, tensor_many, AlgebraMap, Diagram, DiagramMap, DiagramSquare, IsoReport, Transport,
};
pub use poly::{Mono, Poly};
pub use presentation::{inverse_name, Generator, Presentation};
pub use rewrite::{
    complete, complete_with, CompletionOptions, GradedBasis, RewriteSystem, Rule,
    DEFAULT_RULE_CAP,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NcError {
    #[error("integer coefficient overflow")]
    Overflow,
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("duplicate name {0:?}")]
    DuplicateName(String),
    #[error("generator {0:?} must have positive degree")]
    BadDegree(String),
    #[error("path not composable: {0}")]
    NotComposable(String),
    #[error("relation mixes endpoints: {0}")]
    InhomogeneousRelation(String),
    #[error("completion exceeded {cap} rules ({rules})")]
    CompletionBlowup { rules: usize, cap: usize },
    #[error("leading coefficient is not a unit: {0}")]
    NonUnitLeading(String),
    #[error("relation kills an idempotent: {0}")]
    IdempotentRelation(String),
    #[error("degree {needed} beyond completion degree {available}")]
    DegreeOverflow { needed: u32, available: u32 },
    #[error("ambiguity does not resolve: {0}")]
    Unresolved(String),
    #[error("element is not central: {0}")]
    NotCentral(String),
    #[error("ill-typed algebra map: {0}")]
    IllTypedMap(String),
    #[error("no spanning forest: {0}")]
    NoSpanningForest(String),
}
