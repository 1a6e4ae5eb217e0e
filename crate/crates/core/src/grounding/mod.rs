//! Grounding referring expressions to scene objects.

pub mod dsl;
pub mod oracle;
pub mod resolve;

use thiserror::Error;

use crate::neighbor_graph::GraphError;

pub use dsl::{parse_query, Band, Constraint, DslError, Query, StackPos};
pub use oracle::brute_oracle;
pub use resolve::{resolve, Resolution, TraceStep};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroundingError {
    #[error("anchor {anchor} matches nothing")]
    Unresolvable { anchor: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}
