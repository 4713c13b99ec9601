//! Temporal record linkage.
//!
//! Groups birth records that belong to the same mother. The pipeline builds a
//! weighted similarity graph over record pairs (min-hash LSH blocking plus
//! weighted attribute comparison), then clusters it with either temporal star
//! clustering or greedy temporal clustering. Both clusterers refuse to put two
//! records in one cluster when the gap between their dates is biologically
//! implausible for a single mother.
//!
//! ```text
//! records ──► blocking ──► similarity ──► graph ──► star | greedy ──► eval
//!                                           ▲            ▲
//!                                           └─ temporal ─┘
//! ```

pub mod blocking;
pub mod clustering;
pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod greedy;
pub mod pipeline;
pub mod records;
pub mod similarity;
pub mod star;
pub mod synthetic;
pub mod temporal;

pub use blocking::{LshParams, MinHashIndex};
pub use clustering::Clustering;
pub use error::{Error, Result};
pub use eval::{EvaluationReport, LinkCounts};
pub use graph::SimilarityGraph;
pub use records::{GroundTruth, Record, RecordId, RecordSet, Schema};
pub use similarity::{ComparisonProfile, ProfileKind};
pub use temporal::{TemporalConstraintModel, TemporalGate};
