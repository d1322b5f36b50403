//! Defect-count modeling from categorical questionnaire answers and
//! size/effort metrics.
//!
//! Categorical answers are turned into numeric scores by alternating least
//! squares optimal scaling ([`scaling`]), the scored columns feed a
//! p-value-gated stepwise regression ([`stepwise`]), and the two steps are
//! repeated until the selected set stops changing ([`pipeline`]).
//! [`eval`] cross-validates the result against dummy-coded least squares.

pub mod data;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod pipeline;
pub mod scaling;
pub mod stats;
pub mod stepwise;

pub use data::{Cell, Dataset, Observation, Quantification, QuantificationMap, Role, ScalingLevel, Variable};
pub use error::{Error, ErrorKind, Result};
pub use pipeline::{compare_baseline, run_pipeline, ModelConfig, PipelineResult, SerializedModel};
