//! Online multi-object tracking by appearance + geometry association.
//!
//! Modules, bottom up:
//!
//! - [`geometry`]: boxes, IoU, and the perimeter-normalized box distance.
//! - [`features`]: unit embeddings, cosine distance, feature accumulation.
//! - [`assignment`]: gated Hungarian and greedy solvers.
//! - [`association`]: cost construction and the two-stage tracked/lost match.
//! - [`tracker`]: the per-frame track lifecycle.
//! - [`motio`]: MOTChallenge text files and the `SSEB` embedding format.
//! - [`metrics`]: CLEAR-MOT, IDF1, MT/ML.
//! - [`sim`]: seeded synthetic scenarios with occlusion.

pub mod assignment;
pub mod association;
pub mod error;
pub mod features;
pub mod geometry;
pub mod metrics;
pub mod motio;
pub mod sim;
pub mod tracker;

pub use assignment::{CostMatrix, Solver};
pub use association::{AssocConfig, MatchOutcome, TrackId};
pub use error::{Error, Result};
pub use features::FeatureVec;
pub use geometry::BoundingBox;
pub use metrics::MetricsReport;
pub use tracker::{Detection, TrackOutput, TrackRecord, Tracker, TrackerConfig};
