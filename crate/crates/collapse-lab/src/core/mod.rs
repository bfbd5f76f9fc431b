//! Shared domain model: samples with generation provenance, parameter
//! points, run configuration, trajectories, the family contract, and the
//! deterministic random-stream used by every simulation.

mod config;
mod dataset;
mod family;
mod param;
mod stream;
mod trajectory;

pub use config::{MetricSet, MleMode, RunConfig};
pub use dataset::{CoreError, Dataset, Sample};
pub use family::{Family, FamilyError, MleError};
pub use param::{CoordTransform, FamilyId, ParamPoint};
pub use stream::RandomStream;
pub use trajectory::{MleFailure, Trajectory, TrajectoryRecord};
