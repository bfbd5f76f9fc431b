//! Hand-built piecewise-uniform families whose exact maximum-likelihood
//! fits are computed by finite enumeration rather than smooth optimization.
//!
//! Both constructions pair a near-uniform truth with a spiked competitor
//! whose width shrinks so fast that a single escaped sample flips the fit:
//! [`SpikeMixtureFamily`] on the fixed support `[0,1] ∪ [2,3]`, and
//! [`TailChainFamily`] on the nonnegative half-line.

mod spike;
mod tail;

pub use spike::{SpikeMixtureFamily, SpikeMixtureParams};
pub use tail::{
    interval_max, IntervalMaxTable, PhiKind, TailChainFamily, TailChainParams, WidthSchedule,
    DEFAULT_GROWTH_C, NEG_LOG_F_CAP,
};
