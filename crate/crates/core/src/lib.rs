//! Comparison of ordinal qualitative data through survival curves.
//!
//! Ordinal scores (or disagreements between paired scores) are treated as
//! event times. Groups are summarised by Kaplan-Meier step curves and
//! compared with weighted rank tests: log-rank, Gehan-Wilcoxon and
//! Tarone-Ware. Crossing curves are flagged since they rule out a
//! proportional-hazards reading.
//!
//! ```
//! use ordsurv::{rank::weighted_rank_test, GroupedSample, WeightScheme};
//!
//! let sample = GroupedSample::from_event_times(vec![
//!     ("A", vec![1.0, 3.0]),
//!     ("B", vec![2.0, 4.0]),
//! ])?;
//! let res = weighted_rank_test(&sample, WeightScheme::TaroneWare)?;
//! assert!((res.statistic - 0.58909).abs() < 1e-5);
//! # Ok::<(), ordsurv::Error>(())
//! ```

pub mod agreement;
pub mod cli;
pub mod dataio;
pub mod error;
pub mod rank;
pub mod surv;

pub use agreement::{PairRecord, PairedSample, Scale, TiePolicy};
pub use error::{Error, Result};
pub use rank::{RankTestResult, WeightScheme};
pub use surv::{detect_crossings, km_estimate, GroupedSample, Observation, StepCurve};
