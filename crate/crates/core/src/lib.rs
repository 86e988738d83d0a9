//! Elimination-based aggregation of expert advice under query budgets.
//!
//! A learner observes i.i.d. rounds `(Y, F_1, .., F_K)` but may only see the
//! advice of some experts per round. Experts that are manifestly outperformed
//! by another expert on jointly observed rounds are eliminated; at interrupt
//! the learner returns the average of two surviving experts that disagree as
//! much as possible. Under a Lipschitz, strongly convex loss this yields excess
//! risk of order `1/T` as soon as two advices can be seen per round.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, configuration and
//! the experiment runner live in the companion `budgex-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod algorithms;
pub mod analysis;
pub mod environments;
mod error;
pub mod event;
pub mod instance;
pub mod loss;
mod math;
pub mod prediction;
pub mod rng;
pub mod round;
pub mod stats;

pub use error::{Error, Result};
pub use instance::{ExpertOracle, Instance, Moments, SampledOracle};
pub use loss::{derived_constants, LossKind, LossSpec};
pub use prediction::Prediction;
pub use round::{Observation, Round};
pub use stats::{ConfidenceParams, ConfidenceSchedule, PairStats};
