//! Learns Pareto sets of interpretable rule-set overrides for a fixed,
//! possibly biased black-box decision-maker, trading predictive error
//! against equal-opportunity bias under a budget on true-label acquisition.

pub mod bits;
pub mod blackbox;
pub mod dataio;
pub mod error;
pub mod hybrid;
pub mod metrics;
pub mod nsga;
pub mod rulemine;

pub use error::{Error, Result};
