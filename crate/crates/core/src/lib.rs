//! Decision-stump feature selection for sparse additive regression.
//!
//! Each feature is scored by the impurity of a depth-one regression tree
//! fitted on that feature alone; the lowest-impurity features are selected.
//! When the number of active features is unknown, a threshold is estimated
//! from row-permuted copies of the data. The crate also carries the
//! comparison baselines (Lasso, correlation screening), a generator for
//! sparse additive models and the harness that measures how many samples
//! each method needs to recover the active set.

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod harness;
pub mod permutation;
pub mod rng;
pub mod stump;
pub mod synth;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use exec::Execution;
pub use rng::Stream;
pub use stump::{score_all, select_top, ImpurityScores, SplitStrategy};
