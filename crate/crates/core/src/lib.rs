//! Low-regret active learning with sleeping experts.
//!
//! The crate is organized around the [`AdaProdLearner`], an AdaProd+
//! sleeping-experts learner with optimistic predictions, together with the
//! pieces needed to use it for batch acquisition and to evaluate it:
//!
//! - [`model`] and [`ledger`]: losses, distributions, awake masks and regret
//!   accounting.
//! - [`base`]: the fixed-`K` base algorithm and the reduction the learner is
//!   checked against.
//! - [`sampler`]: capping and dependent rounding for exact-size batches.
//! - [`baselines`]: greedy, uniform and competing expert algorithms.
//! - [`losses`] and [`env`]: loss transforms and synthetic loss streams.
//! - [`experiment`]: the seeded, config-driven simulation harness.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base;
pub mod baselines;
pub mod env;
pub mod error;
pub mod experiment;
pub mod learner;
pub mod ledger;
pub mod losses;
pub mod model;
pub mod sampler;

pub use base::{BaseProdConfig, BaseProdState, LazyReduction, MaterializedReduction};
pub use error::{Error, Result};
pub use learner::{
    AdaProdLearner, ExpertRecord, InvariantAudit, LearnerConfig, OptimisticRound, Prediction,
    RateSchedule, RoundReport,
};
pub use ledger::{RegretLedger, RoundRecord, VariationReport};
pub use model::{
    batch_instantaneous_regret, instantaneous_regret, AwakeMask, LossVector, ProbabilityVector,
};
pub use sampler::{cap_probabilities, dep_round, sample_batch, BatchPlan};
pub use baselines::{greedy_select, oamlprod, uniform_select, Potential, StartPrior, TimeVaryingLearner};
pub use env::{DriftSchedule, EnvSpec, Environment};
pub use losses::{
    entropy_loss, normalized_score_loss, uncertainty_loss, InformativenessScores, Normalization,
    SoftmaxMatrix, SoftmaxTransform,
};
pub use experiment::{
    run_active_learning, run_expert_comparison, LearnerSpec, RunConfig, RunOptions, RunReport,
};
