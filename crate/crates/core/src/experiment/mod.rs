//! The seeded active-learning harness: config, simulation loop and reports.
//!
//! Each round the environment emits losses, the learner's distribution is
//! turned into a batch, regret is booked against the environment's expected
//! losses (or the realized ones when it has no model), the learner observes
//! the realized losses, and the batch is labeled.

mod config;
mod harness;
mod report;

use std::time::Instant;

use rayon::prelude::*;

pub use config::{BatchSize, LearnerSpec, RunConfig, RunPlan};
pub use harness::{seeded_stream, simulate, RoundTrace, RunOutcome};
pub use report::{AlgorithmSummary, CsvRow, RunReport, RunSummary, SeedSummary, CSV_COLUMNS};

use crate::error::{Error, Result};

/// Execution knobs that do not change results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Keep per-round inclusion probabilities and losses in the outcomes.
    pub keep_trace: bool,
}

/// Runs a single-learner config.
pub fn run_active_learning(config: &RunConfig, options: RunOptions) -> Result<RunReport> {
    if config.learners.len() != 1 {
        return Err(Error::Validation(format!(
            "a single run takes exactly one learner, found {}",
            config.learners.len()
        )));
    }
    run_expert_comparison(config, options)
}

/// Runs every configured learner on every seed. Learners sharing a seed see
/// the same loss stream.
pub fn run_expert_comparison(config: &RunConfig, options: RunOptions) -> Result<RunReport> {
    let plan = config.plan()?;
    let started = Instant::now();
    log::info!(
        "run {}: {} learner(s) x {} seed(s), n = {}, {} rounds",
        config.run_id,
        config.learners.len(),
        config.seeds.len(),
        plan.n,
        plan.rounds()
    );
    let tasks: Vec<_> = config
        .learners
        .iter()
        .flat_map(|spec| config.seeds.iter().map(move |seed| (spec, *seed)))
        .collect();
    let work = || -> Vec<Result<RunOutcome>> {
        tasks
            .par_iter()
            .map(|(spec, seed)| {
                log::debug!("{} seed {seed}", spec.name());
                simulate(config, &plan, spec, *seed, options.keep_trace)
            })
            .collect()
    };
    let results = match options.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Validation(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(RunReport::assemble(config, &plan, runs, started.elapsed()))
}
