use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use super::config::{RunConfig, RunPlan};
use super::harness::RunOutcome;
use crate::error::{Error, Result};

/// Column order of the per-round CSV.
pub const CSV_COLUMNS: [&str; 9] = [
    "run_id",
    "algo",
    "seed",
    "round",
    "mixture_loss",
    "cum_regret_best_fixed",
    "cum_regret_dynamic",
    "n_labeled",
    "cap_active",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub run_id: String,
    pub algo: &'static str,
    pub seed: u64,
    pub round: usize,
    pub mixture_loss: f64,
    pub cum_regret_best_fixed: f64,
    pub cum_regret_dynamic: f64,
    pub n_labeled: usize,
    pub cap_active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSummary {
    pub algo: &'static str,
    pub seed: u64,
    pub final_regret_best_fixed: f64,
    pub final_regret_dynamic: f64,
    pub cap_active_rounds: usize,
    /// Sum of squared sup-norm prediction errors on the regret.
    pub regret_variation: f64,
    /// Four times the summed squared sup-norm loss prediction errors.
    pub loss_variation_bound: f64,
    /// Summed sup-norm change of the booked regret vectors.
    pub drift: f64,
    pub invariant_violations: u64,
    pub loss_stream_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub algo: &'static str,
    pub mean_regret_best_fixed: f64,
    pub mean_regret_dynamic: f64,
    pub cap_active_rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub option: Option<String>,
    pub environment: &'static str,
    /// `expected_means` or `realized_losses`: what regret is measured on,
    /// and so what the dynamic comparator tracks.
    pub comparator: &'static str,
    pub n: usize,
    pub rounds: usize,
    pub sleeping: bool,
    pub seeds: Vec<u64>,
    pub wall_time_secs: f64,
    pub algorithms: Vec<AlgorithmSummary>,
    pub runs: Vec<SeedSummary>,
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub rows: Vec<CsvRow>,
    pub runs: Vec<RunOutcome>,
    pub summary: RunSummary,
}

impl RunReport {
    pub(crate) fn assemble(config: &RunConfig, plan: &RunPlan, runs: Vec<RunOutcome>, elapsed: Duration) -> Self {
        let mut rows = Vec::with_capacity(runs.iter().map(|r| r.ledger.len()).sum());
        for run in &runs {
            for (k, rec) in run.ledger.records().iter().enumerate() {
                rows.push(CsvRow {
                    run_id: config.run_id.clone(),
                    algo: run.algo,
                    seed: run.seed,
                    round: rec.round,
                    mixture_loss: rec.mixture_loss,
                    cum_regret_best_fixed: run.best_fixed[k],
                    cum_regret_dynamic: run.dynamic[k],
                    n_labeled: rec.n_labeled,
                    cap_active: rec.cap_active,
                });
            }
        }
        let seeds: Vec<SeedSummary> = runs
            .iter()
            .map(|run| {
                let v = run.ledger.variation();
                SeedSummary {
                    algo: run.algo,
                    seed: run.seed,
                    final_regret_best_fixed: run.final_best_fixed(),
                    final_regret_dynamic: run.final_dynamic(),
                    cap_active_rounds: run.ledger.cap_active_rounds(),
                    regret_variation: v.regret_variation,
                    loss_variation_bound: v.loss_variation_bound,
                    drift: v.drift,
                    invariant_violations: run.audit.violations(),
                    loss_stream_hash: format!("{:016x}", run.loss_hash),
                }
            })
            .collect();
        let algorithms = config
            .learners
            .iter()
            .map(|spec| {
                let mine: Vec<&SeedSummary> = seeds.iter().filter(|s| s.algo == spec.name()).collect();
                let mean = |f: fn(&SeedSummary) -> f64| {
                    mine.iter().map(|s| f(s)).sum::<f64>() / mine.len().max(1) as f64
                };
                AlgorithmSummary {
                    algo: spec.name(),
                    mean_regret_best_fixed: mean(|s| s.final_regret_best_fixed),
                    mean_regret_dynamic: mean(|s| s.final_regret_dynamic),
                    cap_active_rounds: mine.iter().map(|s| s.cap_active_rounds).sum(),
                }
            })
            .collect();
        let comparator = match config.build_env().ok().and_then(|e| e.expected_losses(1)) {
            Some(_) => "expected_means",
            None => "realized_losses",
        };
        let summary = RunSummary {
            run_id: config.run_id.clone(),
            option: config.option.clone(),
            environment: config.env.kind(),
            comparator,
            n: plan.n,
            rounds: plan.rounds(),
            sleeping: config.sleeping,
            seeds: config.seeds.clone(),
            wall_time_secs: elapsed.as_secs_f64(),
            algorithms,
            runs: seeds,
        };
        Self {
            rows,
            runs,
            summary,
        }
    }

    pub fn write_csv(&self, out: impl std::io::Write) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for row in &self.rows {
            writer.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
        }
        if self.rows.is_empty() {
            writer.write_record(CSV_COLUMNS).map_err(|e| Error::Io(e.to_string()))?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn summary_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.summary).map_err(|e| Error::Io(e.to_string()))
    }

    /// Runs of one algorithm, in seed order.
    pub fn runs_of<'a>(&'a self, algo: &'a str) -> impl Iterator<Item = &'a RunOutcome> + 'a {
        self.runs.iter().filter(move |r| r.algo == algo)
    }
}
