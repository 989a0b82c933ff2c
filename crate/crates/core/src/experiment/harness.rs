use std::hash::{DefaultHasher, Hash, Hasher};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{LearnerSpec, RunConfig, RunPlan};
use crate::baselines::{greedy_select, uniform_select, TimeVaryingLearner};
use crate::error::{Error, Result};
use crate::learner::{AdaProdLearner, InvariantAudit};
use crate::ledger::{top_k, RegretLedger};
use crate::model::{batch_instantaneous_regret, AwakeMask, LossVector, ProbabilityVector};
use crate::sampler::sample_batch;

const ENV_STREAM: u64 = 0;
const SAMPLER_STREAM: u64 = 1;
const START_STREAM: u64 = 2;

/// Independent generator for one purpose within a seeded run. Every learner
/// of a run gets the same environment stream, so all of them see identical
/// losses.
pub fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Raw per-round data, kept on request for offline checks.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub batch: usize,
    /// Inclusion probabilities, summing to `batch`.
    pub rho: Vec<f64>,
    /// Losses regret is measured on (expected when known, else realized).
    pub eval_loss: Vec<f64>,
    /// Awake mask at the start of the round.
    pub awake: Vec<bool>,
    pub chosen: Vec<usize>,
}

/// Result of one (learner, seed) run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub algo: &'static str,
    pub seed: u64,
    pub ledger: RegretLedger,
    /// Cumulative regret against the best fixed batch in hindsight.
    pub best_fixed: Vec<f64>,
    /// Cumulative regret against the per-round best batch.
    pub dynamic: Vec<f64>,
    pub audit: InvariantAudit,
    /// Hash of the realized loss stream.
    pub loss_hash: u64,
    pub trace: Option<Vec<RoundTrace>>,
}

impl RunOutcome {
    pub fn final_best_fixed(&self) -> f64 {
        self.best_fixed.last().copied().unwrap_or(0.0)
    }

    pub fn final_dynamic(&self) -> f64 {
        self.dynamic.last().copied().unwrap_or(0.0)
    }
}

enum Policy {
    Prod {
        learner: AdaProdLearner,
        p: ProbabilityVector,
        rhat: Vec<f64>,
    },
    TimeVarying {
        learner: TimeVaryingLearner,
        p: ProbabilityVector,
    },
    Greedy,
    Uniform,
}

impl Policy {
    fn new(spec: &LearnerSpec, n: usize) -> Result<Self> {
        if let Some(learner) = spec.build_prod(n)? {
            let rhat = vec![0.0; n];
            let p = learner.distribution(&rhat)?;
            return Ok(Policy::Prod { learner, p, rhat });
        }
        if let Some(learner) = spec.build_time_varying(n)? {
            let p = learner.distribution()?;
            return Ok(Policy::TimeVarying { learner, p });
        }
        Ok(match spec {
            LearnerSpec::Greedy => Policy::Greedy,
            _ => Policy::Uniform,
        })
    }

    fn mark_labeled(&mut self, indices: &[usize]) -> Result<()> {
        match self {
            Policy::Prod { learner, p, rhat } => {
                learner.mark_labeled(indices)?;
                indices.iter().for_each(|i| rhat[*i] = 0.0);
                *p = learner.distribution(rhat)?;
            }
            Policy::TimeVarying { learner, p } => {
                learner.mark_labeled(indices)?;
                *p = learner.distribution()?;
            }
            Policy::Greedy | Policy::Uniform => {}
        }
        Ok(())
    }

    /// The distribution behind this round's choice, for the prediction-error
    /// bookkeeping. Greedy and uniform use `rho / b`.
    fn current_distribution(&self) -> Option<&ProbabilityVector> {
        match self {
            Policy::Prod { p, .. } | Policy::TimeVarying { p, .. } => Some(p),
            _ => None,
        }
    }

    fn audit(&self) -> InvariantAudit {
        match self {
            Policy::Prod { learner, .. } => *learner.audit(),
            Policy::TimeVarying { learner, .. } => *learner.audit(),
            _ => InvariantAudit::default(),
        }
    }
}

/// `(<q, l> - l_i) I_i`.
fn regret_under(q: &[f64], loss: &[f64], awake: &AwakeMask) -> Vec<f64> {
    let mixture: f64 = q.iter().zip(loss).map(|(a, b)| a * b).sum();
    loss.iter()
        .enumerate()
        .map(|(i, l)| (mixture - l) * awake.indicator(i))
        .collect()
}

fn max_sq_gap(a: &[f64], b: &[f64], awake: &AwakeMask) -> f64 {
    awake
        .awake_indices()
        .map(|i| (a[i] - b[i]).powi(2))
        .fold(0.0, f64::max)
}

/// Runs one learner on one seed.
pub fn simulate(
    config: &RunConfig,
    plan: &RunPlan,
    spec: &LearnerSpec,
    seed: u64,
    keep_trace: bool,
) -> Result<RunOutcome> {
    let n = plan.n;
    let mut env = config.build_env()?;
    let mut env_rng = seeded_stream(seed, ENV_STREAM);
    let mut rng = seeded_stream(seed, SAMPLER_STREAM);
    let mut policy = Policy::new(spec, n)?;
    let mut awake = AwakeMask::all_awake(n);

    if config.n_start > 0 {
        let mut start_rng = seeded_stream(seed, START_STREAM);
        let initial = uniform_select(&awake, config.n_start, &mut start_rng)?;
        for &i in &initial {
            awake.put_to_sleep(i)?;
        }
        policy.mark_labeled(&initial)?;
    }

    let mut ledger = RegretLedger::new(n);
    let mut trace = keep_trace.then(Vec::new);
    let mut hasher = DefaultHasher::new();
    // A constant guess, consistent with the zero prediction of round one.
    let mut lhat = vec![0.5; n];

    for (k, &b) in plan.batches.iter().enumerate() {
        let round = k + 1;
        let loss = env.next_losses(round, &awake, &mut env_rng)?;
        Error::check_len(n, loss.len())?;
        for v in loss.values() {
            v.to_bits().hash(&mut hasher);
        }

        let (chosen, rho, cap_active) = match &policy {
            Policy::Prod { p, .. } | Policy::TimeVarying { p, .. } => {
                let plan = sample_batch(p, b, &mut rng)?;
                (plan.chosen, plan.scaled, plan.cap_was_active)
            }
            Policy::Greedy => {
                let chosen = greedy_select(&loss.gains(), &awake, b)?;
                let mut rho = vec![0.0; n];
                chosen.iter().for_each(|i| rho[*i] = 1.0);
                (chosen, rho, false)
            }
            Policy::Uniform => {
                let chosen = uniform_select(&awake, b, &mut rng)?;
                let share = b as f64 / awake.awake_count() as f64;
                let rho = (0..n).map(|i| share * awake.indicator(i)).collect();
                (chosen, rho, false)
            }
        };

        let expected = env.expected_losses(round);
        let eval = expected.as_deref().unwrap_or(loss.values());
        let eval_loss = LossVector::new(eval.to_vec(), round)?;
        let regret = batch_instantaneous_regret(&rho, &eval_loss, b, &awake)?;
        let mixture = rho.iter().zip(eval).map(|(r, l)| r * l).sum::<f64>() / b as f64;

        // Prediction error of the learner's own distribution against the
        // guess lhat = previous losses.
        let q: Vec<f64> = match policy.current_distribution() {
            Some(p) => p.values().to_vec(),
            None => rho.iter().map(|r| r / b as f64).collect(),
        };
        let r_real = regret_under(&q, loss.values(), &awake);
        let r_hat = regret_under(&q, &lhat, &awake);
        let regret_gap_sq = max_sq_gap(&r_real, &r_hat, &awake);
        let loss_gap_sq = max_sq_gap(loss.values(), &lhat, &awake);

        if let Some(t) = trace.as_mut() {
            t.push(RoundTrace {
                batch: b,
                rho: rho.clone(),
                eval_loss: eval.to_vec(),
                awake: awake.bits().to_vec(),
                chosen: chosen.clone(),
            });
        }

        let labeled_now: &[usize] = if config.sleeping { &chosen } else { &[] };
        let awake_before = awake.clone();
        for &i in labeled_now {
            awake.put_to_sleep(i)?;
        }
        match &mut policy {
            Policy::Prod { learner, p, rhat } => {
                let out = learner.observe_optimistic(&loss, p, rhat, loss.values(), labeled_now)?;
                if let (Some(pred), Some(next)) = (out.prediction, out.next) {
                    *rhat = pred.rhat;
                    *p = next;
                } else if round < plan.rounds() {
                    return Err(Error::contract("pool exhausted before the last round"));
                }
            }
            Policy::TimeVarying { learner, p } => {
                learner.observe(&loss, p)?;
                learner.mark_labeled(labeled_now)?;
                if awake.awake_count() > 0 {
                    *p = learner.distribution()?;
                }
            }
            Policy::Greedy | Policy::Uniform => {}
        }

        let rec = ledger.record(
            round,
            b,
            mixture,
            &regret,
            &awake_before,
            awake.labeled_count(),
            cap_active,
        )?;
        rec.regret_gap_sq = Some(regret_gap_sq);
        rec.loss_gap_sq = Some(loss_gap_sq);
        lhat = loss.values().to_vec();
    }

    let (best_fixed, dynamic) = comparator_series(&ledger)?;
    Ok(RunOutcome {
        algo: spec.name(),
        seed,
        ledger,
        best_fixed,
        dynamic,
        audit: policy.audit(),
        loss_hash: hasher.finish(),
        trace,
    })
}

/// Cumulative regret against the best fixed set in hindsight and against
/// the per-round best set, with `b_t` slots in round `t`.
fn comparator_series(ledger: &RegretLedger) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut totals = vec![0.0; ledger.n()];
    for rec in ledger.records() {
        for (i, r) in &rec.regrets {
            totals[*i] += r;
        }
    }
    let fixed: Vec<Vec<usize>> = ledger
        .records()
        .iter()
        .map(|rec| top_k(&totals, rec.batch, |_| true))
        .collect();
    let dynamic: Vec<Vec<usize>> = ledger
        .records()
        .iter()
        .map(|rec| {
            let dense = {
                let mut v = vec![f64::NEG_INFINITY; ledger.n()];
                rec.regrets.iter().for_each(|(i, r)| v[*i] = *r);
                v
            };
            let awake_now: Vec<bool> = dense.iter().map(|v| v.is_finite()).collect();
            top_k(&dense, rec.batch, |i| awake_now[i])
        })
        .collect();
    Ok((
        ledger.cumulative_series(&fixed)?,
        ledger.cumulative_series(&dynamic)?,
    ))
}
