//! The fixed-`K` base algorithm and the reduction that turns it into a
//! sleeping-experts learner over `n` points with `K = n * T` experts.
//!
//! This is deliberately the slow, literal construction: it exists to check
//! [`AdaProdLearner`](crate::learner::AdaProdLearner) against.

use crate::error::{Error, Result};
use crate::learner::{InvariantAudit, LogSumExp};
use crate::model::{AwakeMask, ProbabilityVector};

/// Rate constants of the base algorithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseProdConfig {
    pub initial_rate: f64,
    pub rate_numerator: f64,
}

impl BaseProdConfig {
    /// `initial_rate = sqrt(log K / 2)`, `rate_numerator = sqrt(log K)`.
    pub fn for_experts(k: usize) -> Self {
        let log_k = (k.max(1) as f64).ln();
        Self {
            initial_rate: (log_k / 2.0).sqrt(),
            rate_numerator: log_k.sqrt(),
        }
    }
}

/// State of the base algorithm over `K` always-awake experts.
#[derive(Debug, Clone)]
pub struct BaseProdState {
    config: BaseProdConfig,
    round: usize,
    log_weight: Vec<f64>,
    eta: Vec<f64>,
    c_accum: Vec<f64>,
    /// Prediction for the round about to be played.
    rhat: Vec<f64>,
    audit: InvariantAudit,
}

#[inline]
fn rate_cap(rhat: f64) -> f64 {
    2.0 / (3.0 * (1.0 + rhat))
}

#[inline]
fn variance_term(numerator: f64, c: f64) -> f64 {
    if c > 0.0 {
        numerator / c.sqrt()
    } else {
        f64::INFINITY
    }
}

impl BaseProdState {
    pub fn new(k: usize) -> Result<Self> {
        Self::with_config(k, BaseProdConfig::for_experts(k))
    }

    pub fn with_config(k: usize, config: BaseProdConfig) -> Result<Self> {
        if k == 0 {
            return Err(Error::Dimension {
                expected: 1,
                got: 0,
            });
        }
        Ok(Self {
            config,
            round: 1,
            log_weight: vec![0.0; k],
            eta: vec![config.initial_rate; k],
            c_accum: vec![0.0; k],
            rhat: vec![0.0; k],
            audit: InvariantAudit::default(),
        })
    }

    pub fn k(&self) -> usize {
        self.eta.len()
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn config(&self) -> &BaseProdConfig {
        &self.config
    }

    pub fn audit(&self) -> &InvariantAudit {
        &self.audit
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weight
    }

    pub fn rates(&self) -> &[f64] {
        &self.eta
    }

    pub fn c_accum(&self) -> &[f64] {
        &self.c_accum
    }

    pub fn prediction(&self) -> &[f64] {
        &self.rhat
    }

    /// `ln(eta_k w_k exp(eta_k rhat_k))`, the unnormalized log mass of expert `k`.
    pub fn log_mass(&self, k: usize) -> f64 {
        let eta = self.eta[k];
        eta.ln() + self.log_weight[k] + eta * self.rhat[k]
    }

    /// The distribution played this round.
    pub fn distribution(&self) -> Result<ProbabilityVector> {
        let log_mass: Vec<f64> = (0..self.k()).map(|k| self.log_mass(k)).collect();
        ProbabilityVector::from_log_weights(&log_mass)
    }

    /// `W = sum_k w_k`.
    pub fn potential_sum(&self) -> f64 {
        let mut acc = LogSumExp::default();
        for lw in &self.log_weight {
            acc.add(*lw);
        }
        acc.value().exp()
    }

    /// Adds an expert with `w = 1`, `C = 0`, the given rate and current prediction.
    pub(crate) fn push_expert(&mut self, eta: f64, rhat: f64) {
        self.log_weight.push(0.0);
        self.eta.push(eta);
        self.c_accum.push(0.0);
        self.rhat.push(rhat);
    }

    /// Plays the current distribution against `loss`, updates rates and
    /// weights, stores `rhat_next` for the following round, and returns the
    /// distribution that was played.
    pub fn base_step(&mut self, loss: &[f64], rhat_next: &[f64]) -> Result<ProbabilityVector> {
        let k = self.k();
        Error::check_len(k, loss.len())?;
        Error::check_len(k, rhat_next.len())?;
        if let Some(v) = loss.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::contract(format!("loss {v} outside [0, 1]")));
        }
        if let Some(v) = rhat_next.iter().find(|v| !(v.abs() <= 1.0 + 1e-12)) {
            return Err(Error::contract(format!("prediction {v} outside [-1, 1]")));
        }
        let played = self.distribution()?;
        let mixture = played.dot(loss);
        let regret: Vec<f64> = loss.iter().map(|l| mixture - l).collect();
        self.audit.check_zero_sum(played.values(), &regret);

        for j in 0..k {
            let (r, rh, eta_prev) = (regret[j], self.rhat[j], self.eta[j]);
            let gap = r - rh;
            self.c_accum[j] += gap * gap;
            if self.round >= 2 {
                self.audit.check_prod(eta_prev * gap);
            }
            let eta = eta_prev
                .min(rate_cap(rhat_next[j]))
                .min(variance_term(self.config.rate_numerator, self.c_accum[j]));
            self.audit.check_rate(eta_prev, eta, rhat_next[j]);
            self.audit.check_log_ratio(eta_prev, eta);
            let base = self.log_weight[j] + eta_prev * r - eta_prev * eta_prev * gap * gap;
            self.log_weight[j] = if eta_prev > 0.0 {
                (eta / eta_prev) * base
            } else {
                base
            };
            self.eta[j] = eta;
        }
        self.rhat.copy_from_slice(rhat_next);
        self.round += 1;
        Ok(played)
    }
}

/// `K(exp(1/4) + log(4T)/2)`.
pub fn potential_bound(k: usize, horizon: usize) -> f64 {
    k as f64 * (0.25f64.exp() + (4.0 * horizon as f64).ln() / 2.0)
}

/// Index of expert `(s, i)` in the materialized table; `s` is 1-based.
fn expert_index(n: usize, s: usize, i: usize) -> usize {
    (s - 1) * n + i
}

/// The `n`-point distribution `p_i = I_i sum_{s <= t} pbar_(s,i) / Z` read off
/// a base state whose experts are laid out as `(s - 1) * n + i`.
pub fn reduction_distribution(
    n: usize,
    base: &BaseProdState,
    awake: &AwakeMask,
) -> Result<ProbabilityVector> {
    Error::check_len(n, awake.len())?;
    if !base.k().is_multiple_of(n) {
        return Err(Error::contract(format!(
            "{} base experts do not tile a pool of {n}",
            base.k()
        )));
    }
    if awake.awake_count() == 0 {
        return Err(Error::contract("every point is labeled: no distribution"));
    }
    let born = (base.round()).min(base.k() / n);
    let mut log_mass = vec![f64::NEG_INFINITY; n];
    for i in awake.awake_indices() {
        let mut acc = LogSumExp::default();
        for s in 1..=born {
            acc.add(base.log_mass(expert_index(n, s, i)));
        }
        log_mass[i] = acc.value();
    }
    ProbabilityVector::from_log_weights(&log_mass)
}

/// Feeds the modified losses and predictions of the reduction to `base`.
///
/// Awake experts `(s <= t, I_i = 1)` see the point's loss; every other
/// expert sees the mixture loss, so its regret is exactly zero.
fn reduction_step(
    n: usize,
    base: &mut BaseProdState,
    awake: &AwakeMask,
    loss: &[f64],
    rhat_next: &[f64],
) -> Result<ProbabilityVector> {
    Error::check_len(n, loss.len())?;
    Error::check_len(n, rhat_next.len())?;
    let t = base.round();
    let p = reduction_distribution(n, base, awake)?;
    let mixture = p.dot(loss);
    let k = base.k();
    let mut modified = vec![mixture; k];
    let mut rbar_next = vec![0.0; k];
    for j in 0..k {
        let (s, i) = (j / n + 1, j % n);
        if !awake.is_awake(i) {
            continue;
        }
        if s <= t {
            modified[j] = loss[i];
        }
        if s <= t + 1 {
            rbar_next[j] = rhat_next[i];
        }
    }
    base.base_step(&modified, &rbar_next)?;
    Ok(p)
}

/// The reduction with every `(s, i)` expert allocated up front.
#[derive(Debug, Clone)]
pub struct MaterializedReduction {
    n: usize,
    horizon: usize,
    base: BaseProdState,
    awake: AwakeMask,
}

impl MaterializedReduction {
    pub fn new(n: usize, horizon: usize, config: BaseProdConfig) -> Result<Self> {
        if n == 0 || horizon == 0 {
            return Err(Error::validation("reduction needs n >= 1 and T >= 1"));
        }
        Ok(Self {
            n,
            horizon,
            base: BaseProdState::with_config(n * horizon, config)?,
            awake: AwakeMask::all_awake(n),
        })
    }

    pub fn base(&self) -> &BaseProdState {
        &self.base
    }

    pub fn awake(&self) -> &AwakeMask {
        &self.awake
    }

    /// The `n`-point distribution for the current round. The current
    /// prediction is whatever was passed as `rhat_next` last round (zero in
    /// round 1).
    pub fn distribution(&self) -> Result<ProbabilityVector> {
        reduction_distribution(self.n, &self.base, &self.awake)
    }

    /// Plays one round and returns the `n`-point distribution that was played.
    pub fn step(&mut self, loss: &[f64], rhat_next: &[f64]) -> Result<ProbabilityVector> {
        if self.base.round() > self.horizon {
            return Err(Error::contract(format!(
                "materialized reduction sized for {} rounds",
                self.horizon
            )));
        }
        reduction_step(self.n, &mut self.base, &self.awake, loss, rhat_next)
    }

    pub fn mark_labeled(&mut self, indices: &[usize]) -> Result<()> {
        for &i in indices {
            self.awake.put_to_sleep(i)?;
        }
        Ok(())
    }
}

/// The reduction allocating expert `(s, i)` only once round `s` arrives.
///
/// Unborn experts all share one state (weight 1, no accumulated error), so a
/// single template rate stands in for them until they are created.
#[derive(Debug, Clone)]
pub struct LazyReduction {
    n: usize,
    base: BaseProdState,
    awake: AwakeMask,
    template_rate: f64,
}

impl LazyReduction {
    pub fn new(n: usize, config: BaseProdConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::validation("reduction needs n >= 1"));
        }
        Ok(Self {
            n,
            base: BaseProdState::with_config(n, config)?,
            awake: AwakeMask::all_awake(n),
            template_rate: config.initial_rate,
        })
    }

    pub fn base(&self) -> &BaseProdState {
        &self.base
    }

    pub fn distribution(&self) -> Result<ProbabilityVector> {
        reduction_distribution(self.n, &self.base, &self.awake)
    }

    pub fn step(&mut self, loss: &[f64], rhat_next: &[f64]) -> Result<ProbabilityVector> {
        let p = reduction_step(self.n, &mut self.base, &self.awake, loss, rhat_next)?;
        // The experts for the coming round saw its real prediction in the
        // update just made; the rest of the unborn only saw zeros.
        let numerator = self.base.config().rate_numerator;
        let unborn = self.template_rate.min(variance_term(numerator, 0.0));
        for (i, rhat) in rhat_next.iter().enumerate() {
            let r = if self.awake.is_awake(i) { *rhat } else { 0.0 };
            self.base.push_expert(unborn.min(rate_cap(r)), r);
        }
        self.template_rate = unborn.min(rate_cap(0.0));
        Ok(p)
    }

    pub fn mark_labeled(&mut self, indices: &[usize]) -> Result<()> {
        for &i in indices {
            self.awake.put_to_sleep(i)?;
        }
        Ok(())
    }
}
