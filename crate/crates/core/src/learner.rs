//! The AdaProd+ sleeping-experts learner.
//!
//! Every unlabeled point `i` owns a growing family of experts `(s, i)`, one
//! per round `s` in which the point was awake. Expert `(s, i)` tracks the
//! regret of point `i` over the interval starting at round `s`, which is what
//! gives the learner adaptive (and hence dynamic) regret guarantees without
//! materializing `n * T` experts up front.
//!
//! Weights are kept in log space. A point's probability is
//! `sum_s eta_s * w_s * exp(eta_s * rhat_i)` over its live experts,
//! normalized over the awake set.

use crate::error::{Error, Result};
use crate::model::{solve_fixed_point, solve_fixed_point_near, AwakeMask, LossVector, ProbabilityVector};

const CHECK_TOL: f64 = 1e-12;
const ZERO_SUM_TOL: f64 = 1e-12;

/// Learning-rate rule applied after every observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateSchedule {
    /// `min{eta_prev, 2 / (3 (1 + rhat_next)), numerator / sqrt(C)}`.
    #[default]
    AdaProdPlus,
    /// Optimistic Adapt-ML-Prod: `min{eta_prev, 1/4, numerator / sqrt(1 + C)}`.
    OptimisticAmlProd,
}

impl RateSchedule {
    /// The prediction-dependent upper bound on the rate.
    #[inline]
    fn cap(self, rhat_next: f64) -> f64 {
        match self {
            RateSchedule::AdaProdPlus => 2.0 / (3.0 * (1.0 + rhat_next)),
            RateSchedule::OptimisticAmlProd => 0.25,
        }
    }

    /// The variance-dependent term; `C = 0` is treated as `+inf` for AdaProd+.
    #[inline]
    fn variance_term(self, numerator: f64, c: f64) -> f64 {
        match self {
            RateSchedule::AdaProdPlus => {
                if c > 0.0 {
                    numerator / c.sqrt()
                } else {
                    f64::INFINITY
                }
            }
            RateSchedule::OptimisticAmlProd => numerator / (1.0 + c).sqrt(),
        }
    }
}

/// Rate constants of a learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    pub schedule: RateSchedule,
    /// Rate of a freshly created expert before any cap applies.
    pub initial_rate: f64,
    /// Numerator of the variance-dependent rate term.
    pub rate_numerator: f64,
}

impl LearnerConfig {
    /// `initial_rate = sqrt(log n)`, `rate_numerator = sqrt(2 log n)`.
    pub fn adaprod_plus(n: usize) -> Self {
        let log_n = (n.max(1) as f64).ln();
        Self {
            schedule: RateSchedule::AdaProdPlus,
            initial_rate: log_n.sqrt(),
            rate_numerator: (2.0 * log_n).sqrt(),
        }
    }

    pub fn optimistic_aml_prod(n: usize) -> Self {
        Self {
            schedule: RateSchedule::OptimisticAmlProd,
            ..Self::adaprod_plus(n)
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.initial_rate >= 0.0 && self.initial_rate.is_finite())
            || !(self.rate_numerator >= 0.0 && self.rate_numerator.is_finite())
        {
            return Err(Error::validation(format!(
                "learning-rate constants must be finite and non-negative: {self:?}"
            )));
        }
        Ok(())
    }

    /// Rate of expert `(s, i)` when it first plays in round `s`.
    ///
    /// Before round `s` the expert is asleep: it sees zero regret and a zero
    /// prediction, so its weight stays 1 and only the rate caps bite. Rounds
    /// `1..s-2` apply the cap for a zero prediction, round `s-1` the cap for
    /// the point's actual round-`s` prediction.
    fn birth_rate(&self, s: usize, rhat_s: f64) -> f64 {
        let mut eta = self.initial_rate;
        if s >= 2 {
            let no_variance = self.schedule.variance_term(self.rate_numerator, 0.0);
            eta = eta.min(self.schedule.cap(rhat_s)).min(no_variance);
            if s >= 3 {
                eta = eta.min(self.schedule.cap(0.0));
            }
        }
        eta
    }
}

/// Snapshot of one expert `(birth_round, point)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpertRecord {
    pub birth_round: usize,
    pub point: usize,
    /// `ln w`.
    pub log_weight: f64,
    pub eta: f64,
    /// Accumulated squared prediction error since birth.
    pub c_accum: f64,
}

/// Counters for the learning-rate lemma checks. The learner checks the
/// cheap conditions on every update; the logarithmic inequalities are
/// evaluated by the explicit base algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantAudit {
    pub updates: u64,
    /// A rate that went up.
    pub rate_increases: u64,
    /// `eta * (1 + rhat_next) > 2/3`.
    pub prod_domain_violations: u64,
    /// `x - x^2 > log(1 + x)` at the realized `x = eta (r - rhat)`, or `x < -2/3`.
    pub prod_inequality_violations: u64,
    /// `(eta_t - eta_{t+1}) / eta_t > log(eta_t / eta_{t+1})`.
    pub log_ratio_violations: u64,
    /// `|sum_i p_i r_i| > 1e-12`.
    pub zero_sum_violations: u64,
    pub max_zero_sum_residual: f64,
}

impl InvariantAudit {
    pub fn violations(&self) -> u64 {
        self.rate_increases
            + self.prod_domain_violations
            + self.prod_inequality_violations
            + self.log_ratio_violations
            + self.zero_sum_violations
    }

    pub fn merge(&mut self, other: &InvariantAudit) {
        self.updates += other.updates;
        self.rate_increases += other.rate_increases;
        self.prod_domain_violations += other.prod_domain_violations;
        self.prod_inequality_violations += other.prod_inequality_violations;
        self.log_ratio_violations += other.log_ratio_violations;
        self.zero_sum_violations += other.zero_sum_violations;
        self.max_zero_sum_residual = self.max_zero_sum_residual.max(other.max_zero_sum_residual);
    }

    /// Checks one rate transition `eta_prev -> eta_new` made with `rhat_next`.
    #[inline]
    pub(crate) fn check_rate(&mut self, eta_prev: f64, eta_new: f64, rhat_next: f64) {
        self.updates += 1;
        if eta_new > eta_prev {
            self.rate_increases += 1;
        }
        if eta_new * (1.0 + rhat_next) > 2.0 / 3.0 + CHECK_TOL {
            self.prod_domain_violations += 1;
        }
    }

    /// `(eta_prev - eta_new) / eta_prev <= ln(eta_prev / eta_new)`.
    pub(crate) fn check_log_ratio(&mut self, eta_prev: f64, eta_new: f64) {
        if eta_new > 0.0 && eta_prev > 0.0 {
            let lhs = (eta_prev - eta_new) / eta_prev;
            if lhs > (eta_prev / eta_new).ln() + CHECK_TOL {
                self.log_ratio_violations += 1;
            }
        }
    }

    /// The Prod step `x = eta * (r - rhat)` stays in the domain `x >= -2/3`.
    #[inline]
    pub(crate) fn check_step(&mut self, x: f64) {
        if x < -2.0 / 3.0 - CHECK_TOL {
            self.prod_inequality_violations += 1;
        }
    }

    /// Checks the Prod inequality `x - x^2 <= ln(1 + x)`, domain included.
    pub(crate) fn check_prod(&mut self, x: f64) {
        if x < -2.0 / 3.0 - CHECK_TOL || x - x * x > (1.0 + x).ln() + CHECK_TOL {
            self.prod_inequality_violations += 1;
        }
    }

    pub(crate) fn check_zero_sum(&mut self, p: &[f64], r: &[f64]) {
        let residual = p.iter().zip(r).map(|(a, b)| a * b).sum::<f64>().abs();
        self.max_zero_sum_residual = self.max_zero_sum_residual.max(residual);
        if residual > ZERO_SUM_TOL {
            self.zero_sum_violations += 1;
        }
    }
}

/// What happened in one observed round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundReport {
    pub round: usize,
    /// `<p_t, l_t>`.
    pub mixture_loss: f64,
    /// `r_t`, zero on asleep points.
    pub regret: Vec<f64>,
}

/// An optimistic prediction `rhat_i = (alpha - lhat_i) * I_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub alpha: f64,
    pub rhat: Vec<f64>,
    pub residual: f64,
    /// Map evaluations the solver used.
    pub evaluations: usize,
}

/// Result of [`AdaProdLearner::observe_optimistic`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimisticRound {
    pub report: RoundReport,
    /// Prediction for the next round, `None` once every point is labeled.
    pub prediction: Option<Prediction>,
    /// Distribution for the next round under that prediction.
    pub next: Option<ProbabilityVector>,
}

/// Experts of one point, struct-of-arrays.
#[derive(Debug, Clone, Default)]
struct PointExperts {
    birth: Vec<usize>,
    log_weight: Vec<f64>,
    eta: Vec<f64>,
    log_eta: Vec<f64>,
    c: Vec<f64>,
}

impl PointExperts {
    fn push(&mut self, birth: usize, eta: f64) {
        self.birth.push(birth);
        self.log_weight.push(0.0);
        self.eta.push(eta);
        self.log_eta.push(eta.ln());
        self.c.push(0.0);
    }

    fn len(&self) -> usize {
        self.birth.len()
    }

    fn clear(&mut self) {
        *self = Self::default();
    }

    /// `ln sum_s eta_s w_s exp(eta_s rhat)`.
    fn log_mass(&self, rhat: f64) -> f64 {
        let mut acc = LogSumExp::default();
        for k in 0..self.len() {
            acc.add(self.log_eta[k] + self.log_weight[k] + self.eta[k] * rhat);
        }
        acc.value()
    }
}

/// Terms this far (in log space) below the running maximum are dropped:
/// each is below `4e-18` of the total.
const NEGLIGIBLE_LOG_GAP: f64 = 40.0;

/// Streaming log-sum-exp with a running max shift.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl LogSumExp {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        if x <= self.max {
            let gap = x - self.max;
            if gap > -NEGLIGIBLE_LOG_GAP {
                self.sum += gap.exp();
            }
        } else if x.is_finite() {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub(crate) fn value(&self) -> f64 {
        if self.sum > 0.0 {
            self.max + self.sum.ln()
        } else {
            f64::NEG_INFINITY
        }
    }
}

/// Normalizes per-point log masses over the awake set.
fn normalize_log_masses(log_mass: &[f64], awake: &AwakeMask) -> Result<ProbabilityVector> {
    if awake.awake_count() == 0 {
        return Err(Error::contract("every point is labeled: no distribution"));
    }
    if log_mass.iter().all(|m| !m.is_finite()) {
        // Only reachable with zero learning rates (a pool of one point).
        return ProbabilityVector::uniform_over(awake);
    }
    ProbabilityVector::from_log_weights(log_mass)
}

fn check_prediction(rhat: &[f64], n: usize, what: &str) -> Result<()> {
    Error::check_len(n, rhat.len())?;
    if let Some(v) = rhat.iter().find(|v| !(v.abs() <= 1.0 + CHECK_TOL)) {
        return Err(Error::contract(format!("{what} entry {v} outside [-1, 1]")));
    }
    Ok(())
}

/// Pre-update quantities of one expert that do not depend on the next
/// round's prediction.
struct Staged {
    eta_prev: Vec<f64>,
    /// `(ln w + eta r - eta^2 (r - rhat)^2) / eta`, so the rescaled log
    /// weight is `eta_new * scaled`. Unscaled when `eta = 0`.
    scaled: Vec<f64>,
    /// `min(eta_prev, variance term)`.
    bound: Vec<f64>,
    ln_bound: Vec<f64>,
}

/// The AdaProd+ state machine.
#[derive(Debug, Clone)]
pub struct AdaProdLearner {
    n: usize,
    round: usize,
    config: LearnerConfig,
    awake: AwakeMask,
    experts: Vec<PointExperts>,
    audit: InvariantAudit,
}

impl AdaProdLearner {
    /// A learner over `n` points with the default AdaProd+ constants.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_config(n, LearnerConfig::adaprod_plus(n))
    }

    pub fn with_config(n: usize, config: LearnerConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension {
                expected: 1,
                got: 0,
            });
        }
        config.validate()?;
        let experts = (0..n)
            .map(|_| {
                let mut e = PointExperts::default();
                e.push(1, config.initial_rate);
                e
            })
            .collect();
        Ok(Self {
            n,
            round: 1,
            config,
            awake: AwakeMask::all_awake(n),
            experts,
            audit: InvariantAudit::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The round about to be played (starts at 1).
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn awake(&self) -> &AwakeMask {
        &self.awake
    }

    pub fn audit(&self) -> &InvariantAudit {
        &self.audit
    }

    pub fn expert_count(&self) -> usize {
        self.experts.iter().map(PointExperts::len).sum()
    }

    pub fn records(&self) -> impl Iterator<Item = ExpertRecord> + '_ {
        self.experts.iter().enumerate().flat_map(|(i, e)| {
            (0..e.len()).map(move |k| ExpertRecord {
                birth_round: e.birth[k],
                point: i,
                log_weight: e.log_weight[k],
                eta: e.eta[k],
                c_accum: e.c[k],
            })
        })
    }

    /// The distribution played this round under prediction `rhat`.
    pub fn distribution(&self, rhat: &[f64]) -> Result<ProbabilityVector> {
        check_prediction(rhat, self.n, "prediction")?;
        let log_mass: Vec<f64> = (0..self.n)
            .map(|i| {
                if self.awake.is_awake(i) {
                    self.experts[i].log_mass(rhat[i])
                } else {
                    f64::NEG_INFINITY
                }
            })
            .collect();
        normalize_log_masses(&log_mass, &self.awake)
    }

    /// Solves `alpha = <p(rhat(alpha)), lhat>` with `rhat(alpha)_i = (alpha - lhat_i) I_i`
    /// on the current state.
    pub fn predict_optimistic(&self, lhat: &[f64]) -> Result<Prediction> {
        check_loss_prediction(lhat, self.n)?;
        let (lo, hi) = awake_range(lhat, &self.awake)?;
        let mut rhat = vec![0.0; self.n];
        let fp = solve_fixed_point(
            |alpha| {
                fill_rhat(&mut rhat, alpha, lhat, &self.awake);
                Ok(self.distribution(&rhat)?.dot(lhat))
            },
            lo,
            hi,
        )?;
        fill_rhat(&mut rhat, fp.alpha, lhat, &self.awake);
        Ok(Prediction {
            alpha: fp.alpha,
            rhat,
            residual: fp.residual,
            evaluations: fp.evaluations,
        })
    }

    /// Observes `loss` for the current round and applies the update, with
    /// the next round's prediction supplied by the caller.
    ///
    /// `p_played` must be the distribution actually used this round and
    /// `rhat_used` the prediction it was computed with.
    pub fn observe(
        &mut self,
        loss: &LossVector,
        p_played: &ProbabilityVector,
        rhat_used: &[f64],
        rhat_next: &[f64],
    ) -> Result<RoundReport> {
        check_prediction(rhat_next, self.n, "next prediction")?;
        let (report, staged) = self.stage(loss, p_played, rhat_used)?;
        self.commit(&staged, rhat_next);
        Ok(report)
    }

    /// Observes `loss`, labels `labeled_after`, and derives the next
    /// round's optimistic prediction from the loss guess `lhat_next`.
    ///
    /// The rate cap depends on the next prediction, which depends on the
    /// post-update distribution, so the fixed point is solved over the update
    /// itself: the committed rates are capped with exactly the prediction the
    /// next round will play.
    pub fn observe_optimistic(
        &mut self,
        loss: &LossVector,
        p_played: &ProbabilityVector,
        rhat_used: &[f64],
        lhat_next: &[f64],
        labeled_after: &[usize],
    ) -> Result<OptimisticRound> {
        check_loss_prediction(lhat_next, self.n)?;
        let mut next_awake = self.awake.clone();
        for &i in labeled_after {
            next_awake.put_to_sleep(i)?;
        }
        let (report, staged) = self.stage(loss, p_played, rhat_used)?;

        if next_awake.awake_count() == 0 {
            let zeros = vec![0.0; self.n];
            self.commit(&staged, &zeros);
            self.label(labeled_after)?;
            return Ok(OptimisticRound {
                report,
                prediction: None,
                next: None,
            });
        }

        let (lo, hi) = awake_range(lhat_next, &next_awake)?;
        // The played distribution restricted to the next awake set is a
        // close starting guess when the update is small.
        let (mut mass, mut weighted) = (0.0, 0.0);
        for i in next_awake.awake_indices() {
            mass += p_played.values()[i];
            weighted += p_played.values()[i] * lhat_next[i];
        }
        let guess = if mass > 0.0 { weighted / mass } else { 0.5 * (lo + hi) };

        let mut rhat = vec![0.0; self.n];
        let mut log_mass = vec![f64::NEG_INFINITY; self.n];
        let mut last: Option<(f64, ProbabilityVector)> = None;
        let fp = solve_fixed_point_near(
            |alpha| {
                fill_rhat(&mut rhat, alpha, lhat_next, &next_awake);
                for i in next_awake.awake_indices() {
                    log_mass[i] = self.staged_log_mass(&staged, i, rhat[i]);
                }
                let p = normalize_log_masses(&log_mass, &next_awake)?;
                let value = p.dot(lhat_next);
                last = Some((alpha, p));
                Ok(value)
            },
            lo,
            hi,
            guess,
        )?;
        fill_rhat(&mut rhat, fp.alpha, lhat_next, &next_awake);
        self.commit(&staged, &rhat);
        self.label(labeled_after)?;
        let next = match last {
            Some((alpha, p)) if alpha == fp.alpha => p,
            _ => self.distribution(&rhat)?,
        };
        Ok(OptimisticRound {
            report,
            prediction: Some(Prediction {
                alpha: fp.alpha,
                rhat,
                residual: fp.residual,
                evaluations: fp.evaluations,
            }),
            next: Some(next),
        })
    }

    /// Labels points: clears their awake bit and drops all their experts.
    pub fn mark_labeled(&mut self, indices: &[usize]) -> Result<()> {
        let mut check = self.awake.clone();
        for &i in indices {
            check.put_to_sleep(i)?;
        }
        self.label(indices)
    }

    fn label(&mut self, indices: &[usize]) -> Result<()> {
        for &i in indices {
            self.awake.put_to_sleep(i)?;
            self.experts[i].clear();
        }
        Ok(())
    }

    /// Computes regrets and accumulates prediction errors; everything that
    /// does not depend on the next prediction.
    fn stage(
        &mut self,
        loss: &LossVector,
        p_played: &ProbabilityVector,
        rhat_used: &[f64],
    ) -> Result<(RoundReport, Vec<Staged>)> {
        Error::check_len(self.n, loss.len())?;
        Error::check_len(self.n, p_played.len())?;
        check_prediction(rhat_used, self.n, "prediction")?;
        if !p_played.respects(&self.awake) {
            return Err(Error::contract("played distribution has mass on a labeled point"));
        }
        let mixture = p_played.dot(loss.values());
        let regret: Vec<f64> = (0..self.n)
            .map(|i| (mixture - loss.values()[i]) * self.awake.indicator(i))
            .collect();
        self.audit.check_zero_sum(p_played.values(), &regret);

        let schedule = self.config.schedule;
        let numerator = self.config.rate_numerator;
        let check_step = self.round >= 2;
        let mut staged = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let e = &mut self.experts[i];
            let len = if self.awake.is_awake(i) { e.len() } else { 0 };
            let mut s = Staged {
                eta_prev: Vec::with_capacity(len),
                scaled: Vec::with_capacity(len),
                bound: Vec::with_capacity(len),
                ln_bound: Vec::with_capacity(len),
            };
            let (r, rh) = (regret[i], rhat_used[i]);
            let gap_sq = (rh - r) * (rh - r);
            for k in 0..len {
                e.c[k] += gap_sq;
                let eta = e.eta[k];
                if check_step {
                    self.audit.check_step(eta * (r - rh));
                }
                let variance = schedule.variance_term(numerator, e.c[k]);
                s.eta_prev.push(eta);
                s.scaled.push(if eta > 0.0 {
                    e.log_weight[k] / eta + r - eta * gap_sq
                } else {
                    e.log_weight[k]
                });
                if eta <= variance {
                    s.bound.push(eta);
                    s.ln_bound.push(e.log_eta[k]);
                } else {
                    s.bound.push(variance);
                    s.ln_bound.push(variance.ln());
                }
            }
            staged.push(s);
        }
        let report = RoundReport {
            round: self.round,
            mixture_loss: mixture,
            regret,
        };
        Ok((report, staged))
    }

    /// `ln` of point `i`'s next-round mass if the update were committed with
    /// prediction `rhat_next_i`.
    fn staged_log_mass(&self, staged: &[Staged], i: usize, rhat_next_i: f64) -> f64 {
        let s = &staged[i];
        let cap = self.config.schedule.cap(rhat_next_i);
        let ln_cap = cap.ln();
        let mut acc = LogSumExp::default();
        for k in 0..s.eta_prev.len() {
            let (eta, ln_eta) = if s.bound[k] <= cap {
                (s.bound[k], s.ln_bound[k])
            } else {
                (cap, ln_cap)
            };
            acc.add(ln_eta + eta * (s.scaled[k] + rhat_next_i));
        }
        let newborn = self.config.birth_rate(self.round + 1, rhat_next_i);
        acc.add(newborn.ln() + newborn * rhat_next_i);
        acc.value()
    }

    fn commit(&mut self, staged: &[Staged], rhat_next: &[f64]) {
        let schedule = self.config.schedule;
        for i in 0..self.n {
            if !self.awake.is_awake(i) {
                continue;
            }
            let s = &staged[i];
            let e = &mut self.experts[i];
            let cap = schedule.cap(rhat_next[i]);
            let ln_cap = cap.ln();
            for k in 0..s.eta_prev.len() {
                let (eta, ln_eta) = if s.bound[k] <= cap {
                    (s.bound[k], s.ln_bound[k])
                } else {
                    (cap, ln_cap)
                };
                self.audit.check_rate(s.eta_prev[k], eta, rhat_next[i]);
                e.log_weight[k] = if s.eta_prev[k] > 0.0 {
                    eta * s.scaled[k]
                } else {
                    s.scaled[k]
                };
                e.eta[k] = eta;
                e.log_eta[k] = ln_eta;
            }
            let newborn = self.config.birth_rate(self.round + 1, rhat_next[i]);
            e.push(self.round + 1, newborn);
        }
        self.round += 1;
    }
}

fn check_loss_prediction(lhat: &[f64], n: usize) -> Result<()> {
    Error::check_len(n, lhat.len())?;
    if let Some(v) = lhat.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::contract(format!("loss prediction {v} outside [0, 1]")));
    }
    Ok(())
}

/// `[min, max]` of `lhat` over the awake set: `<p, lhat>` always lies inside.
pub(crate) fn awake_range(lhat: &[f64], awake: &AwakeMask) -> Result<(f64, f64)> {
    let mut range = (f64::INFINITY, f64::NEG_INFINITY);
    for i in awake.awake_indices() {
        range.0 = range.0.min(lhat[i]);
        range.1 = range.1.max(lhat[i]);
    }
    if range.0 > range.1 {
        return Err(Error::contract("no awake point to predict for"));
    }
    Ok(range)
}

pub(crate) fn fill_rhat(rhat: &mut [f64], alpha: f64, lhat: &[f64], awake: &AwakeMask) {
    for (i, r) in rhat.iter_mut().enumerate() {
        *r = if awake.is_awake(i) { alpha - lhat[i] } else { 0.0 };
    }
}
