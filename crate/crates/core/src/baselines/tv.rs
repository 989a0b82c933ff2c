//! Sleeping-experts learners with a time-varying prior over start rounds.
//!
//! Each point keeps one regret accumulator per start round `tau`, and the
//! point's weight is `sum_tau prior(tau) * w(R_[tau, t-1], C_[tau, t-1])` for
//! an algorithm-specific potential `w`.

use super::special::{ln_adanormalhedge_weight, ln_squint_weight};
use crate::error::{Error, Result};
use crate::learner::{InvariantAudit, LogSumExp, RoundReport};
use crate::model::{AwakeMask, LossVector, ProbabilityVector};

/// Which potential turns an interval's accumulators into a weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    /// AdaNormalHedge; the second accumulator is `sum |r|`.
    AdaNormalHedge,
    /// Squint with the improper prior on rates; the second accumulator is `sum r^2`.
    Squint,
}

/// Prior weight of the interval starting at round `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartPrior {
    /// `1 / tau^2`.
    #[default]
    InverseSquare,
    /// Every start round weighted equally.
    Uniform,
}

impl StartPrior {
    fn ln_weight(self, tau: usize) -> f64 {
        match self {
            StartPrior::InverseSquare => -2.0 * (tau as f64).ln(),
            StartPrior::Uniform => 0.0,
        }
    }
}

/// One `(R, C)` accumulator pair per start round, oldest first.
#[derive(Debug, Clone, Default)]
struct Intervals {
    regret: Vec<f64>,
    second: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct TimeVaryingLearner {
    potential: Potential,
    prior: StartPrior,
    n: usize,
    round: usize,
    awake: AwakeMask,
    intervals: Vec<Intervals>,
    /// `ln prior(tau)` for `tau = 1..=round`.
    ln_prior: Vec<f64>,
    audit: InvariantAudit,
}

impl TimeVaryingLearner {
    pub fn new(n: usize, potential: Potential, prior: StartPrior) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension {
                expected: 1,
                got: 0,
            });
        }
        let intervals = (0..n)
            .map(|_| Intervals {
                regret: vec![0.0],
                second: vec![0.0],
            })
            .collect();
        Ok(Self {
            potential,
            prior,
            n,
            round: 1,
            awake: AwakeMask::all_awake(n),
            intervals,
            ln_prior: vec![prior.ln_weight(1)],
            audit: InvariantAudit::default(),
        })
    }

    pub fn adanormalhedge(n: usize) -> Result<Self> {
        Self::new(n, Potential::AdaNormalHedge, StartPrior::InverseSquare)
    }

    pub fn squint(n: usize) -> Result<Self> {
        Self::new(n, Potential::Squint, StartPrior::InverseSquare)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn potential(&self) -> Potential {
        self.potential
    }

    pub fn prior(&self) -> StartPrior {
        self.prior
    }

    pub fn awake(&self) -> &AwakeMask {
        &self.awake
    }

    pub fn audit(&self) -> &InvariantAudit {
        &self.audit
    }

    fn ln_potential(&self, regret: f64, second: f64) -> f64 {
        match self.potential {
            Potential::AdaNormalHedge => ln_adanormalhedge_weight(regret, second),
            Potential::Squint => ln_squint_weight(regret, second),
        }
    }

    /// The distribution for the current round.
    pub fn distribution(&self) -> Result<ProbabilityVector> {
        if self.awake.awake_count() == 0 {
            return Err(Error::contract("every point is labeled: no distribution"));
        }
        let mut log_mass = vec![f64::NEG_INFINITY; self.n];
        for i in self.awake.awake_indices() {
            let iv = &self.intervals[i];
            let mut acc = LogSumExp::default();
            for k in 0..iv.regret.len() {
                acc.add(self.ln_prior[k] + self.ln_potential(iv.regret[k], iv.second[k]));
            }
            log_mass[i] = acc.value();
        }
        ProbabilityVector::from_log_weights(&log_mass)
    }

    /// Observes the round's losses against the distribution that was played.
    pub fn observe(&mut self, loss: &LossVector, p_played: &ProbabilityVector) -> Result<RoundReport> {
        Error::check_len(self.n, loss.len())?;
        Error::check_len(self.n, p_played.len())?;
        if !p_played.respects(&self.awake) {
            return Err(Error::contract("played distribution has mass on a labeled point"));
        }
        let mixture = p_played.dot(loss.values());
        let regret: Vec<f64> = (0..self.n)
            .map(|i| (mixture - loss.values()[i]) * self.awake.indicator(i))
            .collect();
        self.audit.check_zero_sum(p_played.values(), &regret);
        let second = match self.potential {
            Potential::AdaNormalHedge => |r: f64| r.abs(),
            Potential::Squint => |r: f64| r * r,
        };
        for i in self.awake.awake_indices() {
            let iv = &mut self.intervals[i];
            let (r, s) = (regret[i], second(regret[i]));
            iv.regret.iter_mut().for_each(|x| *x += r);
            iv.second.iter_mut().for_each(|x| *x += s);
            iv.regret.push(0.0);
            iv.second.push(0.0);
        }
        self.round += 1;
        self.ln_prior.push(self.prior.ln_weight(self.round));
        Ok(RoundReport {
            round: self.round - 1,
            mixture_loss: mixture,
            regret,
        })
    }

    /// Plays the current distribution on `loss` and returns the next one.
    pub fn step(&mut self, loss: &LossVector) -> Result<ProbabilityVector> {
        let p = self.distribution()?;
        self.observe(loss, &p)?;
        self.distribution()
    }

    pub fn mark_labeled(&mut self, indices: &[usize]) -> Result<()> {
        let mut check = self.awake.clone();
        for &i in indices {
            check.put_to_sleep(i)?;
        }
        self.awake = check;
        for &i in indices {
            self.intervals[i] = Intervals::default();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_two_experts(mut learner: TimeVaryingLearner, rounds: usize) -> ProbabilityVector {
        for t in 1..=rounds {
            let loss = LossVector::new(vec![0.2, 0.7], t).unwrap();
            learner.step(&loss).unwrap();
        }
        learner.distribution().unwrap()
    }

    #[test]
    fn first_round_is_uniform() {
        for learner in [
            TimeVaryingLearner::adanormalhedge(4).unwrap(),
            TimeVaryingLearner::squint(4).unwrap(),
        ] {
            assert_eq!(learner.distribution().unwrap().values(), &[0.25; 4]);
        }
    }

    #[test]
    fn squint_prefers_the_better_expert() {
        let p = run_two_experts(TimeVaryingLearner::squint(2).unwrap(), 50);
        assert!(p.values()[0] > 0.5, "{p:?}");
    }

    #[test]
    fn adanormalhedge_prefers_the_better_expert() {
        let p = run_two_experts(TimeVaryingLearner::adanormalhedge(2).unwrap(), 50);
        assert!(p.values()[0] > 0.5, "{p:?}");
    }

    #[test]
    fn uniform_prior_runs() {
        let learner = TimeVaryingLearner::new(2, Potential::Squint, StartPrior::Uniform).unwrap();
        let p = run_two_experts(learner, 30);
        assert!(p.values()[0] > 0.5);
    }

    #[test]
    fn asleep_points_get_no_mass() {
        let mut learner = TimeVaryingLearner::squint(3).unwrap();
        learner
            .step(&LossVector::new(vec![0.1, 0.4, 0.8], 1).unwrap())
            .unwrap();
        learner.mark_labeled(&[1]).unwrap();
        let p = learner
            .step(&LossVector::new(vec![0.3, 0.0, 0.2], 2).unwrap())
            .unwrap();
        assert_eq!(p.values()[1], 0.0);
        assert!(learner.mark_labeled(&[1]).is_err());
    }

    #[test]
    fn all_labeled_is_an_error() {
        let mut learner = TimeVaryingLearner::adanormalhedge(2).unwrap();
        learner.mark_labeled(&[0, 1]).unwrap();
        assert!(matches!(learner.distribution(), Err(Error::Contract(_))));
    }

    #[test]
    fn long_runs_stay_normalized() {
        let mut learner = TimeVaryingLearner::adanormalhedge(3).unwrap();
        for t in 1..=2000 {
            let loss = LossVector::new(vec![0.0, 1.0, (t % 2) as f64], t).unwrap();
            let p = learner.step(&loss).unwrap();
            assert!((p.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(learner.audit().violations(), 0);
    }
}
