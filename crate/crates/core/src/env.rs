//! Synthetic loss streams standing in for training noise, and replay of
//! externally produced softmax outputs.
//!
//! Environments never look at the learner: labeled points keep receiving
//! losses, and the harness masks them out.

use std::f64::consts::{PI, SQRT_2};
use std::io::BufRead;
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{SoftmaxMatrix, SoftmaxTransform};
use crate::model::{AwakeMask, LossVector};

/// A source of per-round loss vectors.
pub trait Environment: Send {
    fn n(&self) -> usize;

    /// Losses for `round`. The labeled set is informational only.
    fn next_losses(
        &mut self,
        round: usize,
        labeled: &AwakeMask,
        rng: &mut dyn RngCore,
    ) -> Result<LossVector>;

    /// The true expected losses of `round`, when the environment knows them.
    fn expected_losses(&self, round: usize) -> Option<Vec<f64>>;

    /// Number of rounds available, for finite streams.
    fn horizon(&self) -> Option<usize> {
        None
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `E[clamp(mu + sigma Z, 0, 1)]` for standard normal `Z`.
pub fn clamped_gaussian_mean(mu: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return mu.clamp(0.0, 1.0);
    }
    let a = -mu / sigma;
    let b = (1.0 - mu) / sigma;
    let inside = mu * (normal_cdf(b) - normal_cdf(a)) + sigma * (normal_pdf(a) - normal_pdf(b));
    inside + (1.0 - normal_cdf(b))
}

fn noisy(means: &[f64], sigma: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    means
        .iter()
        .map(|m| {
            if sigma > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                (m + sigma * z).clamp(0.0, 1.0)
            } else {
                *m
            }
        })
        .collect()
}

fn check_means(mu: &[f64]) -> Result<()> {
    if mu.is_empty() {
        return Err(Error::validation("environment needs at least one point"));
    }
    if let Some(m) = mu.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(Error::contract(format!("mean loss {m} outside [0, 1]")));
    }
    Ok(())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::validation(format!("noise level {sigma} must be >= 0")));
    }
    Ok(())
}

/// `clamp(mu_i + sigma Z)` with fixed means.
#[derive(Debug, Clone)]
pub struct StationaryNoisy {
    mu: Vec<f64>,
    sigma: f64,
}

impl StationaryNoisy {
    pub fn new(mu: Vec<f64>, sigma: f64) -> Result<Self> {
        check_means(&mu)?;
        check_sigma(sigma)?;
        Ok(Self { mu, sigma })
    }
}

impl Environment for StationaryNoisy {
    fn n(&self) -> usize {
        self.mu.len()
    }

    fn next_losses(&mut self, round: usize, _: &AwakeMask, rng: &mut dyn RngCore) -> Result<LossVector> {
        LossVector::new(noisy(&self.mu, self.sigma, rng), round)
    }

    fn expected_losses(&self, _: usize) -> Option<Vec<f64>> {
        Some(self.mu.iter().map(|m| clamped_gaussian_mean(*m, self.sigma)).collect())
    }
}

/// Copies of the three-point pattern `(eps, 0, 1)` / `(eps, 1, 0)`, each
/// copy flipping its own fair coin. The first point of every copy has the
/// lowest expected loss but never the lowest realized loss.
#[derive(Debug, Clone)]
pub struct GreedyTrap {
    epsilon: f64,
    copies: usize,
}

impl GreedyTrap {
    pub fn new(epsilon: f64, copies: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::contract(format!("trap offset {epsilon} outside (0, 1/2)")));
        }
        if copies == 0 {
            return Err(Error::validation("greedy trap needs at least one copy"));
        }
        Ok(Self { epsilon, copies })
    }
}

impl Environment for GreedyTrap {
    fn n(&self) -> usize {
        3 * self.copies
    }

    fn next_losses(&mut self, round: usize, _: &AwakeMask, rng: &mut dyn RngCore) -> Result<LossVector> {
        let mut values = Vec::with_capacity(self.n());
        for _ in 0..self.copies {
            let heads = rng.random_bool(0.5);
            values.extend([self.epsilon, f64::from(u8::from(!heads)), f64::from(u8::from(heads))]);
        }
        LossVector::new(values, round)
    }

    fn expected_losses(&self, _: usize) -> Option<Vec<f64>> {
        Some(
            (0..self.copies)
                .flat_map(|_| [self.epsilon, 0.5, 0.5])
                .collect(),
        )
    }
}

/// Time-varying mean schedules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriftSchedule {
    /// `mu_i(t) = center + amplitude * sin(2 pi (t / period + i / n))`.
    Sinusoidal {
        n: usize,
        center: f64,
        amplitude: f64,
        period: f64,
    },
    /// Linear interpolation from `start` (round 1) to `end` (round `horizon`).
    LinearSwap {
        start: Vec<f64>,
        end: Vec<f64>,
        horizon: usize,
    },
    Constant { mu: Vec<f64> },
}

impl DriftSchedule {
    pub fn n(&self) -> usize {
        match self {
            DriftSchedule::Sinusoidal { n, .. } => *n,
            DriftSchedule::LinearSwap { start, .. } => start.len(),
            DriftSchedule::Constant { mu } => mu.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::validation("drift schedule needs at least one point"));
        }
        match self {
            DriftSchedule::Sinusoidal { period, .. } if !(*period > 0.0) => {
                Err(Error::validation("sinusoid period must be positive"))
            }
            DriftSchedule::LinearSwap {
                start,
                end,
                horizon,
            } => {
                Error::check_len(start.len(), end.len())?;
                if *horizon == 0 {
                    return Err(Error::validation("linear swap horizon must be >= 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Unclamped means at `round`.
    pub fn means(&self, round: usize) -> Vec<f64> {
        let t = round as f64;
        match self {
            DriftSchedule::Sinusoidal {
                n,
                center,
                amplitude,
                period,
            } => (0..*n)
                .map(|i| center + amplitude * (2.0 * PI * (t / period + i as f64 / *n as f64)).sin())
                .collect(),
            DriftSchedule::LinearSwap {
                start,
                end,
                horizon,
            } => {
                let frac = if *horizon > 1 {
                    ((t - 1.0) / (*horizon as f64 - 1.0)).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                start
                    .iter()
                    .zip(end)
                    .map(|(s, e)| s + frac * (e - s))
                    .collect()
            }
            DriftSchedule::Constant { mu } => mu.clone(),
        }
    }
}

/// `clamp(mu(t) + sigma Z)` for a mean schedule.
#[derive(Debug, Clone)]
pub struct Drifting {
    schedule: DriftSchedule,
    sigma: f64,
    warned: bool,
}

impl Drifting {
    pub fn new(schedule: DriftSchedule, sigma: f64) -> Result<Self> {
        schedule.validate()?;
        check_sigma(sigma)?;
        Ok(Self {
            schedule,
            sigma,
            warned: false,
        })
    }

    /// Means at `round`, clamped into `[0, 1]`.
    pub fn means(&self, round: usize) -> Vec<f64> {
        self.schedule
            .means(round)
            .into_iter()
            .map(|m| m.clamp(0.0, 1.0))
            .collect()
    }
}

impl Environment for Drifting {
    fn n(&self) -> usize {
        self.schedule.n()
    }

    fn next_losses(&mut self, round: usize, _: &AwakeMask, rng: &mut dyn RngCore) -> Result<LossVector> {
        let raw = self.schedule.means(round);
        if !self.warned && raw.iter().any(|m| !(0.0..=1.0).contains(m)) {
            log::warn!("drift schedule leaves [0, 1] at round {round}; means are clamped");
            self.warned = true;
        }
        LossVector::new(noisy(&self.means(round), self.sigma, rng), round)
    }

    fn expected_losses(&self, round: usize) -> Option<Vec<f64>> {
        Some(
            self.means(round)
                .iter()
                .map(|m| clamped_gaussian_mean(*m, self.sigma))
                .collect(),
        )
    }
}

/// Stationary noise whose means are reversed every `period` rounds.
#[derive(Debug, Clone)]
pub struct AdversarialSwap {
    mu: Vec<f64>,
    sigma: f64,
    period: usize,
}

impl AdversarialSwap {
    pub fn new(mu: Vec<f64>, sigma: f64, period: usize) -> Result<Self> {
        check_means(&mu)?;
        check_sigma(sigma)?;
        if period == 0 {
            return Err(Error::validation("swap period must be >= 1"));
        }
        Ok(Self { mu, sigma, period })
    }

    pub fn means(&self, round: usize) -> Vec<f64> {
        let mut mu = self.mu.clone();
        if ((round - 1) / self.period) % 2 == 1 {
            mu.reverse();
        }
        mu
    }
}

impl Environment for AdversarialSwap {
    fn n(&self) -> usize {
        self.mu.len()
    }

    fn next_losses(&mut self, round: usize, _: &AwakeMask, rng: &mut dyn RngCore) -> Result<LossVector> {
        LossVector::new(noisy(&self.means(round), self.sigma, rng), round)
    }

    fn expected_losses(&self, round: usize) -> Option<Vec<f64>> {
        Some(
            self.means(round)
                .iter()
                .map(|m| clamped_gaussian_mean(*m, self.sigma))
                .collect(),
        )
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReplayRecord {
    round: usize,
    softmax: Vec<Vec<f64>>,
}

/// Losses computed from a recorded stream of softmax outputs.
#[derive(Debug, Clone)]
pub struct SoftmaxReplay {
    losses: Vec<Vec<f64>>,
}

impl SoftmaxReplay {
    pub fn from_path(path: &Path, transform: SoftmaxTransform) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(std::io::BufReader::new(file), transform)
    }

    /// Parses JSON Lines records `{"round": t, "softmax": [[...], ...]}`.
    /// Rounds must run 1, 2, 3, ... and every record must have the same
    /// number of points. Blank lines are skipped.
    pub fn from_reader(reader: impl BufRead, transform: SoftmaxTransform) -> Result<Self> {
        let mut losses: Vec<Vec<f64>> = Vec::new();
        for (k, line) in reader.lines().enumerate() {
            let line_no = k + 1;
            let fail = |message: String| Error::Ingestion {
                line: line_no,
                message,
            };
            let line = line.map_err(|e| fail(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ReplayRecord = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
            let expected = losses.len() + 1;
            if rec.round != expected {
                return Err(fail(format!("expected round {expected}, found {}", rec.round)));
            }
            if let Some(first) = losses.first() {
                if first.len() != rec.softmax.len() {
                    return Err(fail(format!(
                        "record has {} points, earlier records have {}",
                        rec.softmax.len(),
                        first.len()
                    )));
                }
            }
            let sm = SoftmaxMatrix::new(rec.softmax).map_err(|e| fail(e.to_string()))?;
            let loss = transform
                .apply(&sm, rec.round)
                .map_err(|e| fail(e.to_string()))?;
            losses.push(loss.values().to_vec());
        }
        if losses.is_empty() {
            return Err(Error::Ingestion {
                line: 0,
                message: "replay file has no records".into(),
            });
        }
        Ok(Self { losses })
    }

    pub fn rounds(&self) -> usize {
        self.losses.len()
    }
}

impl Environment for SoftmaxReplay {
    fn n(&self) -> usize {
        self.losses[0].len()
    }

    fn next_losses(&mut self, round: usize, _: &AwakeMask, _: &mut dyn RngCore) -> Result<LossVector> {
        let values = self.losses.get(round - 1).ok_or_else(|| {
            Error::contract(format!(
                "replay has {} rounds, round {round} requested",
                self.losses.len()
            ))
        })?;
        LossVector::new(values.clone(), round)
    }

    fn expected_losses(&self, _: usize) -> Option<Vec<f64>> {
        None
    }

    fn horizon(&self) -> Option<usize> {
        Some(self.losses.len())
    }
}

/// Serializable description of an environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    StationaryNoisy {
        mu: Vec<f64>,
        sigma: f64,
    },
    GreedyTrap {
        epsilon: f64,
        #[serde(default = "one")]
        n_copies: usize,
    },
    Drifting {
        schedule: DriftSchedule,
        sigma: f64,
    },
    AdversarialSwap {
        mu: Vec<f64>,
        sigma: f64,
        period: usize,
    },
    SoftmaxReplay {
        path: PathBuf,
        #[serde(default)]
        transform: SoftmaxTransform,
    },
}

fn one() -> usize {
    1
}

impl EnvSpec {
    pub fn build(&self) -> Result<Box<dyn Environment>> {
        Ok(match self {
            EnvSpec::StationaryNoisy { mu, sigma } => Box::new(StationaryNoisy::new(mu.clone(), *sigma)?),
            EnvSpec::GreedyTrap { epsilon, n_copies } => Box::new(GreedyTrap::new(*epsilon, *n_copies)?),
            EnvSpec::Drifting { schedule, sigma } => Box::new(Drifting::new(schedule.clone(), *sigma)?),
            EnvSpec::AdversarialSwap { mu, sigma, period } => {
                Box::new(AdversarialSwap::new(mu.clone(), *sigma, *period)?)
            }
            EnvSpec::SoftmaxReplay { path, transform } => {
                Box::new(SoftmaxReplay::from_path(path, *transform)?)
            }
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EnvSpec::StationaryNoisy { .. } => "stationary_noisy",
            EnvSpec::GreedyTrap { .. } => "greedy_trap",
            EnvSpec::Drifting { .. } => "drifting",
            EnvSpec::AdversarialSwap { .. } => "adversarial_swap",
            EnvSpec::SoftmaxReplay { .. } => "softmax_replay",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mask(n: usize) -> AwakeMask {
        AwakeMask::all_awake(n)
    }

    /// Simpson quadrature of `E[clamp(mu + sigma Z, 0, 1)]` over `[-10, 10]`.
    fn clamped_mean_quadrature(mu: f64, sigma: f64) -> f64 {
        let m = 200_000;
        let (lo, hi) = (-10.0, 10.0);
        let h = (hi - lo) / m as f64;
        let f = |z: f64| (mu + sigma * z).clamp(0.0, 1.0) * (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
        let mut s = f(lo) + f(hi);
        for k in 1..m {
            s += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn clamped_mean_matches_quadrature() {
        for (mu, sigma) in [(0.2, 0.3), (0.8, 0.3), (0.5, 1.0), (0.0, 0.1), (0.95, 0.5)] {
            let closed = clamped_gaussian_mean(mu, sigma);
            let quad = clamped_mean_quadrature(mu, sigma);
            assert!((closed - quad).abs() < 1e-7, "{mu} {sigma}: {closed} vs {quad}");
        }
    }

    #[test]
    fn noiseless_stream_is_constant() {
        let mut env = StationaryNoisy::new(vec![0.1, 0.6], 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for t in 1..10 {
            assert_eq!(env.next_losses(t, &mask(2), &mut rng).unwrap().values(), &[0.1, 0.6]);
        }
    }

    #[test]
    fn stationary_empirical_means() {
        let mut env = StationaryNoisy::new(vec![0.2, 0.8], 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rounds = 10_000;
        let mut sums = [0.0; 2];
        for t in 1..=rounds {
            let l = env.next_losses(t, &mask(2), &mut rng).unwrap();
            sums[0] += l.values()[0];
            sums[1] += l.values()[1];
        }
        let expected = env.expected_losses(1).unwrap();
        for k in 0..2 {
            assert!((sums[k] / rounds as f64 - expected[k]).abs() < 0.02);
        }
    }

    #[test]
    fn out_of_range_mean_is_rejected() {
        assert!(matches!(
            StationaryNoisy::new(vec![0.5, 1.2], 0.1),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn trap_has_one_zero_among_the_pair() {
        let mut env = GreedyTrap::new(0.25, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in 1..200 {
            let l = env.next_losses(t, &mask(6), &mut rng).unwrap();
            for c in 0..2 {
                let v = &l.values()[3 * c..3 * c + 3];
                assert_eq!(v[0], 0.25);
                assert_eq!(v[1] + v[2], 1.0);
                assert!(v[1] == 0.0 || v[2] == 0.0);
            }
        }
        assert_eq!(env.expected_losses(1).unwrap(), vec![0.25, 0.5, 0.5, 0.25, 0.5, 0.5]);
    }

    #[test]
    fn trap_empirical_means() {
        let mut env = GreedyTrap::new(0.1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rounds = 40_000;
        let mut second = 0.0;
        for t in 1..=rounds {
            second += env.next_losses(t, &mask(3), &mut rng).unwrap().values()[1];
        }
        // 3 binomial standard deviations
        let slack = 3.0 * (0.25 / rounds as f64).sqrt();
        assert!((second / rounds as f64 - 0.5).abs() < slack);
    }

    #[test]
    fn trap_offset_must_be_below_half() {
        assert!(GreedyTrap::new(0.5, 1).is_err());
        assert!(GreedyTrap::new(0.0, 1).is_err());
    }

    #[test]
    fn greedy_loses_a_quarter_per_round_on_the_trap() {
        // greedy picks the realized zero, whose expected loss is 1/2
        let mut env = GreedyTrap::new(0.25, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rounds = 20_000;
        let mut regret = 0.0;
        for t in 1..=rounds {
            let l = env.next_losses(t, &mask(3), &mut rng).unwrap();
            let gains = l.gains();
            let pick = crate::baselines::greedy_select(&gains, &mask(3), 1).unwrap()[0];
            regret += env.expected_losses(t).unwrap()[pick] - 0.25;
        }
        assert!((regret / rounds as f64 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn constant_drift_is_stationary() {
        let mu = vec![0.3, 0.7];
        let mut a = Drifting::new(DriftSchedule::Constant { mu: mu.clone() }, 0.2).unwrap();
        let mut b = StationaryNoisy::new(mu, 0.2).unwrap();
        let mut ra = ChaCha8Rng::seed_from_u64(5);
        let mut rb = ChaCha8Rng::seed_from_u64(5);
        for t in 1..50 {
            assert_eq!(
                a.next_losses(t, &mask(2), &mut ra).unwrap(),
                b.next_losses(t, &mask(2), &mut rb).unwrap()
            );
        }
    }

    #[test]
    fn linear_swap_changes_the_best_point_once() {
        let env = Drifting::new(
            DriftSchedule::LinearSwap {
                start: vec![0.2, 0.8],
                end: vec![0.8, 0.2],
                horizon: 100,
            },
            0.0,
        )
        .unwrap();
        let best: Vec<usize> = (1..=100)
            .map(|t| {
                let m = env.means(t);
                usize::from(m[1] < m[0])
            })
            .collect();
        let switches = best.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(switches, 1);
    }

    #[test]
    fn noiseless_sinusoid_realized_best_is_argmin_of_means() {
        let schedule = DriftSchedule::Sinusoidal {
            n: 4,
            center: 0.5,
            amplitude: 0.3,
            period: 50.0,
        };
        let mut env = Drifting::new(schedule.clone(), 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for t in 1..=100 {
            let l = env.next_losses(t, &mask(4), &mut rng).unwrap();
            let m = schedule.means(t);
            let argmin = |v: &[f64]| {
                (0..v.len())
                    .min_by(|a, b| v[*a].total_cmp(&v[*b]))
                    .unwrap()
            };
            assert_eq!(argmin(l.values()), argmin(&m));
        }
    }

    #[test]
    fn swap_reverses_means() {
        let env = AdversarialSwap::new(vec![0.1, 0.5, 0.9], 0.0, 3).unwrap();
        assert_eq!(env.means(3), vec![0.1, 0.5, 0.9]);
        assert_eq!(env.means(4), vec![0.9, 0.5, 0.1]);
        assert_eq!(env.means(7), vec![0.1, 0.5, 0.9]);
    }

    #[test]
    fn replay_one_hot() {
        let data = "{\"round\": 1, \"softmax\": [[1.0, 0.0], [0.0, 1.0]]}\n";
        let mut env = SoftmaxReplay::from_reader(data.as_bytes(), SoftmaxTransform::Uncertainty).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(env.next_losses(1, &mask(2), &mut rng).unwrap().values(), &[1.0, 1.0]);
        assert!(env.next_losses(2, &mask(2), &mut rng).is_err());
    }

    #[test]
    fn replay_uniform_rows() {
        let row = format!("[{}]", ["0.1"; 10].join(","));
        let data = format!("{{\"round\": 1, \"softmax\": [{row}, {row}]}}");
        let env = SoftmaxReplay::from_reader(data.as_bytes(), SoftmaxTransform::Uncertainty).unwrap();
        for v in &env.losses[0] {
            assert!((v - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn replay_gap_names_the_line() {
        let data = "{\"round\": 1, \"softmax\": [[1.0]]}\n{\"round\": 3, \"softmax\": [[1.0]]}\n";
        match SoftmaxReplay::from_reader(data.as_bytes(), SoftmaxTransform::Uncertainty) {
            Err(Error::Ingestion { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn replay_bad_rows_name_the_line() {
        let data = "{\"round\": 1, \"softmax\": [[0.5, 0.5]]}\n\n{\"round\": 2, \"softmax\": [[0.5, 0.7]]}\n";
        match SoftmaxReplay::from_reader(data.as_bytes(), SoftmaxTransform::Entropy) {
            Err(Error::Ingestion { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let data = "{\"round\": 1, \"softmax\": oops}\n";
        assert!(matches!(
            SoftmaxReplay::from_reader(data.as_bytes(), SoftmaxTransform::Entropy),
            Err(Error::Ingestion { line: 1, .. })
        ));
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = EnvSpec::Drifting {
            schedule: DriftSchedule::Sinusoidal {
                n: 3,
                center: 0.5,
                amplitude: 0.2,
                period: 100.0,
            },
            sigma: 0.1,
        };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<EnvSpec>(&json).unwrap(), spec);
        assert!(serde_json::from_str::<EnvSpec>(r#"{"kind":"greedy_trap","epsilon":0.2,"bogus":1}"#).is_err());
    }

    #[test]
    fn streams_are_reproducible() {
        let spec = EnvSpec::StationaryNoisy {
            mu: vec![0.3, 0.4, 0.5],
            sigma: 0.2,
        };
        let draw = || {
            let mut env = spec.build().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (1..20)
                .map(|t| env.next_losses(t, &mask(3), &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }
}
