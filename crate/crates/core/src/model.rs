//! Shared domain types: per-round losses, distributions over the pool, the
//! awake (unlabeled) mask, and the instantaneous-regret arithmetic every
//! learner and the harness rely on.

use crate::error::{Error, Result};

/// Sum-to-one tolerance for stored distributions.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Losses for one round, one entry per pool point, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossVector {
    values: Vec<f64>,
    round: usize,
}

impl LossVector {
    pub fn new(values: Vec<f64>, round: usize) -> Result<Self> {
        if round == 0 {
            return Err(Error::contract("rounds are numbered from 1"));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::contract(format!("loss[{i}] = {v} is outside [0, 1]")));
        }
        Ok(Self { values, round })
    }

    /// Losses from gains (informativeness), `l = 1 - g`.
    pub fn from_gains(gains: &[f64], round: usize) -> Result<Self> {
        Self::new(gains.iter().map(|g| 1.0 - g).collect(), round)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn gains(&self) -> Vec<f64> {
        self.values.iter().map(|l| 1.0 - l).collect()
    }
}

/// Which pool points are still unlabeled. Labeling is one-way.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AwakeMask {
    bits: Vec<bool>,
    awake: usize,
}

impl AwakeMask {
    pub fn all_awake(n: usize) -> Self {
        Self {
            bits: vec![true; n],
            awake: n,
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        let awake = bits.iter().filter(|b| **b).count();
        Self { bits, awake }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_awake(&self, i: usize) -> bool {
        self.bits.get(i).copied().unwrap_or(false)
    }

    pub fn awake_count(&self) -> usize {
        self.awake
    }

    pub fn labeled_count(&self) -> usize {
        self.bits.len() - self.awake
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn awake_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, b)| b.then_some(i))
    }

    /// Marks point `i` as labeled. Labeling an asleep point is a caller bug.
    pub fn put_to_sleep(&mut self, i: usize) -> Result<()> {
        match self.bits.get_mut(i) {
            None => Err(Error::contract(format!(
                "index {i} out of range for a pool of {}",
                self.bits.len()
            ))),
            Some(false) => Err(Error::contract(format!("point {i} is already labeled"))),
            Some(bit) => {
                *bit = false;
                self.awake -= 1;
                Ok(())
            }
        }
    }

    pub fn indicator(&self, i: usize) -> f64 {
        if self.is_awake(i) {
            1.0
        } else {
            0.0
        }
    }
}

/// A point of the probability simplex over the pool.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    values: Vec<f64>,
}

impl ProbabilityVector {
    /// Validates an explicit distribution. Drift beyond [`SIMPLEX_TOL`] (but
    /// within 1e-9) is renormalized away.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::contract("empty distribution"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::contract(format!("invalid probability entry {v}")));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::contract(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut p = Self { values };
        if (total - 1.0).abs() > SIMPLEX_TOL {
            p.values.iter_mut().for_each(|v| *v /= total);
        }
        Ok(p)
    }

    /// Normalizes non-negative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::contract(format!(
                "cannot normalize weights with total {total}"
            )));
        }
        Ok(Self {
            values: weights.iter().map(|w| w / total).collect(),
        })
    }

    /// Normalizes `exp(log_weights)` with a max shift; `-inf` entries get 0.
    pub fn from_log_weights(log_weights: &[f64]) -> Result<Self> {
        let max = log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::contract(
                "no finite log-weight: distribution has no support",
            ));
        }
        let weights: Vec<f64> = log_weights.iter().map(|lw| (lw - max).exp()).collect();
        Self::from_weights(&weights)
    }

    pub fn uniform_over(awake: &AwakeMask) -> Result<Self> {
        if awake.awake_count() == 0 {
            return Err(Error::contract("no awake point to put mass on"));
        }
        let mass = 1.0 / awake.awake_count() as f64;
        Ok(Self {
            values: awake.bits().iter().map(|b| if *b { mass } else { 0.0 }).collect(),
        })
    }

    pub fn point_mass(n: usize, i: usize) -> Self {
        let mut values = vec![0.0; n];
        values[i] = 1.0;
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.values.iter().zip(other).map(|(p, x)| p * x).sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// True when no mass sits on a labeled point.
    pub fn respects(&self, awake: &AwakeMask) -> bool {
        self.values.len() == awake.len()
            && self
                .values
                .iter()
                .enumerate()
                .all(|(i, p)| *p == 0.0 || awake.is_awake(i))
    }

    /// Total variation distance.
    pub fn total_variation(&self, other: &ProbabilityVector) -> f64 {
        0.5 * self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// `r_i = (<p, l> - l_i) * I_i`.
pub fn instantaneous_regret(
    p: &ProbabilityVector,
    loss: &LossVector,
    awake: &AwakeMask,
) -> Result<Vec<f64>> {
    Error::check_len(p.len(), loss.len())?;
    Error::check_len(p.len(), awake.len())?;
    if !p.respects(awake) {
        return Err(Error::contract("distribution puts mass on a labeled point"));
    }
    let mixture = p.dot(loss.values());
    Ok(loss
        .values()
        .iter()
        .enumerate()
        .map(|(i, l)| (mixture - l) * awake.indicator(i))
        .collect())
}

/// Batch regret with scaled inclusion probabilities `rho` (summing to `b`):
/// `r_i = (<rho, l>/b - l_i) * I_i`.
pub fn batch_instantaneous_regret(
    rho: &[f64],
    loss: &LossVector,
    b: usize,
    awake: &AwakeMask,
) -> Result<Vec<f64>> {
    Error::check_len(rho.len(), loss.len())?;
    Error::check_len(rho.len(), awake.len())?;
    if b == 0 {
        return Err(Error::contract("batch size must be at least 1"));
    }
    if let Some(r) = rho.iter().find(|r| !(-1e-12..=1.0 + 1e-12).contains(*r)) {
        return Err(Error::contract(format!("inclusion probability {r} outside [0, 1]")));
    }
    let total: f64 = rho.iter().sum();
    if (total - b as f64).abs() > 1e-9 {
        return Err(Error::contract(format!(
            "inclusion probabilities sum to {total}, expected {b}"
        )));
    }
    let mixture = rho
        .iter()
        .zip(loss.values())
        .map(|(r, l)| r * l)
        .sum::<f64>()
        / b as f64;
    Ok(loss
        .values()
        .iter()
        .enumerate()
        .map(|(i, l)| (mixture - l) * awake.indicator(i))
        .collect())
}

/// Outcome of [`solve_fixed_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub alpha: f64,
    /// `|alpha - map(alpha)|`.
    pub residual: f64,
    pub evaluations: usize,
}

pub const FIXED_POINT_TOL: f64 = 1e-10;
const FIXED_POINT_MAX_ITER: usize = 60;

/// Secant iterations stop once `|alpha - map(alpha)|` is this small.
const SECANT_TOL: f64 = 1e-12;
const SECANT_MAX_ITER: usize = 8;

/// Like [`solve_fixed_point`], but starts with secant steps from `guess`.
/// Falls back to the bracketing solver when the secant iterates leave
/// `[lo, hi]` or stall.
pub fn solve_fixed_point_near<F>(mut map: F, lo: f64, hi: f64, guess: f64) -> Result<FixedPoint>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut evaluations = 0;
    let mut x0 = guess.clamp(lo, hi);
    let mut g0 = x0 - map(x0)?;
    evaluations += 1;
    let mut best = (x0, g0);
    let mut x1 = x0 - g0;
    for _ in 0..SECANT_MAX_ITER {
        if best.1.abs() <= SECANT_TOL {
            return Ok(FixedPoint {
                alpha: best.0,
                residual: best.1.abs(),
                evaluations,
            });
        }
        if !(x1 >= lo && x1 <= hi) || x1 == x0 {
            break;
        }
        let g1 = x1 - map(x1)?;
        evaluations += 1;
        if g1.abs() < best.1.abs() {
            best = (x1, g1);
        }
        let step = g1 * (x1 - x0) / (g1 - g0);
        (x0, g0) = (x1, g1);
        x1 -= step;
    }
    let mut fp = solve_fixed_point(map, lo, hi)?;
    fp.evaluations += evaluations;
    Ok(fp)
}

/// Finds `alpha` in `[lo, hi]` with `alpha = map(alpha)`, for a continuous
/// `map` taking values in `[lo, hi]` (so `g(alpha) = alpha - map(alpha)`
/// changes sign over the bracket).
///
/// Bracketing regula falsi with the Illinois modification; a bisection step
/// is forced whenever two consecutive steps fail to halve the bracket, so
/// the bracket width is at least as small as plain bisection after every
/// pair of steps.
pub fn solve_fixed_point<F>(mut map: F, lo: f64, hi: f64) -> Result<FixedPoint>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut evaluations = 0;
    let mut g = |a: f64, evals: &mut usize| -> Result<f64> {
        *evals += 1;
        Ok(a - map(a)?)
    };
    let (mut a, mut b) = (lo, hi);
    let mut ga = g(a, &mut evaluations)?;
    if ga.abs() <= 1e-13 || a == b {
        return Ok(FixedPoint {
            alpha: a,
            residual: ga.abs(),
            evaluations,
        });
    }
    let mut gb = g(b, &mut evaluations)?;
    if gb.abs() <= 1e-13 {
        return Ok(FixedPoint {
            alpha: b,
            residual: gb.abs(),
            evaluations,
        });
    }
    if ga > 0.0 || gb < 0.0 {
        return Err(Error::Numerical {
            message: format!("fixed-point map does not bracket a root on [{lo}, {hi}]"),
            residual: ga.abs().min(gb.abs()),
        });
    }

    let mut best = if ga.abs() < gb.abs() { (a, ga) } else { (b, gb) };
    let mut last_side = 0i8;
    let mut width_two_ago = f64::INFINITY;
    let mut width_prev = b - a;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let width = b - a;
        let force_bisect = width > 0.5 * width_two_ago;
        let c = if force_bisect {
            0.5 * (a + b)
        } else {
            let c = (a * gb - b * ga) / (gb - ga);
            if c > a && c < b {
                c
            } else {
                0.5 * (a + b)
            }
        };
        let gc = g(c, &mut evaluations)?;
        if gc.abs() < best.1.abs() {
            best = (c, gc);
        }
        if gc.abs() <= 1e-13 {
            break;
        }
        if gc < 0.0 {
            a = c;
            ga = gc;
            if last_side == -1 {
                gb *= 0.5;
            }
            last_side = -1;
        } else {
            b = c;
            gb = gc;
            if last_side == 1 {
                ga *= 0.5;
            }
            last_side = 1;
        }
        width_two_ago = width_prev;
        width_prev = width;
        if b - a <= 1e-15 {
            break;
        }
    }
    if best.1.abs() > FIXED_POINT_TOL {
        // The bracket has collapsed: report its midpoint like bisection would.
        let mid = 0.5 * (a + b);
        let gm = g(mid, &mut evaluations)?;
        if gm.abs() < best.1.abs() {
            best = (mid, gm);
        }
    }
    if best.1.abs() > FIXED_POINT_TOL {
        return Err(Error::Numerical {
            message: "optimistic fixed point did not converge".into(),
            residual: best.1.abs(),
        });
    }
    Ok(FixedPoint {
        alpha: best.0,
        residual: best.1.abs(),
        evaluations,
    })
}
