//! Per-round regret bookkeeping against fixed and time-varying comparators.

use crate::error::{Error, Result};
use crate::model::AwakeMask;

/// One recorded round. Regrets are stored only for points awake that round;
/// an absent index had zero regret by definition.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub batch: usize,
    /// `<p, l>` (or `<rho, l>/b` in batch mode).
    pub mixture_loss: f64,
    pub regrets: Vec<(usize, f64)>,
    pub n_labeled: usize,
    pub cap_active: bool,
    /// `||r_t - rhat_t||_inf^2`, when the caller tracks predictions.
    pub regret_gap_sq: Option<f64>,
    /// `||l_t - lhat_t||_inf^2` over awake points.
    pub loss_gap_sq: Option<f64>,
}

impl RoundRecord {
    pub fn regret_of(&self, i: usize) -> f64 {
        // Records are sorted by index.
        self.regrets
            .binary_search_by_key(&i, |(j, _)| *j)
            .map(|k| self.regrets[k].1)
            .unwrap_or(0.0)
    }
}

/// Cumulative regret ledger for one run of one learner.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    n: usize,
    records: Vec<RoundRecord>,
}

/// Variation summaries over a ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationReport {
    /// Sum of `||r_t - rhat_t||_inf^2`.
    pub regret_variation: f64,
    /// `4 * sum ||l_t - lhat_t||_inf^2`, the loss-based upper bound on the above.
    pub loss_variation_bound: f64,
    /// Sum over t >= 2 of `||r_t - r_{t-1}||_inf` for the recorded regrets.
    pub drift: f64,
}

impl RegretLedger {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            records: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends a round; `regret` is dense over the pool and is stored sparsely
    /// on the awake set.
    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        round: usize,
        batch: usize,
        mixture_loss: f64,
        regret: &[f64],
        awake: &AwakeMask,
        n_labeled: usize,
        cap_active: bool,
    ) -> Result<&mut RoundRecord> {
        Error::check_len(self.n, regret.len())?;
        Error::check_len(self.n, awake.len())?;
        let expected = self.records.last().map_or(1, |r| r.round + 1);
        if round != expected {
            return Err(Error::contract(format!(
                "ledger expected round {expected}, got {round}"
            )));
        }
        let regrets = awake.awake_indices().map(|i| (i, regret[i])).collect();
        self.records.push(RoundRecord {
            round,
            batch,
            mixture_loss,
            regrets,
            n_labeled,
            cap_active,
            regret_gap_sq: None,
            loss_gap_sq: None,
        });
        Ok(self.records.last_mut().expect("just pushed"))
    }

    /// Dense regret vector of the `k`-th recorded round (0-based).
    pub fn regret_vector(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, r) in &self.records[k].regrets {
            out[*i] = *r;
        }
        out
    }

    /// Running totals of regret against one comparator slot set per round.
    pub fn cumulative_series<S: AsRef<[usize]>>(&self, comparators: &[S]) -> Result<Vec<f64>> {
        Error::check_len(self.records.len(), comparators.len())?;
        let mut total = 0.0;
        let mut out = Vec::with_capacity(self.records.len());
        for (rec, slots) in self.records.iter().zip(comparators) {
            for &i in slots.as_ref() {
                if i >= self.n {
                    return Err(Error::Dimension {
                        expected: self.n,
                        got: i,
                    });
                }
                total += rec.regret_of(i);
            }
            out.push(total);
        }
        Ok(out)
    }

    /// `sum_t r_{t, i*_t}` for a single-point comparator sequence.
    pub fn cumulative_regret_against(&self, comparators: &[usize]) -> Result<f64> {
        let slots: Vec<[usize; 1]> = comparators.iter().map(|i| [*i]).collect();
        self.cumulative_batch_regret_against(&slots)
    }

    /// `sum_t sum_j r_{t, S*_{tj}}` for a batch comparator sequence.
    pub fn cumulative_batch_regret_against<S: AsRef<[usize]>>(&self, comparators: &[S]) -> Result<f64> {
        Ok(self
            .cumulative_series(comparators)?
            .last()
            .copied()
            .unwrap_or(0.0))
    }

    /// The `b` points with the largest total regret (ties to the lower
    /// index): the best fixed comparator in hindsight.
    pub fn best_fixed_comparator(&self, b: usize) -> Vec<usize> {
        let mut totals = vec![0.0; self.n];
        for rec in &self.records {
            for (i, r) in &rec.regrets {
                totals[*i] += r;
            }
        }
        top_k(&totals, b, |_| true)
    }

    /// Per round, the `b` awake points with the largest instantaneous regret.
    pub fn per_round_best(&self, b: usize) -> Vec<Vec<usize>> {
        self.records
            .iter()
            .map(|rec| {
                let mut scored: Vec<(usize, f64)> = rec.regrets.clone();
                scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
                scored.into_iter().take(b).map(|(i, _)| i).collect()
            })
            .collect()
    }

    pub fn variation(&self) -> VariationReport {
        let regret_variation = self.records.iter().filter_map(|r| r.regret_gap_sq).sum();
        let loss_variation_bound =
            4.0 * self.records.iter().filter_map(|r| r.loss_gap_sq).sum::<f64>();
        let mut drift = 0.0;
        for k in 1..self.records.len() {
            let prev = self.regret_vector(k - 1);
            let cur = self.regret_vector(k);
            drift += prev
                .iter()
                .zip(&cur)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        }
        VariationReport {
            regret_variation,
            loss_variation_bound,
            drift,
        }
    }

    pub fn cap_active_rounds(&self) -> usize {
        self.records.iter().filter(|r| r.cap_active).count()
    }
}

/// Indices of the `k` largest scores among those passing `keep`, ties broken
/// toward the lower index; returned in ascending index order.
pub(crate) fn top_k(scores: &[f64], k: usize, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|i| keep(*i)).collect();
    idx.sort_by(|a, b| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}
