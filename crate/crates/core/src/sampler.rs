//! Exact-size batch sampling: cap a distribution at `1/b`, scale it to
//! inclusion probabilities summing to `b`, and round them dependently.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::model::ProbabilityVector;

/// Entries this close to 0 or 1 are treated as integral.
const SNAP_TOL: f64 = 1e-12;
/// Allowed distance of the inclusion total from an integer.
const TOTAL_TOL: f64 = 1e-9;

/// One acquisition step.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchPlan {
    /// The capped distribution, every entry at most `1/b`.
    pub capped: ProbabilityVector,
    /// `b * capped`: inclusion probabilities summing to `b`.
    pub scaled: Vec<f64>,
    /// The sampled indices, ascending.
    pub chosen: Vec<usize>,
    /// Whether capping changed the input distribution.
    pub cap_was_active: bool,
}

fn support_size(p: &[f64]) -> usize {
    p.iter().filter(|v| **v > 0.0).count()
}

/// Projects `p` onto `{q : sum q = 1, max q <= 1/b}` by capping the largest
/// entries at `1/b` and scaling the rest proportionally.
///
/// Inputs already within the cap are returned unchanged, so the map is
/// idempotent.
pub fn cap_probabilities(p: &ProbabilityVector, b: usize) -> Result<ProbabilityVector> {
    let values = p.values();
    if b == 0 {
        return Err(Error::contract("batch size must be at least 1"));
    }
    let support = support_size(values);
    if b > support {
        return Err(Error::contract(format!(
            "cannot spread a batch of {b} over {support} points"
        )));
    }
    let cap = 1.0 / b as f64;
    if p.max() <= cap + 1e-15 {
        return Ok(p.clone());
    }

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &c| values[c].total_cmp(&values[a]).then(a.cmp(&c)));
    // tail_mass[m] = sum of the sorted entries from position m on, summed
    // smallest first.
    let mut tail_mass = vec![0.0; order.len() + 1];
    for m in (0..order.len()).rev() {
        tail_mass[m] = tail_mass[m + 1] + values[order[m]];
    }
    // The smallest number of capped entries that leaves a feasible tail.
    // m = b - 1 always works when the support has at least b points.
    let (capped_count, scale) = (0..b)
        .map(|m| (m, (1.0 - m as f64 * cap) / tail_mass[m]))
        .find(|&(m, scale)| values[order[m]] * scale <= cap)
        .unwrap_or_else(|| (b - 1, (1.0 - (b - 1) as f64 * cap) / tail_mass[b - 1]));

    let mut q = vec![0.0; values.len()];
    for (pos, &i) in order.iter().enumerate() {
        q[i] = if pos < capped_count {
            cap
        } else {
            (values[i] * scale).min(cap)
        };
    }
    ProbabilityVector::new(q)
}

fn snap(v: f64) -> f64 {
    if v.abs() <= SNAP_TOL {
        0.0
    } else if (1.0 - v).abs() <= SNAP_TOL {
        1.0
    } else {
        v
    }
}

fn is_integral(v: f64) -> bool {
    v == 0.0 || v == 1.0
}

/// Dependent rounding: returns exactly `sum(scaled)` distinct indices, each
/// included with probability `scaled[i]`.
///
/// Pairs of fractional entries are resolved in a uniformly random order;
/// each resolution makes at least one of the pair integral while keeping
/// both expectations, so at most `n - 1` steps are needed.
pub fn dep_round(scaled: &[f64], rng: &mut dyn RngCore) -> Result<Vec<usize>> {
    if let Some(v) = scaled
        .iter()
        .find(|v| !(-SNAP_TOL..=1.0 + SNAP_TOL).contains(*v))
    {
        return Err(Error::contract(format!("inclusion probability {v} outside [0, 1]")));
    }
    let total: f64 = scaled.iter().sum();
    let b = total.round();
    if (total - b).abs() > TOTAL_TOL {
        return Err(Error::contract(format!(
            "inclusion probabilities sum to {total}, which is not an integer"
        )));
    }
    let b = b as usize;

    let mut v: Vec<f64> = scaled.iter().map(|x| snap(*x)).collect();
    let mut order: Vec<usize> = (0..v.len()).filter(|&i| !is_integral(v[i])).collect();
    order.shuffle(rng);

    let mut pending = order.into_iter();
    let mut current = pending.next();
    for j in pending.by_ref() {
        let Some(i) = current else {
            current = Some(j);
            continue;
        };
        let alpha = (1.0 - v[i]).min(v[j]);
        let beta = v[i].min(1.0 - v[j]);
        if rng.random::<f64>() * (alpha + beta) < beta {
            v[i] += alpha;
            v[j] -= alpha;
        } else {
            v[i] -= beta;
            v[j] += beta;
        }
        v[i] = snap(v[i]);
        v[j] = snap(v[j]);
        current = match (is_integral(v[i]), is_integral(v[j])) {
            (false, _) => Some(i),
            (true, false) => Some(j),
            (true, true) => None,
        };
    }
    if let Some(i) = current {
        // A lone fractional entry can only be rounding drift.
        if v[i] < TOTAL_TOL {
            v[i] = 0.0;
        } else if v[i] > 1.0 - TOTAL_TOL {
            v[i] = 1.0;
        } else {
            return Err(Error::Numerical {
                message: format!("dependent rounding left entry {i} at {}", v[i]),
                residual: v[i].min(1.0 - v[i]),
            });
        }
    }

    let chosen: Vec<usize> = (0..v.len()).filter(|&i| v[i] == 1.0).collect();
    if chosen.len() != b {
        return Err(Error::Numerical {
            message: format!("dependent rounding chose {} indices, expected {b}", chosen.len()),
            residual: (chosen.len() as f64 - b as f64).abs(),
        });
    }
    Ok(chosen)
}

/// Cap, scale and round: `b` distinct indices from the support of `p`.
pub fn sample_batch(p: &ProbabilityVector, b: usize, rng: &mut dyn RngCore) -> Result<BatchPlan> {
    let capped = cap_probabilities(p, b)?;
    let cap_was_active = capped != *p;
    let scaled: Vec<f64> = capped.values().iter().map(|q| q * b as f64).collect();
    let chosen = dep_round(&scaled, rng)?;
    Ok(BatchPlan {
        capped,
        scaled,
        chosen,
        cap_was_active,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    fn inclusion_frequencies(scaled: &[f64], draws: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0usize; scaled.len()];
        for _ in 0..draws {
            for i in dep_round(scaled, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        counts.iter().map(|c| *c as f64 / draws as f64).collect()
    }

    #[test]
    fn feasible_input_is_unchanged() {
        let p = pv(&[0.4, 0.3, 0.3]);
        assert_eq!(cap_probabilities(&p, 2).unwrap(), p);
    }

    #[test]
    fn caps_the_top_entry() {
        let q = cap_probabilities(&pv(&[0.6, 0.3, 0.1]), 2).unwrap();
        for (a, e) in q.values().iter().zip([0.5, 0.375, 0.125]) {
            assert!((a - e).abs() < 1e-15, "{q:?}");
        }
    }

    #[test]
    fn uniform_with_full_batch() {
        let p = pv(&[0.25; 4]);
        let q = cap_probabilities(&p, 4).unwrap();
        assert_eq!(q.values(), &[0.25; 4]);
    }

    #[test]
    fn cascading_cap() {
        // capping the first entry pushes the second over the cap too
        let q = cap_probabilities(&pv(&[0.5, 0.3, 0.1, 0.1]), 3).unwrap();
        let third = 1.0 / 3.0;
        assert!((q.values()[0] - third).abs() < 1e-15);
        assert!((q.values()[1] - third).abs() < 1e-15);
        assert!((q.values()[2] - third / 2.0).abs() < 1e-15);
    }

    #[test]
    fn batch_larger_than_support() {
        assert!(matches!(
            cap_probabilities(&pv(&[0.5, 0.5, 0.0]), 3),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn integral_input_is_returned() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(dep_round(&[1.0, 1.0, 0.0], &mut rng).unwrap(), vec![0, 1]);
        }
    }

    #[test]
    fn fractional_total_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            dep_round(&[0.5, 0.7], &mut rng),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn equal_marginals() {
        for f in inclusion_frequencies(&[0.5; 4], 200_000, 7) {
            assert!((f - 0.5).abs() < 0.01, "{f}");
        }
    }

    #[test]
    fn mixed_marginals() {
        let freq = inclusion_frequencies(&[1.0, 0.6, 0.4], 200_000, 11);
        assert_eq!(freq[0], 1.0);
        assert!((freq[1] - 0.6).abs() < 0.01);
        assert!((freq[2] - 0.4).abs() < 0.01);
    }

    #[test]
    fn single_draw_follows_the_distribution() {
        let p = pv(&[0.1, 0.2, 0.7]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = [0usize; 3];
        let draws = 100_000;
        for _ in 0..draws {
            let plan = sample_batch(&p, 1, &mut rng).unwrap();
            assert!(!plan.cap_was_active);
            assert_eq!(plan.chosen.len(), 1);
            counts[plan.chosen[0]] += 1;
        }
        for (c, e) in counts.iter().zip([0.1, 0.2, 0.7]) {
            assert!((*c as f64 / draws as f64 - e).abs() < 0.01);
        }
    }

    #[test]
    fn uniform_three_subsets_are_equally_likely() {
        // 120 subsets of size 3 out of 10
        let p = pv(&[0.1; 10]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 240_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            let plan = sample_batch(&p, 3, &mut rng).unwrap();
            *counts.entry(plan.chosen).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 120);
        let expected = draws as f64 / 120.0;
        // 5 binomial standard deviations
        let slack = 5.0 * (expected * (1.0 - 1.0 / 120.0)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - expected).abs() < slack, "{c} vs {expected}");
        }
    }

    #[test]
    fn full_batch_takes_the_whole_support() {
        let p = pv(&[0.2, 0.0, 0.5, 0.3]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let plan = sample_batch(&p, 3, &mut rng).unwrap();
        assert_eq!(plan.chosen, vec![0, 2, 3]);
        assert!(plan.cap_was_active);
    }

    fn distribution() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(prop_oneof![Just(0.0), 1e-6f64..1.0, 0.5f64..50.0], 1..40)
            .prop_filter("needs mass", |w| w.iter().sum::<f64>() > 0.0)
            .prop_map(|w| {
                let total: f64 = w.iter().sum();
                w.iter().map(|x| x / total).collect()
            })
    }

    proptest! {
        #[test]
        fn capping_properties(p in distribution(), b_seed in 0usize..1000) {
            let p = ProbabilityVector::new(p).unwrap();
            let support = support_size(p.values());
            let b = 1 + b_seed % support;
            let q = cap_probabilities(&p, b).unwrap();
            let cap = 1.0 / b as f64;
            prop_assert!((q.values().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(q.max() <= cap + 1e-12);
            for i in 0..p.len() {
                for j in 0..p.len() {
                    if p.values()[i] > p.values()[j] {
                        prop_assert!(q.values()[i] >= q.values()[j]);
                    }
                }
            }
            prop_assert_eq!(cap_probabilities(&q, b).unwrap(), q);
        }

        #[test]
        fn rounding_returns_b_indices(p in distribution(), b_seed in 0usize..1000, seed in any::<u64>()) {
            let p = ProbabilityVector::new(p).unwrap();
            let b = 1 + b_seed % support_size(p.values());
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let plan = sample_batch(&p, b, &mut rng).unwrap();
            prop_assert_eq!(plan.chosen.len(), b);
            prop_assert!(plan.chosen.iter().all(|i| plan.scaled[*i] > 0.0));
            prop_assert!((plan.scaled.iter().sum::<f64>() - b as f64).abs() <= 1e-9);
        }
    }
}
