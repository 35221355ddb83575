//! Medians across repetitions and the paired one-tailed Wilcoxon
//! signed-rank test used to compare GP and GSGP across datasets.
//!
//! Zero differences are dropped and tied absolute differences receive
//! average ranks. For up to [`EXACT_LIMIT`] nonzero pairs the p-value comes
//! from the exact null distribution (every sign assignment of the observed
//! ranks, counted by dynamic programming — identical to enumerating all
//! 2^n assignments); above that a normal approximation with tie correction
//! and continuity correction is used.

use crate::error::{Error, Result};
use statrs::distribution::{ContinuousCDF, Normal};

/// Midpoint-convention median: for even counts, the mean of the two middle
/// order statistics.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput("median of an empty slice"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Largest sample size for which the exact null distribution is used.
pub const EXACT_LIMIT: usize = 25;

/// Minimum number of nonzero differences the test accepts.
pub const MIN_NONZERO: usize = 5;

/// Per-dataset paired measurements of the two methods, taken at the same
/// noise level on the same measure.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairedSample {
    pairs: Vec<(f64, f64)>,
}

impl PairedSample {
    pub fn new(pairs: Vec<(f64, f64)>) -> Self {
        PairedSample { pairs }
    }

    /// `gp` first, `gsgp` second.
    pub fn push(&mut self, gp: f64, gsgp: f64) {
        self.pairs.push((gp, gsgp));
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Signed differences `gsgp − gp`.
    pub fn differences(&self) -> Vec<f64> {
        self.pairs.iter().map(|(gp, gsgp)| gsgp - gp).collect()
    }
}

/// One-tailed alternative hypotheses, named from GSGP's side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alternative {
    /// GSGP values are smaller than GP values.
    GsgpLess,
    /// GSGP values are larger than GP values.
    GsgpGreater,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PvalueMode {
    /// Exact for n ≤ [`EXACT_LIMIT`], normal approximation above.
    Auto,
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonOutcome {
    /// W⁺: the sum of ranks of positive differences.
    pub statistic: f64,
    pub p_value: f64,
    /// Number of pairs kept after dropping zero differences.
    pub n_used: usize,
    pub exact: bool,
}

/// Paired one-tailed Wilcoxon signed-rank test.
pub fn wilcoxon_one_tailed(
    sample: &PairedSample,
    alternative: Alternative,
) -> Result<WilcoxonOutcome> {
    wilcoxon_one_tailed_mode(sample, alternative, PvalueMode::Auto)
}

pub fn wilcoxon_one_tailed_mode(
    sample: &PairedSample,
    alternative: Alternative,
    mode: PvalueMode,
) -> Result<WilcoxonOutcome> {
    let diffs: Vec<f64> = sample
        .differences()
        .into_iter()
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n < MIN_NONZERO {
        return Err(Error::TooFewNonzeroDifferences {
            found: n,
            min: MIN_NONZERO,
        });
    }

    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();

    let exact = match mode {
        PvalueMode::Auto => n <= EXACT_LIMIT,
        PvalueMode::Exact => true,
        PvalueMode::NormalApprox => false,
    };
    let p_value = if exact {
        exact_p(&ranks, w_plus, alternative)
    } else {
        normal_p(&ranks, w_plus, alternative)
    };
    Ok(WilcoxonOutcome {
        statistic: w_plus,
        p_value,
        n_used: n,
        exact,
    })
}

/// Ranks of `values` (1-based), assigning tied entries the average of the
/// ranks they span.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share ranks i+1..=j+1
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

// Exact tail probability of W⁺ under the null: every one of the 2^n sign
// assignments of the observed ranks is equally likely. Ranks are doubled to
// integers (ties produce .5 ranks) and the distribution of the doubled sum
// is built by dynamic programming.
fn exact_p(ranks: &[f64], w_plus: f64, alternative: Alternative) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0u128; total + 1];
    counts[0] = 1;
    for &dr in &doubled {
        for s in (dr..=total).rev() {
            counts[s] += counts[s - dr];
        }
    }
    let w2 = (2.0 * w_plus).round() as usize;
    let all = 2f64.powi(ranks.len() as i32);
    match alternative {
        Alternative::GsgpLess => counts[..=w2].iter().map(|&c| c as f64).sum::<f64>() / all,
        Alternative::GsgpGreater => counts[w2..].iter().map(|&c| c as f64).sum::<f64>() / all,
    }
}

fn normal_p(ranks: &[f64], w_plus: f64, alternative: Alternative) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    // tie correction: Σ(t³ − t)/48 over groups of tied ranks
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += (t * t * t - t) / 48.0;
        i = j + 1;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term;
    let sd = var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    match alternative {
        Alternative::GsgpLess => normal.cdf((w_plus + 0.5 - mean) / sd),
        Alternative::GsgpGreater => 1.0 - normal.cdf((w_plus - 0.5 - mean) / sd),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn median_singleton() {
        assert_eq!(median(&[3.0]).unwrap(), 3.0);
    }

    #[test]
    fn median_even_count_uses_midpoint() {
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 2.5);
    }

    #[test]
    fn median_is_an_order_statistic() {
        assert_eq!(median(&[5.0, 1.0, 3.0]).unwrap(), 3.0);
    }

    #[test]
    fn median_rejects_empty() {
        assert!(median(&[]).is_err());
    }

    #[test]
    fn all_favorable_differences_give_exact_tail_mass() {
        // five pairs, gsgp strictly above gp, no ties in magnitude
        let pairs = vec![
            (1.0, 2.0),
            (1.0, 3.0),
            (1.0, 4.5),
            (1.0, 6.0),
            (1.0, 9.0),
        ];
        let out =
            wilcoxon_one_tailed(&PairedSample::new(pairs.clone()), Alternative::GsgpGreater)
                .unwrap();
        assert!(out.exact);
        assert_eq!(out.statistic, 15.0);
        assert_eq!(out.p_value, 1.0 / 32.0);

        // mirrored: gsgp strictly below gp under the GsgpLess alternative
        let mirrored: Vec<(f64, f64)> = pairs.iter().map(|&(gp, gsgp)| (gsgp, gp)).collect();
        let out = wilcoxon_one_tailed(&PairedSample::new(mirrored), Alternative::GsgpLess).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_eq!(out.p_value, 1.0 / 32.0);
    }

    #[test]
    fn symmetric_differences_sit_at_distribution_center() {
        // identical magnitudes with opposite signs: W⁺ = n(n+1)/4 exactly
        let pairs = vec![
            (0.0, 1.0),
            (1.0, 0.0),
            (0.0, 2.0),
            (2.0, 0.0),
            (0.0, 3.0),
            (3.0, 0.0),
        ];
        let sample = PairedSample::new(pairs);
        let less = wilcoxon_one_tailed(&sample, Alternative::GsgpLess).unwrap();
        let greater = wilcoxon_one_tailed(&sample, Alternative::GsgpGreater).unwrap();
        assert!(less.p_value >= 0.5);
        assert!(greater.p_value >= 0.5);
    }

    #[test]
    fn all_zero_differences_error() {
        let sample = PairedSample::new(vec![(1.0, 1.0); 8]);
        match wilcoxon_one_tailed(&sample, Alternative::GsgpLess) {
            Err(Error::TooFewNonzeroDifferences { found: 0, min: 5 }) => {}
            other => panic!("expected too-few-differences, got {other:?}"),
        }
    }

    #[test]
    fn tail_probabilities_cover_the_point_mass() {
        let mut r = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..200 {
            let sample = PairedSample::new(
                (0..9)
                    .map(|_| (r.random_range(-1.0..=1.0), r.random_range(-1.0..=1.0)))
                    .collect(),
            );
            let less = wilcoxon_one_tailed(&sample, Alternative::GsgpLess).unwrap();
            let greater = wilcoxon_one_tailed(&sample, Alternative::GsgpGreater).unwrap();
            // P(W ≤ w) + P(W ≥ w) = 1 + P(W = w) ≥ 1 on the discrete null
            assert!(less.p_value + greater.p_value >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn exact_p_is_rank_based_only() {
        // strictly monotone transforms of |d| that keep the signs leave the
        // exact p unchanged
        let base = PairedSample::new(vec![
            (0.0, 0.3),
            (0.0, -0.1),
            (0.0, 0.7),
            (0.0, 1.1),
            (0.0, -0.9),
            (0.0, 0.05),
        ]);
        let transformed = PairedSample::new(
            base.differences()
                .iter()
                .map(|d| (0.0, d.signum() * (d.abs().powi(3) + d.abs())))
                .collect(),
        );
        for alt in [Alternative::GsgpLess, Alternative::GsgpGreater] {
            let a = wilcoxon_one_tailed(&base, alt).unwrap();
            let b = wilcoxon_one_tailed(&transformed, alt).unwrap();
            assert_eq!(a.p_value, b.p_value);
        }
    }

    #[test]
    fn exact_and_normal_modes_agree_for_fifteen_pairs() {
        let mut r = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let sample = PairedSample::new(
                (0..15)
                    .map(|_| (r.random_range(0.0..=2.0), r.random_range(0.0..=2.0)))
                    .collect(),
            );
            for alt in [Alternative::GsgpLess, Alternative::GsgpGreater] {
                let exact =
                    wilcoxon_one_tailed_mode(&sample, alt, PvalueMode::Exact).unwrap();
                let approx =
                    wilcoxon_one_tailed_mode(&sample, alt, PvalueMode::NormalApprox).unwrap();
                assert!(
                    (exact.p_value - approx.p_value).abs() < 0.02,
                    "exact {} vs normal {}",
                    exact.p_value,
                    approx.p_value
                );
            }
        }
    }

    #[test]
    fn large_samples_switch_to_normal_approximation() {
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let sample = PairedSample::new(
            (0..40)
                .map(|_| (r.random_range(0.0..=1.0), r.random_range(0.0..=1.0)))
                .collect(),
        );
        let out = wilcoxon_one_tailed(&sample, Alternative::GsgpLess).unwrap();
        assert!(!out.exact);
        assert!(out.p_value > 0.0 && out.p_value < 1.0);
    }

    #[test]
    fn tied_magnitudes_get_average_ranks() {
        assert_eq!(
            average_ranks(&[0.5, 0.5, 1.0]),
            vec![1.5, 1.5, 3.0],
        );
        assert_eq!(
            average_ranks(&[2.0, 1.0, 2.0, 2.0]),
            vec![3.0, 1.0, 3.0, 3.0],
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn monotone_rescaling_preserves_exact_p(
                scale in 0.1f64..50.0,
                seed in 0u64..100,
            ) {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let diffs: Vec<f64> =
                    (0..8).map(|_| r.random_range(-1.0..=1.0)).collect();
                prop_assume!(diffs.iter().filter(|d| **d != 0.0).count() >= 5);
                let base = PairedSample::new(diffs.iter().map(|d| (0.0, *d)).collect());
                let scaled =
                    PairedSample::new(diffs.iter().map(|d| (0.0, *d * scale)).collect());
                let a = wilcoxon_one_tailed(&base, Alternative::GsgpGreater).unwrap();
                let b = wilcoxon_one_tailed(&scaled, Alternative::GsgpGreater).unwrap();
                prop_assert_eq!(a.p_value, b.p_value);
            }
        }
    }
}
