//! Error and noise-robustness measures.
//!
//! NRMSE normalizes the RMSE by the dispersion of the targets, so 0 means a
//! perfect fit and 1 means the model performs like the constant
//! mean-of-targets predictor. On top of it sit two noise-sensitivity
//! measures comparing the error at noise level x% against the clean
//! baseline E₀:
//!
//! - `RIE = (Eₓ − E₀) / (1 + E₀)` — relative increase in error,
//! - `EIE = Eₓ / (1 + E₀)` — equalized increase in error,
//!
//! linked by the identity `EIE(x) = RIE(x) + EIE(0)`. Higher values mean
//! more sensitivity to that noise level.

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Normalized root mean squared error in its radical form:
/// `sqrt( Σ(yᵢ − fᵢ)² / Σ(yᵢ − ȳ)² )`.
pub fn nrmse(targets: &[f64], predictions: &[f64]) -> Result<f64> {
    if targets.len() != predictions.len() {
        return Err(Error::LengthMismatch {
            left: targets.len(),
            right: predictions.len(),
        });
    }
    if targets.len() < 2 {
        return Err(Error::TooFewInstances {
            got: targets.len(),
            min: 2,
        });
    }
    let n = targets.len() as f64;
    let mean = targets.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut denom = 0.0;
    for (y, f) in targets.iter().zip(predictions) {
        num += (y - f) * (y - f);
        denom += (y - mean) * (y - mean);
    }
    if denom == 0.0 {
        return Err(Error::DegenerateTargets);
    }
    Ok((num / denom).sqrt())
}

/// Relative increase in error at some noise level against the clean
/// baseline. Negative when noise happens to improve the error. The `+1`
/// in the denominator guards against division by zero.
pub fn rie(e_x: f64, e_0: f64) -> f64 {
    (e_x - e_0) / (1.0 + e_0)
}

/// Equalized increase in error: like [`rie`] but carrying the baseline
/// behaviour along, so `eie(e_x, e_0) = rie(e_x, e_0) + eie(e_0, e_0)`.
pub fn eie(e_x: f64, e_0: f64) -> f64 {
    e_x / (1.0 + e_0)
}

/// Noise levels are matched in permille to make float grids (config files,
/// CSV round-trips, arithmetic on the 2%-step grid) compare reliably.
pub fn noise_permille(r: f64) -> u32 {
    (r * 1000.0).round() as u32
}

/// NRMSE keyed by noise level. RIE/EIE become computable once the 0% entry
/// is present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ErrorByNoise {
    entries: BTreeMap<u32, f64>,
}

impl ErrorByNoise {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, level: f64, error: f64) {
        self.entries.insert(noise_permille(level), error);
    }

    pub fn get(&self, level: f64) -> Option<f64> {
        self.entries.get(&noise_permille(level)).copied()
    }

    /// The 0%-noise NRMSE, if recorded.
    pub fn baseline(&self) -> Option<f64> {
        self.entries.get(&0).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Levels in ascending order, as probabilities.
    pub fn levels(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.keys().map(|p| *p as f64 / 1000.0)
    }

    pub fn rie_at(&self, level: f64) -> Result<f64> {
        let e_0 = self
            .baseline()
            .ok_or_else(|| Error::MissingBaseline("error-by-noise map".into()))?;
        let e_x = self.get(level).ok_or_else(|| {
            Error::IncompleteRecords(format!("no NRMSE entry at noise level {level}"))
        })?;
        Ok(rie(e_x, e_0))
    }

    pub fn eie_at(&self, level: f64) -> Result<f64> {
        let e_0 = self
            .baseline()
            .ok_or_else(|| Error::MissingBaseline("error-by-noise map".into()))?;
        let e_x = self.get(level).ok_or_else(|| {
            Error::IncompleteRecords(format!("no NRMSE entry at noise level {level}"))
        })?;
        Ok(eie(e_x, e_0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nrmse_perfect_fit_is_zero() {
        let t = [1.0, 2.0, 3.0];
        assert_eq!(nrmse(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn nrmse_mean_predictor_is_one() {
        let t = [1.0, 2.0, 3.0, 10.0];
        let mean = t.iter().sum::<f64>() / t.len() as f64;
        let p = vec![mean; t.len()];
        assert_eq!(nrmse(&t, &p).unwrap(), 1.0);
    }

    #[test]
    fn nrmse_hand_case_unit() {
        assert_eq!(nrmse(&[0.0, 2.0], &[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn nrmse_can_exceed_one() {
        let v = nrmse(&[0.0, 2.0], &[0.0, 0.0]).unwrap();
        assert!((v - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn nrmse_rejects_degenerate_targets() {
        match nrmse(&[4.0, 4.0, 4.0], &[1.0, 2.0, 3.0]) {
            Err(Error::DegenerateTargets) => {}
            other => panic!("expected degenerate-target error, got {other:?}"),
        }
    }

    #[test]
    fn nrmse_rejects_length_mismatch() {
        assert!(nrmse(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn nrmse_scale_invariant_under_joint_scaling() {
        let t = [0.5, -1.5, 2.0, 4.0];
        let p = [0.0, 1.0, 2.5, 3.0];
        let base = nrmse(&t, &p).unwrap();
        let t10: Vec<f64> = t.iter().map(|v| v * 10.0).collect();
        let p10: Vec<f64> = p.iter().map(|v| v * 10.0).collect();
        let scaled = nrmse(&t10, &p10).unwrap();
        assert!((base - scaled).abs() < 1e-12);
    }

    #[test]
    fn rie_zero_when_error_unchanged() {
        assert_eq!(rie(0.7, 0.7), 0.0);
    }

    #[test]
    fn rie_hand_case() {
        assert!((rie(0.8, 0.5) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn rie_denominator_guard() {
        assert_eq!(rie(1.0, 0.0), 1.0);
    }

    #[test]
    fn eie_zero_error() {
        assert_eq!(eie(0.0, 0.3), 0.0);
    }

    #[test]
    fn eie_hand_case() {
        assert!((eie(0.5, 0.5) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn eie_decomposes_into_rie_plus_baseline() {
        let mut r = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100_000 {
            let e0 = r.random_range(0.0..=10.0);
            let ex = r.random_range(0.0..=10.0);
            let lhs = eie(ex, e0);
            let rhs = rie(ex, e0) + eie(e0, e0);
            assert!((lhs - rhs).abs() < 1e-12, "identity broke at e0={e0}, ex={ex}");
        }
    }

    #[test]
    fn measures_strictly_increase_in_noisy_error() {
        let e0 = 0.4;
        let mut prev_rie = f64::NEG_INFINITY;
        let mut prev_eie = f64::NEG_INFINITY;
        for i in 0..100 {
            let ex = i as f64 * 0.05;
            let r = rie(ex, e0);
            let e = eie(ex, e0);
            assert!(r > prev_rie && e > prev_eie);
            prev_rie = r;
            prev_eie = e;
        }
    }

    #[test]
    fn error_by_noise_requires_baseline() {
        let mut map = ErrorByNoise::new();
        map.insert(0.1, 0.8);
        assert!(map.rie_at(0.1).is_err());
        map.insert(0.0, 0.5);
        assert!((map.rie_at(0.1).unwrap() - 0.2).abs() < 1e-15);
        assert!((map.eie_at(0.1).unwrap() - 0.8 / 1.5).abs() < 1e-15);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn identity_holds_for_arbitrary_pairs(
                e0 in 0.0f64..100.0,
                ex in 0.0f64..100.0,
            ) {
                prop_assert!((eie(ex, e0) - (rie(ex, e0) + eie(e0, e0))).abs() < 1e-12);
            }
        }
    }
}
