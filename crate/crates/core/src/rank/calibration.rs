//! Monte Carlo type-I error check of the asymptotic rank test.
//!
//! Each replicate draws two groups from the same discrete uniform
//! distribution on the 19 Ishak inflammation grades `0..=18`, with every
//! subject an event. Replicate `r` uses the ChaCha8 stream `(seed, r)`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::permutation::replicate_rng;
use super::{weighted_rank_test, WeightScheme};
use crate::error::{Error, Result};
use crate::surv::{GroupedSample, Observation};

/// Highest grade of the simulated ordinal scale.
pub const NULL_SCALE_MAX: u32 = 18;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationResult {
    pub scheme: WeightScheme,
    pub n_per_group: usize,
    pub reps: u64,
    pub alpha: f64,
    pub seed: u64,
    pub rejections: u64,
    pub rejection_rate: f64,
    /// Binomial standard error of the rejection rate.
    pub standard_error: f64,
}

fn null_replicate(n_per_group: usize, seed: u64, replicate: u64) -> GroupedSample {
    let mut rng = replicate_rng(seed, replicate);
    let observations = (0..2 * n_per_group)
        .map(|i| Observation::event(f64::from(rng.gen_range(0..=NULL_SCALE_MAX)), i / n_per_group))
        .collect();
    GroupedSample::new(vec!["X".into(), "Y".into()], observations)
        .expect("simulated groups are non-empty with valid times")
}

/// Fraction of null datasets the asymptotic test rejects at `alpha`.
///
/// `alpha` may be 1, which rejects every replicate with `p < 1`.
pub fn simulate_null_calibration(
    n_per_group: usize,
    reps: u64,
    scheme: WeightScheme,
    alpha: f64,
    seed: u64,
) -> Result<CalibrationResult> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    if n_per_group < 2 {
        return Err(Error::InvalidArgument("n_per_group must be at least 2".into()));
    }
    if reps < 100 {
        return Err(Error::InvalidArgument("reps must be at least 100".into()));
    }
    let rejections = (0..reps)
        .into_par_iter()
        .map(|r| {
            let sample = null_replicate(n_per_group, seed, r);
            // Every subject is an event, so the test cannot fail; treat a
            // failure as a non-rejection all the same.
            match weighted_rank_test(&sample, scheme) {
                Ok(res) => u64::from(res.p_value < alpha),
                Err(_) => 0,
            }
        })
        .sum::<u64>();
    let rate = rejections as f64 / reps as f64;
    Ok(CalibrationResult {
        scheme,
        n_per_group,
        reps,
        alpha,
        seed,
        rejections,
        rejection_rate: rate,
        standard_error: (rate * (1.0 - rate) / reps as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_arguments() {
        for alpha in [0.0, 1.5, -0.1, f64::NAN] {
            assert!(matches!(
                simulate_null_calibration(10, 100, WeightScheme::LogRank, alpha, 1),
                Err(Error::InvalidAlpha(_))
            ));
        }
        assert!(simulate_null_calibration(1, 100, WeightScheme::LogRank, 0.05, 1).is_err());
        assert!(simulate_null_calibration(5, 99, WeightScheme::LogRank, 0.05, 1).is_err());
    }

    #[test]
    fn alpha_one_rejects_every_informative_replicate() {
        for scheme in WeightScheme::ALL {
            let res = simulate_null_calibration(2, 100, scheme, 1.0, 3).unwrap();
            let below_one = (0..100)
                .filter(|&r| weighted_rank_test(&null_replicate(2, 3, r), scheme).unwrap().p_value < 1.0)
                .count() as u64;
            assert_eq!(res.rejections, below_one);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = simulate_null_calibration(10, 300, WeightScheme::TaroneWare, 0.05, 42).unwrap();
        let b = simulate_null_calibration(10, 300, WeightScheme::TaroneWare, 0.05, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn replicates_stay_on_the_scale() {
        let s = null_replicate(30, 9, 4);
        assert_eq!(s.group_sizes(), vec![30, 30]);
        assert!(s.observations().iter().all(|o| o.time >= 0.0 && o.time <= 18.0 && o.time.fract() == 0.0));
    }
}
