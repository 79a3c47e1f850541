//! Weighted rank tests for equality of survival curves.
//!
//! At each pooled event time `t_i` with `n_i` subjects at risk and `d_i`
//! events, group `k` contributes `w_i (d_ki - n_ki d_i / n_i)` to its
//! observed-minus-expected score. The scores of the first `K - 1` groups are
//! compared against their hypergeometric covariance with a quadratic form
//! that is asymptotically chi-square with `K - 1` degrees of freedom.

pub mod calibration;
pub mod chisq;
pub mod permutation;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surv::GroupedSample;

pub use calibration::{simulate_null_calibration, CalibrationResult};
pub use chisq::chi_square_sf;
pub use permutation::{permutation_pvalue, PermutationMode, PermutationResult};

/// Weight family for the rank test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightScheme {
    /// `w = 1`
    #[serde(rename = "logrank")]
    LogRank,
    /// `w = n_i`, the modified Wilcoxon test.
    #[serde(rename = "gehan")]
    Gehan,
    /// `w = sqrt(n_i)`
    #[serde(rename = "tarone-ware")]
    TaroneWare,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 3] = [WeightScheme::LogRank, WeightScheme::Gehan, WeightScheme::TaroneWare];

    /// Weight at a pooled event time with `n_at_risk` subjects at risk.
    pub fn weight(self, n_at_risk: usize) -> f64 {
        match self {
            WeightScheme::LogRank => 1.0,
            WeightScheme::Gehan => n_at_risk as f64,
            WeightScheme::TaroneWare => (n_at_risk as f64).sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightScheme::LogRank => "logrank",
            WeightScheme::Gehan => "gehan",
            WeightScheme::TaroneWare => "tarone-ware",
        }
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "logrank" | "log-rank" => Ok(WeightScheme::LogRank),
            "gehan" | "wilcoxon" => Ok(WeightScheme::Gehan),
            "tarone-ware" | "taroneware" => Ok(WeightScheme::TaroneWare),
            other => Err(Error::InvalidArgument(format!("unknown weight scheme {other}"))),
        }
    }
}

/// Pooled and per-group counts at one pooled event time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiskTableRow {
    pub time: f64,
    pub n_total: usize,
    pub d_total: usize,
    /// Subjects at risk in each group.
    pub at_risk: Vec<usize>,
    /// Events in each group.
    pub events: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankTestResult {
    pub scheme: WeightScheme,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Weighted observed-minus-expected score of every group; sums to zero.
    pub numerator: Vec<f64>,
    /// Covariance of the scores of the first `K - 1` groups.
    pub variance: Vec<Vec<f64>>,
    pub table: Vec<RiskTableRow>,
}

/// One row per distinct pooled time with at least one event.
///
/// Times that carry only censorings produce no row but shrink later risk
/// sets.
pub fn build_risk_table(sample: &GroupedSample) -> Result<Vec<RiskTableRow>> {
    let k = sample.group_count();
    if k < 2 {
        return Err(Error::NeedTwoGroups);
    }
    let mut sorted: Vec<_> = sample.observations().to_vec();
    sorted.sort_by(|a, b| a.time.total_cmp(&b.time));

    let mut at_risk = sample.group_sizes();
    let mut n_total = sorted.len();
    let mut rows = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].time;
        let mut events = vec![0usize; k];
        let mut leaving = vec![0usize; k];
        while i < sorted.len() && sorted[i].time == t {
            let obs = &sorted[i];
            leaving[obs.group] += 1;
            if obs.event {
                events[obs.group] += 1;
            }
            i += 1;
        }
        let d_total: usize = events.iter().sum();
        if d_total > 0 {
            rows.push(RiskTableRow { time: t, n_total, d_total, at_risk: at_risk.clone(), events });
        }
        for (n, gone) in at_risk.iter_mut().zip(&leaving) {
            *n -= gone;
        }
        n_total -= leaving.iter().sum::<usize>();
    }
    Ok(rows)
}

// Variance of one row's event count in a group, before weighting and
// before the n_k/n factors: d (n - d) / (n - 1), zero when n = 1.
pub(crate) fn hypergeometric_spread(n: usize, d: usize) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (d * (n - d)) as f64 / (n - 1) as f64
    }
}

/// `w (d_k - n_k d / n)`, formed as `w (n d_k - n_k d) / n` so the
/// integer part is exact and Gehan scores (`w = n`) stay integral.
pub(crate) fn weighted_excess(w: f64, n: usize, d: usize, n_group: usize, d_group: usize) -> f64 {
    w * ((n * d_group) as f64 - (n_group * d) as f64) / n as f64
}

pub(crate) fn two_group_statistic(score: f64, variance: f64) -> f64 {
    if variance == 0.0 {
        // Every row is deterministic, so the score is zero as well.
        0.0
    } else {
        score * score / variance
    }
}

/// Weighted rank test of equal survival across all groups of `sample`.
///
/// With two groups and zero variance (every row deterministic) the
/// statistic is 0. With more groups a singular covariance is an error.
#[allow(clippy::needless_range_loop)]
pub fn weighted_rank_test(sample: &GroupedSample, scheme: WeightScheme) -> Result<RankTestResult> {
    let table = build_risk_table(sample)?;
    if table.is_empty() {
        return Err(Error::NoEvents);
    }
    let k = sample.group_count();
    let m = k - 1;
    let mut numerator = vec![0.0; k];
    let mut variance = vec![vec![0.0; m]; m];

    for row in &table {
        let (n, d) = (row.n_total, row.d_total);
        let w = scheme.weight(n);
        for g in 0..k {
            numerator[g] += weighted_excess(w, n, d, row.at_risk[g], row.events[g]);
        }
        let spread = hypergeometric_spread(n, d);
        if spread == 0.0 {
            continue;
        }
        let nn = (n * n) as f64;
        for a in 0..m {
            for b in 0..m {
                let cov = if a == b {
                    (row.at_risk[a] * (n - row.at_risk[a])) as f64 / nn
                } else {
                    -((row.at_risk[a] * row.at_risk[b]) as f64) / nn
                };
                variance[a][b] += w * w * spread * cov;
            }
        }
    }

    let statistic = if k == 2 {
        two_group_statistic(numerator[0], variance[0][0])
    } else {
        quadratic_form(&variance, &numerator[..m])?
    };
    let df = m;
    Ok(RankTestResult {
        scheme,
        statistic,
        df,
        p_value: chi_square_sf(statistic, df)?,
        numerator,
        variance,
        table,
    })
}

/// `u' V^{-1} u` through a Cholesky factorization of the symmetric positive
/// semi-definite `V`.
fn quadratic_form(v: &[Vec<f64>], u: &[f64]) -> Result<f64> {
    let m = u.len();
    let scale = (0..m).map(|i| v[i][i]).fold(0.0, f64::max);
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::SingularCovariance);
    }
    let tol = scale * 1e-10;
    let mut l = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..=i {
            let s: f64 = (0..j).map(|p| l[i][p] * l[j][p]).sum();
            if i == j {
                let pivot = v[i][i] - s;
                if pivot <= tol {
                    return Err(Error::SingularCovariance);
                }
                l[i][i] = pivot.sqrt();
            } else {
                l[i][j] = (v[i][j] - s) / l[j][j];
            }
        }
    }
    // forward substitution: L y = u, statistic = |y|^2
    let mut y = vec![0.0; m];
    for i in 0..m {
        let s: f64 = (0..i).map(|p| l[i][p] * y[p]).sum();
        y[i] = (u[i] - s) / l[i][i];
    }
    Ok(y.iter().map(|x| x * x).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two(a: &[f64], b: &[f64]) -> GroupedSample {
        GroupedSample::from_event_times(vec![("A", a.to_vec()), ("B", b.to_vec())]).unwrap()
    }

    #[test]
    fn interleaved_risk_table() {
        let rows = build_risk_table(&two(&[1.0, 3.0], &[2.0, 4.0])).unwrap();
        let got: Vec<_> = rows.iter().map(|r| (r.time, r.n_total, r.at_risk[0], r.d_total)).collect();
        assert_eq!(got, vec![(1.0, 4, 2, 1), (2.0, 3, 1, 1), (3.0, 2, 1, 1), (4.0, 1, 0, 1)]);
    }

    #[test]
    fn complete_tie_single_row() {
        let rows = build_risk_table(&two(&[1.0], &[1.0])).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].n_total, rows[0].d_total), (2, 2));
        assert_eq!(rows[0].events, vec![1, 1]);
    }

    #[test]
    fn censored_time_leaves_no_row() {
        let s = GroupedSample::from_groups(vec![
            ("A", vec![(1.0, true), (2.0, false)]),
            ("B", vec![(3.0, true)]),
        ])
        .unwrap();
        let rows = build_risk_table(&s).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].time, rows[0].n_total), (1.0, 3));
        assert_eq!((rows[1].time, rows[1].n_total), (3.0, 1));
        assert_eq!(rows[1].at_risk, vec![0, 1]);
    }

    #[test]
    fn one_group_is_rejected() {
        let s = GroupedSample::from_event_times(vec![("A", vec![1.0])]).unwrap();
        assert_eq!(build_risk_table(&s), Err(Error::NeedTwoGroups));
    }

    #[test]
    fn all_censored_has_no_events() {
        let s =
            GroupedSample::from_groups(vec![("A", vec![(1.0, false)]), ("B", vec![(2.0, false)])]).unwrap();
        assert_eq!(weighted_rank_test(&s, WeightScheme::LogRank), Err(Error::NoEvents));
    }

    #[test]
    fn identical_groups_give_zero() {
        for scheme in WeightScheme::ALL {
            let r = weighted_rank_test(&two(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), scheme).unwrap();
            assert_eq!(r.statistic, 0.0);
            assert_eq!(r.p_value, 1.0);
            assert_eq!(r.df, 1);
        }
    }

    #[test]
    fn complete_tie_is_not_an_error_for_two_groups() {
        let r = weighted_rank_test(&two(&[1.0], &[1.0]), WeightScheme::TaroneWare).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn three_groups_with_a_degenerate_group() {
        // C is censored before every event, so its row and column vanish.
        let s = GroupedSample::from_groups(vec![
            ("A", vec![(1.0, true), (3.0, true)]),
            ("B", vec![(2.0, true), (4.0, true)]),
            ("C", vec![(0.5, false)]),
        ])
        .unwrap();
        assert_eq!(weighted_rank_test(&s, WeightScheme::LogRank), Err(Error::SingularCovariance));
    }

    #[test]
    fn three_groups_scores_sum_to_zero() {
        let s = GroupedSample::from_event_times(vec![
            ("A", vec![1.0, 4.0, 6.0, 7.0]),
            ("B", vec![2.0, 3.0, 8.0]),
            ("C", vec![0.5, 5.0, 9.0, 10.0]),
        ])
        .unwrap();
        for scheme in WeightScheme::ALL {
            let r = weighted_rank_test(&s, scheme).unwrap();
            assert_eq!(r.df, 2);
            assert!(r.numerator.iter().sum::<f64>().abs() < 1e-9);
            assert!(r.statistic >= 0.0);
            assert!((r.p_value - chi_square_sf(r.statistic, 2).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for scheme in WeightScheme::ALL {
            assert_eq!(scheme.name().parse::<WeightScheme>().unwrap(), scheme);
        }
        assert!("fleming".parse::<WeightScheme>().is_err());
    }
}
