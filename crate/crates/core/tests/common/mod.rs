//! Reference computations for the integration tests. Nothing here calls
//! into the crate's estimators or tests; each oracle works from raw data.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(time, event)` per subject, one vector per group.
pub type Groups = Vec<Vec<(f64, bool)>>;

pub struct NaiveTest {
    pub numerator: Vec<f64>,
    pub variance: Vec<Vec<f64>>,
    pub statistic: f64,
}

/// Rank test by direct counting at every distinct event time, solved by
/// Gauss-Jordan elimination. Returns `None` when the covariance is singular
/// (more than two groups).
pub fn naive_rank_test(groups: &Groups, weight: impl Fn(f64) -> f64) -> Option<NaiveTest> {
    let k = groups.len();
    let mut times: Vec<f64> = groups.iter().flatten().filter(|(_, e)| *e).map(|(t, _)| *t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut numerator = vec![0.0; k];
    let mut variance = vec![vec![0.0; k - 1]; k - 1];
    for &t in &times {
        let n_k: Vec<f64> = groups.iter().map(|g| g.iter().filter(|(s, _)| *s >= t).count() as f64).collect();
        let d_k: Vec<f64> =
            groups.iter().map(|g| g.iter().filter(|(s, e)| *s == t && *e).count() as f64).collect();
        let n: f64 = n_k.iter().sum();
        let d: f64 = d_k.iter().sum();
        let w = weight(n);
        for g in 0..k {
            numerator[g] += w * (d_k[g] - n_k[g] * d / n);
        }
        if n > 1.0 {
            for a in 0..k - 1 {
                for b in 0..k - 1 {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    variance[a][b] += w * w * d * (n - d) / (n - 1.0) * (n_k[a] / n) * (delta - n_k[b] / n);
                }
            }
        }
    }
    let statistic = if k == 2 {
        if variance[0][0] == 0.0 {
            0.0
        } else {
            numerator[0] * numerator[0] / variance[0][0]
        }
    } else {
        let x = solve(&variance, &numerator[..k - 1])?;
        x.iter().zip(&numerator).map(|(a, b)| a * b).sum()
    };
    Some(NaiveTest { numerator, variance, statistic })
}

#[allow(clippy::needless_range_loop)]
fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let scale = (0..m).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    let mut aug: Vec<Vec<f64>> =
        a.iter().zip(b).map(|(row, &r)| row.iter().copied().chain([r]).collect()).collect();
    for col in 0..m {
        let pivot = (col..m).max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))?;
        if aug[pivot][col].abs() <= 1e-10 * scale || scale == 0.0 {
            return None;
        }
        aug.swap(col, pivot);
        let p = aug[col][col];
        aug[col].iter_mut().for_each(|v| *v /= p);
        for row in 0..m {
            if row != col {
                let f = aug[row][col];
                for c in 0..=m {
                    aug[row][c] -= f * aug[col][c];
                }
            }
        }
    }
    Some(aug.iter().map(|r| r[m]).collect())
}

/// `#{(a, b): b > a} - #{(a, b): a > b}`.
pub fn mann_whitney_difference(a: &[f64], b: &[f64]) -> i64 {
    let mut diff = 0i64;
    for &x in a {
        for &y in b {
            if y > x {
                diff += 1;
            } else if x > y {
                diff -= 1;
            }
        }
    }
    diff
}

/// Γ(df/2) by the recursions Γ(a+1) = aΓ(a), Γ(1) = 1, Γ(1/2) = √π.
pub fn gamma_half_integer(df: usize) -> f64 {
    let (mut g, mut a) = if df.is_multiple_of(2) { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while a < df as f64 / 2.0 {
        g *= a;
        a += 1.0;
    }
    g
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on
/// the Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Composite 20-point Gauss-Legendre rule over 256 panels.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rule = gauss_legendre(20);
    let panels = 256;
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let mid = a + h * (i as f64 + 0.5);
        let part: f64 = rule.iter().map(|&(x, w)| w * f(mid + 0.5 * h * x)).sum();
        total += 0.5 * h * part;
    }
    total
}

/// `P(χ²_df > x)` by quadrature of the gamma density after `t = u²`:
/// `∫_{√(x/2)}^∞ 2 u^{df-1} e^{-u²} du / Γ(df/2)`.
pub fn chi_square_sf_quadrature(x: f64, df: usize) -> f64 {
    let lo = (x / 2.0).sqrt();
    let hi = lo + 16.0;
    let p = df as i32 - 1;
    let f = move |u: f64| 2.0 * u.powi(p) * (-u * u).exp();
    integrate(f, lo, hi) / gamma_half_integer(df)
}

/// `erfc(z) = 2/√π ∫_z^∞ e^{-u²} du`.
pub fn erfc_quadrature(z: f64) -> f64 {
    2.0 / std::f64::consts::PI.sqrt() * integrate(|u| (-u * u).exp(), z, z + 16.0)
}

/// Random two-group integer-valued data with ties and optional censoring.
pub fn random_groups(rng: &mut ChaCha8Rng, max_n: usize, max_time: u32, censor_prob: f64) -> Groups {
    (0..2)
        .map(|_| {
            let n = rng.gen_range(1..=max_n);
            (0..n).map(|_| (f64::from(rng.gen_range(0..=max_time)), !rng.gen_bool(censor_prob))).collect()
        })
        .collect()
}

pub fn has_event(groups: &Groups) -> bool {
    groups.iter().flatten().any(|(_, e)| *e)
}
