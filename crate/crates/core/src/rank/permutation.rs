//! Permutation p-values for the two-group weighted rank test.
//!
//! Group labels are reassigned while group sizes are kept. Exhaustive mode
//! walks every subset of size `n_1`; Monte Carlo mode draws `reps` uniform
//! reassignments, each from its own ChaCha8 stream `(seed, replicate)`, so
//! the result does not depend on how replicates are spread over threads.

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hypergeometric_spread, two_group_statistic, weighted_excess, WeightScheme};
use crate::error::{Error, Result};
use crate::surv::GroupedSample;

/// Largest pooled sample accepted by exhaustive enumeration.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Relative slack when comparing a resampled statistic to the observed one,
/// so that assignments equal up to rounding count as "at least as extreme".
pub const STATISTIC_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationMode {
    Exhaustive,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermutationResult {
    pub mode: PermutationMode,
    pub p_value: f64,
    pub observed_statistic: f64,
    /// Reassignments evaluated (all of them, or `reps`).
    pub assignments: u64,
    /// Reassignments at least as extreme as the observed one.
    pub extreme: u64,
}

/// `candidate >= observed`, up to [`STATISTIC_TIE_TOL`].
pub fn at_least_as_extreme(candidate: f64, observed: f64) -> bool {
    candidate >= observed - STATISTIC_TIE_TOL * observed.abs().max(1.0)
}

struct Block {
    n: usize,
    d: usize,
    weight: f64,
    spread: f64,
}

/// Pooled two-group data laid out once, so a label assignment costs one
/// linear sweep and no allocation.
struct TwoGroupKernel {
    /// Block index of each subject, subjects sorted by time.
    block_of: Vec<usize>,
    event: Vec<bool>,
    blocks: Vec<Block>,
}

impl TwoGroupKernel {
    fn new(times: &[(f64, bool)], scheme: WeightScheme) -> Self {
        let n_all = times.len();
        let mut block_of = Vec::with_capacity(n_all);
        let mut event = Vec::with_capacity(n_all);
        let mut blocks = Vec::new();
        let mut i = 0;
        while i < n_all {
            let t = times[i].0;
            let n = n_all - i;
            let mut d = 0;
            while i < n_all && times[i].0 == t {
                block_of.push(blocks.len());
                event.push(times[i].1);
                d += usize::from(times[i].1);
                i += 1;
            }
            blocks.push(Block { n, d, weight: scheme.weight(n), spread: hypergeometric_spread(n, d) });
        }
        TwoGroupKernel { block_of, event, blocks }
    }

    /// Statistic for the assignment where `in_first[i]` puts sorted subject
    /// `i` in the first group. `counts` is scratch space of `(members,
    /// events)` per block.
    fn statistic(&self, in_first: &[bool], counts: &mut [(usize, usize)]) -> f64 {
        counts.iter_mut().for_each(|c| *c = (0, 0));
        let mut n1 = 0;
        for (i, &first) in in_first.iter().enumerate() {
            if first {
                let c = &mut counts[self.block_of[i]];
                c.0 += 1;
                c.1 += usize::from(self.event[i]);
                n1 += 1;
            }
        }
        let mut score = 0.0;
        let mut variance = 0.0;
        for (block, &(members, d1)) in self.blocks.iter().zip(counts.iter()) {
            if block.d > 0 {
                let (n, d, w) = (block.n, block.d, block.weight);
                score += weighted_excess(w, n, d, n1, d1);
                if block.spread != 0.0 {
                    let cov = (n1 * (n - n1)) as f64 / (n * n) as f64;
                    variance += w * w * block.spread * cov;
                }
            }
            n1 -= members;
        }
        two_group_statistic(score, variance)
    }
}

pub(crate) fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Permutation p-value of the two-group weighted rank test.
///
/// Monte Carlo mode counts the observed assignment once, giving
/// `(1 + extreme) / (1 + reps)`.
pub fn permutation_pvalue(
    sample: &GroupedSample,
    scheme: WeightScheme,
    mode: PermutationMode,
    reps: u64,
    seed: u64,
) -> Result<PermutationResult> {
    if sample.group_count() != 2 {
        return Err(Error::TwoGroupsOnly);
    }
    let mut pooled: Vec<_> = sample.observations().to_vec();
    if !pooled.iter().any(|o| o.event) {
        return Err(Error::NoEvents);
    }
    pooled.sort_by(|a, b| a.time.total_cmp(&b.time));
    let n = pooled.len();
    let kernel = TwoGroupKernel::new(&pooled.iter().map(|o| (o.time, o.event)).collect::<Vec<_>>(), scheme);
    let observed_labels: Vec<bool> = pooled.iter().map(|o| o.group == 0).collect();
    let n1 = observed_labels.iter().filter(|&&f| f).count();
    let mut scratch = vec![(0, 0); kernel.blocks.len()];
    let observed = kernel.statistic(&observed_labels, &mut scratch);

    match mode {
        PermutationMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(Error::TooLargeForExhaustive(n));
            }
            let mut labels = vec![false; n];
            let mut total = 0u64;
            let mut extreme = 0u64;
            for subset in (0..n).combinations(n1) {
                labels.iter_mut().for_each(|l| *l = false);
                for i in subset {
                    labels[i] = true;
                }
                total += 1;
                if at_least_as_extreme(kernel.statistic(&labels, &mut scratch), observed) {
                    extreme += 1;
                }
            }
            Ok(PermutationResult {
                mode,
                p_value: extreme as f64 / total as f64,
                observed_statistic: observed,
                assignments: total,
                extreme,
            })
        }
        PermutationMode::MonteCarlo => {
            if reps == 0 {
                return Err(Error::InvalidArgument("reps must be at least 1".into()));
            }
            let extreme = (0..reps)
                .into_par_iter()
                .map_init(
                    || (observed_labels.clone(), vec![(0, 0); kernel.blocks.len()]),
                    |(labels, counts), r| {
                        labels.copy_from_slice(&observed_labels);
                        labels.shuffle(&mut replicate_rng(seed, r));
                        u64::from(at_least_as_extreme(kernel.statistic(labels, counts), observed))
                    },
                )
                .sum::<u64>();
            Ok(PermutationResult {
                mode,
                p_value: (1 + extreme) as f64 / (1 + reps) as f64,
                observed_statistic: observed,
                assignments: reps,
                extreme,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rank::weighted_rank_test;

    fn two(a: &[f64], b: &[f64]) -> GroupedSample {
        GroupedSample::from_event_times(vec![("A", a.to_vec()), ("B", b.to_vec())]).unwrap()
    }

    #[test]
    fn identical_groups_have_p_one() {
        for scheme in WeightScheme::ALL {
            let r = permutation_pvalue(
                &two(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]),
                scheme,
                PermutationMode::Exhaustive,
                0,
                0,
            )
            .unwrap();
            assert_eq!(r.p_value, 1.0);
            assert_eq!(r.assignments, 20);
        }
    }

    #[test]
    fn separated_pairs() {
        let r = permutation_pvalue(
            &two(&[1.0, 2.0], &[3.0, 4.0]),
            WeightScheme::TaroneWare,
            PermutationMode::Exhaustive,
            0,
            0,
        )
        .unwrap();
        assert_eq!((r.extreme, r.assignments), (2, 6));
    }

    #[test]
    fn interleaved_pairs() {
        let r = permutation_pvalue(
            &two(&[1.0, 3.0], &[2.0, 4.0]),
            WeightScheme::TaroneWare,
            PermutationMode::Exhaustive,
            0,
            0,
        )
        .unwrap();
        assert_eq!((r.extreme, r.assignments), (4, 6));
        assert!((r.observed_statistic - 0.589_084_512_184_361_9).abs() < 1e-12);
    }

    #[test]
    fn kernel_matches_general_test() {
        let s = GroupedSample::from_groups(vec![
            ("A", vec![(1.0, true), (2.0, false), (2.0, true), (5.0, true), (7.0, false)]),
            ("B", vec![(2.0, true), (3.0, true), (3.0, false), (6.0, true)]),
        ])
        .unwrap();
        for scheme in WeightScheme::ALL {
            let general = weighted_rank_test(&s, scheme).unwrap().statistic;
            let perm = permutation_pvalue(&s, scheme, PermutationMode::Exhaustive, 0, 0).unwrap();
            assert!((general - perm.observed_statistic).abs() < 1e-12);
        }
    }

    #[test]
    fn errors() {
        let s = two(&[1.0; 11], &[2.0; 10]);
        assert_eq!(
            permutation_pvalue(&s, WeightScheme::LogRank, PermutationMode::Exhaustive, 0, 0),
            Err(Error::TooLargeForExhaustive(21))
        );
        let three =
            GroupedSample::from_event_times(vec![("A", vec![1.0]), ("B", vec![2.0]), ("C", vec![3.0])])
                .unwrap();
        assert_eq!(
            permutation_pvalue(&three, WeightScheme::LogRank, PermutationMode::MonteCarlo, 10, 0),
            Err(Error::TwoGroupsOnly)
        );
        assert!(permutation_pvalue(
            &two(&[1.0], &[2.0]),
            WeightScheme::LogRank,
            PermutationMode::MonteCarlo,
            0,
            0
        )
        .is_err());
    }

    #[test]
    fn monte_carlo_is_seed_deterministic() {
        let s = two(&[1.0, 3.0, 4.0, 8.0, 9.0], &[2.0, 5.0, 6.0, 7.0, 10.0, 11.0]);
        let run = |seed| {
            permutation_pvalue(&s, WeightScheme::Gehan, PermutationMode::MonteCarlo, 2_000, seed).unwrap()
        };
        assert_eq!(run(7), run(7));
        let p = run(7).p_value;
        assert!(p > 0.0 && p <= 1.0);
    }
}
