//! Turning ordinal measurements into event data.
//!
//! Paired measurements give either one absolute-difference curve (each pair
//! "fails" at `|a - b|`) or two signed groups, `A<B` with times `b - a` and
//! `A>B` with times `a - b`, which the rank tests can compare directly.
//! Grouped scores become observations by shifting the scale minimum to 0.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surv::{km_estimate, GroupedSample, Observation, StepCurve};

pub const LESS_LABEL: &str = "A<B";
pub const GREATER_LABEL: &str = "A>B";

/// Declared bounds of an ordinal scale, inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub min: f64,
    pub max: f64,
}

impl Scale {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if min.is_finite() && max.is_finite() && min < max {
            Ok(Scale { min, max })
        } else {
            Err(Error::InvalidScale(min, max))
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x <= self.max
    }

    fn check(&self, id: &str, score: f64) -> Result<()> {
        if self.contains(score) {
            Ok(())
        } else {
            Err(Error::OutOfScale { id: id.to_owned(), score, min: self.min, max: self.max })
        }
    }
}

impl FromStr for Scale {
    type Err = Error;

    /// Parses `min:max`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("scale must look like min:max, got {s}"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        Scale::new(lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub id: String,
    pub a: f64,
    pub b: f64,
}

impl PairRecord {
    pub fn new(id: impl Into<String>, a: f64, b: f64) -> Self {
        PairRecord { id: id.into(), a, b }
    }
}

/// Per-subject pairs of measurements on one ordinal scale.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    records: Vec<PairRecord>,
    scale: Option<Scale>,
}

impl PairedSample {
    /// Validates unique ids, finite values, and the scale bounds if given.
    pub fn new(records: Vec<PairRecord>, scale: Option<Scale>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.id.as_str()) {
                return Err(Error::DuplicateId(r.id.clone()));
            }
            for v in [r.a, r.b] {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!("record {} has non-finite value", r.id)));
                }
                if let Some(scale) = &scale {
                    scale.check(&r.id, v)?;
                }
            }
        }
        Ok(PairedSample { records, scale })
    }

    pub fn records(&self) -> &[PairRecord] {
        &self.records
    }

    pub fn scale(&self) -> Option<Scale> {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `|a - b|` for every record, in record order.
    pub fn abs_differences(&self) -> Vec<f64> {
        self.records.iter().map(|r| (r.a - r.b).abs()).collect()
    }

    /// Same pairs with `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        PairedSample {
            records: self.records.iter().map(|r| PairRecord::new(r.id.clone(), r.b, r.a)).collect(),
            scale: self.scale,
        }
    }
}

/// Where pairs with `a == b` go in the signed split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Drop tied pairs; they are only counted.
    #[default]
    ExcludeTies,
    /// A zero-time event in both groups for every tied pair.
    ZeroInBoth,
}

impl TiePolicy {
    pub fn name(self) -> &'static str {
        match self {
            TiePolicy::ExcludeTies => "exclude",
            TiePolicy::ZeroInBoth => "zero-in-both",
        }
    }
}

impl fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The survival-agreement curve: KM over the fully observed `|a - b|`.
///
/// `prop_at_least(x)` on the result is the share of pairs disagreeing by at
/// least `x`.
pub fn absolute_agreement_curve(sample: &PairedSample) -> Result<StepCurve> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let obs: Vec<_> = sample.abs_differences().into_iter().map(|d| Observation::event(d, 0)).collect();
    km_estimate(&obs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedSplit {
    /// Groups `A<B` (index 0) and `A>B` (index 1).
    pub groups: GroupedSample,
    pub ties: usize,
}

/// Splits pairs by the sign of `a - b`; magnitudes become event times.
pub fn signed_agreement_groups(sample: &PairedSample, policy: TiePolicy) -> Result<SignedSplit> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut less = Vec::new();
    let mut greater = Vec::new();
    let mut ties = 0;
    for r in sample.records() {
        if r.a < r.b {
            less.push(r.b - r.a);
        } else if r.a > r.b {
            greater.push(r.a - r.b);
        } else {
            ties += 1;
            if policy == TiePolicy::ZeroInBoth {
                less.push(0.0);
                greater.push(0.0);
            }
        }
    }
    if less.is_empty() {
        return Err(Error::DegenerateSplit(LESS_LABEL));
    }
    if greater.is_empty() {
        return Err(Error::DegenerateSplit(GREATER_LABEL));
    }
    let groups = GroupedSample::from_event_times(vec![(LESS_LABEL, less), (GREATER_LABEL, greater)])?;
    Ok(SignedSplit { groups, ties })
}

/// One scored subject in a grouped ordinal dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalRecord {
    pub id: String,
    pub group: String,
    pub score: f64,
    /// `None` means the event was observed.
    pub event: Option<bool>,
}

impl OrdinalRecord {
    pub fn new(id: impl Into<String>, group: impl Into<String>, score: f64) -> Self {
        OrdinalRecord { id: id.into(), group: group.into(), score, event: None }
    }
}

/// Grouped observations plus the shift that was subtracted from the codes.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalGroups {
    pub sample: GroupedSample,
    pub offset: f64,
}

/// Maps scores to times `score - scale.min`, grouping by label in order of
/// first appearance.
///
/// Without a scale the offset is `min(0, lowest score)`, so nonnegative
/// codes keep their values.
pub fn ordinal_to_observations(records: &[OrdinalRecord], scale: Option<Scale>) -> Result<OrdinalGroups> {
    if records.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut labels: Vec<String> = Vec::new();
    let mut observations = Vec::with_capacity(records.len());
    for r in records {
        if r.group.is_empty() {
            return Err(Error::EmptyGroup(r.id.clone()));
        }
        if !r.score.is_finite() {
            return Err(Error::InvalidArgument(format!("record {} has non-finite score", r.id)));
        }
        if let Some(scale) = &scale {
            scale.check(&r.id, r.score)?;
        }
    }
    let offset = match scale {
        Some(s) => s.min,
        None => records.iter().map(|r| r.score).fold(0.0, f64::min),
    };
    for r in records {
        let group = match labels.iter().position(|l| *l == r.group) {
            Some(k) => k,
            None => {
                labels.push(r.group.clone());
                labels.len() - 1
            }
        };
        observations.push(Observation { time: r.score - offset, event: r.event.unwrap_or(true), group });
    }
    Ok(OrdinalGroups { sample: GroupedSample::new(labels, observations)?, offset })
}
