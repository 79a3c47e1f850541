//! Step curves, Kaplan-Meier estimation and crossing detection.
//!
//! Survival follows the right-continuous convention `S(t) = P(T > t)`.
//! [`StepCurve::prop_at_least`] gives the left limit `S(t-) = P(T >= t)`,
//! which is the "proportion with at least this value" reading used by
//! survival-agreement plots.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Differences in survival smaller than this are treated as ties when
/// looking for sign changes between two curves.
pub const CROSSING_ZERO_TOL: f64 = 1e-12;

/// One subject's event datum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub time: f64,
    /// `true` when the failure was observed, `false` when right-censored.
    pub event: bool,
    /// Index into the owning [`GroupedSample`]'s labels.
    pub group: usize,
}

impl Observation {
    pub fn event(time: f64, group: usize) -> Self {
        Observation { time, event: true, group }
    }

    pub fn censored(time: f64, group: usize) -> Self {
        Observation { time, event: false, group }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTime(t))
    }
}

/// Observations tagged with declared group labels.
///
/// Every declared group holds at least one observation and every
/// observation refers to a declared group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSample {
    labels: Vec<String>,
    observations: Vec<Observation>,
}

impl GroupedSample {
    pub fn new(labels: Vec<String>, observations: Vec<Observation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptySample);
        }
        let mut sizes = vec![0usize; labels.len()];
        for obs in &observations {
            check_time(obs.time)?;
            match sizes.get_mut(obs.group) {
                Some(n) => *n += 1,
                None => return Err(Error::UnknownGroup(obs.group)),
            }
        }
        if let Some(k) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::EmptyGroup(labels[k].clone()));
        }
        Ok(GroupedSample { labels, observations })
    }

    /// Builds a sample from per-group lists of `(time, event)` pairs.
    pub fn from_groups<S: Into<String>>(groups: Vec<(S, Vec<(f64, bool)>)>) -> Result<Self> {
        let mut labels = Vec::with_capacity(groups.len());
        let mut observations = Vec::new();
        for (k, (label, data)) in groups.into_iter().enumerate() {
            labels.push(label.into());
            observations.extend(data.into_iter().map(|(time, event)| Observation { time, event, group: k }));
        }
        GroupedSample::new(labels, observations)
    }

    /// Shorthand for fully observed groups.
    pub fn from_event_times<S: Into<String>>(groups: Vec<(S, Vec<f64>)>) -> Result<Self> {
        GroupedSample::from_groups(
            groups.into_iter().map(|(l, ts)| (l, ts.into_iter().map(|t| (t, true)).collect())).collect(),
        )
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn group_count(&self) -> usize {
        self.labels.len()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.labels.len()];
        for obs in &self.observations {
            sizes[obs.group] += 1;
        }
        sizes
    }

    pub fn group(&self, k: usize) -> impl Iterator<Item = &Observation> + '_ {
        self.observations.iter().filter(move |o| o.group == k)
    }

    /// One Kaplan-Meier curve per declared group, in label order.
    pub fn curves(&self) -> Result<Vec<StepCurve>> {
        (0..self.group_count()).map(|k| km_estimate(&self.group(k).copied().collect::<Vec<_>>())).collect()
    }

    /// Same data with every time passed through `f`.
    pub fn map_times(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let observations = self.observations.iter().map(|o| Observation { time: f(o.time), ..*o }).collect();
        GroupedSample::new(self.labels.clone(), observations)
    }
}

/// Right-continuous Kaplan-Meier step function with its risk-set counts.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCurve {
    jump_times: Vec<f64>,
    survival: Vec<f64>,
    at_risk: Vec<usize>,
    events: Vec<usize>,
    n_total: usize,
}

impl StepCurve {
    /// Assembles a curve from stored columns, checking every invariant the
    /// estimator guarantees. Survival values are recomputed from the counts
    /// and must agree with the supplied ones to 1e-12.
    pub fn from_parts(
        jump_times: Vec<f64>,
        survival: Vec<f64>,
        at_risk: Vec<usize>,
        events: Vec<usize>,
        n_total: usize,
    ) -> Result<Self> {
        let len = jump_times.len();
        if survival.len() != len || at_risk.len() != len || events.len() != len {
            return Err(Error::InvalidCurve("column lengths differ"));
        }
        if n_total == 0 {
            return Err(Error::InvalidCurve("n_total must be positive"));
        }
        let mut prev_s = 1.0;
        let mut prev_n = n_total + 1;
        let mut prev_t = f64::NEG_INFINITY;
        for k in 0..len {
            check_time(jump_times[k])?;
            if jump_times[k] <= prev_t {
                return Err(Error::InvalidCurve("jump times must increase strictly"));
            }
            if at_risk[k] >= prev_n || at_risk[k] == 0 {
                return Err(Error::InvalidCurve("at-risk counts must decrease strictly"));
            }
            if events[k] == 0 || events[k] > at_risk[k] {
                return Err(Error::InvalidCurve("events must lie in 1..=at_risk"));
            }
            let expected = prev_s * (at_risk[k] - events[k]) as f64 / at_risk[k] as f64;
            if (survival[k] - expected).abs() > 1e-12 {
                return Err(Error::InvalidCurve("survival breaks the product-limit recurrence"));
            }
            prev_s = survival[k];
            prev_n = at_risk[k];
            prev_t = jump_times[k];
        }
        Ok(StepCurve { jump_times, survival, at_risk, events, n_total })
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    /// Value of `S` immediately after each jump.
    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    pub fn at_risk(&self) -> &[usize] {
        &self.at_risk
    }

    pub fn events(&self) -> &[usize] {
        &self.events
    }

    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn is_empty(&self) -> bool {
        self.jump_times.is_empty()
    }

    /// `S(x)`: survival of the last jump at or before `x`, or 1 before the
    /// first jump.
    pub fn survival_at(&self, x: f64) -> f64 {
        let idx = self.jump_times.partition_point(|&t| t <= x);
        if idx == 0 {
            1.0
        } else {
            self.survival[idx - 1]
        }
    }

    /// `S(x-)`: the proportion of subjects with a value of at least `x`.
    pub fn prop_at_least(&self, x: f64) -> f64 {
        let idx = self.jump_times.partition_point(|&t| t < x);
        if idx == 0 {
            1.0
        } else {
            self.survival[idx - 1]
        }
    }
}

/// Product-limit estimate for a single group.
///
/// Group tags on the observations are ignored. Events at a tied time are
/// processed together, and censorings at that time stay in its risk set.
pub fn km_estimate(observations: &[Observation]) -> Result<StepCurve> {
    if observations.is_empty() {
        return Err(Error::EmptySample);
    }
    for obs in observations {
        check_time(obs.time)?;
    }
    let mut sorted: Vec<(f64, bool)> = observations.iter().map(|o| (o.time, o.event)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let n_total = sorted.len();
    let mut jump_times = Vec::new();
    let mut survival = Vec::new();
    let mut at_risk = Vec::new();
    let mut events = Vec::new();

    let mut remaining = n_total;
    let mut s = 1.0;
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].0;
        let mut j = i;
        let mut d = 0;
        while j < sorted.len() && sorted[j].0 == t {
            d += usize::from(sorted[j].1);
            j += 1;
        }
        if d > 0 {
            s *= (remaining - d) as f64 / remaining as f64;
            jump_times.push(t);
            survival.push(s);
            at_risk.push(remaining);
            events.push(d);
        }
        remaining -= j - i;
        i = j;
    }

    Ok(StepCurve { jump_times, survival, at_risk, events, n_total })
}

/// Span between the last strictly signed segment before a sign change and
/// the first segment carrying the opposite sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Crossing {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingReport {
    pub crossings: Vec<Crossing>,
    pub curves_cross: bool,
}

fn strict_sign(delta: f64) -> Ordering {
    if delta > CROSSING_ZERO_TOL {
        Ordering::Greater
    } else if delta < -CROSSING_ZERO_TOL {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

/// Locates strict sign changes of `S1 - S2` on the merged jump grid.
///
/// Segments where the curves agree are skipped, so curves that only touch
/// are not reported as crossing.
pub fn detect_crossings(c1: &StepCurve, c2: &StepCurve) -> Result<CrossingReport> {
    if c1.is_empty() || c2.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let mut grid: Vec<f64> = c1.jump_times.iter().chain(&c2.jump_times).copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut crossings = Vec::new();
    // (sign, index of the last segment carrying it)
    let mut last: Option<(Ordering, usize)> = None;
    for (j, &t) in grid.iter().enumerate() {
        let sign = strict_sign(c1.survival_at(t) - c2.survival_at(t));
        if sign == Ordering::Equal {
            continue;
        }
        if let Some((prev, idx)) = last {
            if prev != sign {
                crossings.push(Crossing { start: grid[idx + 1], end: t });
            }
        }
        last = Some((sign, j));
    }
    Ok(CrossingReport { curves_cross: !crossings.is_empty(), crossings })
}
