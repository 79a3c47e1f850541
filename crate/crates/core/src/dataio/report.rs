//! Machine-readable JSON reports (schema version "1").
//!
//! Keys are emitted in sorted order and every real number is rounded to 12
//! significant digits; integral values print without a fractional part.
//! Serializing a parsed report reproduces the input byte for byte.

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::agreement::{Scale, TiePolicy};
use crate::error::{Error, Result};
use crate::rank::{PermutationResult, RankTestResult, WeightScheme};
use crate::surv::{Crossing, GroupedSample, StepCurve};

pub const SCHEMA_VERSION: &str = "1";

const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultReport {
    pub schema_version: String,
    pub method: Method,
    pub dataset: DatasetDigest,
    pub curves: Vec<CurveSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<RankTestResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation: Option<PermutationResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossings: Option<CrossingSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Method {
    /// `km`, `compare` or `agreement`.
    pub command: String,
    /// `grouped`, `absolute` or `signed`.
    pub construction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<WeightScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_policy: Option<TiePolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Scale>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDigest {
    pub label: String,
    pub n: usize,
    pub events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetDigest {
    pub groups: Vec<GroupDigest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ties: Option<usize>,
}

impl DatasetDigest {
    pub fn of(sample: &GroupedSample) -> Self {
        let groups = sample
            .labels()
            .iter()
            .enumerate()
            .map(|(k, label)| GroupDigest {
                label: label.clone(),
                n: sample.group(k).count(),
                events: sample.group(k).filter(|o| o.event).count(),
            })
            .collect();
        DatasetDigest { groups, ties: None }
    }
}

/// Columns of a [`StepCurve`]. `time_offset` added to a jump time gives
/// the original code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSummary {
    pub label: String,
    pub time_offset: f64,
    pub n_total: usize,
    pub jump_times: Vec<f64>,
    pub survival: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub events: Vec<usize>,
}

impl CurveSummary {
    pub fn new(label: impl Into<String>, curve: &StepCurve, time_offset: f64) -> Self {
        CurveSummary {
            label: label.into(),
            time_offset,
            n_total: curve.n_total(),
            jump_times: curve.jump_times().to_vec(),
            survival: curve.survival().to_vec(),
            at_risk: curve.at_risk().to_vec(),
            events: curve.events().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCrossing {
    pub first: String,
    pub second: String,
    pub curves_cross: bool,
    pub crossings: Vec<Crossing>,
}

/// Proportional-hazards screen over every pair of curves that have events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingSummary {
    pub curves_cross: bool,
    pub note: String,
    pub pairs: Vec<PairCrossing>,
}

impl CrossingSummary {
    pub fn new(pairs: Vec<PairCrossing>) -> Self {
        let curves_cross = pairs.iter().any(|p| p.curves_cross);
        CrossingSummary {
            curves_cross,
            note: format!("proportional hazards screen: curves cross = {curves_cross}"),
            pairs,
        }
    }
}

fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

fn normalize_numbers(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().unwrap_or_default());
            *n = if x.fract() == 0.0 && x.abs() < 9.0e15 {
                Number::from(x as i64)
            } else {
                // finite by construction; serde_json would map NaN to null
                Number::from_f64(x).unwrap_or_else(|| Number::from(0))
            };
        }
        Value::Array(items) => items.iter_mut().for_each(normalize_numbers),
        Value::Object(map) => map.values_mut().for_each(normalize_numbers),
        _ => {}
    }
}

/// Serializes `value` with sorted keys and 12-significant-digit numbers.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut tree = serde_json::to_value(value).expect("report types serialize to JSON");
    normalize_numbers(&mut tree);
    let mut text = serde_json::to_string_pretty(&tree).expect("JSON values serialize");
    text.push('\n');
    text
}

pub fn write_report_json(report: &ResultReport) -> String {
    to_canonical_json(report)
}

/// Parses and schema-checks a report.
pub fn parse_report_json(text: &str) -> Result<ResultReport> {
    let report: ResultReport = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(Error::Json(format!("unsupported schema_version {}", report.schema_version)));
    }
    for c in &report.curves {
        let len = c.jump_times.len();
        if c.survival.len() != len || c.at_risk.len() != len || c.events.len() != len {
            return Err(Error::Json(format!("curve {} has ragged columns", c.label)));
        }
    }
    Ok(report)
}
