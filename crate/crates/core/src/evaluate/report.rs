use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::evaluate::score::{ActivityGrouping, ConfusionCounts, ScoreResult};
use crate::ingest::SensorLocation;
use crate::{Error, Result};

/// Report columns, in output order.
pub const LOCATION_COLUMNS: [SensorLocation; 6] = [
    SensorLocation::Thigh,
    SensorLocation::Waist,
    SensorLocation::Chest,
    SensorLocation::Arm,
    SensorLocation::Unspecified,
    SensorLocation::Wrist,
];

/// Mean across subjects with a normal-approximation 95% interval. Bounds
/// are not clipped to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: usize,
}

impl CellSummary {
    /// `mean (lo,hi), n` with at most two decimals.
    pub fn render(&self) -> String {
        format!(
            "{} ({},{}), {}",
            compact(self.mean),
            compact(self.ci_lo),
            compact(self.ci_hi),
            self.n
        )
    }
}

fn compact(v: f64) -> String {
    let s = format!("{:.2}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

/// Averages trial scores within each subject, then across subjects.
pub fn subject_average<S: AsRef<str>>(trials: &[(S, f64)]) -> Result<CellSummary> {
    let mut per_subject: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (subject, score) in trials {
        let e = per_subject.entry(subject.as_ref()).or_default();
        e.0 += score;
        e.1 += 1;
    }
    if per_subject.is_empty() {
        return Err(Error::Empty);
    }
    let scores: Vec<f64> = per_subject.values().map(|(s, k)| s / *k as f64).collect();
    let n = scores.len();
    let mean = scores.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ok(CellSummary {
            mean,
            ci_lo: mean,
            ci_hi: mean,
            n,
        });
    }
    let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half = 1.96 * var.sqrt() / (n as f64).sqrt();
    Ok(CellSummary {
        mean,
        ci_lo: mean - half,
        ci_hi: mean + half,
        n,
    })
}

/// Scored windows of one recording (one subject, one trial, one location).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub subject: String,
    pub location: SensorLocation,
    pub score: ScoreResult,
}

/// Per (activity group, location) summaries; walking groups report
/// sensitivity, the others specificity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub groups: Vec<String>,
    pub walking_groups: Vec<String>,
    pub cells: BTreeMap<String, BTreeMap<SensorLocation, CellSummary>>,
    pub ungrouped: BTreeMap<String, u64>,
    pub totals: BTreeMap<String, ConfusionCounts>,
}

impl AccuracyReport {
    pub fn build(trials: &[TrialResult], grouping: &ActivityGrouping) -> Result<Self> {
        let mut scores: HashMap<(&str, SensorLocation), Vec<(&str, f64)>> = HashMap::new();
        let mut ungrouped = BTreeMap::new();
        let mut totals: BTreeMap<String, ConfusionCounts> = BTreeMap::new();
        for t in trials {
            for (label, n) in &t.score.ungrouped {
                *ungrouped.entry(label.clone()).or_default() += n;
            }
            for (group, counts) in &t.score.groups {
                totals.entry(group.clone()).or_default().add(counts);
                let metric = if grouping.is_walking_group(group) {
                    counts.sensitivity()
                } else {
                    counts.specificity()
                };
                if let Some(m) = metric {
                    scores
                        .entry((group.as_str(), t.location))
                        .or_default()
                        .push((t.subject.as_str(), m));
                }
            }
        }
        let mut cells: BTreeMap<String, BTreeMap<SensorLocation, CellSummary>> = BTreeMap::new();
        for ((group, loc), s) in &scores {
            cells
                .entry(group.to_string())
                .or_default()
                .insert(*loc, subject_average(s)?);
        }
        let mut groups: Vec<String> = grouping
            .groups()
            .iter()
            .filter(|g| totals.contains_key(*g))
            .cloned()
            .collect();
        groups.extend(totals.keys().filter(|g| !groups.contains(g)).cloned().collect::<Vec<_>>());
        let walking_groups = groups.iter().filter(|g| grouping.is_walking_group(g)).cloned().collect();
        Ok(AccuracyReport {
            groups,
            walking_groups,
            cells,
            ungrouped,
            totals,
        })
    }

    pub fn cell(&self, group: &str, location: SensorLocation) -> Option<&CellSummary> {
        self.cells.get(group).and_then(|m| m.get(&location))
    }

    /// Groups as rows, locations as columns, `-` for empty cells.
    pub fn to_table_csv(&self) -> String {
        let mut out = String::from("activity_group,metric");
        for loc in LOCATION_COLUMNS {
            out.push(',');
            out.push_str(loc.as_str());
        }
        out.push('\n');
        for group in &self.groups {
            let metric = if self.walking_groups.contains(group) {
                "sensitivity"
            } else {
                "specificity"
            };
            let _ = write!(out, "{},{metric}", csv_field(group));
            for loc in LOCATION_COLUMNS {
                let cell = self.cell(group, loc).map_or_else(|| "-".to_string(), CellSummary::render);
                let _ = write!(out, ",{}", csv_field(&cell));
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
