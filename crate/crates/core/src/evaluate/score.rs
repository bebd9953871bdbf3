use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::detect::PerSecondLabels;
use crate::ingest::UniformRecording;
use crate::{Error, Result, WINDOW_LEN};

pub const NORMAL_WALKING: &str = "normal walking";

/// Groups scored by sensitivity; every other group is scored by specificity.
pub const DEFAULT_WALKING_GROUPS: &[&str] = &[
    NORMAL_WALKING,
    "ascending stairs",
    "descending stairs",
    "treadmill 1 mph",
    "treadmill 2 mph",
    "treadmill 3 mph",
    "treadmill 3.5 mph",
    "other walking",
];

const DEFAULT_GROUPING_CSV: &str = include_str!("../../data/activity_groups.csv");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn sensitivity(&self) -> Option<f64> {
        let pos = self.tp + self.fn_;
        (pos > 0).then(|| self.tp as f64 / pos as f64)
    }

    pub fn specificity(&self) -> Option<f64> {
        let neg = self.tn + self.fp;
        (neg > 0).then(|| self.tn as f64 / neg as f64)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn add(&mut self, other: &ConfusionCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }
}

/// Raw activity label → activity group, plus the set of walking groups.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityGrouping {
    map: HashMap<String, String>,
    order: Vec<String>,
    walking: BTreeSet<String>,
}

fn normalize(label: &str) -> String {
    label.trim().to_lowercase()
}

impl Default for ActivityGrouping {
    fn default() -> Self {
        Self::from_csv(DEFAULT_GROUPING_CSV.as_bytes()).expect("bundled grouping parses")
    }
}

impl ActivityGrouping {
    /// The bundled `raw_label,group` table.
    pub fn default_csv() -> &'static str {
        DEFAULT_GROUPING_CSV
    }

    /// Reads a two-column `raw_label,group` CSV (header required).
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut pairs = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let (Some(raw), Some(group)) = (rec.get(0), rec.get(1)) else {
                return Err(Error::MissingColumn("group".into()));
            };
            pairs.push((raw.to_string(), group.to_string()));
        }
        Ok(Self::from_pairs(pairs, DEFAULT_WALKING_GROUPS.iter().map(|s| s.to_string())))
    }

    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (String, String)>,
        walking_groups: impl IntoIterator<Item = String>,
    ) -> Self {
        let mut map = HashMap::new();
        let mut order = Vec::new();
        for (raw, group) in pairs {
            let group = normalize(&group);
            if !order.contains(&group) {
                order.push(group.clone());
            }
            map.insert(normalize(&raw), group);
        }
        ActivityGrouping {
            map,
            order,
            walking: walking_groups.into_iter().map(|g| normalize(&g)).collect(),
        }
    }

    pub fn with_walking_groups(mut self, groups: impl IntoIterator<Item = String>) -> Self {
        self.walking = groups.into_iter().map(|g| normalize(&g)).collect();
        self
    }

    pub fn group_of(&self, label: &str) -> Option<&str> {
        self.map.get(&normalize(label)).map(String::as_str)
    }

    pub fn is_walking_group(&self, group: &str) -> bool {
        self.walking.contains(&normalize(group))
    }

    /// Groups in the order they first appear in the table.
    pub fn groups(&self) -> &[String] {
        &self.order
    }

    /// Raw labels whose group is a walking group.
    pub fn walking_labels(&self) -> impl Iterator<Item = &str> {
        self.map
            .iter()
            .filter(|(_, g)| self.walking.contains(*g))
            .map(|(raw, _)| raw.as_str())
    }
}

/// Majority label of each complete window (earliest label wins ties).
/// Windows without labels or with an empty majority label yield `None`.
pub fn window_labels(rec: &UniformRecording) -> Vec<Option<String>> {
    let Some(labels) = rec.labels.as_ref() else {
        return vec![None; rec.len() / WINDOW_LEN];
    };
    labels
        .chunks_exact(WINDOW_LEN)
        .map(|w| {
            let mut best: Option<(&String, usize)> = None;
            for l in w {
                let count = w.iter().filter(|o| *o == l).count();
                if best.is_none_or(|(_, c)| count > c) {
                    best = Some((l, count));
                }
            }
            best.map(|(l, _)| l.clone()).filter(|l| !l.trim().is_empty())
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    pub groups: BTreeMap<String, ConfusionCounts>,
    /// Labels without a grouping entry, with window counts.
    pub ungrouped: BTreeMap<String, u64>,
}

pub fn score(pred: &PerSecondLabels, truth: &[Option<String>], grouping: &ActivityGrouping) -> Result<ScoreResult> {
    if pred.n_windows() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.n_windows(),
            right: truth.len(),
        });
    }
    let mut out = ScoreResult::default();
    for (&walking, label) in pred.walking.iter().zip(truth) {
        let Some(label) = label else { continue };
        let Some(group) = grouping.group_of(label) else {
            *out.ungrouped.entry(normalize(label)).or_default() += 1;
            continue;
        };
        let counts = out.groups.entry(group.to_string()).or_default();
        match (grouping.is_walking_group(group), walking) {
            (true, true) => counts.tp += 1,
            (true, false) => counts.fn_ += 1,
            (false, false) => counts.tn += 1,
            (false, true) => counts.fp += 1,
        }
    }
    Ok(out)
}
