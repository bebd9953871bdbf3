use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cwt::{build_grid, FrequencyGrid, GridSpec, MorseParams};
use crate::detect::{classify, gated_features, DetectorParams, GatedFeatures, PerSecondLabels, Profile};
use crate::evaluate::score::ConfusionCounts;
use crate::preprocess::VmSeries;
use crate::{Error, Result, FS_HZ};

/// A series with one-vs-all window truth: `Some(true)` normal walking,
/// `Some(false)` non-walking, `None` excluded from the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub vm: VmSeries,
    pub truth: Vec<Option<bool>>,
}

impl LabeledSeries {
    pub fn new(vm: VmSeries, truth: Vec<Option<bool>>) -> Result<Self> {
        if vm.n_windows() != truth.len() {
            return Err(Error::LengthMismatch {
                left: vm.n_windows(),
                right: truth.len(),
            });
        }
        Ok(LabeledSeries { vm, truth })
    }

    fn tally(&self, labels: &PerSecondLabels) -> ConfusionCounts {
        let mut c = ConfusionCounts::default();
        for (&pred, truth) in labels.walking.iter().zip(&self.truth) {
            match (truth, pred) {
                (Some(true), true) => c.tp += 1,
                (Some(true), false) => c.fn_ += 1,
                (Some(false), true) => c.fp += 1,
                (Some(false), false) => c.tn += 1,
                (None, _) => {}
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "A")]
    Amplitude,
    #[serde(rename = "f_w")]
    Band,
    #[serde(rename = "alpha_beta")]
    AlphaBeta,
    #[serde(rename = "T")]
    Duration,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Amplitude, Stage::Band, Stage::AlphaBeta, Stage::Duration];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Amplitude => "A",
            Stage::Band => "f_w",
            Stage::AlphaBeta => "alpha_beta",
            Stage::Duration => "T",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Stage::ALL
            .into_iter()
            .find(|st| st.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown stage `{s}` (expected A, f_w, alpha_beta or T)"))
    }
}

/// One value (or value pair) substituted into the detector parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    Amplitude(f64),
    Band(f64, f64),
    AlphaBeta(f64, f64),
    Duration(usize),
}

impl Candidate {
    pub fn stage(&self) -> Stage {
        match self {
            Candidate::Amplitude(_) => Stage::Amplitude,
            Candidate::Band(..) => Stage::Band,
            Candidate::AlphaBeta(..) => Stage::AlphaBeta,
            Candidate::Duration(_) => Stage::Duration,
        }
    }

    pub fn apply(&self, base: &DetectorParams) -> DetectorParams {
        let mut p = *base;
        match *self {
            Candidate::Amplitude(a) => p.amplitude_g = a,
            Candidate::Band(lo, hi) => (p.f_min, p.f_max) = (lo, hi),
            Candidate::AlphaBeta(a, b) => (p.alpha, p.beta) = (a, b),
            Candidate::Duration(t) => p.min_windows = t,
        }
        if p != *base {
            p.profile = Profile::Custom;
        }
        p
    }

    fn key(&self) -> (f64, f64) {
        match *self {
            Candidate::Amplitude(a) => (a, 0.0),
            Candidate::Band(a, b) | Candidate::AlphaBeta(a, b) => (a, b),
            Candidate::Duration(t) => (t as f64, 0.0),
        }
    }

    /// Lexicographic order on the substituted value(s).
    pub fn total_cmp(&self, other: &Candidate) -> Ordering {
        let (a, b) = (self.key(), other.key());
        a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
    }
}

/// Threshold text used in CSV output; pairs are joined with `:`.
impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Candidate::Amplitude(a) => write!(f, "{a}"),
            Candidate::Band(a, b) | Candidate::AlphaBeta(a, b) => write!(f, "{a}:{b}"),
            Candidate::Duration(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub candidate: Candidate,
    pub fpr: f64,
    pub tpr: f64,
    pub counts: ConfusionCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub stage: Stage,
    /// Sorted by candidate.
    pub points: Vec<RocPoint>,
    /// Area under the upper convex hull with (0,0) and (1,1) anchors.
    pub auc: f64,
    /// Trapezoid area under the anchored points sorted by (fpr, tpr).
    pub auc_raw: f64,
    pub youden_index: usize,
}

impl RocCurve {
    pub fn youden(&self) -> &RocPoint {
        &self.points[self.youden_index]
    }

    /// `threshold,fpr,tpr` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,fpr,tpr\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.candidate, p.fpr, p.tpr));
        }
        out
    }
}

fn anchored_sorted(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(points.len() + 2);
    pts.push((0.0, 0.0));
    pts.extend_from_slice(points);
    pts.push((1.0, 1.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts
}

fn trapezoid(pts: &[(f64, f64)]) -> f64 {
    pts.windows(2).map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0).sum()
}

/// Trapezoid AUC of `(fpr, tpr)` points plus anchors, without hull.
pub fn auc_raw(points: &[(f64, f64)]) -> f64 {
    trapezoid(&anchored_sorted(points))
}

/// AUC over the upper convex hull of the points and the anchors.
pub fn auc_hull(points: &[(f64, f64)]) -> f64 {
    let pts = anchored_sorted(points);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    trapezoid(&hull).clamp(0.0, 1.0)
}

/// Index of the first point maximising `tpr - fpr`.
pub fn youden_index(points: &[(f64, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &(fpr, tpr)) in points.iter().enumerate() {
        let j = tpr - fpr;
        if best.is_none_or(|(_, b)| j > b) {
            best = Some((i, j));
        }
    }
    best.map(|(i, _)| i)
}

fn class_check(data: &[LabeledSeries]) -> Result<()> {
    let has = |want: bool| data.iter().any(|s| s.truth.contains(&Some(want)));
    if !has(true) {
        return Err(Error::NoPositives);
    }
    if !has(false) {
        return Err(Error::NoNegatives);
    }
    Ok(())
}

fn grid_for(spec: &GridSpec, band: (f64, f64)) -> Result<FrequencyGrid> {
    build_grid(FS_HZ, spec, band)
}

fn features(data: &[LabeledSeries], p: &DetectorParams, min_run: usize, grid: &FrequencyGrid, mp: &MorseParams) -> Result<Vec<GatedFeatures>> {
    data.par_iter()
        .map(|s| gated_features(&s.vm, p.amplitude_g, p.band(), min_run, grid, mp))
        .collect()
}

fn tally_all(data: &[LabeledSeries], feats: &[GatedFeatures], p: &DetectorParams) -> ConfusionCounts {
    let mut total = ConfusionCounts::default();
    for (s, f) in data.iter().zip(feats) {
        total.add(&s.tally(&classify(f, p.alpha, p.beta, p.min_windows)));
    }
    total
}

/// Runs detection for every candidate substituted into `fixed` and
/// collects window-level operating points.
pub fn roc_sweep(
    data: &[LabeledSeries],
    stage: Stage,
    candidates: &[Candidate],
    fixed: &DetectorParams,
    spec: &GridSpec,
    mp: &MorseParams,
) -> Result<RocCurve> {
    class_check(data)?;
    fixed.validate()?;
    if candidates.is_empty() {
        return Err(Error::BadParams(format!("no candidates for stage {stage}")));
    }
    let mut cands = candidates.to_vec();
    if let Some(c) = cands.iter().find(|c| c.stage() != stage) {
        return Err(Error::BadParams(format!("candidate {c} does not belong to stage {stage}")));
    }
    cands.sort_by(Candidate::total_cmp);
    cands.dedup_by(|a, b| a.total_cmp(b) == Ordering::Equal);
    for c in &cands {
        c.apply(fixed).validate()?;
    }

    let counts: Vec<ConfusionCounts> = match stage {
        Stage::Amplitude | Stage::Band => {
            let mut out = Vec::with_capacity(cands.len());
            for c in &cands {
                let p = c.apply(fixed);
                let grid = grid_for(spec, p.band())?;
                let feats = features(data, &p, p.min_windows, &grid, mp)?;
                out.push(tally_all(data, &feats, &p));
            }
            out
        }
        Stage::AlphaBeta | Stage::Duration => {
            // Band maxima do not depend on α, β or T, so they are computed once.
            let min_run = if stage == Stage::Duration { 1 } else { fixed.min_windows };
            let grid = grid_for(spec, fixed.band())?;
            let feats = features(data, fixed, min_run, &grid, mp)?;
            cands
                .par_iter()
                .map(|c| tally_all(data, &feats, &c.apply(fixed)))
                .collect()
        }
    };

    let points: Vec<RocPoint> = cands
        .iter()
        .zip(&counts)
        .map(|(&candidate, &counts)| RocPoint {
            candidate,
            fpr: counts.fp as f64 / (counts.fp + counts.tn) as f64,
            tpr: counts.tp as f64 / (counts.tp + counts.fn_) as f64,
            counts,
        })
        .collect();
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.fpr, p.tpr)).collect();
    Ok(RocCurve {
        stage,
        auc: auc_hull(&xy),
        auc_raw: auc_raw(&xy),
        youden_index: youden_index(&xy).expect("non-empty"),
        points,
    })
}

/// Candidate grids for the staged sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneGrids {
    pub amplitudes: Vec<f64>,
    pub bands: Vec<(f64, f64)>,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub durations: Vec<usize>,
}

impl Default for TuneGrids {
    fn default() -> Self {
        let tenth = |k: u32| k as f64 / 10.0;
        TuneGrids {
            amplitudes: (1..=20).map(|k| k as f64 / 20.0).collect(),
            bands: (10..=18)
                .flat_map(|lo| (20..=30).map(move |hi| (tenth(lo), tenth(hi))))
                .collect(),
            alphas: vec![0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0, 31.7, 50.0],
            betas: vec![0.5, 1.0, 1.4, 2.0, 2.5, 3.0, 5.0, 10.0],
            durations: (1..=10).collect(),
        }
    }
}

impl TuneGrids {
    pub fn candidates(&self, stage: Stage) -> Vec<Candidate> {
        match stage {
            Stage::Amplitude => self.amplitudes.iter().map(|&a| Candidate::Amplitude(a)).collect(),
            Stage::Band => self.bands.iter().map(|&(a, b)| Candidate::Band(a, b)).collect(),
            Stage::AlphaBeta => self
                .alphas
                .iter()
                .flat_map(|&a| self.betas.iter().map(move |&b| Candidate::AlphaBeta(a, b)))
                .collect(),
            Stage::Duration => self.durations.iter().map(|&t| Candidate::Duration(t)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub curves: Vec<RocCurve>,
    pub selected: DetectorParams,
}

/// Greedy staged tuning: each stage sweeps its grid with the values chosen
/// by earlier stages fixed, then keeps its Youden point.
pub fn staged_tune(
    data: &[LabeledSeries],
    stages: &[Stage],
    grids: &TuneGrids,
    start: &DetectorParams,
    spec: &GridSpec,
    mp: &MorseParams,
) -> Result<TuneResult> {
    let mut current = *start;
    let mut curves = Vec::with_capacity(stages.len());
    for &stage in stages {
        let curve = roc_sweep(data, stage, &grids.candidates(stage), &current, spec, mp)?;
        current = curve.youden().candidate.apply(&current);
        curves.push(curve);
    }
    Ok(TuneResult {
        curves,
        selected: current,
    })
}
