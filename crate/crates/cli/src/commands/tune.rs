use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use walkdet_core::cwt::MorseParams;
use walkdet_core::detect::DetectorParams;
use walkdet_core::evaluate::{staged_tune, LabeledSeries, RocCurve, RocPoint, Stage, TuneGrids};
use walkdet_core::preprocess::vector_magnitude;
use walkdet_core::WINDOW_LEN;

use super::num;
use crate::config::{load_grouping, Options, Settings};
use crate::error::{CliError, CliResult};
use crate::output::{emit, write_file, write_json, Log};
use crate::pipeline::load_labeled;

#[derive(Args, Debug)]
pub struct TuneArgs {
    /// Labeled recordings (`t,x,y,z,label`)
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Stages to run, in order: any of A, f_w, alpha_beta, T
    #[arg(long)]
    stages: Option<String>,
    /// Candidate amplitudes, comma-separated
    #[arg(long)]
    amplitudes: Option<String>,
    /// Candidate bands as f_min:f_max, comma-separated
    #[arg(long)]
    bands: Option<String>,
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    betas: Option<String>,
    #[arg(long)]
    durations: Option<String>,
    /// `raw_label,group` CSV; defaults to the bundled table
    #[arg(long)]
    grouping: Option<String>,
    /// Groups that count as walking, comma-separated
    #[arg(long)]
    walking_groups: Option<String>,
}

impl TuneArgs {
    pub fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("stages", self.stages.clone()),
            ("amplitudes", self.amplitudes.clone()),
            ("bands", self.bands.clone()),
            ("alphas", self.alphas.clone()),
            ("betas", self.betas.clone()),
            ("durations", self.durations.clone()),
            ("grouping", self.grouping.clone()),
            ("walking_groups", self.walking_groups.clone()),
        ]
    }
}

#[derive(Debug, Serialize)]
struct OperatingPoint {
    threshold: String,
    fpr: f64,
    tpr: f64,
}

impl From<&RocPoint> for OperatingPoint {
    fn from(p: &RocPoint) -> Self {
        OperatingPoint {
            threshold: p.candidate.to_string(),
            fpr: p.fpr,
            tpr: p.tpr,
        }
    }
}

#[derive(Debug, Serialize)]
struct CurveSummary {
    stage: Stage,
    auc: f64,
    auc_raw: f64,
    n_candidates: usize,
    youden: OperatingPoint,
}

impl From<&RocCurve> for CurveSummary {
    fn from(c: &RocCurve) -> Self {
        CurveSummary {
            stage: c.stage,
            auc: c.auc,
            auc_raw: c.auc_raw,
            n_candidates: c.points.len(),
            youden: c.youden().into(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Selected {
    params: DetectorParams,
    start: DetectorParams,
    stages: Vec<CurveSummary>,
}

fn grids(opts: &Options) -> CliResult<TuneGrids> {
    let d = TuneGrids::default();
    Ok(TuneGrids {
        amplitudes: opts.list("amplitudes")?.unwrap_or(d.amplitudes),
        bands: opts.pairs("bands")?.unwrap_or(d.bands),
        alphas: opts.list("alphas")?.unwrap_or(d.alphas),
        betas: opts.list("betas")?.unwrap_or(d.betas),
        durations: opts.list("durations")?.unwrap_or(d.durations),
    })
}

/// `key = value` lines that reproduce `p` through `--config`.
fn config_text(p: &DetectorParams) -> String {
    format!(
        "amplitude = {}\nf_min = {}\nf_max = {}\nalpha = {}\nbeta = {}\nmin_windows = {}\n",
        num(p.amplitude_g),
        num(p.f_min),
        num(p.f_max),
        num(p.alpha),
        num(p.beta),
        p.min_windows
    )
}

pub fn run(inputs: &[PathBuf], opts: &Options, settings: &Settings) -> CliResult<()> {
    let log = Log { quiet: settings.quiet };
    let grouping = load_grouping(opts)?;
    let stages: Vec<Stage> = opts.list("stages")?.unwrap_or_else(|| Stage::ALL.to_vec());
    if stages.is_empty() {
        return Err(CliError::Config("no stages selected".into()));
    }
    let grids = grids(opts)?;

    let loaded: Vec<_> = inputs
        .par_iter()
        .map(|p| load_labeled(p, settings, settings.meta.clone(), &grouping))
        .collect::<CliResult<_>>()?;
    let mut data = Vec::new();
    for rec in &loaded {
        for chunk in rec.chunks.iter().filter(|c| c.len() >= WINDOW_LEN) {
            let truth = walkdet_core::evaluate::window_labels(chunk)
                .into_iter()
                .map(|l| l.and_then(|l| grouping.group_of(&l).map(|g| grouping.is_walking_group(g))))
                .collect();
            data.push(LabeledSeries::new(vector_magnitude(chunk), truth)?);
        }
    }

    let result = staged_tune(&data, &stages, &grids, &settings.params, &settings.grid, &MorseParams::default())?;
    for curve in &result.curves {
        let stem = format!("roc_{}", curve.stage);
        write_file(&settings.out.join(format!("{stem}.csv")), curve.to_csv().as_bytes())?;
        write_json(&settings.out.join(format!("{stem}.json")), &CurveSummary::from(curve))?;
        let y = curve.youden();
        log.note(format!(
            "{}: AUC {:.4}, Youden point {} (fpr {:.4}, tpr {:.4})",
            curve.stage, curve.auc, y.candidate, y.fpr, y.tpr
        ));
    }
    let selected = Selected {
        params: result.selected,
        start: settings.params,
        stages: result.curves.iter().map(CurveSummary::from).collect(),
    };
    write_json(&settings.out.join("selected_params.json"), &selected)?;
    write_file(&settings.out.join("selected.conf"), config_text(&result.selected).as_bytes())?;
    emit(&selected)
}
