use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdet_core::cwt::MorseParams;
use walkdet_core::detect::PerSecondLabels;
use walkdet_core::evaluate::{score, AccuracyReport, ActivityGrouping, TrialResult};
use walkdet_core::ingest::{Environment, RecordingMeta, SensorLocation};

use crate::config::{load_grouping, Options, Settings};
use crate::error::{CliError, CliResult};
use crate::output::{emit, write_file, write_json, Log};
use crate::pipeline::{grid_for, input_stem, load_labeled, run_detect};

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Labeled recordings; each file is one trial
    pub inputs: Vec<PathBuf>,
    /// CSV with columns input, subject, location and optionally
    /// environment and predictions; paths are relative to the manifest
    #[arg(long)]
    manifest: Option<String>,
    /// Directory of earlier `detect` outputs (`<stem>/labels.csv`)
    #[arg(long)]
    predictions: Option<String>,
    #[arg(long)]
    grouping: Option<String>,
    #[arg(long)]
    walking_groups: Option<String>,
}

impl EvaluateArgs {
    pub fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("manifest", self.manifest.clone()),
            ("predictions", self.predictions.clone()),
            ("grouping", self.grouping.clone()),
            ("walking_groups", self.walking_groups.clone()),
        ]
    }
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    input: PathBuf,
    #[serde(default)]
    subject: Option<String>,
    #[serde(default)]
    location: Option<String>,
    #[serde(default)]
    environment: Option<String>,
    #[serde(default)]
    predictions: Option<PathBuf>,
}

#[derive(Debug)]
struct Trial {
    input: PathBuf,
    meta: RecordingMeta,
    predictions: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct TrialEcho {
    input: String,
    #[serde(flatten)]
    result: TrialResult,
}

#[derive(Debug, Serialize)]
struct Report {
    #[serde(flatten)]
    report: AccuracyReport,
    trials: Vec<TrialEcho>,
}

fn read_manifest(path: &Path, settings: &Settings) -> CliResult<Vec<Trial>> {
    let base = path.parent().unwrap_or(Path::new(""));
    let bad = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut trials = Vec::new();
    for row in rdr.deserialize::<ManifestRow>() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let nonempty = |s: Option<String>| s.filter(|s| !s.is_empty());
        let location = match nonempty(row.location) {
            Some(l) => l.parse::<SensorLocation>().map_err(bad)?,
            None => settings.meta.location,
        };
        let environment = match nonempty(row.environment) {
            Some(e) => e.parse::<Environment>().map_err(bad)?,
            None => settings.meta.environment,
        };
        let subject = nonempty(row.subject).unwrap_or_else(|| input_stem(&row.input));
        trials.push(Trial {
            input: base.join(&row.input),
            meta: RecordingMeta {
                subject,
                location,
                environment,
                ..settings.meta.clone()
            },
            predictions: row.predictions.filter(|p| !p.as_os_str().is_empty()).map(|p| base.join(p)),
        });
    }
    if trials.is_empty() {
        return Err(bad("manifest lists no recordings".into()));
    }
    Ok(trials)
}

fn read_predictions(path: &Path) -> CliResult<PerSecondLabels> {
    let bad = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = headers
        .iter()
        .position(|h| h == "walking")
        .ok_or_else(|| bad("no `walking` column".into()))?;
    let mut walking = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        walking.push(match rec.get(col) {
            Some("1") | Some("true") => true,
            Some("0") | Some("false") => false,
            other => return Err(bad(format!("bad walking value {other:?}"))),
        });
    }
    Ok(PerSecondLabels {
        dominant_freq: vec![None; walking.len()],
        walking,
    })
}

fn evaluate_trial(trial: &Trial, settings: &Settings, grouping: &ActivityGrouping) -> CliResult<TrialResult> {
    let rec = load_labeled(&trial.input, settings, trial.meta.clone(), grouping)?;
    let pred = match &trial.predictions {
        Some(p) => read_predictions(p)?,
        None => {
            let grid = grid_for(settings, &settings.params)?;
            run_detect(&rec, &settings.params, &grid, &MorseParams::default())?.labels
        }
    };
    let truth = rec.window_labels();
    let score = score(&pred, &truth, grouping).map_err(CliError::core_at(&trial.input))?;
    Ok(TrialResult {
        subject: trial.meta.subject.clone(),
        location: trial.meta.location,
        score,
    })
}

pub fn run(inputs: &[PathBuf], opts: &Options, settings: &Settings) -> CliResult<()> {
    let log = Log { quiet: settings.quiet };
    let grouping = load_grouping(opts)?;
    let mut trials = match opts.get::<PathBuf>("manifest")? {
        Some(m) => read_manifest(&m, settings)?,
        None if inputs.is_empty() => return Err(CliError::Config("give input files or --manifest".into())),
        None => inputs
            .iter()
            .map(|p| Trial {
                input: p.clone(),
                meta: RecordingMeta {
                    subject: if settings.meta.subject.is_empty() {
                        input_stem(p)
                    } else {
                        settings.meta.subject.clone()
                    },
                    ..settings.meta.clone()
                },
                predictions: None,
            })
            .collect(),
    };
    if let Some(dir) = opts.get::<PathBuf>("predictions")? {
        let single = trials.len() == 1;
        for t in trials.iter_mut().filter(|t| t.predictions.is_none()) {
            let nested = dir.join(input_stem(&t.input)).join("labels.csv");
            t.predictions = Some(if single && !nested.exists() { dir.join("labels.csv") } else { nested });
        }
    }

    let results: Vec<TrialResult> = trials
        .par_iter()
        .map(|t| evaluate_trial(t, settings, &grouping))
        .collect::<CliResult<_>>()?;
    let report = AccuracyReport::build(&results, &grouping)?;
    for (label, n) in &report.ungrouped {
        log.note(format!("ungrouped label `{label}`: {n} windows"));
    }
    write_file(&settings.out.join("table.csv"), report.to_table_csv().as_bytes())?;
    let full = Report {
        report,
        trials: trials
            .iter()
            .zip(results)
            .map(|(t, result)| TrialEcho {
                input: t.input.display().to_string(),
                result,
            })
            .collect(),
    };
    write_json(&settings.out.join("report.json"), &full)?;
    log.note(format!("wrote {}", settings.out.join("table.csv").display()));
    emit(&serde_json::json!({
        "trials": full.trials.len(),
        "groups": full.report.groups,
        "ungrouped": full.report.ungrouped,
    }))
}
