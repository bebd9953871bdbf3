use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use walkdet_core::cwt::{GridSpec, MorseParams};
use walkdet_core::detect::{DetectorParams, WalkingBout};

use super::num;
use crate::config::Settings;
use crate::error::CliResult;
use crate::output::{emit, write_json, Log, Table};
use crate::pipeline::{grid_for, load, per_input_dirs, run_detect};

#[derive(Debug, Serialize)]
struct GridEcho {
    f_lo: f64,
    f_hi: f64,
    voices_per_octave: u32,
}

impl From<GridSpec> for GridEcho {
    fn from(g: GridSpec) -> Self {
        GridEcho {
            f_lo: g.f_lo,
            f_hi: g.f_hi,
            voices_per_octave: g.voices_per_octave,
        }
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    input: String,
    n_windows: usize,
    walking_seconds: usize,
    bout_count: usize,
    total_steps: f64,
    runtime_s: f64,
    chunks: usize,
    dropped_rows: usize,
    duplicate_rows: usize,
    params: DetectorParams,
    grid: GridEcho,
}

pub fn run(inputs: &[PathBuf], settings: &Settings) -> CliResult<()> {
    let dirs = per_input_dirs(&settings.out, inputs)?;
    let log = Log { quiet: settings.quiet };
    let summaries: Vec<CliResult<Summary>> = inputs
        .par_iter()
        .zip(&dirs)
        .map(|(input, dir)| detect_one(input, dir, settings))
        .collect();
    for s in summaries {
        let s = s?;
        log.note(format!(
            "{}: {} walking s in {} bouts, {:.0} steps ({:.2} s)",
            s.input, s.walking_seconds, s.bout_count, s.total_steps, s.runtime_s
        ));
        emit(&s)?;
    }
    Ok(())
}

fn detect_one(input: &Path, dir: &Path, settings: &Settings) -> CliResult<Summary> {
    let started = Instant::now();
    let rec = load(input, settings, settings.meta.clone())?;
    let grid = grid_for(settings, &settings.params)?;
    let det = run_detect(&rec, &settings.params, &grid, &MorseParams::default())?;

    let mut labels = Table::new(&["window_index", "start_s", "walking", "dominant_freq_hz"]);
    for (w, (&walking, f)) in det.labels.walking.iter().zip(&det.labels.dominant_freq).enumerate() {
        labels.row([
            w.to_string(),
            num(det.starts[w]),
            u8::from(walking).to_string(),
            f.map(num).unwrap_or_default(),
        ]);
    }
    labels.write(&dir.join("labels.csv"))?;
    write_json(&dir.join("bouts.json"), &det.bouts)?;

    let summary = Summary {
        input: input.display().to_string(),
        n_windows: det.labels.n_windows(),
        walking_seconds: det.labels.walking_seconds(),
        bout_count: det.bouts.len(),
        total_steps: det.bouts.iter().map(|b: &WalkingBout| b.steps).sum(),
        runtime_s: started.elapsed().as_secs_f64(),
        chunks: rec.chunks.len(),
        dropped_rows: rec.dropped_rows,
        duplicate_rows: rec.duplicate_rows,
        params: settings.params,
        grid: settings.grid.into(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}
