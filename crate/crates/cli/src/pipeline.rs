//! Loading recordings and running the detector over every resampled chunk.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use walkdet_core::cwt::{build_grid, FrequencyGrid, MorseParams};
use walkdet_core::detect::{detect, summarize_bouts, DetectorParams, PerSecondLabels, WalkingBout};
use walkdet_core::evaluate::{window_labels, ActivityGrouping};
use walkdet_core::ingest::{normalize_units, parse_csv, resample_10hz, RecordingMeta, UniformRecording};
use walkdet_core::preprocess::{adjust_walk_labels, vector_magnitude};
use walkdet_core::{Error, FS_HZ, WINDOW_LEN};

use crate::config::Settings;
use crate::error::{CliError, CliResult};

/// A recording after unit conversion and resampling. Gaps split it into
/// chunks; windows are numbered consecutively across chunks.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub path: PathBuf,
    pub chunks: Vec<UniformRecording>,
    pub dropped_rows: usize,
    pub duplicate_rows: usize,
}

impl Loaded {
    /// Start time of every complete window, seconds.
    pub fn window_starts(&self) -> Vec<f64> {
        self.chunks
            .iter()
            .flat_map(|c| (0..c.len() / WINDOW_LEN).map(move |w| c.start_time + w as f64))
            .collect()
    }

    /// Majority activity label of each window.
    pub fn window_labels(&self) -> Vec<Option<String>> {
        self.chunks.iter().flat_map(window_labels).collect()
    }
}

pub fn load(path: &Path, settings: &Settings, meta: RecordingMeta) -> CliResult<Loaded> {
    let at = CliError::core_at(path);
    let raw = parse_csv(path, settings.units, meta).map_err(at)?;
    let (dropped_rows, duplicate_rows) = (raw.dropped_rows, raw.duplicate_rows);
    let chunks = resample_10hz(&normalize_units(raw), settings.max_gap_s).map_err(CliError::core_at(path))?;
    Ok(Loaded {
        path: path.to_path_buf(),
        chunks,
        dropped_rows,
        duplicate_rows,
    })
}

/// Loads a labeled recording, relabeling motionless walking windows when
/// `adjust_labels` is set.
pub fn load_labeled(path: &Path, settings: &Settings, meta: RecordingMeta, grouping: &ActivityGrouping) -> CliResult<Loaded> {
    let mut rec = load(path, settings, meta)?;
    if rec.chunks.iter().any(|c| c.labels.is_none()) {
        return Err(CliError::Core {
            path: Some(path.to_path_buf()),
            source: Error::NoLabels,
        });
    }
    if settings.adjust_labels {
        let walking: HashSet<String> = grouping.walking_labels().map(str::to_string).collect();
        rec.chunks = rec
            .chunks
            .iter()
            .map(|c| adjust_walk_labels(c, &walking))
            .collect::<Result<_, _>>()
            .map_err(CliError::core_at(path))?;
    }
    Ok(rec)
}

pub fn grid_for(settings: &Settings, params: &DetectorParams) -> CliResult<FrequencyGrid> {
    Ok(build_grid(FS_HZ, &settings.grid, params.band())?)
}

#[derive(Debug, Clone)]
pub struct Detection {
    pub labels: PerSecondLabels,
    pub starts: Vec<f64>,
    pub bouts: Vec<WalkingBout>,
}

/// Detects walking in every chunk. Chunks shorter than the duration rule
/// cannot contain a bout and are labeled non-walking.
pub fn run_detect(rec: &Loaded, params: &DetectorParams, grid: &FrequencyGrid, mp: &MorseParams) -> CliResult<Detection> {
    let needed = WINDOW_LEN * params.min_windows;
    if rec.chunks.iter().all(|c| c.len() < needed) {
        return Err(CliError::Core {
            path: Some(rec.path.clone()),
            source: Error::TooShort {
                needed,
                got: rec.chunks.iter().map(UniformRecording::len).max().unwrap_or(0),
            },
        });
    }
    let mut labels = PerSecondLabels {
        walking: Vec::new(),
        dominant_freq: Vec::new(),
    };
    let mut bouts = Vec::new();
    for chunk in &rec.chunks {
        let vm = vector_magnitude(chunk);
        let part = if vm.len() < needed {
            PerSecondLabels {
                walking: vec![false; vm.n_windows()],
                dominant_freq: vec![None; vm.n_windows()],
            }
        } else {
            detect(&vm, params, grid, mp).map_err(CliError::core_at(&rec.path))?
        };
        bouts.extend(summarize_bouts(&part).into_iter().map(|mut b| {
            b.start_s += chunk.start_time;
            b
        }));
        labels.walking.extend(part.walking);
        labels.dominant_freq.extend(part.dominant_freq);
    }
    Ok(Detection {
        labels,
        starts: rec.window_starts(),
        bouts,
    })
}

/// Output directory for one of several inputs: `out/<file stem>`.
pub fn per_input_dirs(out: &Path, inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    if inputs.len() == 1 {
        return Ok(vec![out.to_path_buf()]);
    }
    let mut seen = HashSet::new();
    inputs
        .iter()
        .map(|p| {
            let stem = input_stem(p);
            if !seen.insert(stem.clone()) {
                return Err(CliError::Config(format!("two inputs share the name `{stem}`")));
            }
            Ok(out.join(stem))
        })
        .collect()
}

pub fn input_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}
