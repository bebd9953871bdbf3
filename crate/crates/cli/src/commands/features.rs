use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdet_core::cwt::MorseParams;
use walkdet_core::evaluate::dump_features;
use walkdet_core::preprocess::vector_magnitude;
use walkdet_core::WINDOW_LEN;

use super::num;
use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::output::{emit, Log, Table};
use crate::pipeline::{grid_for, load, per_input_dirs};

pub fn run(inputs: &[PathBuf], settings: &Settings) -> CliResult<()> {
    let dirs = per_input_dirs(&settings.out, inputs)?;
    let counts: Vec<usize> = inputs
        .par_iter()
        .zip(&dirs)
        .map(|(input, dir)| features_one(input, dir, settings))
        .collect::<CliResult<_>>()?;
    let log = Log { quiet: settings.quiet };
    for (input, n) in inputs.iter().zip(&counts) {
        log.note(format!("{}: {n} windows", input.display()));
        emit(&serde_json::json!({ "input": input.display().to_string(), "windows": n }))?;
    }
    Ok(())
}

fn features_one(input: &Path, dir: &Path, settings: &Settings) -> CliResult<usize> {
    let rec = load(input, settings, settings.meta.clone())?;
    let grid = grid_for(settings, &settings.params)?;
    let mp = MorseParams::default();
    let mut table = Table::new(&["window_index", "start_s", "p2p_g", "dominant_freq_hz", "m_in", "m_lo", "m_hi"]);
    let mut w = 0;
    for chunk in rec.chunks.iter().filter(|c| c.len() >= WINDOW_LEN) {
        let rows = dump_features(&vector_magnitude(chunk), &grid, &mp).map_err(CliError::core_at(input))?;
        for r in rows {
            table.row([
                w.to_string(),
                num(chunk.start_time + r.window_index as f64),
                num(r.p2p_g),
                num(r.dominant_freq_hz),
                num(r.m_in),
                num(r.m_lo),
                num(r.m_hi),
            ]);
            w += 1;
        }
    }
    if w == 0 {
        return Err(CliError::Core {
            path: Some(input.to_path_buf()),
            source: walkdet_core::Error::TooShort {
                needed: WINDOW_LEN,
                got: rec.chunks.iter().map(|c| c.len()).max().unwrap_or(0),
            },
        });
    }
    table.write(&dir.join("features.csv"))?;
    Ok(w)
}
