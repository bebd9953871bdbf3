use std::path::Path;

use walkdet_core::synth::{generate, SynthSpec};

use super::num;
use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::output::{emit, Log, Table};

/// Reads a JSON `{"seed": .., "segments": [..]}` spec; `--seed` replaces
/// the file's seed.
pub fn run(spec_path: &Path, settings: &Settings) -> CliResult<()> {
    let bad = |message: String| CliError::Input {
        path: spec_path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(spec_path).map_err(|e| bad(e.to_string()))?;
    let mut spec: SynthSpec = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if let Some(seed) = settings.seed {
        spec.seed = seed;
    }
    let out = generate(&spec).map_err(CliError::core_at(spec_path))?;
    let rec = &out.recording;

    let mut input = Table::new(&["t", "x", "y", "z", "label"]);
    let labels = rec.labels.as_deref().unwrap_or_default();
    for (k, s) in rec.samples.iter().enumerate() {
        input.row([
            num(rec.time(k)),
            num(s[0]),
            num(s[1]),
            num(s[2]),
            labels.get(k).cloned().unwrap_or_default(),
        ]);
    }
    input.write(&settings.out.join("input.csv"))?;

    let mut truth = Table::new(&["window_index", "walking"]);
    for (w, &walking) in out.truth.iter().enumerate() {
        truth.row([w.to_string(), u8::from(walking).to_string()]);
    }
    truth.write(&settings.out.join("truth.csv"))?;

    let walking_seconds = out.truth.iter().filter(|&&w| w).count();
    Log { quiet: settings.quiet }.note(format!(
        "{} samples, {} walking windows of {}",
        rec.len(),
        walking_seconds,
        out.truth.len()
    ));
    emit(&serde_json::json!({
        "seed": spec.seed,
        "samples": rec.len(),
        "windows": out.truth.len(),
        "walking_seconds": walking_seconds,
    }))
}
