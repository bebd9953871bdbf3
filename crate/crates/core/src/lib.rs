//! Walking recognition for tri-axial accelerometer recordings.
//!
//! The pipeline resamples raw data to 10 Hz, reduces it to a gravity-free
//! vector magnitude, gates one-second windows by peak-to-peak amplitude and
//! classifies the surviving windows with harmonic-ratio tests on a
//! generalized Morse continuous wavelet transform. Runs shorter than `T`
//! windows are discarded.
//!
//! ```no_run
//! use walkdet_core::prelude::*;
//!
//! let raw = parse_csv("walk.csv", Units::G, RecordingMeta::default())?;
//! let chunks = resample_10hz(&normalize_units(raw), 1.0)?;
//! let params = DetectorParams::smartphone();
//! let grid = build_grid(FS_HZ, &GridSpec::default(), params.band())?;
//! let labels = detect(&vector_magnitude(&chunks[0]), &params, &grid, &MorseParams::default())?;
//! for bout in summarize_bouts(&labels) {
//!     println!("{:.0}s walking at {:.2} steps/s", bout.duration_s, bout.cadence_hz);
//! }
//! # Ok::<(), walkdet_core::Error>(())
//! ```

pub mod cwt;
pub mod detect;
mod error;
pub mod evaluate;
pub mod ingest;
pub mod preprocess;
pub mod synth;

pub use error::{Error, Result};

/// Uniform sampling rate of every analysed signal.
pub const FS_HZ: f64 = 10.0;
/// Samples per one-second analysis window.
pub const WINDOW_LEN: usize = 10;

pub mod prelude {
    pub use crate::cwt::{build_grid, transform, FrequencyGrid, GridSpec, MorseParams, Scalogram};
    pub use crate::detect::{
        detect, summarize_bouts, window_ratio_test, DetectorParams, PerSecondLabels, Profile,
        WalkingBout,
    };
    pub use crate::ingest::{
        normalize_units, parse_csv, resample_10hz, RawRecording, RecordingMeta, UniformRecording,
        Units,
    };
    pub use crate::preprocess::{amplitude_gate, vector_magnitude, VmSeries, WindowGrid};
    pub use crate::{Error, Result, FS_HZ, WINDOW_LEN};
}
