//! Vector magnitude, one-second amplitude gating and walking-label cleanup.

use std::collections::HashSet;

use crate::ingest::UniformRecording;
use crate::{Error, Result, WINDOW_LEN};

/// Label assigned to walking-labelled windows with no recorded motion.
pub const STATIONARY_ADJUSTED: &str = "stationary_adjusted";

/// Per-axis standard deviation (g) a window must exceed on two axes to keep
/// a walking label.
pub const MOTION_SD_G: f64 = 0.1;

/// Gravity-subtracted vector magnitude `sqrt(x1² + x2² + x3²) - 1`, in g.
#[derive(Debug, Clone, PartialEq)]
pub struct VmSeries {
    pub fs: f64,
    pub start_time: f64,
    pub values: Vec<f64>,
}

impl VmSeries {
    pub fn new(fs: f64, start_time: f64, values: Vec<f64>) -> Self {
        VmSeries {
            fs,
            start_time,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Complete one-second windows; a trailing partial window is ignored.
    pub fn n_windows(&self) -> usize {
        self.values.len() / WINDOW_LEN
    }

    pub fn window(&self, w: usize) -> &[f64] {
        &self.values[w * WINDOW_LEN..(w + 1) * WINDOW_LEN]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowGrid {
    pub threshold: f64,
    pub p2p: Vec<f64>,
    pub gate: Vec<bool>,
}

impl WindowGrid {
    pub fn n_windows(&self) -> usize {
        self.p2p.len()
    }
}

pub fn vector_magnitude(rec: &UniformRecording) -> VmSeries {
    let values = rec
        .samples
        .iter()
        .map(|&[x, y, z]| (x * x + y * y + z * z).sqrt() - 1.0)
        .collect();
    VmSeries::new(rec.fs, rec.start_time, values)
}

/// Max minus min of each complete window.
pub fn peak_to_peak(vm: &VmSeries) -> Vec<f64> {
    vm.values
        .chunks_exact(WINDOW_LEN)
        .map(|w| {
            let (lo, hi) = w
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            hi - lo
        })
        .collect()
}

/// Windows whose peak-to-peak amplitude reaches `threshold` (inclusive).
pub fn amplitude_gate(vm: &VmSeries, threshold: f64) -> Result<WindowGrid> {
    if !(threshold > 0.0) {
        return Err(Error::BadParams(format!("amplitude threshold must be > 0, got {threshold}")));
    }
    if vm.len() < WINDOW_LEN {
        return Err(Error::TooShort {
            needed: WINDOW_LEN,
            got: vm.len(),
        });
    }
    let p2p = peak_to_peak(vm);
    let gate = p2p.iter().map(|&p| p >= threshold).collect();
    Ok(WindowGrid { threshold, p2p, gate })
}

fn population_sd(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Relabels walking samples in windows where fewer than two axes move
/// (population SD above [`MOTION_SD_G`]). The trailing partial window is
/// judged on the samples it has.
pub fn adjust_walk_labels(rec: &UniformRecording, walking_labels: &HashSet<String>) -> Result<UniformRecording> {
    let labels = rec.labels.as_ref().ok_or(Error::NoLabels)?;
    let mut out = labels.clone();
    for (w, chunk) in rec.samples.chunks(WINDOW_LEN).enumerate() {
        let base = w * WINDOW_LEN;
        let window_labels = &labels[base..base + chunk.len()];
        if !window_labels.iter().any(|l| walking_labels.contains(l)) {
            continue;
        }
        let moving_axes = (0..3)
            .filter(|&axis| population_sd(chunk.iter().map(|s| s[axis])) > MOTION_SD_G)
            .count();
        if moving_axes < 2 {
            for (i, l) in window_labels.iter().enumerate() {
                if walking_labels.contains(l) {
                    out[base + i] = STATIONARY_ADJUSTED.to_string();
                }
            }
        }
    }
    Ok(UniformRecording {
        labels: Some(out),
        ..rec.clone()
    })
}
