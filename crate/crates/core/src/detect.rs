//! Per-window walking classification and bout summaries.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::cwt::{CwtEngine, FrequencyGrid, MorseParams, Scalogram};
use crate::ingest::DeviceProfile;
use crate::preprocess::{amplitude_gate, VmSeries, WindowGrid};
use crate::{Error, Result, WINDOW_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Smartphone,
    Smartwatch,
    Custom,
}

/// Tuning parameters of the detector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Minimum peak-to-peak amplitude, g.
    pub amplitude_g: f64,
    pub f_min: f64,
    pub f_max: f64,
    /// Allowed ratio of below-band to in-band maxima.
    pub alpha: f64,
    /// Allowed ratio of above-band to in-band maxima.
    pub beta: f64,
    /// Minimum run of consecutive positive windows.
    pub min_windows: usize,
    pub profile: Profile,
}

impl DetectorParams {
    pub fn smartphone() -> Self {
        DetectorParams {
            amplitude_g: 0.3,
            f_min: 1.4,
            f_max: 2.3,
            alpha: 0.6,
            beta: 2.5,
            min_windows: 3,
            profile: Profile::Smartphone,
        }
    }

    pub fn smartwatch() -> Self {
        DetectorParams {
            amplitude_g: 0.3,
            f_min: 1.4,
            f_max: 2.3,
            alpha: 31.7,
            beta: 1.4,
            min_windows: 6,
            profile: Profile::Smartwatch,
        }
    }

    pub fn for_device(device: DeviceProfile) -> Self {
        match device {
            DeviceProfile::Smartphone => Self::smartphone(),
            DeviceProfile::Smartwatch => Self::smartwatch(),
        }
    }

    pub fn band(&self) -> (f64, f64) {
        (self.f_min, self.f_max)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.amplitude_g > 0.0
            && 0.0 < self.f_min
            && self.f_min < self.f_max
            && self.f_max < 5.0
            && self.alpha > 0.0
            && self.beta > 0.0
            && self.min_windows >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::BadParams(format!("{self:?}")))
        }
    }
}

/// Scalogram maxima of one window below, inside and above the step band.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BandMaxima {
    pub m_lo: f64,
    pub m_in: f64,
    pub m_hi: f64,
    /// In-band frequency with the largest maximum; lowest wins ties.
    pub dominant_freq: Option<f64>,
}

impl BandMaxima {
    /// Reduces per-row window maxima (`row_max[row]`) into band maxima.
    pub fn from_rows(freqs: &[f64], row_max: impl Fn(usize) -> f64, band: (f64, f64)) -> Self {
        let mut out = BandMaxima::default();
        for (row, &f) in freqs.iter().enumerate() {
            let v = row_max(row);
            if f < band.0 {
                out.m_lo = out.m_lo.max(v);
            } else if f > band.1 {
                out.m_hi = out.m_hi.max(v);
            } else if out.dominant_freq.is_none() || v > out.m_in {
                out.m_in = v;
                out.dominant_freq = Some(f);
            }
        }
        if out.m_in <= 0.0 {
            out.dominant_freq = None;
        }
        out
    }

    /// The harmonic-ratio conjunction; strict inequalities.
    pub fn passes(&self, alpha: f64, beta: f64) -> bool {
        alpha * self.m_in > self.m_lo && beta * self.m_in > self.m_hi
    }
}

/// Ratio test over samples `window` of `scal`.
pub fn window_ratio_test(scal: &Scalogram, window: Range<usize>, params: &DetectorParams) -> (bool, Option<f64>) {
    let maxima = BandMaxima::from_rows(
        &scal.freqs,
        |row| scal.coeffs[row][window.clone()].iter().cloned().fold(0.0, f64::max),
        params.band(),
    );
    (maxima.passes(params.alpha, params.beta), maxima.dominant_freq)
}

/// Maximal runs of `true`.
pub fn true_runs(flags: &[bool]) -> Vec<Range<usize>> {
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &f) in flags.iter().enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push(s..i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push(s..flags.len());
    }
    runs
}

/// Amplitude gate plus band maxima for every window inside a gated run of
/// at least `min_run` windows. Windows outside such runs carry `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct GatedFeatures {
    pub gate: WindowGrid,
    pub maxima: Vec<Option<BandMaxima>>,
}

impl GatedFeatures {
    pub fn n_windows(&self) -> usize {
        self.maxima.len()
    }
}

pub fn gated_features(
    vm: &VmSeries,
    amplitude_g: f64,
    band: (f64, f64),
    min_run: usize,
    grid: &FrequencyGrid,
    mp: &MorseParams,
) -> Result<GatedFeatures> {
    let gate = amplitude_gate(vm, amplitude_g)?;
    let mut maxima = vec![None; gate.n_windows()];
    let mut engine = CwtEngine::new(grid, mp);
    for run in true_runs(&gate.gate) {
        if run.len() < min_run.max(1) {
            continue;
        }
        let segment = &vm.values[run.start * WINDOW_LEN..run.end * WINDOW_LEN];
        let rows = engine.window_maxima(segment, WINDOW_LEN)?;
        for (i, w) in run.clone().enumerate() {
            maxima[w] = Some(BandMaxima::from_rows(&grid.freqs, |row| rows[row][i], band));
        }
    }
    Ok(GatedFeatures { gate, maxima })
}

/// Per-window decisions after the duration rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerSecondLabels {
    pub walking: Vec<bool>,
    /// Set only where `walking` is true.
    pub dominant_freq: Vec<Option<f64>>,
}

impl PerSecondLabels {
    pub fn n_windows(&self) -> usize {
        self.walking.len()
    }

    pub fn walking_seconds(&self) -> usize {
        self.walking.iter().filter(|&&w| w).count()
    }

    /// Labels with `k` leading non-walking windows.
    pub fn shifted(&self, k: usize) -> PerSecondLabels {
        let mut walking = vec![false; k];
        walking.extend_from_slice(&self.walking);
        let mut dominant_freq = vec![None; k];
        dominant_freq.extend_from_slice(&self.dominant_freq);
        PerSecondLabels {
            walking,
            dominant_freq,
        }
    }
}

pub fn classify(features: &GatedFeatures, alpha: f64, beta: f64, min_windows: usize) -> PerSecondLabels {
    let n = features.n_windows();
    let positive: Vec<bool> = features
        .maxima
        .iter()
        .zip(&features.gate.gate)
        .map(|(m, &g)| g && m.is_some_and(|m| m.passes(alpha, beta)))
        .collect();
    let mut walking = vec![false; n];
    let mut dominant_freq = vec![None; n];
    for run in true_runs(&positive) {
        if run.len() >= min_windows {
            for w in run {
                walking[w] = true;
                dominant_freq[w] = features.maxima[w].and_then(|m| m.dominant_freq);
            }
        }
    }
    PerSecondLabels {
        walking,
        dominant_freq,
    }
}

pub fn detect(vm: &VmSeries, params: &DetectorParams, grid: &FrequencyGrid, mp: &MorseParams) -> Result<PerSecondLabels> {
    params.validate()?;
    let needed = WINDOW_LEN * params.min_windows;
    if vm.len() < needed {
        return Err(Error::TooShort {
            needed,
            got: vm.len(),
        });
    }
    if grid.partition(params.f_min, params.f_max).iter().any(|r| r.is_empty()) {
        return Err(Error::BadBand(format!(
            "grid has no rows on some side of [{}, {}]",
            params.f_min, params.f_max
        )));
    }
    let features = gated_features(vm, params.amplitude_g, params.band(), params.min_windows, grid, mp)?;
    Ok(classify(&features, params.alpha, params.beta, params.min_windows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkingBout {
    pub start_s: f64,
    pub duration_s: f64,
    pub cadence_hz: f64,
    pub steps: f64,
}

/// One bout per maximal walking run; each one-second window contributes
/// its dominant frequency in steps.
pub fn summarize_bouts(labels: &PerSecondLabels) -> Vec<WalkingBout> {
    true_runs(&labels.walking)
        .into_iter()
        .map(|run| {
            let steps: f64 = labels.dominant_freq[run.clone()].iter().map(|f| f.unwrap_or(0.0)).sum();
            let duration_s = run.len() as f64;
            WalkingBout {
                start_s: run.start as f64,
                duration_s,
                cadence_hz: steps / duration_s,
                steps,
            }
        })
        .collect()
}
