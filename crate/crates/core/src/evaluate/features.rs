use serde::{Deserialize, Serialize};

use crate::cwt::{CwtEngine, FrequencyGrid, MorseParams};
use crate::detect::BandMaxima;
use crate::preprocess::{peak_to_peak, VmSeries};
use crate::{Error, Result, WINDOW_LEN};

/// Per-window features for external plotting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub window_index: usize,
    pub p2p_g: f64,
    /// Frequency of the largest coefficient over the whole grid; 0 when the
    /// window carries no energy.
    pub dominant_freq_hz: f64,
    pub m_in: f64,
    pub m_lo: f64,
    pub m_hi: f64,
}

/// Transforms the whole series and reduces each complete window. Band
/// maxima use `grid.band`.
pub fn dump_features(vm: &VmSeries, grid: &FrequencyGrid, mp: &MorseParams) -> Result<Vec<FeatureRow>> {
    if vm.len() < WINDOW_LEN {
        return Err(Error::TooShort {
            needed: WINDOW_LEN,
            got: vm.len(),
        });
    }
    let p2p = peak_to_peak(vm);
    let rows = CwtEngine::new(grid, mp).window_maxima(&vm.values, WINDOW_LEN)?;
    Ok((0..vm.n_windows())
        .map(|w| {
            let band = BandMaxima::from_rows(&grid.freqs, |row| rows[row][w], grid.band);
            let mut best = (0.0, 0.0);
            for (row, &f) in grid.freqs.iter().enumerate() {
                if rows[row][w] > best.1 {
                    best = (f, rows[row][w]);
                }
            }
            FeatureRow {
                window_index: w,
                p2p_g: p2p[w],
                dominant_freq_hz: best.0,
                m_in: band.m_in,
                m_lo: band.m_lo,
                m_hi: band.m_hi,
            }
        })
        .collect())
}
