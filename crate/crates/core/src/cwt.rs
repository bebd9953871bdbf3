//! Continuous wavelet transform with a generalized Morse mother wavelet.
//!
//! Each grid row is computed in the frequency domain: the DFT of the
//! reflect-padded segment is multiplied by the periodised Morse response at
//! the row's scale and transformed back. The periodised response
//! `Σ_j Ψ(s·(ω + 2πj))` is the DTFT of the sampled time-domain wavelet
//! `ψ(t/s)/s`, so a row equals the direct Riemann sum of the CWT integral.
//!
//! Normalisation follows the analytic-wavelet convention: the response peaks
//! at 2, so a unit-amplitude cosine at a row's centre frequency produces
//! coefficients of modulus 1.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

/// Below this log-response the wavelet is treated as exactly zero.
const LN_NEGLIGIBLE: f64 = -46.0;
/// Envelope fraction that delimits the wavelet's time support.
const SUPPORT_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct MorseParams {
    gamma: f64,
    p2: f64,
    norm_constant: f64,
    // derived
    beta: f64,
    peak_omega: f64,
    /// Arguments outside this range have negligible response.
    effective: (f64, f64),
    /// Time support of the mother wavelet, in units of `t / s`.
    support_span: f64,
}

impl Default for MorseParams {
    /// γ = 3, P² = 60.
    fn default() -> Self {
        MorseParams::new(3.0, 60.0).expect("default Morse parameters are valid")
    }
}

impl MorseParams {
    pub fn new(gamma: f64, p2: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite() && p2 > 0.0 && p2.is_finite()) {
            return Err(Error::BadParams(format!(
                "Morse parameters need gamma > 0 and P^2 > 0, got ({gamma}, {p2})"
            )));
        }
        let beta = p2 / gamma;
        let peak_omega = (beta / gamma).powf(1.0 / gamma);
        // a such that a·ω_p^β·exp(-ω_p^γ) = 2
        let norm_constant = (2f64.ln() - beta * peak_omega.ln() + beta / gamma).exp();
        let mut mp = MorseParams {
            gamma,
            p2,
            norm_constant,
            beta,
            peak_omega,
            effective: (0.0, f64::INFINITY),
            support_span: 0.0,
        };
        mp.effective = mp.effective_range();
        mp.support_span = mp.measure_support();
        Ok(mp)
    }

    /// Same wavelet with a different normalising constant.
    pub fn with_norm_constant(mut self, norm_constant: f64) -> Self {
        assert!(norm_constant > 0.0);
        self.norm_constant = norm_constant;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    /// Angular frequency of the response maximum, `(P²/γ²)^(1/γ)`.
    pub fn peak_omega(&self) -> f64 {
        self.peak_omega
    }

    /// Full width (mother time units) where the envelope exceeds 1% of its peak.
    pub fn support_span(&self) -> f64 {
        self.support_span
    }

    #[inline]
    fn pow_gamma(&self, x: f64) -> f64 {
        if self.gamma == 3.0 {
            x * x * x
        } else {
            x.powf(self.gamma)
        }
    }

    /// `ln Ψ(ω) - ln a` for ω > 0.
    #[inline]
    fn ln_shape(&self, omega: f64) -> f64 {
        self.beta * omega.ln() - self.pow_gamma(omega)
    }

    /// `U(ω)·a·ω^(P²/γ)·exp(-ω^γ)`.
    pub fn response(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        self.norm_constant * self.ln_shape(omega).exp()
    }

    /// Response of the sampled wavelet at scale `scale` (samples) and digital
    /// frequency `omega` in rad/sample, `omega` in [-π, π).
    #[inline]
    pub fn periodic_response(&self, scale: f64, omega: f64) -> f64 {
        let (lo, hi) = self.effective;
        let mut total = 0.0;
        let mut j = if omega > 0.0 { 0.0 } else { 1.0 };
        loop {
            let arg = scale * (omega + 2.0 * PI * j);
            if arg > hi {
                break;
            }
            if arg >= lo {
                total += self.ln_shape(arg).exp();
            }
            j += 1.0;
        }
        self.norm_constant * total
    }

    fn effective_range(&self) -> (f64, f64) {
        let peak_ln = self.ln_shape(self.peak_omega);
        let negligible = |w: f64| self.ln_shape(w) - peak_ln < LN_NEGLIGIBLE;
        let mut lo = self.peak_omega;
        while !negligible(lo) && lo > 1e-300 {
            lo *= 0.5;
        }
        let mut hi = self.peak_omega;
        while !negligible(hi) {
            hi *= 1.25;
        }
        (bisect(lo, self.peak_omega, &negligible), bisect(hi, self.peak_omega, &negligible))
    }

    /// Width of the time-domain envelope above [`SUPPORT_LEVEL`], measured on
    /// a dense inverse FFT of the response.
    fn measure_support(&self) -> f64 {
        let dt = 0.02 / self.peak_omega;
        let mut n = 1 << 14;
        loop {
            let mut buf: Vec<Complex64> = (0..n)
                .map(|k| {
                    let omega = 2.0 * PI * k as f64 / (n as f64 * dt);
                    let v = if k < n / 2 { self.response(omega) } else { 0.0 };
                    Complex64::new(v, 0.0)
                })
                .collect();
            FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
            let env: Vec<f64> = buf.iter().map(|c| c.norm()).collect();
            let peak = env.iter().cloned().fold(0.0, f64::max);
            let thr = SUPPORT_LEVEL * peak;
            let lag = |i: usize| if i < n / 2 { i as isize } else { i as isize - n as isize };
            let (mut lo, mut hi) = (0isize, 0isize);
            for (i, &e) in env.iter().enumerate() {
                if e >= thr {
                    lo = lo.min(lag(i));
                    hi = hi.max(lag(i));
                }
            }
            // the envelope must not reach the aliasing boundary
            if (hi - lo) < n as isize / 4 || n >= 1 << 22 {
                return (hi - lo) as f64 * dt;
            }
            n *= 2;
        }
    }
}

/// Finds the boundary between `outside` (pred true) and `inside` (pred false).
fn bisect(mut outside: f64, mut inside: f64, pred: &impl Fn(f64) -> bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (outside + inside);
        if pred(mid) {
            outside = mid;
        } else {
            inside = mid;
        }
    }
    outside
}

pub fn morse_frequency_response(mp: &MorseParams, omega: f64) -> f64 {
    mp.response(omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub f_lo: f64,
    pub f_hi: f64,
    pub voices_per_octave: u32,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            f_lo: 0.5,
            f_hi: 4.99,
            voices_per_octave: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub fs: f64,
    /// Strictly increasing, Hz.
    pub freqs: Vec<f64>,
    pub band: (f64, f64),
}

impl FrequencyGrid {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Row ranges strictly below, inside (inclusive) and strictly above
    /// `[f_min, f_max]`.
    pub fn partition(&self, f_min: f64, f_max: f64) -> [Range<usize>; 3] {
        let a = self.freqs.partition_point(|&f| f < f_min);
        let b = self.freqs.partition_point(|&f| f <= f_max);
        [0..a, a..b, b..self.freqs.len()]
    }

    /// Spacing of the grid rows that bracket `f`. When `f` sits on a row,
    /// the wider of its two adjacent gaps.
    pub fn local_step(&self, f: f64) -> f64 {
        let g = &self.freqs;
        let gap = |i: usize| g[i + 1] - g[i];
        let last = g.len() - 2;
        let i = g.partition_point(|&x| x < f);
        if i == 0 {
            gap(0)
        } else if i == g.len() {
            gap(last)
        } else if g[i] == f {
            gap(i - 1).max(if i <= last { gap(i) } else { 0.0 })
        } else {
            gap(i - 1)
        }
    }
}

pub fn build_grid(fs: f64, spec: &GridSpec, band: (f64, f64)) -> Result<FrequencyGrid> {
    let (f_min, f_max) = band;
    let ordered = 0.0 < spec.f_lo
        && spec.f_lo < f_min
        && f_min < f_max
        && f_max < spec.f_hi
        && spec.f_hi < fs / 2.0;
    if !ordered || spec.voices_per_octave == 0 {
        return Err(Error::BadBand(format!(
            "need 0 < f_lo ({}) < f_min ({f_min}) < f_max ({f_max}) < f_hi ({}) < fs/2 ({}) and voices > 0",
            spec.f_lo,
            spec.f_hi,
            fs / 2.0
        )));
    }
    let mut freqs = Vec::new();
    let voices = spec.voices_per_octave as f64;
    for k in 0.. {
        let f = spec.f_lo * (k as f64 / voices).exp2();
        if f > spec.f_hi * (1.0 + 1e-12) {
            break;
        }
        freqs.push(f);
    }
    for edge in [f_min, f_max] {
        freqs.retain(|&f| ((f - edge) / edge).abs() > 1e-9);
        freqs.push(edge);
    }
    freqs.sort_by(f64::total_cmp);
    let grid = FrequencyGrid { fs, freqs, band };
    if grid.partition(f_min, f_max).iter().any(|r| r.is_empty()) {
        return Err(Error::BadBand(format!(
            "grid needs rows below, inside and above [{f_min}, {f_max}]"
        )));
    }
    Ok(grid)
}

/// Coefficient moduli, one row per grid frequency, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    pub freqs: Vec<f64>,
    pub coeffs: Vec<Vec<f64>>,
}

impl Scalogram {
    pub fn n_times(&self) -> usize {
        self.coeffs.first().map_or(0, Vec::len)
    }

    /// Scalogram with every coefficient multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Scalogram {
        Scalogram {
            freqs: self.freqs.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|v| v * c).collect())
                .collect(),
        }
    }
}

/// Minimum segment length accepted by the transform.
pub const MIN_SEGMENT: usize = 10;

/// Reusable transform state for one grid and wavelet.
pub struct CwtEngine<'a> {
    grid: &'a FrequencyGrid,
    mp: &'a MorseParams,
    scales: Vec<f64>,
    pad: usize,
    planner: FftPlanner<f64>,
    spectrum: Vec<Complex64>,
    work: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl<'a> CwtEngine<'a> {
    pub fn new(grid: &'a FrequencyGrid, mp: &'a MorseParams) -> Self {
        let scales: Vec<f64> = grid
            .freqs
            .iter()
            .map(|&f| mp.peak_omega() / (2.0 * PI * f / grid.fs))
            .collect();
        let max_scale = scales.iter().cloned().fold(0.0, f64::max);
        let pad = (mp.support_span() * max_scale).ceil() as usize;
        CwtEngine {
            grid,
            mp,
            scales,
            pad,
            planner: FftPlanner::new(),
            spectrum: Vec::new(),
            work: Vec::new(),
            scratch: Vec::new(),
        }
    }

    /// Scale in samples of row `row`.
    pub fn scale(&self, row: usize) -> f64 {
        self.scales[row]
    }

    /// Reflect padding added at each end of a segment.
    pub fn pad_len(&self) -> usize {
        self.pad
    }

    /// Time support of row `row`'s wavelet, in samples.
    pub fn support_samples(&self, row: usize) -> f64 {
        self.mp.support_span() * self.scales[row]
    }

    /// Streams complex coefficients row by row; `sink(row, coeffs)` receives
    /// one value per segment sample.
    pub fn for_each_row_complex(&mut self, segment: &[f64], mut sink: impl FnMut(usize, &[Complex64])) -> Result<()> {
        let n = segment.len();
        if n < MIN_SEGMENT {
            return Err(Error::TooShort {
                needed: MIN_SEGMENT,
                got: n,
            });
        }
        let padded = n + 2 * self.pad;
        let m = next_fast_len(padded);
        let forward: Arc<dyn Fft<f64>> = self.planner.plan_fft_forward(m);
        let inverse: Arc<dyn Fft<f64>> = self.planner.plan_fft_inverse(m);

        self.spectrum.clear();
        self.spectrum.extend((0..padded).map(|p| {
            let src = reflect_index(p as isize - self.pad as isize, n);
            Complex64::new(segment[src], 0.0)
        }));
        self.spectrum.resize(m, Complex64::new(0.0, 0.0));
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        self.scratch.resize(scratch_len, Complex64::new(0.0, 0.0));
        forward.process_with_scratch(&mut self.spectrum, &mut self.scratch);

        let norm = 1.0 / m as f64;
        for row in 0..self.scales.len() {
            let scale = self.scales[row];
            self.work.clear();
            self.work.resize(m, Complex64::new(0.0, 0.0));
            for k in response_bins(self.mp, scale, m) {
                let omega = bin_omega(k, m);
                let h = self.mp.periodic_response(scale, omega);
                self.work[k] = self.spectrum[k] * (h * norm);
            }
            inverse.process_with_scratch(&mut self.work, &mut self.scratch);
            sink(row, &self.work[self.pad..self.pad + n]);
        }
        Ok(())
    }

    /// Streams coefficient moduli row by row.
    pub fn for_each_row(&mut self, segment: &[f64], mut sink: impl FnMut(usize, &[f64])) -> Result<()> {
        let mut moduli = vec![0.0; segment.len()];
        self.for_each_row_complex(segment, |row, coeffs| {
            for (out, c) in moduli.iter_mut().zip(coeffs) {
                *out = c.norm();
            }
            sink(row, &moduli);
        })
    }

    /// Complex coefficients, indexed `[row][sample]`.
    pub fn transform_complex(&mut self, segment: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        let mut out = vec![Vec::new(); self.grid.len()];
        self.for_each_row_complex(segment, |row, coeffs| out[row] = coeffs.to_vec())?;
        Ok(out)
    }

    pub fn transform(&mut self, segment: &[f64]) -> Result<Scalogram> {
        let mut coeffs = vec![Vec::new(); self.grid.len()];
        self.for_each_row(segment, |row, moduli| coeffs[row] = moduli.to_vec())?;
        Ok(Scalogram {
            freqs: self.grid.freqs.clone(),
            coeffs,
        })
    }

    /// Per-row maxima over each complete window of `window_len` samples.
    /// Result is indexed `[row][window]`.
    pub fn window_maxima(&mut self, segment: &[f64], window_len: usize) -> Result<Vec<Vec<f64>>> {
        let n_windows = segment.len() / window_len;
        let mut out = vec![Vec::new(); self.grid.len()];
        self.for_each_row(segment, |row, moduli| {
            out[row] = moduli
                .chunks_exact(window_len)
                .take(n_windows)
                .map(|w| w.iter().cloned().fold(0.0, f64::max))
                .collect();
        })?;
        Ok(out)
    }
}

pub fn transform(segment: &[f64], grid: &FrequencyGrid, mp: &MorseParams) -> Result<Scalogram> {
    CwtEngine::new(grid, mp).transform(segment)
}

/// Index of the symmetric (edge-not-repeated) reflection of `i` into `0..n`.
pub fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let r = i.rem_euclid(period);
    if r >= n as isize {
        (period - r) as usize
    } else {
        r as usize
    }
}

#[inline]
fn bin_omega(k: usize, m: usize) -> f64 {
    let k = if 2 * k >= m { k as f64 - m as f64 } else { k as f64 };
    2.0 * PI * k / m as f64
}

/// DFT bins where the periodised response at `scale` can be non-negligible.
fn response_bins(mp: &MorseParams, scale: f64, m: usize) -> impl Iterator<Item = usize> {
    let (lo, hi) = mp.effective;
    let (lo, hi) = (lo / scale, hi / scale);
    let full = hi - 2.0 * PI >= -PI || lo <= 0.0;
    let to_bin = |w: f64| (w / (2.0 * PI) * m as f64).max(0.0);
    let (a, b) = if full {
        (0, m)
    } else {
        (to_bin(lo).floor() as usize, (to_bin(hi).ceil() as usize + 1).min(m))
    };
    a..b
}

/// Smallest 2^a·3^b·5^c that is at least `n`.
pub fn next_fast_len(n: usize) -> usize {
    let mut best = n.next_power_of_two();
    let mut p5 = 1;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut v = p35;
            while v < n {
                v *= 2;
            }
            best = best.min(v);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FS_HZ;
    use proptest::prelude::*;

    fn default_grid() -> FrequencyGrid {
        build_grid(FS_HZ, &GridSpec::default(), (1.4, 2.3)).unwrap()
    }

    fn tone(f: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| (2.0 * PI * f * k as f64 / FS_HZ).sin()).collect()
    }

    #[test]
    fn response_unit_step() {
        let mp = MorseParams::default();
        assert_eq!(mp.response(-1.0), 0.0);
        assert_eq!(mp.response(0.0), 0.0);
    }

    #[test]
    fn response_peak_found_numerically() {
        let mp = MorseParams::default();
        // golden-section maximisation, independent of the closed form
        let (mut a, mut b) = (0.1, 6.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if mp.response(c) > mp.response(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let w = 0.5 * (a + b);
        assert!((w - mp.peak_omega()).abs() < 1e-6, "{w} vs {}", mp.peak_omega());
        assert!((w - (20.0f64 / 3.0).cbrt()).abs() < 1e-6);
        assert!((mp.response(w) - 2.0).abs() < 1e-12);
        let p = mp.peak_omega();
        assert!(mp.response(0.5 * p) < 2.0 && mp.response(2.0 * p) < 2.0);
        assert!(mp.response(20f64.cbrt()) < 2.0);
    }

    #[test]
    fn support_is_finite_and_positive() {
        let mp = MorseParams::default();
        assert!(mp.support_span() > 1.0 && mp.support_span() < 100.0);
    }

    #[test]
    fn bad_morse_params() {
        assert!(MorseParams::new(0.0, 60.0).is_err());
        assert!(MorseParams::new(3.0, -1.0).is_err());
    }

    #[test]
    fn default_grid_contains_band_edges() {
        let g = default_grid();
        assert!(g.freqs.contains(&1.4) && g.freqs.contains(&2.3));
        assert_eq!(g.freqs[0], 0.5);
        assert!(*g.freqs.last().unwrap() < 4.99);
        assert!(g.freqs.windows(2).all(|w| w[0] < w[1]));
        let [lo, mid, hi] = g.partition(1.4, 2.3);
        assert!(lo.len() >= 3 && mid.len() >= 3 && hi.len() >= 3);
    }

    #[test]
    fn octave_grid() {
        let spec = GridSpec {
            f_lo: 0.5,
            f_hi: 4.0,
            voices_per_octave: 1,
        };
        let g = build_grid(FS_HZ, &spec, (1.4, 2.3)).unwrap();
        assert_eq!(g.freqs, vec![0.5, 1.0, 1.4, 2.0, 2.3, 4.0]);
    }

    #[test]
    fn reversed_band_rejected() {
        assert!(matches!(
            build_grid(FS_HZ, &GridSpec::default(), (2.3, 1.4)),
            Err(Error::BadBand(_))
        ));
        let nyquist = GridSpec {
            f_hi: 5.0,
            ..GridSpec::default()
        };
        assert!(build_grid(FS_HZ, &nyquist, (1.4, 2.3)).is_err());
    }

    #[test]
    fn zero_signal() {
        let s = transform(&vec![0.0; 100], &default_grid(), &MorseParams::default()).unwrap();
        assert!(s.coeffs.iter().flatten().all(|&c| c.abs() < 1e-12));
    }

    #[test]
    fn too_short() {
        let r = transform(&[0.0; 9], &default_grid(), &MorseParams::default());
        assert!(matches!(r, Err(Error::TooShort { .. })));
    }

    #[test]
    fn unit_tone_has_unit_modulus_at_centre_row() {
        let grid = default_grid();
        let s = transform(&tone(2.0, 600), &grid, &MorseParams::default()).unwrap();
        let row = grid.freqs.iter().position(|&f| (f - 2.0).abs() < 1e-12).unwrap();
        assert!((s.coeffs[row][300] - 1.0).abs() < 1e-3, "{}", s.coeffs[row][300]);
    }

    #[test]
    fn tone_at_two_hz_peaks_at_nearest_row() {
        let grid = default_grid();
        let s = transform(&tone(2.0, 300), &grid, &MorseParams::default()).unwrap();
        let mid = 150;
        let best = (0..grid.len())
            .max_by(|&a, &b| s.coeffs[a][mid].total_cmp(&s.coeffs[b][mid]))
            .unwrap();
        let nearest = (0..grid.len())
            .min_by(|&a, &b| (grid.freqs[a] - 2.0).abs().total_cmp(&(grid.freqs[b] - 2.0).abs()))
            .unwrap();
        assert_eq!(best, nearest);
    }

    #[test]
    fn reflect_indexing() {
        let idx: Vec<usize> = (-5..9).map(|i| reflect_index(i, 4)).collect();
        assert_eq!(idx, vec![1, 2, 3, 2, 1, 0, 1, 2, 3, 2, 1, 0, 1, 2]);
    }

    #[test]
    fn fast_len() {
        assert_eq!(next_fast_len(1), 1);
        assert_eq!(next_fast_len(7), 8);
        assert_eq!(next_fast_len(11), 12);
        assert_eq!(next_fast_len(31), 32);
        assert_eq!(next_fast_len(121), 125);
        for n in 1..2000 {
            let m = next_fast_len(n);
            assert!(m >= n);
            let mut r = m;
            for p in [2, 3, 5] {
                while r.is_multiple_of(p) {
                    r /= p;
                }
            }
            assert_eq!(r, 1);
        }
    }

    #[test]
    fn window_maxima_match_transform() {
        let grid = default_grid();
        let mp = MorseParams::default();
        let sig: Vec<f64> = tone(1.8, 95).iter().map(|v| 0.5 * v).collect();
        let scal = transform(&sig, &grid, &mp).unwrap();
        let maxima = CwtEngine::new(&grid, &mp).window_maxima(&sig, 10).unwrap();
        for (row, m) in maxima.iter().enumerate() {
            assert_eq!(m.len(), 9);
            for (w, &v) in m.iter().enumerate() {
                let direct = scal.coeffs[row][w * 10..w * 10 + 10].iter().cloned().fold(0.0, f64::max);
                assert_eq!(v, direct);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn linearity(sig in prop::collection::vec(-2.0f64..2.0, 10..200), a in 0.1f64..10.0) {
            let grid = default_grid();
            let mp = MorseParams::default();
            let base = transform(&sig, &grid, &mp).unwrap();
            let scaled: Vec<f64> = sig.iter().map(|v| a * v).collect();
            let out = transform(&scaled, &grid, &mp).unwrap();
            for (r0, r1) in base.coeffs.iter().zip(&out.coeffs) {
                for (c0, c1) in r0.iter().zip(r1) {
                    prop_assert!((c1 - a * c0).abs() <= 1e-9 * (a * c0).abs().max(1e-300) + 1e-12);
                }
            }
        }

        #[test]
        fn superposition(
            pair in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 10..200),
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
        ) {
            let grid = default_grid();
            let mp = MorseParams::default();
            let mut engine = CwtEngine::new(&grid, &mp);
            let x: Vec<f64> = pair.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pair.iter().map(|p| p.1).collect();
            let mixed: Vec<f64> = pair.iter().map(|p| a * p.0 + b * p.1).collect();
            let (cx, cy, cm) = (
                engine.transform_complex(&x).unwrap(),
                engine.transform_complex(&y).unwrap(),
                engine.transform_complex(&mixed).unwrap(),
            );
            for row in 0..grid.len() {
                let scale = cx[row].iter().chain(&cy[row]).map(|c| c.norm()).fold(0.0, f64::max) * (a.abs() + b.abs());
                for t in 0..x.len() {
                    let want = cx[row][t] * a + cy[row][t] * b;
                    prop_assert!((cm[row][t] - want).norm() <= 1e-9 * scale + 1e-300);
                }
            }
        }

        #[test]
        fn normalisation_scales_coefficients(sig in prop::collection::vec(-2.0f64..2.0, 20..120), c in 0.01f64..100.0) {
            let grid = default_grid();
            let mp = MorseParams::default();
            let other = mp.clone().with_norm_constant(mp.norm_constant() * c);
            let a = transform(&sig, &grid, &mp).unwrap();
            let b = transform(&sig, &grid, &other).unwrap();
            for (ra, rb) in a.coeffs.iter().zip(&b.coeffs) {
                for (x, y) in ra.iter().zip(rb) {
                    prop_assert!((y - c * x).abs() <= 1e-9 * (c * x).abs() + 1e-12);
                }
            }
        }

        #[test]
        // Above ~4.26 Hz the sampled top-row wavelets also see the tone's
        // image at fs - f0; see near_nyquist_alias below.
        fn tone_localisation(f0 in 0.7f64..4.2, phase in 0.0f64..6.3) {
            let grid = default_grid();
            let n = 250;
            let sig: Vec<f64> = (0..n).map(|k| (2.0 * PI * f0 * k as f64 / FS_HZ + phase).sin()).collect();
            let s = transform(&sig, &grid, &MorseParams::default()).unwrap();
            let mid = n / 2;
            let best = (0..grid.len()).max_by(|&a, &b| s.coeffs[a][mid].total_cmp(&s.coeffs[b][mid])).unwrap();
            prop_assert!((grid.freqs[best] - f0).abs() <= grid.local_step(f0) + 1e-12,
                "f0 {} argmax {}", f0, grid.freqs[best]);
        }
    }

    #[test]
    fn near_nyquist_alias() {
        // 4.5 Hz at phase 0: the 4.97 Hz row picks up the 5.5 Hz image and wins.
        let grid = default_grid();
        let n = 250;
        let sig: Vec<f64> = (0..n).map(|k| (2.0 * PI * 4.4979 * k as f64 / FS_HZ).sin()).collect();
        let s = transform(&sig, &grid, &MorseParams::default()).unwrap();
        let best = (0..grid.len()).max_by(|&a, &b| s.coeffs[a][n / 2].total_cmp(&s.coeffs[b][n / 2])).unwrap();
        assert!(grid.freqs[best] > 4.9, "{}", grid.freqs[best]);
    }
}
