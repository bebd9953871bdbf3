//! Independent reference implementations shared by integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use walkdet_core::cwt::{build_grid, FrequencyGrid, GridSpec, MorseParams};
use walkdet_core::detect::{detect, DetectorParams};
use walkdet_core::evaluate::regress::{Gender, RegressionRow};
use walkdet_core::evaluate::roc::{Candidate, LabeledSeries};
use walkdet_core::ingest::{Environment, SensorLocation};
use walkdet_core::FS_HZ;

/// Mother wavelet ψ(t) = (1/2π)∫₀^∞ Ψ(ω) e^{iωt} dω evaluated by composite
/// Simpson quadrature on a fixed ω grid.
pub struct MotherWavelet {
    d_omega: f64,
    weights: Vec<f64>,
    /// |t| beyond which ψ is treated as zero.
    pub t_cut: f64,
}

impl MotherWavelet {
    pub fn new(mp: &MorseParams) -> Self {
        let (a, beta, gamma) = (mp.norm_constant(), mp.beta(), mp.gamma());
        let omega_max = 7.0;
        let steps = 28_000;
        let d_omega = omega_max / steps as f64;
        let weights = (0..=steps)
            .map(|k| {
                let w = k as f64 * d_omega;
                let simpson = if k == 0 || k == steps {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let psi_hat = if w > 0.0 { a * w.powf(beta) * (-w.powf(gamma)).exp() } else { 0.0 };
                simpson * psi_hat * d_omega / 3.0 / (2.0 * PI)
            })
            .collect();
        let mut mw = MotherWavelet {
            d_omega,
            weights,
            t_cut: f64::INFINITY,
        };
        let peak = mw.psi(0.0).norm();
        let mut t_cut = 0.0;
        let mut t = 0.0;
        while t < 400.0 {
            if mw.psi(t).norm() > 1e-14 * peak || mw.psi(-t).norm() > 1e-14 * peak {
                t_cut = t;
            }
            t += 0.05;
        }
        mw.t_cut = t_cut + 0.05;
        mw
    }

    pub fn psi(&self, t: f64) -> Complex64 {
        if t.abs() > self.t_cut {
            return Complex64::new(0.0, 0.0);
        }
        let step = Complex64::from_polar(1.0, self.d_omega * t);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &w) in self.weights.iter().enumerate() {
            if k % 512 == 0 {
                rot = Complex64::from_polar(1.0, k as f64 * self.d_omega * t);
            }
            acc += rot * w;
            rot *= step;
        }
        acc
    }
}

/// Symmetric reflection without edge repetition, by explicit folding.
pub fn reflect_pad(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len() as isize;
    (-(pad as isize)..n + pad as isize)
        .map(|mut i| {
            loop {
                if i < 0 {
                    i = -i;
                } else if i >= n {
                    i = 2 * (n - 1) - i;
                } else {
                    break;
                }
            }
            x[i as usize]
        })
        .collect()
}

/// Direct-summation CWT with per-row filter taps `(1/s)·conj(ψ(k/s))`.
pub struct DirectCwt {
    rows: Vec<(isize, Vec<Complex64>)>,
}

impl DirectCwt {
    pub fn new(grid: &FrequencyGrid, mp: &MorseParams) -> Self {
        let mw = MotherWavelet::new(mp);
        let rows = grid
            .freqs
            .iter()
            .map(|&f| {
                let s = mp.peak_omega() * grid.fs / (2.0 * PI * f);
                let reach = (mw.t_cut * s).ceil() as isize;
                let taps = (-reach..=reach).map(|k| mw.psi(k as f64 / s).conj() / s).collect();
                (reach, taps)
            })
            .collect();
        DirectCwt { rows }
    }

    /// |C(f, τ)| = |Σ_m x_pad[m]·(1/s)·conj(ψ((m − τ)/s))| on the
    /// reflect-padded segment, for every row and every sample τ of `segment`.
    pub fn apply(&self, segment: &[f64], pad: usize) -> Vec<Vec<f64>> {
        let padded = reflect_pad(segment, pad);
        self.rows
            .iter()
            .map(|(reach, taps)| {
                (0..segment.len())
                    .map(|tau| {
                        let centre = (tau + pad) as isize;
                        let mut acc = Complex64::new(0.0, 0.0);
                        for (j, tap) in taps.iter().enumerate() {
                            let m = centre + j as isize - reach;
                            if m >= 0 && (m as usize) < padded.len() {
                                acc += padded[m as usize] * tap;
                            }
                        }
                        acc.norm()
                    })
                    .collect()
            })
            .collect()
    }
}

pub mod corpora {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use walkdet_core::ingest::{Environment, SensorLocation};
    use walkdet_core::evaluate::regress::{Gender, RegressionRow};
    use walkdet_core::evaluate::roc::LabeledSeries;
    use walkdet_core::preprocess::{vector_magnitude, VmSeries};
    use walkdet_core::synth::{generate, Segment, SynthOutput, SynthSpec};

    /// 50 walking bouts (1.5–2.2 Hz, 0.4–1.5 g, 20–60 s, f/2 up to 0.2 and
    /// 2f up to 0.3 of the fundamental, σ = 0.03 g), each between
    /// stationary stretches.
    pub fn walking_bouts(seed: u64) -> Vec<SynthOutput> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..50)
            .map(|i| {
                let f = rng.random_range(1.5..=2.2);
                let a = rng.random_range(0.4..=1.5);
                let d = rng.random_range(20..=60) as f64;
                let sub = rng.random_range(0.0..=0.2);
                let hi = rng.random_range(0.0..=0.3);
                let lead = rng.random_range(5..=15) as f64;
                let segments = vec![
                    Segment::stationary(lead).with_noise(0.03),
                    Segment::walk(d, f, a).with_harmonics(sub, hi).with_noise(0.03),
                    Segment::stationary(5.0).with_noise(0.03),
                ];
                generate(&SynthSpec { seed: seed.wrapping_mul(1000).wrapping_add(i), segments }).unwrap()
            })
            .collect()
    }

    /// 50 non-walking recordings cycling through flatline, white noise
    /// (σ ≤ 0.05 g), running-cadence tones (2.8–3.5 Hz) and 0.3 Hz sway.
    pub fn non_walking(seed: u64) -> Vec<SynthOutput> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..50u64)
            .map(|i| {
                let d = rng.random_range(20..=60) as f64;
                let seg = match i % 4 {
                    0 => Segment::stationary(d),
                    1 => Segment::noise(d, rng.random_range(0.005..=0.05)),
                    2 => Segment::tone(d, rng.random_range(2.8..=3.5), rng.random_range(0.4..=1.5)).with_noise(0.03),
                    _ => Segment::tone(d, 0.3, rng.random_range(0.2..=1.0)).with_noise(0.005),
                };
                generate(&SynthSpec { seed: seed.wrapping_mul(1000).wrapping_add(i), segments: vec![seg] }).unwrap()
            })
            .collect()
    }

    pub fn labeled(out: &SynthOutput) -> LabeledSeries {
        let vm = vector_magnitude(&out.recording);
        let truth = out.truth.iter().map(|&t| Some(t)).collect();
        LabeledSeries::new(vm, truth).unwrap()
    }

    /// Mixed corpus of about `target_windows` windows whose walking and
    /// non-walking parts overlap in amplitude, frequency and duration.
    pub fn roc_mixture(seed: u64, target_windows: usize) -> Vec<LabeledSeries> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        let mut windows = 0;
        let mut i = 0u64;
        while windows < target_windows {
            let mut segments = vec![Segment::stationary(rng.random_range(3..=8) as f64).with_noise(0.02)];
            for _ in 0..4 {
                let d = rng.random_range(2..=25) as f64;
                let seg = match rng.random_range(0..6) {
                    0 | 1 => Segment::walk(d, rng.random_range(1.2..=2.6), rng.random_range(0.1..=1.2))
                        .with_harmonics(rng.random_range(0.0..=0.8), rng.random_range(0.0..=0.8))
                        .with_noise(rng.random_range(0.0..=0.08)),
                    2 => Segment::tone(d, rng.random_range(0.6..=4.2), rng.random_range(0.1..=1.2))
                        .with_noise(rng.random_range(0.0..=0.08)),
                    3 => Segment::noise(d, rng.random_range(0.01..=0.25)),
                    4 => Segment::stationary(d).with_noise(0.02),
                    _ => Segment::tone(d, 0.3, rng.random_range(0.2..=1.0)).with_noise(0.01),
                };
                segments.push(seg);
            }
            let synth = generate(&SynthSpec { seed: seed.wrapping_mul(7919).wrapping_add(i), segments }).unwrap();
            windows += synth.truth.len();
            out.push(labeled(&synth));
            i += 1;
        }
        out
    }

    /// Walking tones and flatlines only.
    pub fn separable(seed: u64) -> Vec<LabeledSeries> {
        (0..6u64)
            .map(|i| {
                let segments = vec![
                    Segment::stationary(20.0),
                    Segment::walk(30.0, 1.75 + 0.05 * i as f64, 0.8),
                    Segment::stationary(20.0),
                ];
                labeled(&generate(&SynthSpec { seed: seed + i, segments }).unwrap())
            })
            .collect()
    }

    /// Seven days at 10 Hz (6,048,000 samples), about 30% of the time in
    /// high-amplitude walking or running.
    pub fn week(seed: u64) -> VmSeries {
        const TOTAL_S: f64 = 7.0 * 86_400.0;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut segments = Vec::new();
        let mut t = 0.0;
        while t < TOTAL_S {
            let rest = (rng.random_range(70..=1400) as f64).min(TOTAL_S - t);
            segments.push(Segment::stationary(rest).with_noise(0.01));
            t += rest;
            if t >= TOTAL_S {
                break;
            }
            let active = (rng.random_range(30..=600) as f64).min(TOTAL_S - t);
            let seg = if rng.random_bool(0.7) {
                Segment::walk(active, rng.random_range(1.5..=2.2), rng.random_range(0.4..=1.5))
                    .with_harmonics(0.1, 0.2)
                    .with_noise(0.03)
            } else {
                Segment::tone(active, rng.random_range(2.8..=3.5), rng.random_range(0.8..=2.0)).with_noise(0.03)
            };
            segments.push(seg);
            t += active;
        }
        vector_magnitude(&generate(&SynthSpec { seed, segments }).unwrap().recording)
    }

    pub const TRUE_COEF_NAMES: [&str; 4] = ["(intercept)", "age", "male", "bmi"];

    /// Rows drawn from a linear model in raw covariates plus gaussian noise.
    pub fn regression_table(seed: u64, n: usize, noise: f64) -> Vec<RegressionRow> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let locations = [
            SensorLocation::Arm,
            SensorLocation::Thigh,
            SensorLocation::Waist,
            SensorLocation::Chest,
            SensorLocation::Wrist,
            SensorLocation::Unspecified,
        ];
        let studies = ["UniMiBSHAR", "DaLiAc", "WISDM", "RealWorld"];
        (0..n)
            .map(|_| {
                let age: f64 = rng.random_range(18.0..70.0);
                let bmi: f64 = rng.random_range(17.0..35.0);
                let male = rng.random_bool(0.5);
                let loc = rng.random_range(0..locations.len());
                let study = rng.random_range(0..studies.len());
                let free = rng.random_bool(0.3);
                let mut y = 0.9 - 0.001 * (age - 30.0) + 0.004 * (bmi - 24.0) + if male { 0.01 } else { 0.0 };
                y += [0.0, -0.02, 0.03, 0.04, -0.05, 0.01][loc];
                y += [0.0, 0.02, -0.03, 0.015][study];
                y += if free { -0.01 } else { 0.0 };
                // Box–Muller for the noise term
                let (u1, u2): (f64, f64) = (rng.random(), rng.random());
                y += noise * (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                RegressionRow {
                    sensitivity: Some(y),
                    age_y: Some(age),
                    bmi: Some(bmi),
                    gender: Some(if male { Gender::Male } else { Gender::Female }),
                    condition: Some(if free { Environment::FreeLiving } else { Environment::Controlled }),
                    location: Some(locations[loc]),
                    study: Some(studies[study].to_string()),
                }
            })
            .collect()
    }
}

/// Least squares by conjugate gradients on the normal equations, refined
/// until the update stalls. Plain `Vec` arithmetic only.
pub fn least_squares_cg(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let xt_mul = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; p];
        for (row, &vi) in x.iter().zip(v) {
            for j in 0..p {
                out[j] += row[j] * vi;
            }
        }
        out
    };
    let x_mul = |b: &[f64]| -> Vec<f64> { x.iter().map(|row| row.iter().zip(b).map(|(a, c)| a * c).sum()).collect() };
    let normal = |b: &[f64]| xt_mul(&x_mul(b));
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let mut b = vec![0.0; p];
    for _refine in 0..20 {
        let fitted = x_mul(&b);
        let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, c)| a - c).collect();
        let mut r = xt_mul(&resid);
        let mut d = r.clone();
        let mut delta = vec![0.0; p];
        let mut rr = dot(&r, &r);
        if rr == 0.0 {
            break;
        }
        for _ in 0..10 * p {
            let ad = normal(&d);
            let step = rr / dot(&d, &ad);
            for j in 0..p {
                delta[j] += step * d[j];
                r[j] -= step * ad[j];
            }
            let rr_new = dot(&r, &r);
            if rr_new < 1e-32 {
                break;
            }
            for j in 0..p {
                d[j] = r[j] + rr_new / rr * d[j];
            }
            rr = rr_new;
        }
        for j in 0..p {
            b[j] += delta[j];
        }
    }
    b
}

/// Runs the full detector for each candidate and returns the first index
/// maximising tpr − fpr in ascending candidate order.
pub fn brute_force(data: &[LabeledSeries], candidates: &[Candidate], fixed: &DetectorParams) -> (usize, Vec<(f64, f64)>) {
    let mp = MorseParams::default();
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut points = Vec::new();
    for c in &sorted {
        let p = c.apply(fixed);
        let grid = build_grid(FS_HZ, &GridSpec::default(), p.band()).unwrap();
        let (mut tp, mut fp, mut pos, mut neg) = (0u64, 0u64, 0u64, 0u64);
        for s in data {
            let labels = detect(&s.vm, &p, &grid, &mp).unwrap();
            for (&w, t) in labels.walking.iter().zip(&s.truth) {
                match t {
                    Some(true) => {
                        pos += 1;
                        tp += w as u64;
                    }
                    Some(false) => {
                        neg += 1;
                        fp += w as u64;
                    }
                    None => {}
                }
            }
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    let mut best = 0;
    for (i, p) in points.iter().enumerate() {
        if p.1 - p.0 > points[best].1 - points[best].0 {
            best = i;
        }
    }
    (best, points)
}

/// Builds the design matrix from scratch, in the documented column order.
pub fn design(rows: &[RegressionRow], reference_study: &str) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = rows.len() as f64;
    let stats = |f: &dyn Fn(&RegressionRow) -> f64| {
        let m = rows.iter().map(f).sum::<f64>() / n;
        let sd = (rows.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        (m, sd)
    };
    let (am, asd) = stats(&|r| r.age_y.unwrap());
    let (bm, bsd) = stats(&|r| r.bmi.unwrap());
    let locs = [
        SensorLocation::Thigh,
        SensorLocation::Waist,
        SensorLocation::Chest,
        SensorLocation::Wrist,
        SensorLocation::Unspecified,
    ];
    let mut studies: Vec<String> = rows.iter().map(|r| r.study.clone().unwrap()).collect();
    studies.sort();
    studies.dedup();
    studies.retain(|s| s != reference_study);
    let x = rows
        .iter()
        .map(|r| {
            let mut v = vec![
                1.0,
                (r.age_y.unwrap() - am) / asd,
                (r.gender == Some(Gender::Male)) as u8 as f64,
                (r.bmi.unwrap() - bm) / bsd,
            ];
            v.extend(locs.iter().map(|&l| (r.location == Some(l)) as u8 as f64));
            v.push((r.condition == Some(Environment::FreeLiving)) as u8 as f64);
            v.extend(studies.iter().map(|s| (r.study.as_deref() == Some(s)) as u8 as f64));
            v
        })
        .collect();
    (x, rows.iter().map(|r| r.sensitivity.unwrap()).collect())
}
