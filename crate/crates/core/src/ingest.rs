//! Recording ingestion: CSV parsing, unit normalisation and resampling onto
//! the uniform 10 Hz grid.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, FS_HZ};

/// Standard gravity in m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Timestamps closer than this are treated as duplicates.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    G,
    #[serde(rename = "m_per_s2")]
    MetersPerSecond2,
}

impl FromStr for Units {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g" => Ok(Units::G),
            "ms2" | "m_per_s2" | "m/s2" | "m/s^2" => Ok(Units::MetersPerSecond2),
            other => Err(format!("unknown units `{other}` (expected g or ms2)")),
        }
    }
}

macro_rules! text_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
                $name::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str() == norm)
                    .ok_or_else(|| format!(concat!("unknown ", stringify!($name), " `{}`"), s))
            }
        }
    };
}

text_enum!(SensorLocation {
    Thigh => "thigh",
    Waist => "waist",
    Chest => "chest",
    Arm => "arm",
    Wrist => "wrist",
    Unspecified => "unspecified",
});

text_enum!(DeviceProfile {
    Smartphone => "smartphone",
    Smartwatch => "smartwatch",
});

text_enum!(Environment {
    Controlled => "controlled",
    FreeLiving => "free_living",
});

impl Default for SensorLocation {
    fn default() -> Self {
        SensorLocation::Unspecified
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub subject: String,
    pub location: SensorLocation,
    pub device: DeviceProfile,
    pub environment: Environment,
}

impl Default for RecordingMeta {
    fn default() -> Self {
        RecordingMeta {
            subject: String::new(),
            location: SensorLocation::Unspecified,
            device: DeviceProfile::Smartphone,
            environment: Environment::Controlled,
        }
    }
}

/// Samples as read from disk, in their declared units.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecording {
    pub timestamps: Vec<f64>,
    pub samples: Vec<[f64; 3]>,
    pub labels: Option<Vec<String>>,
    pub units: Units,
    pub meta: RecordingMeta,
    /// Rows skipped because a numeric field was not finite.
    pub dropped_rows: usize,
    /// Rows skipped because their timestamp duplicated the previous one.
    pub duplicate_rows: usize,
}

impl RawRecording {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// A chunk of signal on the uniform grid `start_time + k / fs`, in g.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformRecording {
    pub fs: f64,
    pub start_time: f64,
    pub samples: Vec<[f64; 3]>,
    pub labels: Option<Vec<String>>,
}

impl UniformRecording {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start_time + k as f64 / self.fs
    }
}

pub fn parse_csv(path: impl AsRef<Path>, units: Units, meta: RecordingMeta) -> Result<RawRecording> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv_reader(file, units, meta)
}

/// Parses `t,x,y,z[,label]` rows. Column order in the header is free.
pub fn parse_csv_reader<R: Read>(reader: R, units: Units, meta: RecordingMeta) -> Result<RawRecording> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(Error::EmptyRecording);
    }
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (ti, xi, yi, zi) = (col("t")?, col("x")?, col("y")?, col("z")?);
    let li = col("label").ok();

    let mut timestamps = Vec::new();
    let mut samples = Vec::new();
    let mut labels = li.map(|_| Vec::new());
    let mut dropped_rows = 0;
    let mut duplicate_rows = 0;

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let num = |i: usize| record.get(i).and_then(|s| s.parse::<f64>().ok()).filter(|v| v.is_finite());
        let (Some(t), Some(x), Some(y), Some(z)) = (num(ti), num(xi), num(yi), num(zi)) else {
            dropped_rows += 1;
            continue;
        };
        if let Some(&prev) = timestamps.last() {
            if t < prev - TIME_EPS {
                return Err(Error::NonMonotonicTime { row: row + 1, t });
            }
            if t - prev <= TIME_EPS {
                duplicate_rows += 1;
                continue;
            }
        }
        timestamps.push(t);
        samples.push([x, y, z]);
        if let (Some(labels), Some(li)) = (labels.as_mut(), li) {
            labels.push(record.get(li).unwrap_or("").to_string());
        }
    }

    if samples.is_empty() {
        return Err(Error::EmptyRecording);
    }
    Ok(RawRecording {
        timestamps,
        samples,
        labels,
        units,
        meta,
        dropped_rows,
        duplicate_rows,
    })
}

/// Converts samples to g. Already-normalised recordings pass through.
pub fn normalize_units(mut rec: RawRecording) -> RawRecording {
    if rec.units == Units::MetersPerSecond2 {
        for s in &mut rec.samples {
            for v in s.iter_mut() {
                *v /= STANDARD_GRAVITY;
            }
        }
        rec.units = Units::G;
    }
    rec
}

/// Linear interpolation onto the 10 Hz grid. Gaps longer than `max_gap_s`
/// split the output; chunks with fewer than two samples are dropped.
pub fn resample_10hz(rec: &RawRecording, max_gap_s: f64) -> Result<Vec<UniformRecording>> {
    debug_assert_eq!(rec.units, Units::G, "normalize_units must run first");
    let n = rec.timestamps.len();
    let mut chunks = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || rec.timestamps[i] - rec.timestamps[i - 1] > max_gap_s {
            if i - start >= 2 {
                chunks.push(resample_span(rec, start, i));
            }
            start = i;
        }
    }
    if chunks.is_empty() {
        return Err(Error::EmptyRecording);
    }
    Ok(chunks)
}

fn resample_span(rec: &RawRecording, lo: usize, hi: usize) -> UniformRecording {
    let ts = &rec.timestamps[lo..hi];
    let xs = &rec.samples[lo..hi];
    let t0 = ts[0];
    let t_end = ts[ts.len() - 1];
    let n_out = ((t_end - t0) * FS_HZ + TIME_EPS * FS_HZ).floor() as usize + 1;

    let mut samples = Vec::with_capacity(n_out);
    let mut labels = rec.labels.as_ref().map(|_| Vec::with_capacity(n_out));
    let mut j = 0;
    for k in 0..n_out {
        let t = t0 + k as f64 / FS_HZ;
        while j + 2 < ts.len() && ts[j + 1] <= t {
            j += 1;
        }
        let (ta, tb) = (ts[j], ts[j + 1]);
        let frac = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
        let (a, b) = (xs[j], xs[j + 1]);
        samples.push([
            a[0] + (b[0] - a[0]) * frac,
            a[1] + (b[1] - a[1]) * frac,
            a[2] + (b[2] - a[2]) * frac,
        ]);
        if let (Some(out), Some(src)) = (labels.as_mut(), rec.labels.as_ref()) {
            let nearest = if t - ta <= tb - t { j } else { j + 1 };
            out.push(src[lo + nearest].clone());
        }
    }
    UniformRecording {
        fs: FS_HZ,
        start_time: t0,
        samples,
        labels,
    }
}
