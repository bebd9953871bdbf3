//! Flat `key = value` configuration merged with command-line flags.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! ignored. Keys are the long flag names, with `-` and `_` interchangeable.
//! A flag given on the command line replaces the file's value.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use walkdet_core::cwt::GridSpec;
use walkdet_core::detect::{DetectorParams, Profile};
use walkdet_core::evaluate::ActivityGrouping;
use walkdet_core::ingest::{DeviceProfile, RecordingMeta, SensorLocation, Units};

use crate::error::{CliError, CliResult};

/// Every key accepted in a config file.
pub const KEYS: &[&str] = &[
    "units",
    "profile",
    "out",
    "jobs",
    "seed",
    "quiet",
    "adjust_labels",
    "amplitude",
    "f_min",
    "f_max",
    "alpha",
    "beta",
    "min_windows",
    "voices_per_octave",
    "grid_f_lo",
    "grid_f_hi",
    "max_gap",
    "subject",
    "location",
    "environment",
    "grouping",
    "walking_groups",
    "stages",
    "amplitudes",
    "bands",
    "alphas",
    "betas",
    "durations",
    "manifest",
    "predictions",
    "reference_study",
];

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

pub fn parse_config(text: &str, origin: &Path) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| CliError::Config(format!("{}:{}: {msg}", origin.display(), n + 1));
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(format!("expected `key = value`, got `{line}`")));
        };
        let key = normalize_key(key);
        if !KEYS.contains(&key.as_str()) {
            return Err(err(format!("unknown key `{key}`")));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(err(format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

/// Flag values layered over an optional config file.
#[derive(Debug, Clone, Default)]
pub struct Options {
    values: BTreeMap<String, String>,
}

impl Options {
    pub fn new(config: Option<&Path>, flags: impl IntoIterator<Item = (&'static str, Option<String>)>) -> CliResult<Self> {
        let mut values = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
                parse_config(&text, path)?
            }
            None => BTreeMap::new(),
        };
        for (key, value) in flags {
            debug_assert!(KEYS.contains(&key), "{key}");
            if let Some(v) = value {
                values.insert(key.to_string(), v);
            }
        }
        Ok(Options { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.trim())
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| bad_value(key, v, e)))
            .transpose()
    }

    pub fn flag(&self, key: &str) -> CliResult<bool> {
        match self.raw(key) {
            None => Ok(false),
            Some(v) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(bad_value(key, v, "expected true or false")),
            },
        }
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>>
    where
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|e| bad_value(key, s, e)))
                    .collect()
            })
            .transpose()
    }

    /// Comma-separated `a:b` pairs.
    pub fn pairs(&self, key: &str) -> CliResult<Option<Vec<(f64, f64)>>> {
        self.list::<String>(key)?
            .map(|items| items.iter().map(|s| parse_pair(key, s)).collect())
            .transpose()
    }
}

fn parse_pair(key: &str, s: &str) -> CliResult<(f64, f64)> {
    let (a, b) = s.split_once(':').ok_or_else(|| bad_value(key, s, "expected a:b"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| bad_value(key, s, e));
    Ok((num(a)?, num(b)?))
}

fn bad_value(key: &str, value: &str, e: impl Display) -> CliError {
    CliError::Config(format!("invalid value `{value}` for {key}: {e}"))
}

/// Settings shared by the signal-processing commands.
#[derive(Debug, Clone)]
pub struct Settings {
    pub units: Units,
    pub params: DetectorParams,
    pub grid: GridSpec,
    pub max_gap_s: f64,
    pub meta: RecordingMeta,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
    pub quiet: bool,
    pub adjust_labels: bool,
}

impl Settings {
    pub fn resolve(opts: &Options) -> CliResult<Self> {
        let units = opts.get::<Units>("units")?.unwrap_or(Units::G);
        let profile = opts.get::<DeviceProfile>("profile")?.unwrap_or(DeviceProfile::Smartphone);
        let base = DetectorParams::for_device(profile);
        let mut params = DetectorParams {
            amplitude_g: opts.get("amplitude")?.unwrap_or(base.amplitude_g),
            f_min: opts.get("f_min")?.unwrap_or(base.f_min),
            f_max: opts.get("f_max")?.unwrap_or(base.f_max),
            alpha: opts.get("alpha")?.unwrap_or(base.alpha),
            beta: opts.get("beta")?.unwrap_or(base.beta),
            min_windows: opts.get("min_windows")?.unwrap_or(base.min_windows),
            profile: base.profile,
        };
        if (DetectorParams { profile: base.profile, ..params }) != base {
            params.profile = Profile::Custom;
        }
        params.validate()?;

        let default_grid = GridSpec::default();
        let grid = GridSpec {
            f_lo: opts.get("grid_f_lo")?.unwrap_or(default_grid.f_lo),
            f_hi: opts.get("grid_f_hi")?.unwrap_or(default_grid.f_hi),
            voices_per_octave: opts.get("voices_per_octave")?.unwrap_or(default_grid.voices_per_octave),
        };

        let max_gap_s: f64 = opts.get("max_gap")?.unwrap_or(1.0);
        if !(max_gap_s > 0.0 && max_gap_s.is_finite()) {
            return Err(CliError::Config(format!("max_gap must be positive, got {max_gap_s}")));
        }
        let meta = RecordingMeta {
            subject: opts.get("subject")?.unwrap_or_default(),
            location: opts.get::<SensorLocation>("location")?.unwrap_or_default(),
            device: profile,
            environment: opts.get("environment")?.unwrap_or(RecordingMeta::default().environment),
        };
        let jobs = opts.get::<usize>("jobs")?;
        if jobs == Some(0) {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        Ok(Settings {
            units,
            params,
            grid,
            max_gap_s,
            meta,
            out: opts.get("out")?.unwrap_or_else(|| PathBuf::from(".")),
            jobs,
            seed: opts.get("seed")?,
            quiet: opts.flag("quiet")?,
            adjust_labels: opts.flag("adjust_labels")?,
        })
    }
}

/// The bundled grouping unless `grouping` names a file; `walking_groups`
/// replaces the set of groups scored by sensitivity.
pub fn load_grouping(opts: &Options) -> CliResult<ActivityGrouping> {
    let grouping = match opts.get::<PathBuf>("grouping")? {
        Some(path) => {
            let file = std::fs::File::open(&path).map_err(|e| CliError::Config(format!("cannot read grouping {}: {e}", path.display())))?;
            ActivityGrouping::from_csv(file).map_err(CliError::core_at(&path))?
        }
        None => ActivityGrouping::default(),
    };
    Ok(match opts.list::<String>("walking_groups")? {
        Some(groups) => grouping.with_walking_groups(groups),
        None => grouping,
    })
}
