use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::ingest::{Environment, SensorLocation};
use crate::{Error, Result};

pub const DEFAULT_REFERENCE_STUDY: &str = "UniMiBSHAR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Female,
    Male,
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "f" | "female" => Ok(Gender::Female),
            "m" | "male" => Ok(Gender::Male),
            other => Err(format!("unknown gender `{other}`")),
        }
    }
}

/// One subject-location observation; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegressionRow {
    pub sensitivity: Option<f64>,
    pub age_y: Option<f64>,
    pub bmi: Option<f64>,
    pub gender: Option<Gender>,
    pub condition: Option<Environment>,
    pub location: Option<SensorLocation>,
    pub study: Option<String>,
}

struct CompleteRow<'a> {
    y: f64,
    age: f64,
    bmi: f64,
    gender: Gender,
    condition: Environment,
    location: SensorLocation,
    study: &'a str,
}

impl RegressionRow {
    fn complete(&self) -> Option<CompleteRow<'_>> {
        Some(CompleteRow {
            y: self.sensitivity?,
            age: self.age_y?,
            bmi: self.bmi?,
            gender: self.gender?,
            condition: self.condition?,
            location: self.location?,
            study: self.study.as_deref().filter(|s| !s.is_empty())?,
        })
    }
}

/// Reads a table with columns `sensitivity, age_y, bmi, gender, condition,
/// location, study` (any order). Empty or unparsable cells become missing.
pub fn parse_table<R: Read>(reader: R) -> Result<Vec<RegressionRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |names: &[&str]| {
        headers
            .iter()
            .position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
            .ok_or_else(|| Error::MissingColumn(names[0].to_string()))
    };
    let cols = [
        col(&["sensitivity", "y"])?,
        col(&["age_y", "age"])?,
        col(&["bmi"])?,
        col(&["gender", "sex"])?,
        col(&["condition", "environment"])?,
        col(&["location"])?,
        col(&["study"])?,
    ];
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let cell = |i: usize| rec.get(cols[i]).map(str::trim).filter(|s| !s.is_empty() && *s != "NA");
        let num = |i: usize| cell(i).and_then(|s| s.parse::<f64>().ok()).filter(|v| v.is_finite());
        rows.push(RegressionRow {
            sensitivity: num(0),
            age_y: num(1),
            bmi: num(2),
            gender: cell(3).and_then(|s| s.parse().ok()),
            condition: cell(4).and_then(|s| s.parse().ok()),
            location: cell(5).and_then(|s| s.parse().ok()),
            study: cell(6).map(str::to_string),
        });
    }
    Ok(rows)
}

/// Ordinary least squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub residuals: Vec<f64>,
    pub sigma2: f64,
    pub df: usize,
}

/// Least squares via Householder QR. Fails when `x` is not of full column
/// rank or has no residual degrees of freedom.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::LengthMismatch { left: n, right: y.len() });
    }
    if n <= p {
        return Err(Error::TooShort { needed: p + 1, got: n });
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let diag_max = (0..p).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let tol = diag_max * n.max(p) as f64 * f64::EPSILON * 10.0;
    if diag_max == 0.0 || (0..p).any(|i| r[(i, i)].abs() <= tol) {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient)?;
    let residuals = y - x * &coef;
    let mut rss = residuals.norm_squared();
    // Residuals at rounding level mean the data fit exactly.
    let noise_floor = (n as f64 * f64::EPSILON * y.amax().max(1.0)).powi(2) * n as f64;
    if rss <= noise_floor {
        rss = 0.0;
    }
    let df = n - p;
    let sigma2 = rss / df as f64;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::RankDeficient)?;
    let se = (0..p)
        .map(|i| (sigma2 * r_inv.row(i).norm_squared()).sqrt())
        .collect();
    Ok(OlsFit {
        coef: coef.iter().copied().collect(),
        se,
        residuals: residuals.iter().copied().collect(),
        sigma2,
        df,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub sd: f64,
}

impl Standardization {
    fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Standardization { mean, sd: var.sqrt() }
    }

    fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub covariate: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub coefficients: Vec<Coefficient>,
    pub n: usize,
    pub dropped_rows: usize,
    pub df: usize,
    pub t_quantile: f64,
    pub age: Standardization,
    pub bmi: Standardization,
    /// Reference level of each categorical covariate.
    pub reference: BTreeMap<String, String>,
    #[serde(skip)]
    pub design: DMatrix<f64>,
    #[serde(skip)]
    pub response: DVector<f64>,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl RegressionResult {
    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    pub fn covariates(&self) -> Vec<&str> {
        self.coefficients.iter().map(|c| c.covariate.as_str()).collect()
    }

    /// `covariate,estimate,se,ci_lo,ci_hi` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("covariate,estimate,se,ci_lo,ci_hi\n");
        for c in &self.coefficients {
            out.push_str(&format!("{},{},{},{},{}\n", c.covariate, c.estimate, c.se, c.ci_lo, c.ci_hi));
        }
        out
    }
}

impl fmt::Display for RegressionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.coefficients {
            writeln!(f, "{:<24} {:>10.4} {:>10.4} ({:.4}, {:.4})", c.covariate, c.estimate, c.se, c.ci_lo, c.ci_hi)?;
        }
        Ok(())
    }
}

/// Fits `sensitivity ~ age + gender + bmi + location + condition + study`.
///
/// Age and BMI are standardised with their sample mean and SD. Categorical
/// covariates enter as indicators against female, controlled, arm and
/// `reference_study` (default [`DEFAULT_REFERENCE_STUDY`]); only levels that
/// occur in the complete rows get a column. Rows with any missing value are
/// dropped and counted.
pub fn standard_reg(rows: &[RegressionRow], reference_study: Option<&str>) -> Result<RegressionResult> {
    let complete: Vec<CompleteRow<'_>> = rows.iter().filter_map(RegressionRow::complete).collect();
    let dropped = rows.len() - complete.len();
    let reference_study = reference_study.unwrap_or(DEFAULT_REFERENCE_STUDY);

    let locations: BTreeSet<SensorLocation> = complete
        .iter()
        .map(|r| r.location)
        .filter(|&l| l != SensorLocation::Arm)
        .collect();
    let studies: BTreeSet<&str> = complete
        .iter()
        .map(|r| r.study)
        .filter(|&s| s != reference_study)
        .collect();
    let mut names = vec!["(intercept)".to_string(), "age".into(), "male".into(), "bmi".into()];
    names.extend(locations.iter().map(|l| l.as_str().to_string()));
    names.push("free_living".into());
    names.extend(studies.iter().map(|s| s.to_string()));
    let p = names.len();

    if complete.len() < p + 1 {
        return Err(Error::IncompleteRows {
            dropped,
            remaining: complete.len(),
            params: p,
        });
    }
    let age = Standardization::of(&complete.iter().map(|r| r.age).collect::<Vec<_>>());
    let bmi = Standardization::of(&complete.iter().map(|r| r.bmi).collect::<Vec<_>>());
    if !(age.sd > 0.0 && bmi.sd > 0.0) {
        return Err(Error::RankDeficient);
    }

    let n = complete.len();
    let mut x = DMatrix::zeros(n, p);
    let indicator = |b: bool| if b { 1.0 } else { 0.0 };
    for (i, r) in complete.iter().enumerate() {
        let mut row = vec![1.0, age.apply(r.age), indicator(r.gender == Gender::Male), bmi.apply(r.bmi)];
        row.extend(locations.iter().map(|&l| indicator(r.location == l)));
        row.push(indicator(r.condition == Environment::FreeLiving));
        row.extend(studies.iter().map(|&s| indicator(r.study == s)));
        for (j, v) in row.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    let y = DVector::from_iterator(n, complete.iter().map(|r| r.y));
    let fit = ols(&x, &y)?;
    let t = StudentsT::new(0.0, 1.0, fit.df as f64)
        .map_err(|e| Error::BadParams(e.to_string()))?
        .inverse_cdf(0.975);
    let coefficients = names
        .into_iter()
        .zip(fit.coef.iter().zip(&fit.se))
        .map(|(covariate, (&estimate, &se))| Coefficient {
            covariate,
            estimate,
            se,
            ci_lo: estimate - t * se,
            ci_hi: estimate + t * se,
        })
        .collect();
    let reference = [
        ("gender", "female"),
        ("condition", "controlled"),
        ("location", "arm"),
        ("study", reference_study),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect();
    Ok(RegressionResult {
        coefficients,
        n,
        dropped_rows: dropped,
        df: fit.df,
        t_quantile: t,
        age,
        bmi,
        reference,
        design: x,
        response: y,
        residuals: fit.residuals,
    })
}
