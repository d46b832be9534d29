//! CSV datasets, synthetic Gaussian data and JSON run reports.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::random::rng;

pub const LABEL_COLUMN: &str = "label";
pub const REPORT_SCHEMA_VERSION: u32 = 1;
const PSD_TOL: f64 = 1e-10;

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Reads a header row of feature names ending in a `label` column. Class names
/// are indexed in order of first appearance.
pub fn load_csv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, 0, e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.last().map(String::as_str) != Some(LABEL_COLUMN) {
        return Err(parse_err(path, 1, format!("last column must be named '{LABEL_COLUMN}'")));
    }
    let features = header[..header.len() - 1].to_vec();
    if features.is_empty() {
        return Err(parse_err(path, 1, "no feature columns"));
    }
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    let mut classes: Vec<String> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let row = features
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let cell = &record[i];
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_err(path, line, format!("column '{name}': '{cell}' is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let name = &record[features.len()];
        if name.is_empty() {
            return Err(parse_err(path, line, "empty label"));
        }
        let idx = match classes.iter().position(|c| c == name) {
            Some(i) => i,
            None => {
                classes.push(name.to_string());
                classes.len() - 1
            }
        };
        samples.push(row);
        labels.push(idx);
    }
    if samples.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let k = classes.len();
    LabeledDataset::new(samples, labels, k)?.with_names(features, classes)
}

/// Writes features with shortest round-trip formatting and class names in the label column.
pub fn save_csv(data: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| parse_err(path, 0, e.to_string()))?;
    let to_err = |e: csv::Error| parse_err(path, 0, e.to_string());
    let mut header = data.feature_names().to_vec();
    header.push(LABEL_COLUMN.into());
    w.write_record(&header).map_err(to_err)?;
    for (x, &c) in data.samples().iter().zip(data.labels()) {
        let mut row: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        row.push(data.class_names()[c].clone());
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Per-class Gaussian mixture description.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub class_counts: Vec<usize>,
    pub means: Vec<DVector<f64>>,
    pub covariances: Vec<DMatrix<f64>>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, |m| m.len())
    }

    pub fn num_classes(&self) -> usize {
        self.means.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.means.len();
        if k == 0 || self.class_counts.len() != k || self.covariances.len() != k {
            return Err(Error::InvalidParameter(
                "means, covariances and class counts must have one entry per class".into(),
            ));
        }
        let n = self.dim();
        for (c, (m, s)) in self.means.iter().zip(&self.covariances).enumerate() {
            if m.len() != n || s.nrows() != n || s.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.len().max(s.nrows()).max(s.ncols()),
                });
            }
            if self.class_counts[c] < 2 {
                return Err(Error::InvalidParameter(format!(
                    "class {c} needs at least 2 samples"
                )));
            }
        }
        Ok(())
    }
}

/// `L` with `L·Lᵀ = Σ`: Cholesky, or `V·√Λ` when `Σ` is only semidefinite.
fn covariance_factor(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let asym = (sigma - sigma.transpose()).abs().max();
    if asym > PSD_TOL * sigma.abs().max().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "covariance is not symmetric (asymmetry {asym:e})"
        )));
    }
    if let Some(ch) = sigma.clone().cholesky() {
        return Ok(ch.l());
    }
    let eig = sigma.clone().symmetric_eigen();
    let min = eig.eigenvalues.min();
    if min < -PSD_TOL * eig.eigenvalues.amax().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "covariance is not positive semidefinite (eigenvalue {min:e})"
        )));
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

pub fn generate(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let factors = spec
        .covariances
        .iter()
        .map(covariance_factor)
        .collect::<Result<Vec<_>>>()?;
    let n = spec.dim();
    let mut r = rng(spec.seed);
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for (c, &count) in spec.class_counts.iter().enumerate() {
        for _ in 0..count {
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut r));
            let x = &spec.means[c] + &factors[c] * z;
            samples.push(x.as_slice().to_vec());
            labels.push(c);
        }
    }
    LabeledDataset::new(samples, labels, spec.num_classes())
}

/// Built-in synthetic datasets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Two classes in four dimensions, different spreads per axis.
    TwoGauss,
    /// Three classes in four dimensions with class-specific covariances.
    ThreeGauss,
    /// Two classes apart along `e₁` whose within-class spread along `e₂` is ten
    /// times that along `e₁` and dominates the total variance.
    Adversarial,
    /// Two noisy concentric rings in the plane (radii 1 and 3).
    Circles,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::TwoGauss, Preset::ThreeGauss, Preset::Adversarial, Preset::Circles];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::TwoGauss => "two-gauss",
            Preset::ThreeGauss => "three-gauss",
            Preset::Adversarial => "adversarial",
            Preset::Circles => "circles",
        }
    }

    /// The Gaussian mixture behind the preset (`None` for the rings).
    pub fn spec(&self, per_class: usize, seed: u64) -> Option<SyntheticSpec> {
        let v = |xs: &[f64]| DVector::from_vec(xs.to_vec());
        let diag = |xs: &[f64]| DMatrix::from_diagonal(&v(xs));
        match self {
            Preset::TwoGauss => Some(SyntheticSpec {
                class_counts: vec![per_class; 2],
                means: vec![v(&[1.5, 0.5, 0.0, 0.0]), v(&[-1.0, 0.0, 0.5, 0.0])],
                covariances: vec![diag(&[1.0, 0.5, 0.8, 1.2]); 2],
                seed,
            }),
            Preset::ThreeGauss => {
                let rot = DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        0.6, 0.2, 0.0, 0.1, //
                        0.2, 0.5, 0.1, 0.0, //
                        0.0, 0.1, 0.4, 0.1, //
                        0.1, 0.0, 0.1, 0.7,
                    ],
                );
                Some(SyntheticSpec {
                    class_counts: vec![per_class; 3],
                    means: vec![
                        v(&[2.0, 0.0, 0.0, 0.5]),
                        v(&[0.0, 2.0, 0.5, 0.0]),
                        v(&[-1.0, -1.0, 1.5, 0.5]),
                    ],
                    covariances: vec![
                        diag(&[0.5, 0.3, 0.4, 0.3]),
                        rot,
                        diag(&[0.3, 0.6, 0.3, 0.5]),
                    ],
                    seed,
                })
            }
            Preset::Adversarial => Some(SyntheticSpec {
                class_counts: vec![per_class; 2],
                means: vec![v(&[0.8, 0.0]), v(&[-0.8, 0.0])],
                covariances: vec![diag(&[0.09, 0.9]); 2],
                seed,
            }),
            Preset::Circles => None,
        }
    }

    pub fn generate(&self, per_class: usize, seed: u64) -> Result<LabeledDataset> {
        match self.spec(per_class, seed) {
            Some(spec) => generate(&spec),
            None => circles(per_class, 0.1, seed),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown preset '{s}' (expected one of: {})",
                    Preset::ALL.map(|p| p.name()).join(", ")
                ))
            })
    }
}

/// Rings of radius 1 (class 0) and 3 (class 1) with Gaussian radial noise.
pub fn circles(per_class: usize, radial_noise: f64, seed: u64) -> Result<LabeledDataset> {
    let mut r = rng(seed);
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for (c, radius) in [1.0, 3.0].into_iter().enumerate() {
        for _ in 0..per_class {
            let angle: f64 = r.random_range(0.0..std::f64::consts::TAU);
            let z: f64 = StandardNormal.sample(&mut r);
            let rr = radius + radial_noise * z;
            samples.push(vec![rr * angle.cos(), rr * angle.sin()]);
            labels.push(c);
        }
    }
    LabeledDataset::new(samples, labels, 2)
}

/// Machine-readable record of one command run. Maps are ordered, so the
/// serialized form depends only on the contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub command: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, Value>,
    pub metrics: BTreeMap<String, Value>,
    pub timestamp: String,
}

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            parameters: BTreeMap::new(),
            outputs: BTreeMap::new(),
            metrics: BTreeMap::new(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> Result<&mut Self> {
        self.parameters.insert(key.into(), serde_json::to_value(value)?);
        Ok(self)
    }

    pub fn output(&mut self, key: &str, value: impl Serialize) -> Result<&mut Self> {
        self.outputs.insert(key.into(), serde_json::to_value(value)?);
        Ok(self)
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) -> Result<&mut Self> {
        self.metrics.insert(key.into(), serde_json::to_value(value)?);
        Ok(self)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }
}

/// Dataset as `{features, labels, samples}` for embedding in reports.
pub fn dataset_json(data: &LabeledDataset) -> Value {
    serde_json::json!({
        "features": data.feature_names(),
        "classes": data.class_names(),
        "labels": data.labels().iter().map(|l| l + 1).collect::<Vec<_>>(),
        "samples": data.samples().iter().map(|x| x.as_slice().to_vec()).collect::<Vec<_>>(),
    })
}
