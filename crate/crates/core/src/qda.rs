//! Quadratic (and shared-covariance linear) discriminant classification.
//!
//! `δ_c(x) = xᵀΣ_c⁻¹μ_c − ½μ_cᵀΣ_c⁻¹μ_c + prior_c` is evaluated as one inner product
//! `⟨Σ_c⁻¹μ_c, x − ½μ_c⟩`. On the quantum path the first factor comes from a matrix
//! inversion stage and the overlap from a signed interference test; the classical
//! norms are carried alongside and multiplied back in.

use nalgebra::DVector;

use crate::chain::{chain_stage, StageConfig};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{matrix_function, real_vector, top_eigenvector, DensityOperator, SpectralFunction};
use crate::oracle::{class_covariance_operator, class_statistics, within_scatter};
use crate::qsim::overlap_test_signed;
use crate::random::derive_seed;

pub const DEFAULT_SHOTS: u64 = 8192;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Path {
    Quantum,
    Classical,
}

/// How the class prior enters the discriminant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PriorTerm {
    /// `log π_c`
    #[default]
    Log,
    /// `π_c` added as is
    Linear,
}

/// `Σ_c⁻¹μ_c` as a unit vector and its norm under the statistical covariance scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Inversion {
    pub direction: DVector<f64>,
    pub norm: f64,
    /// Success probability of the inversion stage (1 on the classical path).
    pub success: f64,
}

#[derive(Clone, Debug)]
pub struct ClassModel {
    /// Unit-trace covariance operator.
    pub covariance: DensityOperator,
    /// `A_c/(M_c − 1)`: the statistical covariance is `scale · covariance`.
    pub scale: f64,
    pub mean: DVector<f64>,
    pub prior: f64,
    /// Exact `Σ_c⁻¹μ_c` (kept support), used for the norm bookkeeping.
    pub inversion: Inversion,
}

#[derive(Clone, Debug)]
pub struct ClassifierModel {
    pub classes: Vec<ClassModel>,
    pub kappa_eff: f64,
    pub prior_term: PriorTerm,
    /// Register width and precision of the quantum inversions.
    pub bits: u32,
    pub epsilon: f64,
    /// Whether every class shares the pooled within-class operator.
    pub shared_covariance: bool,
    quantum: Option<Vec<Inversion>>,
}

impl ClassifierModel {
    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn dim(&self) -> usize {
        self.classes[0].mean.len()
    }

    pub fn priors(&self) -> Vec<f64> {
        self.classes.iter().map(|c| c.prior).collect()
    }

    pub fn with_prior_term(mut self, prior_term: PriorTerm) -> Self {
        self.prior_term = prior_term;
        self
    }

    pub fn with_register(mut self, bits: u32, epsilon: f64) -> Self {
        self.bits = bits;
        self.epsilon = epsilon;
        self.quantum = None;
        self
    }

    /// Runs the quantum inversion of every class once and keeps the results.
    pub fn with_quantum_inversions(mut self) -> Result<Self> {
        let inv = (0..self.num_classes())
            .map(|c| quantum_inversion(&self, c))
            .collect::<Result<Vec<_>>>()?;
        self.quantum = Some(inv);
        Ok(self)
    }

    pub fn quantum_inversions(&self) -> Option<&[Inversion]> {
        self.quantum.as_deref()
    }

    fn prior_value(&self, c: usize) -> f64 {
        match self.prior_term {
            PriorTerm::Log => self.classes[c].prior.ln(),
            PriorTerm::Linear => self.classes[c].prior,
        }
    }
}

fn check_counts(data: &LabeledDataset) -> Result<()> {
    for c in 0..data.num_classes() {
        if data.class_count(c) < 2 {
            return Err(Error::Degenerate(format!(
                "class {} has {} sample(s); covariance needs at least 2",
                data.class_names()[c],
                data.class_count(c)
            )));
        }
    }
    Ok(())
}

fn exact_inversion(
    covariance: &DensityOperator,
    scale: f64,
    mean: &DVector<f64>,
    kappa_eff: f64,
) -> Result<Inversion> {
    let inv = matrix_function(covariance.as_hermitian(), SpectralFunction::Inverse, kappa_eff)?;
    let y = inv.real_part() * mean / scale;
    let norm = y.norm();
    if mean.norm() > 0.0 && norm < 1e-12 * mean.norm() {
        return Err(Error::Degenerate(
            "class mean lies outside the kept covariance support".into(),
        ));
    }
    Ok(Inversion {
        direction: if norm > 0.0 { y / norm } else { y },
        norm,
        success: 1.0,
    })
}

fn build(
    data: &LabeledDataset,
    kappa_eff: f64,
    covariances: Vec<(DensityOperator, f64)>,
    shared: bool,
) -> Result<ClassifierModel> {
    let stats = class_statistics(data)?;
    let m = data.len() as f64;
    let classes = covariances
        .into_iter()
        .enumerate()
        .map(|(c, (covariance, scale))| {
            let mean = stats.class_means[c].clone();
            let inversion = exact_inversion(&covariance, scale, &mean, kappa_eff)?;
            Ok(ClassModel {
                covariance,
                scale,
                mean,
                prior: stats.class_counts[c] as f64 / m,
                inversion,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassifierModel {
        classes,
        kappa_eff,
        prior_term: PriorTerm::default(),
        bits: crate::chain::DEFAULT_BITS,
        epsilon: crate::chain::DEFAULT_EPSILON,
        shared_covariance: shared,
        quantum: None,
    })
}

/// Per-class Gaussian model.
pub fn fit(data: &LabeledDataset, kappa_eff: f64) -> Result<ClassifierModel> {
    check_counts(data)?;
    let stats = class_statistics(data)?;
    let covs = (0..data.num_classes())
        .map(|c| {
            let op = class_covariance_operator(data, &stats, c)?;
            Ok((op, stats.per_class_norm[c] / (stats.class_counts[c] as f64 - 1.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    build(data, kappa_eff, covs, false)
}

/// Shared-covariance model: the pooled within-class operator with scale `B/(M − k)`.
pub fn fit_lda(data: &LabeledDataset, kappa_eff: f64) -> Result<ClassifierModel> {
    check_counts(data)?;
    let stats = class_statistics(data)?;
    let sw = within_scatter(data, &stats)?;
    let scale = stats.norm_b / (data.len() - data.num_classes()) as f64;
    build(data, kappa_eff, vec![(sw, scale); data.num_classes()], true)
}

fn quantum_inversion(model: &ClassifierModel, c: usize) -> Result<Inversion> {
    let class = &model.classes[c];
    if class.mean.norm() == 0.0 {
        return Ok(class.inversion.clone());
    }
    let rho = DensityOperator::pure_real(class.mean.as_slice())?;
    let cfg = StageConfig {
        bits: model.bits,
        kappa_eff: model.kappa_eff,
        epsilon: model.epsilon,
        ..StageConfig::default()
    };
    let r = chain_stage(&rho, &class.covariance, SpectralFunction::Inverse, None, &cfg)?;
    if r.kept_weight < 1e-12 {
        return Err(Error::Degenerate(format!(
            "mean of class {c} is entirely filtered out"
        )));
    }
    let (_, w) = top_eigenvector(r.output.as_hermitian());
    let mut w = DVector::from_iterator(w.len(), w.iter().map(|z| z.re)).normalize();
    // Σ⁻¹ is positive definite on its support, so the true vector has μᵀw > 0
    if w.dot(&class.mean) < 0.0 {
        w = -w;
    }
    Ok(Inversion {
        direction: w,
        norm: class.inversion.norm,
        success: r.success,
    })
}

/// `Σ_c⁻¹μ_c` on the chosen path: unit vector and norm.
pub fn invert_apply(model: &ClassifierModel, c: usize, path: Path) -> Result<(DVector<f64>, f64)> {
    if c >= model.num_classes() {
        return Err(Error::InvalidParameter(format!(
            "class {c} outside 0..{}",
            model.num_classes()
        )));
    }
    let inv = match path {
        Path::Classical => model.classes[c].inversion.clone(),
        Path::Quantum => match &model.quantum {
            Some(cached) => cached[c].clone(),
            None => quantum_inversion(model, c)?,
        },
    };
    Ok((inv.direction, inv.norm))
}

/// One discriminant value with its shot statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminantValue {
    pub value: f64,
    /// Standard error from the overlap test (0 on the classical path).
    pub standard_error: f64,
    pub shots: u64,
}

pub fn discriminant(
    model: &ClassifierModel,
    x: &DVector<f64>,
    c: usize,
    path: Path,
    shots: u64,
    seed: u64,
) -> Result<DiscriminantValue> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("test point has non-finite entries".into()));
    }
    let (u, norm) = invert_apply(model, c, path)?;
    let z = x - &model.classes[c].mean * 0.5;
    let z_norm = z.norm();
    let prior = model.prior_value(c);
    if z_norm == 0.0 || norm == 0.0 {
        return Ok(DiscriminantValue {
            value: prior,
            standard_error: 0.0,
            shots: 0,
        });
    }
    let scale = norm * z_norm;
    match path {
        Path::Classical => Ok(DiscriminantValue {
            value: scale * u.dot(&z) / z_norm + prior,
            standard_error: 0.0,
            shots: 0,
        }),
        Path::Quantum => {
            let r = overlap_test_signed(
                &real_vector(u.as_slice()),
                &real_vector((z / z_norm).as_slice()),
                shots,
                seed,
            )?;
            Ok(DiscriminantValue {
                value: scale * r.estimate + prior,
                standard_error: scale * r.standard_error,
                shots,
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminantResult {
    pub values: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub chosen: usize,
    /// Gap between the best and the runner-up value.
    pub margin: f64,
    pub shots: u64,
}

impl DiscriminantResult {
    /// Argmax with the lowest index winning ties.
    pub fn from_values(values: Vec<f64>) -> Self {
        let n = values.len();
        Self::assemble(values, vec![0.0; n], 0)
    }

    fn assemble(values: Vec<f64>, standard_errors: Vec<f64>, shots: u64) -> Self {
        let mut chosen = 0;
        for (c, v) in values.iter().enumerate() {
            if *v > values[chosen] {
                chosen = c;
            }
        }
        let runner_up = values
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != chosen)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        let margin = if runner_up.is_finite() {
            values[chosen] - runner_up
        } else {
            0.0
        };
        Self {
            values,
            standard_errors,
            chosen,
            margin,
            shots,
        }
    }
}

/// Evaluates every class discriminant; class `c` uses the child seed `(seed, c)`.
pub fn classify(
    model: &ClassifierModel,
    x: &DVector<f64>,
    path: Path,
    shots: u64,
    seed: u64,
) -> Result<DiscriminantResult> {
    let mut values = Vec::with_capacity(model.num_classes());
    let mut errors = Vec::with_capacity(model.num_classes());
    let mut used = 0;
    for c in 0..model.num_classes() {
        let d = discriminant(model, x, c, path, shots, derive_seed(seed, c as u64))?;
        values.push(d.value);
        errors.push(d.standard_error);
        used += d.shots;
    }
    Ok(DiscriminantResult::assemble(values, errors, used))
}

/// [`classify`] on a model that must share one covariance across classes.
pub fn lda_classify(
    model: &ClassifierModel,
    x: &DVector<f64>,
    path: Path,
    shots: u64,
    seed: u64,
) -> Result<DiscriminantResult> {
    if !model.shared_covariance {
        return Err(Error::InvalidParameter(
            "lda_classify needs a model from fit_lda".into(),
        ));
    }
    classify(model, x, path, shots, seed)
}

/// Classifies every sample of `data`; sample `j` uses the child seed `(seed, j)`.
pub fn classify_all(
    model: &ClassifierModel,
    data: &LabeledDataset,
    path: Path,
    shots: u64,
    seed: u64,
) -> Result<Vec<DiscriminantResult>> {
    data.samples()
        .iter()
        .enumerate()
        .map(|(j, x)| classify(model, x, path, shots, derive_seed(seed, j as u64)))
        .collect()
}
