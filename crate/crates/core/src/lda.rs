//! Linear discriminant analysis: the exact oracle, the quantum reduction through
//! the chain engine, Fisher's criterion, projection and a polynomial feature map.
//!
//! Both paths solve `S_B^{1/2} S_W^{-1} S_B^{1/2} v = λ v` on the unit-trace scatter
//! operators and map `v` back with [`BackTransform`], inverses taken on the kept support.

use nalgebra::{DMatrix, DVector};

use crate::chain::{chain_apply, ChainReport, ChainSpec};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{
    matrix_function, real_vector, top_eigenvector, CMatrix, DensityOperator, HermitianOperator,
    SpectralFunction,
};
use crate::oracle::{
    between_scatter, class_statistics, classical_between_scatter, classical_within_scatter,
    within_scatter,
};
use crate::qsim::{phase_estimation, sample_eigenpairs, EigenpairSample, PhaseEstimation};
use crate::random::rng;

pub const MIN_REGISTER_BITS: u32 = 4;
pub const MAX_REGISTER_BITS: u32 = 12;
pub const MAX_FEATURE_DIM: usize = 256;
// two outcomes whose eigenvectors overlap at least this much (squared) are one eigenpair
const CLUSTER_OVERLAP: f64 = 0.5;

/// Discriminant directions `w_r`, their whitened counterparts `v_r` and eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionBasis {
    pub p: usize,
    pub directions: Vec<DVector<f64>>,
    pub intermediate: Vec<DVector<f64>>,
    /// Eigenvalues of the unit-trace operator `M/Tr M`.
    pub eigenvalue_estimates: Vec<f64>,
}

impl ProjectionBasis {
    /// A basis from explicit directions (each must be nonzero).
    pub fn from_directions(directions: Vec<DVector<f64>>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::InvalidParameter("basis needs at least one direction".into()));
        }
        let n = directions[0].len();
        for w in &directions {
            if w.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: w.len(),
                });
            }
            if !(w.norm() > 0.0) {
                return Err(Error::Degenerate("zero projection direction".into()));
            }
        }
        Ok(Self {
            p: directions.len(),
            intermediate: directions.iter().map(|w| w.normalize()).collect(),
            eigenvalue_estimates: vec![f64::NAN; directions.len()],
            directions,
        })
    }

    pub fn dim(&self) -> usize {
        self.directions.first().map_or(0, |w| w.len())
    }

    /// Unit-norm copies of the directions.
    pub fn unit_directions(&self) -> Vec<DVector<f64>> {
        self.directions.iter().map(|w| w.normalize()).collect()
    }
}

/// Unit-trace `(S_B, S_W)` of a dataset.
pub fn scatter_pair(data: &LabeledDataset) -> Result<(DensityOperator, DensityOperator)> {
    let stats = class_statistics(data)?;
    Ok((between_scatter(&stats)?, within_scatter(data, &stats)?))
}

fn check_rank(sb: &DensityOperator, p: usize, kappa_eff: f64) -> Result<()> {
    let achievable = sb.eig().kept_indices(kappa_eff).len();
    if p == 0 || p > achievable {
        return Err(Error::RankExceeded {
            requested: p,
            achievable,
        });
    }
    Ok(())
}

fn real_part(v: &crate::linalg::CVector) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|z| z.re))
}

/// `S_B^{1/2} S_W^{-1} S_B^{1/2}` by exact spectral calculus with the `κ_eff` filter.
pub fn whitened_between(
    sb: &DensityOperator,
    sw: &DensityOperator,
    kappa_eff: f64,
) -> Result<HermitianOperator> {
    let sb_half = matrix_function(sb.as_hermitian(), SpectralFunction::Sqrt, kappa_eff)?;
    let sw_inv = matrix_function(sw.as_hermitian(), SpectralFunction::Inverse, kappa_eff)?;
    Ok(HermitianOperator::hermitize(
        sb_half.matrix() * sw_inv.matrix() * sb_half.matrix(),
    ))
}

/// How a whitened eigenvector `v` is mapped back to a discriminant direction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BackTransform {
    /// `w = S_W^{-1} S_B^{1/2} v`, an eigenvector of `S_W^{-1} S_B` for any rank of `S_B`.
    #[default]
    GeneralizedEigenvector,
    /// `w = S_B^{-1/2} v` with the inverse on the support of `S_B`. Same direction as
    /// the default when `S_B` is invertible; otherwise it stays inside the span of
    /// the class-mean differences and is not a maximizer of Fisher's criterion.
    InverseSqrtBetween,
}

impl BackTransform {
    fn stages(self) -> Vec<(bool, SpectralFunction)> {
        // (true = S_B, false = S_W), in order of application
        match self {
            BackTransform::GeneralizedEigenvector => vec![
                (true, SpectralFunction::Sqrt),
                (false, SpectralFunction::Inverse),
            ],
            BackTransform::InverseSqrtBetween => vec![(true, SpectralFunction::InverseSqrt)],
        }
    }
}

fn back_transform_operator(
    sb: &DensityOperator,
    sw: &DensityOperator,
    how: BackTransform,
    kappa_eff: f64,
) -> Result<CMatrix> {
    let n = sb.dim();
    let mut out = CMatrix::identity(n, n);
    for (between, f) in how.stages() {
        let a = if between { sb } else { sw };
        out = matrix_function(a.as_hermitian(), f, kappa_eff)?.into_matrix() * out;
    }
    Ok(out)
}

pub fn classical_lda_oracle(data: &LabeledDataset, p: usize, kappa_eff: f64) -> Result<ProjectionBasis> {
    classical_lda_oracle_with(data, p, kappa_eff, BackTransform::default())
}

pub fn classical_lda_oracle_with(
    data: &LabeledDataset,
    p: usize,
    kappa_eff: f64,
    back_transform: BackTransform,
) -> Result<ProjectionBasis> {
    let (sb, sw) = scatter_pair(data)?;
    check_rank(&sb, p, kappa_eff)?;
    let m = whitened_between(&sb, &sw, kappa_eff)?;
    let eig = m.eig();
    let kept = eig.kept_indices(kappa_eff);
    if p > kept.len() {
        return Err(Error::RankExceeded {
            requested: p,
            achievable: kept.len(),
        });
    }
    let tr = m.trace();
    let back = back_transform_operator(&sb, &sw, back_transform, kappa_eff)?;
    let mut intermediate = Vec::with_capacity(p);
    let mut directions = Vec::with_capacity(p);
    let mut values = Vec::with_capacity(p);
    for &i in kept.iter().take(p) {
        let v = sign_fixed(real_part(&eig.eigenvector(i)));
        let w = sign_fixed(real_part(&(&back * real_vector(v.as_slice()))));
        intermediate.push(v);
        directions.push(w);
        values.push(eig.eigenvalues[i] / tr);
    }
    Ok(ProjectionBasis {
        p,
        directions,
        intermediate,
        eigenvalue_estimates: values,
    })
}

// largest-modulus entry positive
fn sign_fixed(v: DVector<f64>) -> DVector<f64> {
    let pivot = v.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
    if pivot < 0.0 {
        -v
    } else {
        v
    }
}

/// Knobs of the quantum reduction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantumLdaConfig {
    pub p: usize,
    pub kappa_eff: f64,
    pub epsilon: f64,
    pub bits: u32,
    pub seed: u64,
    pub back_transform: BackTransform,
}

impl QuantumLdaConfig {
    pub fn new(p: usize, bits: u32, seed: u64) -> Self {
        Self {
            p,
            kappa_eff: crate::chain::DEFAULT_KAPPA_EFF,
            epsilon: crate::chain::DEFAULT_EPSILON,
            bits,
            seed,
            back_transform: BackTransform::default(),
        }
    }

    /// Register samples drawn in the eigenpair step.
    pub fn draws(&self) -> usize {
        4096.max(64 << self.bits)
    }
}

/// One eigenpair recovered from the sampled register outcomes.
#[derive(Clone, Debug)]
pub struct RecoveredEigenpair {
    pub eigenvalue: f64,
    pub frequency: f64,
    pub register_values: Vec<usize>,
    pub eigenvector: DVector<f64>,
}

/// Everything the quantum reduction measured along the way.
#[derive(Clone, Debug)]
pub struct QuantumLdaRun {
    pub basis: ProjectionBasis,
    pub chain: ChainReport,
    pub eigenpairs: Vec<RecoveredEigenpair>,
    pub draws: usize,
    /// Overall success probability of each back-transform chain.
    pub back_transform_success: Vec<f64>,
}

pub fn quantum_lda(
    data: &LabeledDataset,
    p: usize,
    kappa_eff: f64,
    epsilon: f64,
    bits: u32,
    seed: u64,
) -> Result<ProjectionBasis> {
    let cfg = QuantumLdaConfig {
        kappa_eff,
        epsilon,
        ..QuantumLdaConfig::new(p, bits, seed)
    };
    Ok(quantum_lda_run(data, &cfg)?.basis)
}

pub fn quantum_lda_run(data: &LabeledDataset, cfg: &QuantumLdaConfig) -> Result<QuantumLdaRun> {
    if !(MIN_REGISTER_BITS..=MAX_REGISTER_BITS).contains(&cfg.bits) {
        return Err(Error::InvalidParameter(format!(
            "register width {} outside [{MIN_REGISTER_BITS}, {MAX_REGISTER_BITS}]",
            cfg.bits
        )));
    }
    let (sb, sw) = scatter_pair(data)?;
    check_rank(&sb, cfg.p, cfg.kappa_eff)?;

    let spec = ChainSpec::new(cfg.kappa_eff, cfg.epsilon, cfg.bits)
        .stage(sw.clone(), SpectralFunction::InverseSqrt)
        .stage(sb.clone(), SpectralFunction::Sqrt);
    let chain = chain_apply(&spec, None)?;
    let rho_m = chain.output.clone();

    let qpe = PhaseEstimation::for_spectrum(cfg.bits, rho_m.eig().max_eigenvalue());
    let joint = phase_estimation(&rho_m, &rho_m, &qpe)?;
    let draws = cfg.draws();
    let samples = sample_eigenpairs(&joint, draws, cfg.seed)?;
    let eigenpairs = cluster_eigenpairs(&samples);
    if eigenpairs.len() < cfg.p {
        return Err(Error::RankExceeded {
            requested: cfg.p,
            achievable: eigenpairs.len(),
        });
    }
    let chosen: Vec<&RecoveredEigenpair> = eigenpairs.iter().take(cfg.p).collect();
    let intermediate = orthonormalize(chosen.iter().map(|e| e.eigenvector.clone()).collect())?;

    let mut directions = Vec::with_capacity(cfg.p);
    let mut back_transform_success = Vec::with_capacity(cfg.p);
    for v in &intermediate {
        let rho_v = DensityOperator::pure_real(v.as_slice())?;
        let mut back = ChainSpec::new(cfg.kappa_eff, cfg.epsilon, cfg.bits);
        for (between, f) in cfg.back_transform.stages() {
            back = back.stage(if between { sb.clone() } else { sw.clone() }, f);
        }
        let r = chain_apply(&back, Some(&rho_v))?;
        let (_, w) = top_eigenvector(r.output.as_hermitian());
        // the global sign of a state is unobservable; both paths use the same convention
        directions.push(sign_fixed(real_part(&w)));
        back_transform_success.push(r.total_success_probability);
    }

    Ok(QuantumLdaRun {
        basis: ProjectionBasis {
            p: cfg.p,
            directions,
            intermediate,
            eigenvalue_estimates: chosen.iter().map(|e| e.eigenvalue).collect(),
        },
        chain,
        eigenpairs,
        draws,
        back_transform_success,
    })
}

/// Groups sampled outcomes whose eigenvectors agree, keeps groups seen at least
/// half as often as their eigenvalue predicts, and orders them by eigenvalue.
pub fn cluster_eigenpairs(samples: &[EigenpairSample]) -> Vec<RecoveredEigenpair> {
    struct Group {
        rep: crate::linalg::CVector,
        weight: f64,
        lambda_sum: f64,
        state: CMatrix,
        values: Vec<usize>,
    }
    let mut groups: Vec<Group> = Vec::new();
    for s in samples {
        let hit = groups
            .iter_mut()
            .find(|g| g.rep.dotc(&s.eigenvector).norm_sqr() >= CLUSTER_OVERLAP);
        match hit {
            Some(g) => {
                g.weight += s.frequency;
                g.lambda_sum += s.frequency * s.eigenvalue;
                g.state += s.state.matrix() * crate::linalg::c64(s.frequency);
                g.values.push(s.register_value);
            }
            None => groups.push(Group {
                rep: s.eigenvector.clone(),
                weight: s.frequency,
                lambda_sum: s.frequency * s.eigenvalue,
                state: s.state.matrix() * crate::linalg::c64(s.frequency),
                values: vec![s.register_value],
            }),
        }
    }
    let mut out: Vec<RecoveredEigenpair> = groups
        .into_iter()
        .filter_map(|g| {
            let lambda = g.lambda_sum / g.weight;
            if g.weight < 0.5 * lambda {
                return None;
            }
            let (_, v) = top_eigenvector(&HermitianOperator::hermitize(g.state));
            let mut values = g.values;
            values.sort_unstable();
            Some(RecoveredEigenpair {
                eigenvalue: lambda,
                frequency: g.weight,
                register_values: values,
                eigenvector: sign_fixed(real_part(&v).normalize()),
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.eigenvalue
            .total_cmp(&a.eigenvalue)
            .then(b.frequency.total_cmp(&a.frequency))
            .then(a.register_values[0].cmp(&b.register_values[0]))
    });
    out
}

/// Gram-Schmidt in the given order.
fn orthonormalize(vs: Vec<DVector<f64>>) -> Result<Vec<DVector<f64>>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vs.len());
    for mut v in vs {
        for u in &out {
            v -= u * u.dot(&v);
        }
        let n = v.norm();
        if n < 1e-8 {
            return Err(Error::Degenerate("recovered eigenvectors are linearly dependent".into()));
        }
        out.push(v / n);
    }
    Ok(out)
}

/// Trace-ratio `Tr(WᵀS_B W)/Tr(WᵀS_W W)` over unit-norm columns; for one direction
/// this is the Rayleigh quotient `wᵀS_B w / wᵀS_W w`.
pub fn fisher_criterion_scatter(
    sb: &DMatrix<f64>,
    sw: &DMatrix<f64>,
    directions: &[DVector<f64>],
) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for w in directions {
        if w.len() != sb.nrows() {
            return Err(Error::DimensionMismatch {
                expected: sb.nrows(),
                found: w.len(),
            });
        }
        let n = w.norm();
        if !(n > 0.0) {
            return Err(Error::Degenerate("zero projection direction".into()));
        }
        let u = w / n;
        num += u.dot(&(sb * &u));
        den += u.dot(&(sw * &u));
    }
    if den < 1e-14 {
        return Err(Error::Degenerate(format!(
            "within-class variance {den:e} along the projection"
        )));
    }
    Ok(num / den)
}

/// Fisher's criterion on the classical scatter matrices of `data`.
pub fn fisher_criterion(data: &LabeledDataset, basis: &ProjectionBasis) -> Result<f64> {
    let stats = class_statistics(data)?;
    fisher_criterion_scatter(
        &classical_between_scatter(&stats),
        &classical_within_scatter(data, &stats),
        &basis.directions,
    )
}

/// Rows `x·w_r/‖w_r‖`, labels kept.
pub fn project(data: &LabeledDataset, basis: &ProjectionBasis) -> Result<LabeledDataset> {
    if basis.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: basis.dim(),
        });
    }
    let units = basis.unit_directions();
    let names = (1..=basis.p).map(|r| format!("w{r}")).collect();
    data.map_samples(names, |x| units.iter().map(|u| u.dot(x)).collect())
}

/// Top principal directions of the sample covariance (labels ignored).
pub fn pca(data: &LabeledDataset, p: usize) -> Result<ProjectionBasis> {
    let n = data.dim();
    if p == 0 || p > n {
        return Err(Error::RankExceeded {
            requested: p,
            achievable: n,
        });
    }
    let mean = data.samples().iter().fold(DVector::zeros(n), |a, x| a + x) / data.len() as f64;
    let cov = data.samples().iter().fold(DMatrix::zeros(n, n), |a, x| {
        let d = x - &mean;
        a + &d * d.transpose()
    });
    let eig = HermitianOperator::from_real(&cov)?.eig();
    let dirs: Vec<DVector<f64>> = (0..p).map(|i| sign_fixed(real_part(&eig.eigenvector(i)))).collect();
    let mut basis = ProjectionBasis::from_directions(dirs)?;
    basis.eigenvalue_estimates = eig.eigenvalues.iter().take(p).copied().collect();
    Ok(basis)
}

/// Exponent tuples of all monomials in `n` variables with `1 ≤ degree ≤ d`,
/// by degree and then lexicographically descending (`x₁² , x₁x₂, x₂²`).
pub fn monomial_exponents(n: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(n, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    for deg in 1..=d {
        rec(n, deg, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// Polynomial feature map: every monomial of total degree `1..=d`.
pub fn feature_map(data: &LabeledDataset, degree: u32) -> Result<LabeledDataset> {
    if !(1..=3).contains(&degree) {
        return Err(Error::InvalidParameter(format!(
            "feature-map degree {degree} outside 1..=3"
        )));
    }
    let n = data.dim();
    // C(n + d, d) − 1
    let dim = (1..=degree as usize).fold(1usize, |acc, i| acc * (n + i) / i) - 1;
    if dim > MAX_FEATURE_DIM {
        return Err(Error::InvalidParameter(format!(
            "feature space of dimension {dim} exceeds {MAX_FEATURE_DIM}"
        )));
    }
    let exps = monomial_exponents(n, degree);
    debug_assert_eq!(exps.len(), dim);
    let names = exps
        .iter()
        .map(|e| {
            e.iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let base = &data.feature_names()[i];
                    if k == 1 {
                        base.clone()
                    } else {
                        format!("{base}^{k}")
                    }
                })
                .collect::<Vec<_>>()
                .join("*")
        })
        .collect();
    data.map_samples(names, |x| {
        exps.iter()
            .map(|e| e.iter().zip(x.iter()).map(|(&k, v)| v.powi(k as i32)).product())
            .collect()
    })
}

/// Random unit vectors for probing the argmax property of Fisher's criterion.
pub fn random_directions(n: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| DVector::from_vec(crate::random::random_unit_real(n, &mut r)))
        .collect()
}
