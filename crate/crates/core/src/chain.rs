//! Hermitian chain products `F·ρ₀·F†` with `F = f_k(A_k)…f₁(A₁)`.
//!
//! Each stage runs phase estimation of `A_j` on the current state, rotates an
//! ancilla by `arcsin(C_j·f_j(λ̂))` controlled on the eigenvalue register,
//! uncomputes the register and keeps the ancilla-`|1⟩` branch. Postselection is
//! exact: the returned state is renormalized and the branch probability is
//! reported rather than sampled.

use crate::error::{Error, Result};
use crate::linalg::{
    c64, matrix_function, CMatrix, DensityOperator, EigenSolution, HermitianOperator,
    SpectralFunction, C64,
};
use crate::qsim::{phase_estimation, PhaseEstimation, RegisteredState, ANCILLA, EIGENVALUE, SYSTEM};
use crate::register::{PhaseRegister, Window};
use crate::rotation::{arcsin_terms_for, rotation_amplitudes, RotationConfig, RotationPipeline};

pub const DEFAULT_BITS: u32 = 8;
pub const DEFAULT_KAPPA_EFF: f64 = 100.0;
pub const DEFAULT_EPSILON: f64 = 0.1;

/// How the controlled-rotation angle is obtained from the register value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AnglePath {
    /// `θ = arcsin(C·f(λ̂))` in floating point.
    Exact,
    /// The fixed-point Taylor/arcsin pipeline. Its arcsin series needs
    /// `|C·f| < 1`, so the default normalization becomes `(1 − ε)/max f`.
    FixedPoint(RotationConfig),
}

/// One factor `f_j(A_j)` of the chain.
#[derive(Clone, Debug)]
pub struct ChainStage {
    pub operator: DensityOperator,
    pub function: SpectralFunction,
    /// `C_j`; `None` picks the largest admissible value.
    pub normalization: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ChainSpec {
    pub stages: Vec<ChainStage>,
    pub kappa_eff: f64,
    pub epsilon: f64,
    pub bits: u32,
    pub window: Window,
    pub angles: AnglePath,
}

impl ChainSpec {
    pub fn new(kappa_eff: f64, epsilon: f64, bits: u32) -> Self {
        Self {
            stages: Vec::new(),
            kappa_eff,
            epsilon,
            bits,
            window: Window::Sine,
            angles: AnglePath::Exact,
        }
    }

    pub fn stage(mut self, operator: DensityOperator, function: SpectralFunction) -> Self {
        self.stages.push(ChainStage {
            operator,
            function,
            normalization: None,
        });
        self
    }

    pub fn stage_with_normalization(
        mut self,
        operator: DensityOperator,
        function: SpectralFunction,
        normalization: f64,
    ) -> Self {
        self.stages.push(ChainStage {
            operator,
            function,
            normalization: Some(normalization),
        });
        self
    }

    pub fn with_angles(mut self, angles: AnglePath) -> Self {
        self.angles = angles;
        self
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn dim(&self) -> Option<usize> {
        self.stages.first().map(|s| s.operator.dim())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_eff >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa_eff must be ≥ 1, got {}",
                self.kappa_eff
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if let Some(n) = self.dim() {
            if let Some(s) = self.stages.iter().find(|s| s.operator.dim() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s.operator.dim(),
                });
            }
        }
        for s in &self.stages {
            let kept = KeptSpectrum::new(&s.operator.eig(), s.function, self.kappa_eff)?;
            if let Some(c) = s.normalization {
                if !(c > 0.0) || c * kept.max_f > 1.0 + 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "normalization {c} violates C·max|f| ≤ 1 (max|f| = {})",
                        kept.max_f
                    )));
                }
            }
        }
        Ok(())
    }

    fn stage_config(&self) -> StageConfig {
        StageConfig {
            bits: self.bits,
            kappa_eff: self.kappa_eff,
            epsilon: self.epsilon,
            window: self.window,
            angles: self.angles,
        }
    }
}

/// Eigenvalues surviving the `κ_eff` filter and the range of `|f|` on them.
#[derive(Clone, Debug)]
struct KeptSpectrum {
    lambda_max: f64,
    lambda_min: f64,
    max_f: f64,
    min_f: f64,
    indices: Vec<usize>,
}

impl KeptSpectrum {
    fn new(eig: &EigenSolution, f: SpectralFunction, kappa_eff: f64) -> Result<Self> {
        let indices = eig.kept_indices(kappa_eff);
        if indices.is_empty() {
            return Err(Error::RankCollapse);
        }
        let vals: Vec<f64> = indices.iter().map(|&i| eig.eigenvalues[i]).collect();
        let fs: Vec<f64> = vals.iter().map(|&l| f.eval(l).abs()).collect();
        Ok(Self {
            lambda_max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            lambda_min: vals.iter().copied().fold(f64::INFINITY, f64::min),
            max_f: fs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min_f: fs.iter().copied().fold(f64::INFINITY, f64::min),
            indices,
        })
    }

    fn condition(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }

    fn ratio(&self) -> f64 {
        self.max_f / self.min_f
    }
}

/// `F·F†/Tr(F·F†)` by exact spectral calculus; with `ρ₀` given, `F·ρ₀·F†` normalized.
pub fn classical_chain_oracle(spec: &ChainSpec) -> Result<DensityOperator> {
    let n = spec
        .dim()
        .ok_or_else(|| Error::InvalidParameter("chain has no stages".into()))?;
    classical_chain_oracle_on(spec, &DensityOperator::maximally_mixed(n))
}

pub fn classical_chain_oracle_on(spec: &ChainSpec, rho0: &DensityOperator) -> Result<DensityOperator> {
    spec.validate()?;
    let n = rho0.dim();
    let mut f = CMatrix::identity(n, n);
    for s in &spec.stages {
        if s.operator.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.operator.dim(),
            });
        }
        let fj = matrix_function(s.operator.as_hermitian(), s.function, spec.kappa_eff)?;
        f = fj.matrix() * f;
    }
    let out = &f * rho0.matrix() * f.adjoint();
    let tr = out.trace().re;
    if !(tr >= 1e-14) {
        return Err(Error::Degenerate(format!(
            "chain annihilates the state (trace {tr:e})"
        )));
    }
    DensityOperator::normalized(HermitianOperator::hermitize(out))
}

/// Knobs shared by every stage of a chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageConfig {
    pub bits: u32,
    pub kappa_eff: f64,
    pub epsilon: f64,
    pub window: Window,
    pub angles: AnglePath,
}

impl Default for StageConfig {
    fn default() -> Self {
        Self {
            bits: DEFAULT_BITS,
            kappa_eff: DEFAULT_KAPPA_EFF,
            epsilon: DEFAULT_EPSILON,
            window: Window::Sine,
            angles: AnglePath::Exact,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StageResult {
    pub output: DensityOperator,
    /// Exact probability of the ancilla-`|1⟩` branch.
    pub success: f64,
    /// `(C·min|f|)²` times the weight of the input on the kept eigenspaces.
    pub bound: f64,
    pub normalization: f64,
    /// Weight of the input state on the eigenvectors that survive the filter.
    pub kept_weight: f64,
    /// `λ_max/λ_min` over the kept spectrum.
    pub condition: f64,
    /// `max|f|/min|f|` over the kept spectrum.
    pub function_ratio: f64,
}

/// One generalized HHL stage: `ρ ↦ f(A)·ρ·f(A)† / success`.
pub fn chain_stage(
    rho_prev: &DensityOperator,
    operator: &DensityOperator,
    function: SpectralFunction,
    normalization: Option<f64>,
    config: &StageConfig,
) -> Result<StageResult> {
    let n = operator.dim();
    if rho_prev.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho_prev.dim(),
        });
    }
    let eig = operator.eig();
    let kept = KeptSpectrum::new(&eig, function, config.kappa_eff)?;
    let c = match (normalization, config.angles) {
        (Some(c), _) => c,
        (None, AnglePath::Exact) => 1.0 / kept.max_f,
        (None, AnglePath::FixedPoint(_)) => (1.0 - config.epsilon) / kept.max_f,
    };
    if !(c > 0.0) || c * kept.max_f > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "normalization {c} violates C·max|f| ≤ 1 (max|f| = {})",
            kept.max_f
        )));
    }

    let qpe = PhaseEstimation::for_spectrum(config.bits, kept.lambda_max).with_window(config.window);
    let enc = qpe.encoding;
    let register = PhaseRegister::new(enc)?;
    let joint = phase_estimation(operator, rho_prev, &qpe)?;

    let lambda_cut = kept.lambda_max / config.kappa_eff * (1.0 - 1e-12);
    let rotation = RotationRule::new(function, c, &kept, config)?;
    let t = enc.dim();
    let angles: Vec<(f64, f64)> = (0..t)
        .map(|x| {
            let lam = enc.estimate(x);
            if lam < lambda_cut {
                Ok((1.0, 0.0))
            } else {
                rotation.amplitudes(lam)
            }
        })
        .collect::<Result<_>>()?;

    let mut joint = joint.append_register(ANCILLA, 2, 0)?;
    joint.apply_controlled(EIGENVALUE, ANCILLA, |x| {
        let (a0, a1) = angles[x];
        CMatrix::from_row_slice(2, 2, &[c64(a0), c64(-a1), c64(a1), c64(a0)])
    })?;

    // uncompute: Σ_l Q(λ_l)† ⊗ |u_l⟩⟨u_l| on eigenvalue ⊗ system
    let u = eig.eigenvectors.clone();
    let lambdas = eig.eigenvalues.clone();
    joint.apply_on(&[EIGENVALUE, SYSTEM], |amps| {
        let mut out = vec![c64(0.0); amps.len()];
        let mut w = vec![c64(0.0); t];
        for (l, &lam) in lambdas.iter().enumerate() {
            for (x, wx) in w.iter_mut().enumerate() {
                *wx = (0..n).map(|a| u[(a, l)].conj() * amps[x * n + a]).sum::<C64>();
            }
            register.uncompute(lam, &mut w);
            for (x, wx) in w.iter().enumerate() {
                for a in 0..n {
                    out[x * n + a] += u[(a, l)] * wx;
                }
            }
        }
        amps.copy_from_slice(&out);
    })?;

    let (post, success) = joint.condition(ANCILLA, 1)?;
    let output = system_state(&post)?;

    let beta = eig.eigenvectors.adjoint() * rho_prev.matrix() * &eig.eigenvectors;
    let kept_weight: f64 = kept.indices.iter().map(|&i| beta[(i, i)].re).sum();
    Ok(StageResult {
        output,
        success,
        bound: (c * kept.min_f).powi(2) * kept_weight,
        normalization: c,
        kept_weight,
        condition: kept.condition(),
        function_ratio: kept.ratio(),
    })
}

fn system_state(state: &RegisteredState) -> Result<DensityOperator> {
    let reduced = state.reduced(SYSTEM)?;
    DensityOperator::normalized(reduced.into_hermitian())
}

enum RotationRule {
    Exact { f: SpectralFunction, c: f64 },
    Fixed {
        pipeline: RotationPipeline,
        lambda_max: f64,
        nu_floor: f64,
    },
}

impl RotationRule {
    fn new(f: SpectralFunction, c: f64, kept: &KeptSpectrum, config: &StageConfig) -> Result<Self> {
        match config.angles {
            AnglePath::Exact => Ok(RotationRule::Exact { f, c }),
            AnglePath::FixedPoint(rc) => {
                // pipeline variable ν = λ/λ_max; homogeneity moves λ_max^r into C
                let c_nu = c * kept.lambda_max.powf(f.exponent());
                let res = (-(rc.fraction_bits as f64)).exp2();
                let x_max = (c * kept.max_f).min(1.0 - res);
                let rc = RotationConfig {
                    arcsin_terms: rc.arcsin_terms.max(arcsin_terms_for(x_max, res)?),
                    ..rc
                };
                let nu_floor = kept.lambda_min / kept.lambda_max;
                Ok(RotationRule::Fixed {
                    pipeline: RotationPipeline::new(f, c_nu, 1.0 / nu_floor, rc)?,
                    lambda_max: kept.lambda_max,
                    nu_floor,
                })
            }
        }
    }

    fn amplitudes(&self, lambda: f64) -> Result<(f64, f64)> {
        match self {
            RotationRule::Exact { f, c } => {
                let a1 = (c * f.eval(lambda)).min(1.0);
                rotation_amplitudes(1.0, SpectralFunction::Identity, a1)
            }
            RotationRule::Fixed {
                pipeline,
                lambda_max,
                nu_floor,
            } => {
                // estimates outside the kept range read the nearest kept value
                let nu = (lambda / lambda_max).clamp(*nu_floor, 1.0);
                pipeline.amplitudes(nu)
            }
        }
    }
}

/// Outcome of [`chain_apply`].
#[derive(Clone, Debug)]
pub struct ChainReport {
    pub output: DensityOperator,
    pub stage_success_probabilities: Vec<f64>,
    pub total_success_probability: f64,
    /// `ceil(κ_j²/ε³)` copies of `A_j` consumed by density-matrix exponentiation.
    pub copies_used: Vec<u64>,
    pub normalizations: Vec<f64>,
    /// Per-stage lower bounds on the success probability.
    pub stage_bounds: Vec<f64>,
    /// Product of the per-stage bounds.
    pub theoretical_bound: f64,
    /// `min|f₁|/max|f₁|`: the first-stage success probability after amplitude amplification.
    pub amplified_bound_stage1: f64,
}

/// Runs every stage in order starting from `ρ₀` (the maximally mixed state when `None`).
pub fn chain_apply(spec: &ChainSpec, rho0: Option<&DensityOperator>) -> Result<ChainReport> {
    spec.validate()?;
    let mut rho = match (rho0, spec.dim()) {
        (Some(r), _) => r.clone(),
        (None, Some(n)) => DensityOperator::maximally_mixed(n),
        (None, None) => {
            return Err(Error::InvalidParameter(
                "empty chain needs an explicit initial state".into(),
            ))
        }
    };
    let config = spec.stage_config();
    let mut report = ChainReport {
        output: rho.clone(),
        stage_success_probabilities: vec![],
        total_success_probability: 1.0,
        copies_used: vec![],
        normalizations: vec![],
        stage_bounds: vec![],
        theoretical_bound: 1.0,
        amplified_bound_stage1: 1.0,
    };
    for (j, s) in spec.stages.iter().enumerate() {
        let r = chain_stage(&rho, &s.operator, s.function, s.normalization, &config)?;
        report.stage_success_probabilities.push(r.success);
        report.total_success_probability *= r.success;
        report
            .copies_used
            .push(copies_for(r.condition.min(spec.kappa_eff), spec.epsilon));
        report.normalizations.push(r.normalization);
        report.stage_bounds.push(r.bound);
        report.theoretical_bound *= r.bound;
        if j == 0 {
            report.amplified_bound_stage1 = 1.0 / r.function_ratio;
        }
        rho = r.output;
    }
    report.output = rho;
    Ok(report)
}

pub fn copies_for(kappa: f64, epsilon: f64) -> u64 {
    // tolerate rounding in κ so exact ratios do not spill into the next integer
    (kappa * kappa / epsilon.powi(3) * (1.0 - 1e-12)).ceil() as u64
}

/// Dimensionless cost `(X/ε³)·Σ_j κ_j² · r₁ · Π_{j≥2} r_j²` with
/// `r_j = max|f_j|/min|f_j|` and `κ_j = λ_max/λ_min`, both over the kept spectra;
/// the first stage carries the amplitude-amplified ratio `r₁`.
pub fn complexity_estimate(spec: &ChainSpec, construction_cost: f64) -> Result<f64> {
    spec.validate()?;
    let mut kappa_sq = 0.0;
    let mut ratio_product = 1.0;
    for (j, s) in spec.stages.iter().enumerate() {
        let kept = KeptSpectrum::new(&s.operator.eig(), s.function, spec.kappa_eff)?;
        kappa_sq += kept.condition().powi(2);
        ratio_product *= if j == 0 { kept.ratio() } else { kept.ratio().powi(2) };
    }
    Ok(construction_cost / spec.epsilon.powi(3) * kappa_sq * ratio_product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, trace_distance};
    use crate::random::{density_with_spectrum, random_density, rng};

    fn spectrum(n: usize, cond: f64) -> Vec<f64> {
        (0..n)
            .map(|i| 1.0 - (1.0 - 1.0 / cond) * i as f64 / (n.max(2) - 1) as f64)
            .collect()
    }

    #[test]
    fn oracle_examples() {
        let a = random_density(3, 5.0, &mut rng(1));
        let spec = ChainSpec::new(100.0, 0.1, 8).stage(a.clone(), SpectralFunction::Identity);
        let out = classical_chain_oracle(&spec).unwrap();
        let a2 = a.matrix() * a.matrix();
        let want = &a2 * c64(1.0 / a2.trace().re);
        assert!(max_abs(&(out.matrix() - want)) < 1e-12);

        let half = DensityOperator::maximally_mixed(2);
        let spec = ChainSpec::new(100.0, 0.1, 8).stage(half.clone(), SpectralFunction::Inverse);
        let out = classical_chain_oracle(&spec).unwrap();
        assert!(max_abs(&(out.matrix() - half.matrix())) < 1e-12);

        let spec = ChainSpec::new(100.0, 0.1, 8)
            .stage(a.clone(), SpectralFunction::InverseSqrt)
            .stage(a, SpectralFunction::Sqrt);
        let out = classical_chain_oracle(&spec).unwrap();
        assert!(max_abs(&(out.matrix() - DensityOperator::maximally_mixed(3).matrix())) < 1e-10);
    }

    #[test]
    fn identity_stage_with_unit_normalization_is_exact() {
        // A = diag(1, 0) keeps the top eigenvalue on a representable phase; C = 1 gives a1 = λ̂
        let rho = random_density(2, 4.0, &mut rng(2));
        let a = DensityOperator::basis_state(2, 0);
        let r = chain_stage(
            &rho,
            &a,
            SpectralFunction::Identity,
            Some(1.0),
            &StageConfig::default(),
        );
        // the zero eigenvalue is filtered out, so only the |0⟩ block survives
        let r = r.unwrap();
        assert!((r.output.matrix()[(0, 0)].re - 1.0).abs() < 0.05);
    }

    #[test]
    fn stage_success_matches_direct_summation() {
        let lam = [1.0 / 1.5, 0.5 / 1.5];
        let a = density_with_spectrum(&lam, &mut rng(3));
        let rho = DensityOperator::maximally_mixed(2);
        let r = chain_stage(&rho, &a, SpectralFunction::Inverse, None, &StageConfig::default()).unwrap();
        let c = lam[1];
        let want: f64 = lam.iter().map(|l| 0.5 * (c / l).powi(2)).sum();
        assert!((r.success - want).abs() < 0.02, "{} vs {want}", r.success);
        let spec = ChainSpec::new(100.0, 0.1, 8).stage(a, SpectralFunction::Inverse);
        let oracle = classical_chain_oracle(&spec).unwrap();
        assert!(trace_distance(&r.output, &oracle).unwrap() < 0.02);
    }

    #[test]
    fn stage_bound_for_ratio_ten() {
        let a = density_with_spectrum(&spectrum(3, 10.0), &mut rng(4));
        let r = chain_stage(
            &DensityOperator::maximally_mixed(3),
            &a,
            SpectralFunction::Inverse,
            None,
            &StageConfig::default(),
        )
        .unwrap();
        assert!((r.bound - 0.01).abs() < 1e-9);
        assert!(r.success >= r.bound);
    }

    #[test]
    fn empty_chain_returns_initial_state() {
        let rho = random_density(3, 3.0, &mut rng(5));
        let r = chain_apply(&ChainSpec::new(100.0, 0.1, 8), Some(&rho)).unwrap();
        assert_eq!(r.total_success_probability, 1.0);
        assert!(max_abs(&(r.output.matrix() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn copies_formula() {
        assert_eq!(copies_for(10.0, 0.1), 100_000);
        let a = density_with_spectrum(&spectrum(4, 5.0), &mut rng(6));
        let spec = ChainSpec::new(100.0, 0.1, 6).stage(a, SpectralFunction::Sqrt);
        let r = chain_apply(&spec, None).unwrap();
        assert_eq!(r.copies_used, vec![25_000]);
    }

    #[test]
    fn complexity_examples() {
        let spec = ChainSpec::new(100.0, 0.1, 8)
            .stage(DensityOperator::maximally_mixed(4), SpectralFunction::Identity);
        assert!((complexity_estimate(&spec, 1.0).unwrap() - 1000.0).abs() < 1e-6);

        // spectra spanning exactly [1/κ, 1]·λ_max give ratios √κ for sqrt and inverse-sqrt
        let kappa: f64 = 16.0;
        let a = density_with_spectrum(&spectrum(4, kappa), &mut rng(7));
        let b = density_with_spectrum(&spectrum(4, kappa), &mut rng(8));
        let spec = ChainSpec::new(kappa, 0.1, 8)
            .stage(a, SpectralFunction::InverseSqrt)
            .stage(b, SpectralFunction::Sqrt);
        let cost = complexity_estimate(&spec, 1.0).unwrap();
        let want = 2.0 * kappa.powf(3.5) / 0.1f64.powi(3);
        assert!((cost / want - 1.0).abs() < 1e-9, "{cost} vs {want}");
    }

    #[test]
    fn commuting_chain_matches_matrix_functions() {
        let u = crate::random::random_unitary(3, &mut rng(9));
        let mk = |d: &[f64]| {
            let m = &u * HermitianOperator::diagonal(d).matrix() * u.adjoint();
            DensityOperator::normalized(HermitianOperator::hermitize(m)).unwrap()
        };
        let a = mk(&[0.5, 0.25, 0.25]);
        let b = mk(&[0.25, 0.25, 0.5]);
        let spec = ChainSpec::new(100.0, 0.1, 8)
            .stage(a, SpectralFunction::Sqrt)
            .stage(b, SpectralFunction::Inverse);
        let q = chain_apply(&spec, None).unwrap().output;
        let o = classical_chain_oracle(&spec).unwrap();
        assert!(trace_distance(&q, &o).unwrap() < 0.02);
    }

    #[test]
    fn rejects_bad_specs() {
        let a = DensityOperator::maximally_mixed(2);
        assert!(ChainSpec::new(0.5, 0.1, 8).stage(a.clone(), SpectralFunction::Sqrt).validate().is_err());
        assert!(ChainSpec::new(10.0, 1.5, 8).stage(a.clone(), SpectralFunction::Sqrt).validate().is_err());
        let bad = ChainSpec::new(10.0, 0.1, 8).stage_with_normalization(a.clone(), SpectralFunction::Inverse, 1.0);
        assert!(bad.validate().is_err());
        let mixed = ChainSpec::new(10.0, 0.1, 8)
            .stage(a, SpectralFunction::Sqrt)
            .stage(DensityOperator::maximally_mixed(3), SpectralFunction::Sqrt);
        assert!(matches!(mixed.validate(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fixed_point_angles_agree_with_exact() {
        let a = density_with_spectrum(&spectrum(3, 8.0), &mut rng(10));
        let exact = ChainSpec::new(100.0, 0.1, 8).stage(a.clone(), SpectralFunction::InverseSqrt);
        let fixed = exact
            .clone()
            .with_angles(AnglePath::FixedPoint(RotationConfig::default()));
        let e = chain_apply(&exact, None).unwrap();
        let f = chain_apply(&fixed, None).unwrap();
        assert!(trace_distance(&e.output, &f.output).unwrap() < 0.01);
        let ratio = f.stage_success_probabilities[0] / e.stage_success_probabilities[0];
        assert!((ratio - 0.81).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn distance_shrinks_with_register_width() {
        let a = density_with_spectrum(&spectrum(4, 8.0), &mut rng(11));
        let b = density_with_spectrum(&spectrum(4, 5.0), &mut rng(12));
        let d = |bits| {
            let spec = ChainSpec::new(100.0, 0.1, bits)
                .stage(a.clone(), SpectralFunction::Inverse)
                .stage(b.clone(), SpectralFunction::Sqrt);
            let q = chain_apply(&spec, None).unwrap().output;
            trace_distance(&q, &classical_chain_oracle(&spec).unwrap()).unwrap()
        };
        let (d5, d8) = (d(5), d(8));
        assert!(d8 < d5, "{d5} → {d8}");
        assert!(d8 < 0.05);
    }
}
