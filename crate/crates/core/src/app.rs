//! Command-line front end. Every subcommand produces a [`RunReport`].

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::chain::{
    chain_apply, classical_chain_oracle, complexity_estimate, AnglePath, ChainSpec,
};
use crate::dataset::LabeledDataset;
use crate::error::{Error, ErrorKind, Result};
use crate::io::{load_csv, save_csv, Preset, RunReport};
use crate::lda::{
    classical_lda_oracle_with, feature_map, fisher_criterion, quantum_lda_run, scatter_pair,
    BackTransform, ProjectionBasis, QuantumLdaConfig,
};
use crate::linalg::{trace_distance, CMatrix, DensityOperator, HermitianOperator, SpectralFunction, C64};
use crate::qda::{self, classify_all, DiscriminantResult, PriorTerm};
use crate::random::derive_seed;
use crate::rotation::{arcsin_series, dyadic_grid, RotationConfig, RotationPipeline};

#[derive(Parser, Debug)]
#[command(name = "qdasim", version, about = "Quantum discriminant analysis on a density-matrix simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Dimensionality reduction (quantum LDA and/or the exact oracle).
    Reduce(ReduceArgs),
    /// Discriminant classification of a test set.
    Classify(ClassifyArgs),
    /// Evaluate a Hermitian chain product against its classical oracle.
    Chain(ChainArgs),
    /// Sweep the fixed-point rotation pipeline over the dyadic grid.
    RotateCheck(RotateArgs),
    /// Write a synthetic dataset as CSV.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PathChoice {
    Quantum,
    Classical,
    Both,
}

impl PathChoice {
    fn quantum(self) -> bool {
        self != PathChoice::Classical
    }

    fn classical(self) -> bool {
        self != PathChoice::Quantum
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// RNG seed.
    #[arg(long, env = "QDASIM_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Phase register width.
    #[arg(long, default_value_t = 8)]
    pub t: u32,
    /// Condition-number filter.
    #[arg(long = "kappa", default_value_t = 100.0)]
    pub kappa_eff: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct DataSource {
    /// CSV file with a final `label` column.
    #[arg(long, conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// Built-in dataset: two-gauss, three-gauss, adversarial, circles.
    #[arg(long)]
    pub synthetic: Option<String>,
    /// Samples per class for synthetic data.
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
}

impl DataSource {
    fn load(&self, seed: u64) -> Result<(LabeledDataset, Value)> {
        match (&self.data, &self.synthetic) {
            (Some(path), _) => Ok((load_csv(path)?, json!({"file": path.display().to_string()}))),
            (None, Some(name)) => {
                let preset: Preset = name.parse()?;
                let data = preset.generate(self.per_class, seed)?;
                Ok((data, json!({"synthetic": name, "per_class": self.per_class})))
            }
            (None, None) => Err(Error::InvalidParameter(
                "give a dataset with --data FILE or --synthetic PRESET".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackTransformChoice {
    Generalized,
    InverseSqrt,
}

impl From<BackTransformChoice> for BackTransform {
    fn from(c: BackTransformChoice) -> Self {
        match c {
            BackTransformChoice::Generalized => BackTransform::GeneralizedEigenvector,
            BackTransformChoice::InverseSqrt => BackTransform::InverseSqrtBetween,
        }
    }
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub source: DataSource,
    #[command(flatten)]
    pub common: Common,
    /// Number of discriminant directions.
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, value_enum, default_value_t = PathChoice::Both)]
    pub path: PathChoice,
    /// Polynomial feature-map degree applied before the reduction.
    #[arg(long, default_value_t = 1)]
    pub degree: u32,
    #[arg(long, value_enum, default_value_t = BackTransformChoice::Generalized)]
    pub back_transform: BackTransformChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PriorChoice {
    Log,
    Linear,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    /// Training CSV (requires --test).
    #[arg(long, conflicts_with = "synthetic", requires = "test")]
    pub train: Option<PathBuf>,
    /// Test CSV.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// Built-in dataset; the test set is drawn from the same preset with a derived seed.
    #[arg(long)]
    pub synthetic: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    #[arg(long, default_value_t = 50)]
    pub test_per_class: usize,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = qda::DEFAULT_SHOTS)]
    pub shots: u64,
    #[arg(long, value_enum, default_value_t = PathChoice::Both)]
    pub path: PathChoice,
    /// Use the shared within-class covariance for every class.
    #[arg(long)]
    pub lda: bool,
    #[arg(long, value_enum, default_value_t = PriorChoice::Log)]
    pub prior: PriorChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AngleChoice {
    Exact,
    Fixed,
}

#[derive(Args, Debug)]
pub struct ChainArgs {
    /// JSON file `{"operators": [{"re": [[..]], "im": [[..]]}], "functions": [..]}`.
    #[arg(long, conflicts_with = "data")]
    pub operators: Option<PathBuf>,
    /// Build the LDA chain (S_W, S_B) from a dataset CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Comma-separated functions, one per stage (overrides the file).
    #[arg(long, value_delimiter = ',')]
    pub functions: Option<Vec<String>>,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = AngleChoice::Exact)]
    pub angles: AngleChoice,
    /// Construction cost X in the complexity score.
    #[arg(long, default_value_t = 1.0)]
    pub construction_cost: f64,
}

#[derive(Args, Debug)]
pub struct RotateArgs {
    #[arg(long, default_value = "inverse")]
    pub function: String,
    /// Normalization C; defaults to 0.5 / max f over the grid.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long = "kappa", default_value_t = 100.0)]
    pub kappa_eff: f64,
    #[arg(long, default_value_t = crate::rotation::DEFAULT_INTEGER_BITS)]
    pub integer_bits: u32,
    /// Fraction bits b of every register.
    #[arg(long, default_value_t = crate::rotation::DEFAULT_FRACTION_BITS)]
    pub bits: u32,
    #[arg(long, default_value_t = crate::rotation::DEFAULT_TAYLOR_ORDER)]
    pub taylor_order: usize,
    #[arg(long, default_value_t = crate::rotation::DEFAULT_ARCSIN_TERMS)]
    pub arcsin_terms: usize,
    #[arg(long, default_value_t = crate::rotation::DEFAULT_WINDOWS_PER_OCTAVE)]
    pub windows: usize,
    /// The sweep visits λ = j / 2^grid-bits.
    #[arg(long, default_value_t = 8)]
    pub grid_bits: u32,
    #[arg(long, env = "QDASIM_SEED", default_value_t = 1)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value = "two-gauss")]
    pub preset: String,
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    #[arg(long, env = "QDASIM_SEED", default_value_t = 1)]
    pub seed: u64,
    /// CSV destination.
    #[arg(long)]
    pub csv: PathBuf,
    /// JSON report destination (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Usage => EXIT_USAGE,
        ErrorKind::Domain => EXIT_DOMAIN,
        ErrorKind::Numerical => EXIT_NUMERICAL,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(command: &Command) -> Result<()> {
    let (report, output) = match command {
        Command::Reduce(a) => (run_reduce(a)?, &a.common.output),
        Command::Classify(a) => (run_classify(a)?, &a.common.output),
        Command::Chain(a) => (run_chain(a)?, &a.common.output),
        Command::RotateCheck(a) => (run_rotate_check(a)?, &a.output),
        Command::Gen(a) => (run_gen(a)?, &a.output),
    };
    match output {
        Some(path) => report.write(path),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{}", report.to_json()?)?;
            Ok(())
        }
    }
}

fn common_params(r: &mut RunReport, c: &Common) -> Result<()> {
    r.param("t", c.t)?.param("kappa_eff", c.kappa_eff)?.param("epsilon", c.epsilon)?;
    Ok(())
}

fn vectors(vs: &[DVector<f64>]) -> Vec<Vec<f64>> {
    vs.iter().map(|v| v.as_slice().to_vec()).collect()
}

fn matrix_json(m: &CMatrix) -> Value {
    let part = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
    };
    json!({"re": part(|z| z.re), "im": part(|z| z.im)})
}

fn cos_angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b).abs() / (a.norm() * b.norm())
}

fn basis_json(data: &LabeledDataset, b: &ProjectionBasis) -> Result<Value> {
    Ok(json!({
        "directions": vectors(&b.directions),
        "intermediate": vectors(&b.intermediate),
        "eigenvalues": b.eigenvalue_estimates,
        "fisher_criterion": fisher_criterion(data, b)?,
    }))
}

pub fn run_reduce(a: &ReduceArgs) -> Result<RunReport> {
    let c = &a.common;
    let (raw, source) = a.source.load(c.seed)?;
    let data = if a.degree == 1 { raw } else { feature_map(&raw, a.degree)? };
    let mut r = RunReport::new("reduce", c.seed);
    r.param("source", source)?
        .param("p", a.p)?
        .param("path", format!("{:?}", a.path).to_lowercase())?
        .param("degree", a.degree)?
        .param("back_transform", format!("{:?}", a.back_transform).to_lowercase())?;
    common_params(&mut r, c)?;
    r.metric("samples", data.len())?.metric("dimension", data.dim())?;

    let how: BackTransform = a.back_transform.into();
    let classical = if a.path.classical() {
        let b = classical_lda_oracle_with(&data, a.p, c.kappa_eff, how)?;
        r.output("classical", basis_json(&data, &b)?)?;
        Some(b)
    } else {
        None
    };
    if a.path.quantum() {
        let cfg = QuantumLdaConfig {
            kappa_eff: c.kappa_eff,
            epsilon: c.epsilon,
            back_transform: how,
            ..QuantumLdaConfig::new(a.p, c.t, c.seed)
        };
        let run = quantum_lda_run(&data, &cfg)?;
        let mut q = basis_json(&data, &run.basis)?;
        q["eigenpair_frequencies"] = json!(run.eigenpairs.iter().map(|e| e.frequency).collect::<Vec<_>>());
        r.output("quantum", q)?;
        r.metric("chain_stage_success", &run.chain.stage_success_probabilities)?
            .metric("chain_stage_bounds", &run.chain.stage_bounds)?
            .metric("copies_used", &run.chain.copies_used)?
            .metric("register_draws", run.draws)?
            .metric("back_transform_success", &run.back_transform_success)?;
        if let Some(b) = &classical {
            let overlaps: Vec<f64> = run
                .basis
                .directions
                .iter()
                .zip(&b.directions)
                .map(|(q, o)| cos_angle(q, o))
                .collect();
            r.metric("direction_overlaps", overlaps)?;
            let (sb, sw) = scatter_pair(&data)?;
            let spec = ChainSpec::new(c.kappa_eff, c.epsilon, c.t)
                .stage(sw, SpectralFunction::InverseSqrt)
                .stage(sb, SpectralFunction::Sqrt);
            r.metric(
                "chain_trace_distance",
                trace_distance(&run.chain.output, &classical_chain_oracle(&spec)?)?,
            )?;
        }
    }
    Ok(r)
}

fn decisions_json(data: &LabeledDataset, rs: &[DiscriminantResult]) -> Value {
    json!({
        "decisions": rs.iter().map(|d| data.class_names()[d.chosen].clone()).collect::<Vec<_>>(),
        "values": rs.iter().map(|d| d.values.clone()).collect::<Vec<_>>(),
        "margins": rs.iter().map(|d| d.margin).collect::<Vec<_>>(),
    })
}

fn accuracy(data: &LabeledDataset, rs: &[DiscriminantResult]) -> f64 {
    let hits = rs.iter().zip(data.labels()).filter(|(d, &l)| d.chosen == l).count();
    hits as f64 / rs.len() as f64
}

pub fn run_classify(a: &ClassifyArgs) -> Result<RunReport> {
    let c = &a.common;
    let (train, test, source) = match (&a.train, &a.test, &a.synthetic) {
        (Some(tr), Some(te), _) => (
            load_csv(tr)?,
            load_csv(te)?,
            json!({"train": tr.display().to_string(), "test": te.display().to_string()}),
        ),
        (None, test, Some(name)) => {
            let preset: Preset = name.parse()?;
            let train = preset.generate(a.per_class, c.seed)?;
            let test = match test {
                Some(p) => load_csv(p)?,
                None => preset.generate(a.test_per_class, derive_seed(c.seed, 1))?,
            };
            (train, test, json!({"synthetic": name, "per_class": a.per_class, "test_per_class": a.test_per_class}))
        }
        _ => {
            return Err(Error::InvalidParameter(
                "give --train FILE --test FILE, or --synthetic PRESET".into(),
            ))
        }
    };
    if train.class_names() != test.class_names() && a.train.is_some() {
        return Err(Error::InvalidParameter(
            "train and test files list different classes (or in a different order)".into(),
        ));
    }
    let mut r = RunReport::new("classify", c.seed);
    r.param("source", source)?
        .param("shots", a.shots)?
        .param("path", format!("{:?}", a.path).to_lowercase())?
        .param("lda", a.lda)?
        .param("prior", format!("{:?}", a.prior).to_lowercase())?;
    common_params(&mut r, c)?;

    let prior = match a.prior {
        PriorChoice::Log => PriorTerm::Log,
        PriorChoice::Linear => PriorTerm::Linear,
    };
    let model = if a.lda { qda::fit_lda(&train, c.kappa_eff)? } else { qda::fit(&train, c.kappa_eff)? }
        .with_prior_term(prior)
        .with_register(c.t, c.epsilon);
    r.output("priors", model.priors())?
        .output("classes", train.class_names())?
        .metric("test_samples", test.len())?;

    let classical = if a.path.classical() {
        let rs = classify_all(&model, &test, qda::Path::Classical, a.shots, c.seed)?;
        r.output("classical", decisions_json(&test, &rs))?
            .metric("classical_accuracy", accuracy(&test, &rs))?;
        Some(rs)
    } else {
        None
    };
    if a.path.quantum() {
        let model = model.with_quantum_inversions()?;
        let rs = classify_all(&model, &test, qda::Path::Quantum, a.shots, c.seed)?;
        let inversions = model.quantum_inversions().unwrap_or_default();
        r.output("quantum", decisions_json(&test, &rs))?
            .metric("quantum_accuracy", accuracy(&test, &rs))?
            .metric("shots_used", rs.iter().map(|d| d.shots).sum::<u64>())?
            .metric("inversion_success", inversions.iter().map(|i| i.success).collect::<Vec<_>>())?;
        if let Some(cl) = &classical {
            let agree = rs.iter().zip(cl).filter(|(q, c)| q.chosen == c.chosen).count();
            r.metric("agreement", agree as f64 / rs.len() as f64)?;
            let overlaps: Vec<f64> = inversions
                .iter()
                .zip(&model.classes)
                .map(|(q, m)| q.direction.dot(&m.inversion.direction))
                .collect();
            r.metric("inversion_overlaps", overlaps)?;
        }
    }
    Ok(r)
}

#[derive(Deserialize)]
struct OperatorFile {
    operators: Vec<OperatorEntry>,
    #[serde(default)]
    functions: Vec<String>,
}

#[derive(Deserialize)]
struct OperatorEntry {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

fn parse_operator(e: &OperatorEntry) -> Result<DensityOperator> {
    let n = e.re.len();
    let im = e.im.clone().unwrap_or_else(|| vec![vec![0.0; n]; n]);
    if n == 0 || e.re.iter().chain(&im).any(|row| row.len() != n) || im.len() != n {
        return Err(Error::InvalidParameter("operators must be square, non-empty matrices".into()));
    }
    let m = CMatrix::from_fn(n, n, |i, j| C64::new(e.re[i][j], im[i][j]));
    // scale-free: the chain only sees A/Tr A
    DensityOperator::normalized(HermitianOperator::new(m)?)
}

pub fn run_chain(a: &ChainArgs) -> Result<RunReport> {
    let c = &a.common;
    let mut r = RunReport::new("chain", c.seed);
    let (operators, file_functions) = match (&a.operators, &a.data) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            let f: OperatorFile = serde_json::from_str(&text)?;
            r.param("operators", path.display().to_string())?;
            let ops = f.operators.iter().map(parse_operator).collect::<Result<Vec<_>>>()?;
            (ops, f.functions)
        }
        (None, Some(path)) => {
            let data = load_csv(path)?;
            r.param("data", path.display().to_string())?;
            let (sb, sw) = scatter_pair(&data)?;
            (vec![sw, sb], vec!["inverse-sqrt".into(), "sqrt".into()])
        }
        (None, None) => {
            return Err(Error::InvalidParameter(
                "give --operators FILE or --data FILE".into(),
            ))
        }
    };
    let names = a.functions.clone().unwrap_or(file_functions);
    if names.len() != operators.len() {
        return Err(Error::InvalidParameter(format!(
            "{} operators but {} functions",
            operators.len(),
            names.len()
        )));
    }
    let functions = names.iter().map(|s| s.parse()).collect::<Result<Vec<SpectralFunction>>>()?;
    r.param("functions", names.clone())?
        .param("angles", format!("{:?}", a.angles).to_lowercase())?
        .param("construction_cost", a.construction_cost)?;
    common_params(&mut r, c)?;

    let mut spec = ChainSpec::new(c.kappa_eff, c.epsilon, c.t);
    if a.angles == AngleChoice::Fixed {
        spec = spec.with_angles(AnglePath::FixedPoint(RotationConfig::default()));
    }
    for (op, f) in operators.into_iter().zip(functions) {
        spec = spec.stage(op, f);
    }
    let oracle = classical_chain_oracle(&spec)?;
    let report = chain_apply(&spec, None)?;
    r.output("quantum_output", matrix_json(report.output.matrix()))?
        .output("classical_output", matrix_json(oracle.matrix()))?
        .metric("trace_distance", trace_distance(&report.output, &oracle)?)?
        .metric("stage_success", &report.stage_success_probabilities)?
        .metric("stage_bounds", &report.stage_bounds)?
        .metric("bounds_hold", report.stage_success_probabilities.iter().zip(&report.stage_bounds).all(|(s, b)| s >= b))?
        .metric("total_success", report.total_success_probability)?
        .metric("theoretical_bound", report.theoretical_bound)?
        .metric("amplified_bound_stage1", report.amplified_bound_stage1)?
        .metric("normalizations", &report.normalizations)?
        .metric("copies_used", &report.copies_used)?
        .metric("complexity_estimate", complexity_estimate(&spec, a.construction_cost)?)?;
    Ok(r)
}

pub fn run_rotate_check(a: &RotateArgs) -> Result<RunReport> {
    let f: SpectralFunction = a.function.parse()?;
    let grid = dyadic_grid(a.kappa_eff, a.grid_bits);
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty λ grid".into()));
    }
    let f_max = grid.iter().map(|&l| f.eval(l).abs()).fold(0.0, f64::max);
    let c = a.c.unwrap_or(0.5 / f_max);
    let cfg = RotationConfig {
        integer_bits: a.integer_bits,
        fraction_bits: a.bits,
        taylor_order: a.taylor_order,
        arcsin_terms: a.arcsin_terms,
        windows_per_octave: a.windows,
    };
    let pipeline = RotationPipeline::new(f, c, a.kappa_eff, cfg)?;
    let mut fixed = Vec::with_capacity(grid.len());
    let mut exact = Vec::with_capacity(grid.len());
    for &l in &grid {
        fixed.push(pipeline.angle(l)?.to_f64());
        exact.push((c * f.eval(l)).asin());
    }
    let max_error = fixed.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let bound = (-(a.bits as f64 - 3.0)).exp2();
    let tail = |terms: usize| (arcsin_series(0.9, terms) - 0.9f64.asin()).abs();

    let mut r = RunReport::new("rotate-check", a.seed);
    r.param("function", f.to_string())?
        .param("c", c)?
        .param("kappa_eff", a.kappa_eff)?
        .param("integer_bits", a.integer_bits)?
        .param("fraction_bits", a.bits)?
        .param("taylor_order", a.taylor_order)?
        .param("arcsin_terms", a.arcsin_terms)?
        .param("windows_per_octave", a.windows)?
        .param("grid_bits", a.grid_bits)?;
    r.output("lambda", &grid)?
        .output("theta_fixed", &fixed)?
        .output("theta_exact", &exact)?
        .metric("max_error", max_error)?
        .metric("error_bound", bound)?
        .metric("within_bound", max_error <= bound)?
        .metric("arcsin_tail_at_0.9", json!({
            "terms": a.arcsin_terms,
            "error": tail(a.arcsin_terms),
            "error_doubled_terms": tail(2 * a.arcsin_terms),
        }))?;
    Ok(r)
}

pub fn run_gen(a: &GenArgs) -> Result<RunReport> {
    let preset: Preset = a.preset.parse()?;
    let data = preset.generate(a.per_class, a.seed)?;
    save_csv(&data, &a.csv)?;
    let mut r = RunReport::new("gen", a.seed);
    r.param("preset", preset.name())?
        .param("per_class", a.per_class)?
        .param("csv", a.csv.display().to_string())?;
    r.output("classes", data.class_names())?
        .output("features", data.feature_names())?
        .metric("samples", data.len())?
        .metric("dimension", data.dim())?;
    Ok(r)
}
