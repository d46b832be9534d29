//! Dense complex Hermitian linear algebra.
//!
//! Everything in the simulator is expressed in terms of two validated wrappers
//! around `DMatrix<Complex64>`:
//!
//! - [`HermitianOperator`]: square, Hermitian within [`HERMITICITY_TOL`]. Inputs
//!   with small floating-point asymmetry are symmetrized on ingest.
//! - [`DensityOperator`]: a Hermitian operator that is also positive semidefinite
//!   with unit trace.
//!
//! Spectral calculus ([`matrix_function`]) filters eigenvalues relative to the
//! largest one: an eigenvalue survives iff `λ / λ_max ≥ 1 / κ_eff`. Filtered
//! eigenvalues contribute nothing, which gives pseudo-inverse semantics for the
//! negative powers.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Elementwise tolerance on `|H_ij - conj(H_ji)|`.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Smallest eigenvalue a density operator may have.
pub const PSD_TOL: f64 = 1e-10;
/// Allowed deviation of a density operator's trace from one.
pub const TRACE_TOL: f64 = 1e-9;

// Slack on the relative filter so that eigenvalues sitting exactly on 1/κ survive rounding.
const FILTER_SLACK: f64 = 1e-12;

#[inline]
pub fn c64(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn max_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5)
}

/// Dense N×N complex Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: CMatrix,
}

impl HermitianOperator {
    /// Validates hermiticity and symmetrizes away residual rounding asymmetry.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidParameter("operator dimension must be at least 1".into()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("operator has non-finite entries".into()));
        }
        let asym = max_asymmetry(&matrix);
        if asym > HERMITICITY_TOL {
            return Err(Error::NonHermitian {
                max_asymmetry: asym,
            });
        }
        Ok(Self {
            matrix: symmetrize(&matrix),
        })
    }

    /// Symmetrizes without the tolerance check. Only for matrices that are Hermitian
    /// by construction (e.g. `X·Y·X†` products) and merely carry rounding noise.
    pub(crate) fn hermitize(matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self {
            matrix: symmetrize(&matrix),
        }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(c64))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let v = DVector::from_iterator(values.len(), values.iter().map(|&x| c64(x)));
        Self {
            matrix: CMatrix::from_diagonal(&v),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim),
        }
    }

    /// Unnormalized outer product `|v⟩⟨v|`.
    pub fn outer(v: &CVector) -> Self {
        Self {
            matrix: v * v.adjoint(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            matrix: &self.matrix * c64(factor),
        }
    }

    pub fn eig(&self) -> EigenSolution {
        eig_hermitian(self)
    }

    /// Real part of the entries; exact for operators built from real data.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }
}

impl fmt::Display for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.matrix)
    }
}

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    base: HermitianOperator,
}

impl DensityOperator {
    pub fn new(base: HermitianOperator) -> Result<Self> {
        let tr = base.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotDensity(format!("trace {tr} differs from 1")));
        }
        let min = base.eig().eigenvalues.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { base })
    }

    /// Skips the spectral check; for states that are densities by construction.
    pub(crate) fn trusted(base: HermitianOperator) -> Self {
        Self { base }
    }

    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(matrix)?)
    }

    /// Divides a PSD operator by its trace.
    pub fn normalized(base: HermitianOperator) -> Result<Self> {
        let tr = base.trace();
        if !(tr > 1e-300) {
            return Err(Error::Degenerate(format!(
                "cannot normalize operator with trace {tr:e}"
            )));
        }
        Self::new(base.scaled(1.0 / tr))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            base: HermitianOperator::identity(dim).scaled(1.0 / dim as f64),
        }
    }

    /// `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure(v: &CVector) -> Result<Self> {
        let n2 = v.norm_squared();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::Degenerate("pure state from a zero vector".into()));
        }
        Ok(Self {
            base: HermitianOperator::hermitize(v * v.adjoint() * c64(1.0 / n2)),
        })
    }

    pub fn pure_real(v: &[f64]) -> Result<Self> {
        Self::pure(&real_vector(v))
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = c64(1.0);
        Self {
            base: HermitianOperator { matrix: m },
        }
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        Self {
            base: HermitianOperator::hermitize(self.matrix().kronecker(other.matrix())),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.base.matrix()
    }

    pub fn as_hermitian(&self) -> &HermitianOperator {
        &self.base
    }

    pub fn into_hermitian(self) -> HermitianOperator {
        self.base
    }

    pub fn purity(&self) -> f64 {
        (self.matrix() * self.matrix()).trace().re
    }

    pub fn eig(&self) -> EigenSolution {
        self.base.eig()
    }
}

pub fn real_vector(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| c64(x)))
}

/// Eigenvalues in descending order with column-aligned orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenSolution {
    pub fn eigenvector(&self, i: usize) -> CVector {
        self.eigenvectors.column(i).into_owned()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let d = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&x| c64(x)),
        );
        &self.eigenvectors * CMatrix::from_diagonal(&d) * self.eigenvectors.adjoint()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Indices of the eigenvalues kept by the relative filter `λ/λ_max ≥ 1/κ_eff`.
    pub fn kept_indices(&self, kappa_eff: f64) -> Vec<usize> {
        let max = self.max_eigenvalue();
        if !(max > 0.0) {
            return Vec::new();
        }
        let threshold = max / kappa_eff * (1.0 - FILTER_SLACK);
        self.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.0 && l >= threshold)
            .map(|(i, _)| i)
            .collect()
    }

    /// Orthogonal projector onto the kept eigenspace.
    pub fn kept_projector(&self, kappa_eff: f64) -> CMatrix {
        let n = self.eigenvectors.nrows();
        let mut p = CMatrix::zeros(n, n);
        for i in self.kept_indices(kappa_eff) {
            let u = self.eigenvectors.column(i);
            p += &u * u.adjoint();
        }
        p
    }
}

/// Full eigendecomposition of a Hermitian operator.
pub fn eig_hermitian(h: &HermitianOperator) -> EigenSolution {
    let n = h.dim();
    let se = nalgebra::SymmetricEigen::new(h.matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let mut vecs = CMatrix::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vals.push(se.eigenvalues[src]);
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    EigenSolution {
        eigenvalues: vals,
        eigenvectors: vecs,
    }
}

/// Functions applied to an operator through its spectrum.
///
/// All variants are power laws `x^r`, so `f(x/s) = s^{-r} f(x)`; the simulator
/// relies on this homogeneity when it rescales spectra into the phase window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectralFunction {
    Inverse,
    Sqrt,
    InverseSqrt,
    Identity,
    Power(f64),
}

impl SpectralFunction {
    pub fn exponent(&self) -> f64 {
        match *self {
            SpectralFunction::Inverse => -1.0,
            SpectralFunction::Sqrt => 0.5,
            SpectralFunction::InverseSqrt => -0.5,
            SpectralFunction::Identity => 1.0,
            SpectralFunction::Power(r) => r,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SpectralFunction::Inverse => 1.0 / x,
            SpectralFunction::Sqrt => x.sqrt(),
            SpectralFunction::InverseSqrt => 1.0 / x.sqrt(),
            SpectralFunction::Identity => x,
            SpectralFunction::Power(r) => x.powf(r),
        }
    }

    /// Taylor coefficients `f^{(i)}(x0) / i!` for `i = 0..=order`.
    pub fn taylor_coefficients(&self, x0: f64, order: usize) -> Vec<f64> {
        // generalized binomial: (x0 + h)^r = Σ binom(r, i) x0^{r-i} h^i
        let r = self.exponent();
        let mut out = Vec::with_capacity(order + 1);
        let mut binom = 1.0;
        for i in 0..=order {
            if i > 0 {
                binom *= (r - (i as f64 - 1.0)) / i as f64;
            }
            out.push(binom * x0.powf(r - i as f64));
        }
        out
    }
}

impl fmt::Display for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralFunction::Inverse => write!(f, "inverse"),
            SpectralFunction::Sqrt => write!(f, "sqrt"),
            SpectralFunction::InverseSqrt => write!(f, "inverse-sqrt"),
            SpectralFunction::Identity => write!(f, "identity"),
            SpectralFunction::Power(r) => write!(f, "power({r})"),
        }
    }
}

impl FromStr for SpectralFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "inverse" => Ok(SpectralFunction::Inverse),
            "sqrt" => Ok(SpectralFunction::Sqrt),
            "inverse-sqrt" | "inv-sqrt" => Ok(SpectralFunction::InverseSqrt),
            "identity" => Ok(SpectralFunction::Identity),
            _ => {
                let inner = s
                    .strip_prefix("power(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown function `{s}`")))?;
                let r: f64 = inner
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad exponent in `{s}`")))?;
                Ok(SpectralFunction::Power(r))
            }
        }
    }
}

/// `Σ_l f(λ_l) |u_l⟩⟨u_l|` over the eigenvalues kept by the relative `κ_eff` filter.
pub fn matrix_function(
    h: &HermitianOperator,
    f: SpectralFunction,
    kappa_eff: f64,
) -> Result<HermitianOperator> {
    if !(kappa_eff >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa_eff must be ≥ 1, got {kappa_eff}"
        )));
    }
    let eig = h.eig();
    let max = eig.max_eigenvalue();
    let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -PSD_TOL * max.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "matrix function needs a PSD operator, smallest eigenvalue {min:e}"
        )));
    }
    let kept = eig.kept_indices(kappa_eff);
    if kept.is_empty() {
        return Err(Error::RankCollapse);
    }
    let n = h.dim();
    let mut out = CMatrix::zeros(n, n);
    for i in kept {
        let u = eig.eigenvectors.column(i);
        out += &u * u.adjoint() * c64(f.eval(eig.eigenvalues[i]));
    }
    Ok(HermitianOperator::hermitize(out))
}

/// Which tensor factor to trace away.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

pub(crate) fn partial_trace_matrix(m: &CMatrix, d1: usize, d2: usize, over: Subsystem) -> CMatrix {
    match over {
        Subsystem::First => CMatrix::from_fn(d2, d2, |a, b| {
            (0..d1).map(|i| m[(i * d2 + a, i * d2 + b)]).sum()
        }),
        Subsystem::Second => CMatrix::from_fn(d1, d1, |a, b| {
            (0..d2).map(|j| m[(a * d2 + j, b * d2 + j)]).sum()
        }),
    }
}

/// Reduced state of a bipartite operator on `C^{d1} ⊗ C^{d2}`.
pub fn partial_trace(
    rho: &DensityOperator,
    dims: (usize, usize),
    over: Subsystem,
) -> Result<DensityOperator> {
    let (d1, d2) = dims;
    if d1 * d2 != rho.dim() || d1 == 0 || d2 == 0 {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: d1 * d2,
        });
    }
    let reduced = partial_trace_matrix(rho.matrix(), d1, d2, over);
    DensityOperator::new(HermitianOperator::hermitize(reduced))
}

/// `½‖ρ − σ‖₁` from the eigenvalues of the difference.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let diff = HermitianOperator::hermitize(rho.matrix() - sigma.matrix());
    let norm1: f64 = diff.eig().eigenvalues.iter().map(|l| l.abs()).sum();
    Ok((0.5 * norm1).clamp(0.0, 1.0))
}

/// Dominant eigenvector of a Hermitian operator, with its global phase chosen so
/// that the largest-modulus component is real and positive.
pub fn top_eigenvector(h: &HermitianOperator) -> (f64, CVector) {
    let eig = h.eig();
    let v = eig.eigenvector(0);
    (eig.max_eigenvalue(), fix_phase(v))
}

pub fn fix_phase(v: CVector) -> CVector {
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(c64(1.0));
    if pivot.norm() == 0.0 {
        return v;
    }
    let phase = pivot.conj() / pivot.norm();
    v * phase
}
