//! Density-matrix simulation primitives.
//!
//! Joint states are kept as `ρ = F·K·F†` with a tall factor `F` whenever that is
//! cheaper than the dense matrix: phase estimation on an `N`-dimensional system
//! produces a rank-`N` state on a `T·N`-dimensional space, and every later
//! operation (controlled rotations, uncomputation, postselection) acts on the
//! `N` columns of `F` instead of on a `(T·N)²` matrix.

use std::f64::consts::PI;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::Binomial;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, fix_phase, top_eigenvector, CMatrix, CVector, DensityOperator, HermitianOperator, C64,
};
use crate::random::rng;
use crate::register::{PhaseEncoding, PhaseRegister, Window};

pub const EIGENVALUE: &str = "eigenvalue";
pub const SYSTEM: &str = "system";
pub const ANCILLA: &str = "ancilla";

/// Below this a postselection branch is treated as vanishing.
pub const VANISHING_PROBABILITY: f64 = 1e-12;

/// Largest joint dimension the dense simulated phase-estimation path accepts.
pub const MAX_SIMULATED_DIM: usize = 2048;

/// Named tensor factors and a density operator on their product.
///
/// Registers are ordered most significant first: the basis index of
/// `|r₀⟩|r₁⟩…` is `Σ_i r_i · Π_{j>i} d_j`.
#[derive(Clone, Debug)]
pub struct RegisteredState {
    layout: Vec<(String, usize)>,
    // None: `core` is the full density matrix.
    factors: Option<CMatrix>,
    core: CMatrix,
    encoding: Option<PhaseEncoding>,
}

impl RegisteredState {
    pub fn new(layout: Vec<(String, usize)>, state: DensityOperator) -> Result<Self> {
        let total: usize = layout.iter().map(|(_, d)| d).product();
        if total != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: total,
            });
        }
        check_names(&layout)?;
        Ok(Self {
            layout,
            factors: None,
            core: state.matrix().clone(),
            encoding: None,
        })
    }

    /// A single-register state.
    pub fn single(name: &str, state: DensityOperator) -> Self {
        Self {
            layout: vec![(name.to_string(), state.dim())],
            factors: None,
            core: state.matrix().clone(),
            encoding: None,
        }
    }

    fn factored(layout: Vec<(String, usize)>, factors: CMatrix, core: CMatrix) -> Self {
        Self {
            layout,
            factors: Some(factors),
            core,
            encoding: None,
        }
    }

    pub fn layout(&self) -> &[(String, usize)] {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.iter().map(|(_, d)| d).product()
    }

    /// How phases on the eigenvalue register map back to eigenvalues, when known.
    pub fn encoding(&self) -> Option<&PhaseEncoding> {
        self.encoding.as_ref()
    }

    pub fn register_dim(&self, name: &str) -> Result<usize> {
        Ok(self.layout[self.position(name)?].1)
    }

    fn position(&self, name: &str) -> Result<usize> {
        self.layout
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::InvalidParameter(format!("no register named `{name}`")))
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.layout.len()];
        for i in (0..self.layout.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.layout[i + 1].1;
        }
        s
    }

    /// Number of columns of the factor, or the full dimension for dense states.
    pub fn rank_bound(&self) -> usize {
        self.factors.as_ref().map_or(self.core.nrows(), |f| f.ncols())
    }

    /// Materializes the joint density matrix.
    pub fn state(&self) -> DensityOperator {
        let m = match &self.factors {
            Some(f) => f * &self.core * f.adjoint(),
            None => self.core.clone(),
        };
        DensityOperator::trusted(HermitianOperator::hermitize(m))
    }

    fn diagonal(&self) -> Vec<f64> {
        match &self.factors {
            Some(f) => {
                let g = f * &self.core;
                (0..f.nrows())
                    .map(|i| {
                        (0..f.ncols())
                            .map(|c| (g[(i, c)] * f[(i, c)].conj()).re)
                            .sum()
                    })
                    .collect()
            }
            None => (0..self.core.nrows()).map(|i| self.core[(i, i)].re).collect(),
        }
    }

    /// Outcome distribution of a computational-basis measurement of one register.
    pub fn probabilities(&self, name: &str) -> Result<Vec<f64>> {
        let pos = self.position(name)?;
        let d = self.layout[pos].1;
        let stride = self.strides()[pos];
        let mut p = vec![0.0; d];
        for (i, v) in self.diagonal().into_iter().enumerate() {
            p[(i / stride) % d] += v;
        }
        Ok(p.into_iter().map(|x| x.max(0.0)).collect())
    }

    fn rows_with(&self, pos: usize, outcome: usize) -> Vec<usize> {
        let d = self.layout[pos].1;
        let stride = self.strides()[pos];
        (0..self.dim())
            .filter(|i| (i / stride) % d == outcome)
            .collect()
    }

    fn check_outcome(&self, pos: usize, outcome: usize) -> Result<()> {
        if outcome >= self.layout[pos].1 {
            return Err(Error::InvalidParameter(format!(
                "outcome {outcome} outside register `{}` of dimension {}",
                self.layout[pos].0, self.layout[pos].1
            )));
        }
        Ok(())
    }

    /// Measures `name`, keeps outcome `outcome` and removes the register.
    /// Returns the renormalized conditional state and the outcome probability.
    pub fn condition(&self, name: &str, outcome: usize) -> Result<(Self, f64)> {
        let pos = self.position(name)?;
        self.check_outcome(pos, outcome)?;
        let rows = self.rows_with(pos, outcome);
        let mut layout = self.layout.clone();
        layout.remove(pos);
        let (factors, core, prob) = match &self.factors {
            Some(f) => {
                let sub = f.select_rows(rows.iter());
                let gram = sub.adjoint() * &sub;
                let prob = (&self.core * gram).trace().re;
                (Some(sub), self.core.clone(), prob)
            }
            None => {
                let sub = self.core.select_rows(rows.iter()).select_columns(rows.iter());
                let prob = sub.trace().re;
                (None, sub, prob)
            }
        };
        if !(prob >= VANISHING_PROBABILITY) {
            return Err(Error::VanishingBranch { probability: prob });
        }
        let encoding = if name == EIGENVALUE { None } else { self.encoding };
        Ok((
            Self {
                layout,
                factors,
                core: core * c64(1.0 / prob),
                encoding,
            },
            prob,
        ))
    }

    /// Like [`condition`](Self::condition) but keeps the measured register in `|outcome⟩`.
    pub fn project(&self, name: &str, outcome: usize) -> Result<(Self, f64)> {
        let pos = self.position(name)?;
        self.check_outcome(pos, outcome)?;
        let d = self.layout[pos].1;
        let stride = self.strides()[pos];
        let keep = |i: usize| (i / stride) % d == outcome;
        let mut out = self.clone();
        let prob = match &mut out.factors {
            Some(f) => {
                for i in 0..f.nrows() {
                    if !keep(i) {
                        f.row_mut(i).fill(c64(0.0));
                    }
                }
                let gram = f.adjoint() * &*f;
                (&out.core * gram).trace().re
            }
            None => {
                let n = out.core.nrows();
                for i in 0..n {
                    if !keep(i) {
                        out.core.row_mut(i).fill(c64(0.0));
                        out.core.column_mut(i).fill(c64(0.0));
                    }
                }
                out.core.trace().re
            }
        };
        if !(prob >= VANISHING_PROBABILITY) {
            return Err(Error::VanishingBranch { probability: prob });
        }
        out.core *= c64(1.0 / prob);
        Ok((out, prob))
    }

    /// Partial trace over one register.
    pub fn trace_out(&self, name: &str) -> Result<Self> {
        let pos = self.position(name)?;
        let d = self.layout[pos].1;
        let stride = self.strides()[pos];
        let rest = self.dim() / d;
        // row of (register value v, remaining index j)
        let row = |v: usize, j: usize| (j / stride) * stride * d + v * stride + j % stride;
        let mut layout = self.layout.clone();
        layout.remove(pos);
        let encoding = if name == EIGENVALUE { None } else { self.encoding };
        let out = match &self.factors {
            Some(f) => {
                let r = f.ncols();
                let blocks: Vec<CMatrix> = (0..d)
                    .map(|v| CMatrix::from_fn(rest, r, |j, c| f[(row(v, j), c)]))
                    .collect();
                if rest <= r * d {
                    let mut m = CMatrix::zeros(rest, rest);
                    for b in &blocks {
                        m += b * &self.core * b.adjoint();
                    }
                    Self {
                        layout,
                        factors: None,
                        core: m,
                        encoding,
                    }
                } else {
                    let mut stacked = CMatrix::zeros(rest, r * d);
                    let mut core = CMatrix::zeros(r * d, r * d);
                    for (v, b) in blocks.iter().enumerate() {
                        stacked.view_mut((0, v * r), (rest, r)).copy_from(b);
                        core.view_mut((v * r, v * r), (r, r)).copy_from(&self.core);
                    }
                    Self {
                        layout,
                        factors: Some(stacked),
                        core,
                        encoding,
                    }
                }
            }
            None => {
                let m = CMatrix::from_fn(rest, rest, |a, b| {
                    (0..d).map(|v| self.core[(row(v, a), row(v, b))]).sum()
                });
                Self {
                    layout,
                    factors: None,
                    core: m,
                    encoding,
                }
            }
        };
        Ok(out)
    }

    /// Reduced state of one register.
    pub fn reduced(&self, name: &str) -> Result<DensityOperator> {
        let pos = self.position(name)?;
        let d = self.layout[pos].1;
        let stride = self.strides()[pos];
        let rest = self.dim() / d;
        let row = |v: usize, j: usize| (j / stride) * stride * d + v * stride + j % stride;
        let m = match &self.factors {
            Some(f) => {
                let g = f * &self.core;
                CMatrix::from_fn(d, d, |v, w| {
                    let mut acc = c64(0.0);
                    for j in 0..rest {
                        let (a, b) = (row(v, j), row(w, j));
                        for c in 0..f.ncols() {
                            acc += g[(a, c)] * f[(b, c)].conj();
                        }
                    }
                    acc
                })
            }
            None => CMatrix::from_fn(d, d, |v, w| {
                (0..rest).map(|j| self.core[(row(v, j), row(w, j))]).sum()
            }),
        };
        Ok(DensityOperator::trusted(HermitianOperator::hermitize(m)))
    }

    /// Adds a new least-significant register prepared in `|index⟩`.
    pub fn append_register(&self, name: &str, dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} outside register of dimension {dim}"
            )));
        }
        let mut layout = self.layout.clone();
        layout.push((name.to_string(), dim));
        check_names(&layout)?;
        let n = self.dim();
        let (factors, core) = match &self.factors {
            Some(f) => {
                let mut g = CMatrix::zeros(n * dim, f.ncols());
                for i in 0..n {
                    g.row_mut(i * dim + index).copy_from(&f.row(i));
                }
                (Some(g), self.core.clone())
            }
            None => {
                let mut g = CMatrix::zeros(n * dim, n * dim);
                for i in 0..n {
                    for j in 0..n {
                        g[(i * dim + index, j * dim + index)] = self.core[(i, j)];
                    }
                }
                (None, g)
            }
        };
        Ok(Self {
            layout,
            factors,
            core,
            encoding: self.encoding,
        })
    }

    /// Applies a unitary acting on the listed registers (identity elsewhere).
    ///
    /// `op` receives the amplitudes of the listed registers, first register most
    /// significant, for one fixed assignment of all the other registers.
    pub fn apply_on<F>(&mut self, names: &[&str], op: F) -> Result<()>
    where
        F: Fn(&mut [C64]),
    {
        let positions = names
            .iter()
            .map(|n| self.position(n))
            .collect::<Result<Vec<_>>>()?;
        let strides = self.strides();
        let dims: Vec<usize> = positions.iter().map(|&p| self.layout[p].1).collect();
        let sub: usize = dims.iter().product();
        let mut offsets = vec![0usize; sub];
        for (s, off) in offsets.iter_mut().enumerate() {
            let mut rem = s;
            for k in (0..positions.len()).rev() {
                *off += (rem % dims[k]) * strides[positions[k]];
                rem /= dims[k];
            }
        }
        let bases: Vec<usize> = (0..self.dim())
            .filter(|&i| {
                positions
                    .iter()
                    .all(|&p| (i / strides[p]) % self.layout[p].1 == 0)
            })
            .collect();
        let apply = |m: &mut CMatrix| {
            let mut tmp = vec![c64(0.0); sub];
            for mut col in m.column_iter_mut() {
                for &b in &bases {
                    for (t, &o) in tmp.iter_mut().zip(&offsets) {
                        *t = col[b + o];
                    }
                    op(&mut tmp);
                    for (t, &o) in tmp.iter().zip(&offsets) {
                        col[b + o] = *t;
                    }
                }
            }
        };
        match &mut self.factors {
            Some(f) => apply(f),
            None => {
                // U K U† = (U (U K)†)† for Hermitian K
                apply(&mut self.core);
                let mut m = self.core.adjoint();
                apply(&mut m);
                self.core = m.adjoint();
            }
        }
        Ok(())
    }

    /// Applies `gate(v)` to `target` whenever `control` holds `|v⟩`.
    pub fn apply_controlled<G>(&mut self, control: &str, target: &str, gate: G) -> Result<()>
    where
        G: Fn(usize) -> CMatrix,
    {
        let dc = self.register_dim(control)?;
        let dt = self.register_dim(target)?;
        let gates: Vec<CMatrix> = (0..dc).map(&gate).collect();
        if let Some(g) = gates.iter().find(|g| g.nrows() != dt || g.ncols() != dt) {
            return Err(Error::DimensionMismatch {
                expected: dt,
                found: g.nrows(),
            });
        }
        self.apply_on(&[control, target], |amps| {
            for (v, g) in gates.iter().enumerate() {
                let block = CVector::from_column_slice(&amps[v * dt..(v + 1) * dt]);
                let out = g * block;
                amps[v * dt..(v + 1) * dt].copy_from_slice(out.as_slice());
            }
        })
    }
}

fn check_names(layout: &[(String, usize)]) -> Result<()> {
    for (i, (n, d)) in layout.iter().enumerate() {
        if *d == 0 {
            return Err(Error::InvalidParameter(format!("register `{n}` has dimension 0")));
        }
        if layout[..i].iter().any(|(m, _)| m == n) {
            return Err(Error::InvalidParameter(format!("duplicate register `{n}`")));
        }
    }
    Ok(())
}

fn swap_operator(n: usize) -> CMatrix {
    let mut s = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            s[(i * n + j, j * n + i)] = c64(1.0);
        }
    }
    s
}

/// One swap-interaction slice on an arbitrary operator `X` of the target.
///
/// `left`/`right` select whether `e^{−iSΔt}` acts from the left and `e^{+iSΔt}`
/// from the right; a controlled slice acts on one side only for the
/// off-diagonal blocks of its control.
fn swap_slice(generator: &CMatrix, x: &CMatrix, dt: f64, left: bool, right: bool) -> CMatrix {
    let n = generator.nrows();
    let s = swap_operator(n);
    let id = CMatrix::identity(n * n, n * n);
    let u = &id * c64(dt.cos()) - &s * C64::new(0.0, dt.sin());
    let mut joint = generator.kronecker(x);
    if left {
        joint = &u * joint;
    }
    if right {
        joint *= u.adjoint();
    }
    crate::linalg::partial_trace_matrix(&joint, n, n, crate::linalg::Subsystem::First)
}

/// `Tr₁[e^{−iSΔt}(σ⊗ρ)e^{iSΔt}]`, which agrees with `e^{−iσΔt}ρe^{iσΔt}` to first order in `Δt`.
pub fn density_exponentiation_step(
    generator: &DensityOperator,
    target: &DensityOperator,
    dt: f64,
) -> Result<DensityOperator> {
    if generator.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            found: target.dim(),
        });
    }
    if !(dt.abs() <= 1.0) {
        return Err(Error::InvalidParameter(format!("|Δt| = {} exceeds 1", dt.abs())));
    }
    let out = swap_slice(generator.matrix(), target.matrix(), dt, true, true);
    Ok(DensityOperator::trusted(HermitianOperator::hermitize(out)))
}

/// Which realization of the controlled evolutions phase estimation uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpePath {
    /// Eigendecomposition of the generator; each eigenvector gets its ideal register state.
    Exact,
    /// Controlled density-exponentiation slices: `steps` slices per application of the
    /// base evolution, `steps·2^j` for register bit `j`.
    Simulated { steps: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseEstimation {
    pub encoding: PhaseEncoding,
    pub path: QpePath,
}

impl PhaseEstimation {
    /// Textbook configuration: uniform window, eigenvalue read directly as a `t`-bit fraction.
    pub fn new(bits: u32) -> Self {
        Self {
            encoding: PhaseEncoding {
                bits,
                window: Window::Uniform,
                scale: 1.0,
                offset: 0.0,
            },
            path: QpePath::Exact,
        }
    }

    /// Sine window with the spectrum `[0, λ_max]` mapped into `[δ₀, 1 − δ₀]`,
    /// leaving a guard band on both sides so leakage does not wrap around.
    pub fn for_spectrum(bits: u32, lambda_max: f64) -> Self {
        let dim = (1u64 << bits.min(63)) as f64;
        let offset = (1.0 / 16.0f64).max(2.0 / dim);
        Self {
            encoding: PhaseEncoding {
                bits,
                window: Window::Sine,
                scale: (1.0 - 2.0 * offset) / lambda_max,
                offset,
            },
            path: QpePath::Exact,
        }
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.encoding.window = window;
        self
    }

    pub fn simulated(mut self, steps: usize) -> Self {
        self.path = QpePath::Simulated { steps };
        self
    }
}

/// Slice count for an evolution time `κ/ε` cut into slices of `Δt = 0.05`.
pub fn default_steps(kappa_eff: f64, epsilon: f64) -> usize {
    ((kappa_eff / epsilon) / 0.05).ceil() as usize
}

/// Phase estimation of `generator` on `input`, returning the joint
/// `eigenvalue ⊗ system` state before any measurement.
pub fn phase_estimation(
    generator: &DensityOperator,
    input: &DensityOperator,
    cfg: &PhaseEstimation,
) -> Result<RegisteredState> {
    if generator.dim() != input.dim() {
        return Err(Error::DimensionMismatch {
            expected: generator.dim(),
            found: input.dim(),
        });
    }
    let register = PhaseRegister::new(cfg.encoding)?;
    let eig = generator.eig();
    cfg.encoding.check_spectrum(&eig.eigenvalues)?;
    let mut state = match cfg.path {
        QpePath::Exact => qpe_exact(&register, &eig, input),
        QpePath::Simulated { steps } => qpe_simulated(&register, generator, input, steps)?,
    };
    state.encoding = Some(cfg.encoding);
    Ok(state)
}

fn qpe_exact(
    register: &PhaseRegister,
    eig: &crate::linalg::EigenSolution,
    input: &DensityOperator,
) -> RegisteredState {
    let n = input.dim();
    let t = register.dim();
    let u = &eig.eigenvectors;
    let core = u.adjoint() * input.matrix() * u;
    let mut f = CMatrix::zeros(t * n, n);
    for (l, &lambda) in eig.eigenvalues.iter().enumerate() {
        let phi = register.amplitudes(lambda);
        for (x, p) in phi.iter().enumerate() {
            for a in 0..n {
                f[(x * n + a, l)] = p * u[(a, l)];
            }
        }
    }
    RegisteredState::factored(
        vec![(EIGENVALUE.into(), t), (SYSTEM.into(), n)],
        f,
        core,
    )
}

// Column-major vectorization: vec(X)[a + n·b] = X[a, b].
fn superoperator<F: Fn(&CMatrix) -> CMatrix>(n: usize, map: F) -> CMatrix {
    let mut m = CMatrix::zeros(n * n, n * n);
    for b in 0..n {
        for a in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(a, b)] = c64(1.0);
            let out = map(&e);
            m.set_column(a + n * b, &CVector::from_column_slice(out.as_slice()));
        }
    }
    m
}

fn matrix_power(m: &CMatrix, mut e: usize) -> CMatrix {
    let n = m.nrows();
    let mut base = m.clone();
    let mut acc = CMatrix::identity(n, n);
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

fn qpe_simulated(
    register: &PhaseRegister,
    generator: &DensityOperator,
    input: &DensityOperator,
    steps: usize,
) -> Result<RegisteredState> {
    let n = input.dim();
    let t = register.dim();
    let enc = *register.encoding();
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    if t * n > MAX_SIMULATED_DIM {
        return Err(Error::InvalidParameter(format!(
            "simulated phase estimation limited to joint dimension {MAX_SIMULATED_DIM}, got {}",
            t * n
        )));
    }
    // each slice realizes e^{+2πi·scale·σ/steps}
    let dt = -2.0 * PI * enc.scale / steps as f64;
    if dt.abs() > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "slice |Δt| = {} exceeds 1; increase steps",
            dt.abs()
        )));
    }
    let sigma = generator.matrix();
    let id = CMatrix::identity(n, n);
    let left1 = swap_slice(sigma, &id, dt, true, false);
    let right1 = swap_slice(sigma, &id, dt, false, true);
    let both1 = superoperator(n, |x| swap_slice(sigma, x, dt, true, true));

    let bits = enc.bits as usize;
    let mut left = Vec::with_capacity(bits);
    let mut right = Vec::with_capacity(bits);
    let mut both = Vec::with_capacity(bits);
    let (mut l, mut r, mut b) = (
        matrix_power(&left1, steps),
        matrix_power(&right1, steps),
        matrix_power(&both1, steps),
    );
    for j in 0..bits {
        if j > 0 {
            l = &l * &l;
            r = &r * &r;
            b = &b * &b;
        }
        left.push(l.clone());
        right.push(r.clone());
        both.push(b.clone());
    }

    let psi0 = register.window_state();
    let rho = input.matrix();
    let mut joint = CMatrix::zeros(t * n, t * n);
    for y in 0..t {
        for yp in y..t {
            let mut x = rho * c64(psi0[y] * psi0[yp]);
            for j in 0..bits {
                match ((y >> j) & 1, (yp >> j) & 1) {
                    (0, 0) => {}
                    (1, 0) => x = &left[j] * x,
                    (0, 1) => x *= &right[j],
                    _ => {
                        let v = &both[j] * CVector::from_column_slice(x.as_slice());
                        x = CMatrix::from_column_slice(n, n, v.as_slice());
                    }
                }
            }
            // controlled global phase e^{2πi·offset} per unit of the control value
            let arg = ((y as f64 - yp as f64) * enc.offset).fract();
            x *= C64::from_polar(1.0, 2.0 * PI * arg);
            joint.view_mut((y * n, yp * n), (n, n)).copy_from(&x);
            if yp != y {
                joint
                    .view_mut((yp * n, y * n), (n, n))
                    .copy_from(&x.adjoint());
            }
        }
    }
    let mut state = RegisteredState::new(
        vec![(EIGENVALUE.into(), t), (SYSTEM.into(), n)],
        DensityOperator::trusted(HermitianOperator::hermitize(joint)),
    )?;
    state.apply_on(&[EIGENVALUE], |amps| register.inverse_qft(amps))?;
    Ok(state)
}

/// One distinct eigenvalue-register outcome from [`sample_eigenpairs`].
#[derive(Clone, Debug)]
pub struct EigenpairSample {
    pub register_value: usize,
    pub eigenvalue: f64,
    /// Dominant eigenvector of the post-measurement system state.
    pub eigenvector: CVector,
    pub count: usize,
    pub frequency: f64,
    pub state: DensityOperator,
}

/// Samples the eigenvalue register `draws` times and reports every distinct outcome,
/// ordered by decreasing count and then by register value.
pub fn sample_eigenpairs(
    joint: &RegisteredState,
    draws: usize,
    seed: u64,
) -> Result<Vec<EigenpairSample>> {
    if draws == 0 {
        return Err(Error::InvalidParameter("draws must be positive".into()));
    }
    let probs = joint.probabilities(EIGENVALUE)?;
    let dist = WeightedIndex::new(&probs)
        .map_err(|e| Error::Numerical(format!("register distribution: {e}")))?;
    let mut r = rng(seed);
    let mut counts = vec![0usize; probs.len()];
    for _ in 0..draws {
        counts[dist.sample(&mut r)] += 1;
    }
    let t = probs.len();
    let mut out = Vec::new();
    for (x, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let (cond, _) = joint.condition(EIGENVALUE, x)?;
        let state = cond.reduced(SYSTEM)?;
        let (_, v) = top_eigenvector(state.as_hermitian());
        let eigenvalue = joint
            .encoding()
            .map_or(x as f64 / t as f64, |e| e.estimate(x));
        out.push(EigenpairSample {
            register_value: x,
            eigenvalue,
            eigenvector: fix_phase(v),
            count,
            frequency: count as f64 / draws as f64,
            state,
        });
    }
    out.sort_by(|a, b| b.count.cmp(&a.count).then(a.register_value.cmp(&b.register_value)));
    Ok(out)
}

/// Estimate from repeated single-qubit measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotResult {
    pub estimate: f64,
    pub shots: u64,
    pub standard_error: f64,
    /// Bound on the systematic error of the estimator; zero for unbiased estimators.
    pub bias_bound: f64,
    /// Exact probability of the accepting outcome.
    pub acceptance_probability: f64,
}

const NORM_TOL: f64 = 1e-9;

fn check_pair(a: &CVector, b: &CVector) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    for v in [a, b] {
        let n = v.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "input state has norm {n}, expected 1"
            )));
        }
    }
    Ok(())
}

fn hadamard_on_first(psi: &mut CVector) {
    let half = psi.len() / 2;
    let h = 1.0 / 2f64.sqrt();
    for i in 0..half {
        let (p, q) = (psi[i], psi[half + i]);
        psi[i] = (p + q) * h;
        psi[half + i] = (p - q) * h;
    }
}

fn measure(p0: f64, shots: u64, seed: u64) -> Result<(u64, f64)> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be positive".into()));
    }
    let p0 = p0.clamp(0.0, 1.0);
    let bin = Binomial::new(shots, p0).map_err(|e| Error::Numerical(e.to_string()))?;
    let k = bin.sample(&mut rng(seed));
    // add-one smoothing keeps the error bar nonzero at the boundary
    let smoothed = (k as f64 + 1.0) / (shots as f64 + 2.0);
    Ok((k, (smoothed * (1.0 - smoothed) / shots as f64).sqrt()))
}

/// Swap test: `|0⟩|a⟩|b⟩ → H, controlled-SWAP, H`, accept on ancilla `0`.
/// Estimates `|⟨a|b⟩|² = 2·P(0) − 1`.
pub fn swap_test(a: &CVector, b: &CVector, shots: u64, seed: u64) -> Result<ShotResult> {
    check_pair(a, b)?;
    let d = a.len();
    let mut psi = CVector::zeros(2 * d * d);
    for i in 0..d {
        for j in 0..d {
            psi[i * d + j] = a[i] * b[j];
        }
    }
    hadamard_on_first(&mut psi);
    let off = d * d;
    for i in 0..d {
        for j in (i + 1)..d {
            let (p, q) = (off + i * d + j, off + j * d + i);
            let tmp = psi[p];
            psi[p] = psi[q];
            psi[q] = tmp;
        }
    }
    hadamard_on_first(&mut psi);
    let p0: f64 = psi.rows(0, off).norm_squared();
    let (k, se) = measure(p0, shots, seed)?;
    Ok(ShotResult {
        estimate: 2.0 * k as f64 / shots as f64 - 1.0,
        shots,
        standard_error: 2.0 * se,
        bias_bound: 0.0,
        acceptance_probability: p0,
    })
}

/// Hadamard-test interference of `(|0⟩|a⟩ + |1⟩|b⟩)/√2`; `P(0) = (1 + Re⟨a|b⟩)/2`.
pub fn overlap_test_signed(a: &CVector, b: &CVector, shots: u64, seed: u64) -> Result<ShotResult> {
    check_pair(a, b)?;
    let d = a.len();
    let mut psi = CVector::zeros(2 * d);
    let h = 1.0 / 2f64.sqrt();
    psi.rows_mut(0, d).copy_from(&(a * c64(h)));
    psi.rows_mut(d, d).copy_from(&(b * c64(h)));
    hadamard_on_first(&mut psi);
    let p0: f64 = psi.rows(0, d).norm_squared();
    let (k, se) = measure(p0, shots, seed)?;
    Ok(ShotResult {
        estimate: 2.0 * k as f64 / shots as f64 - 1.0,
        shots,
        standard_error: 2.0 * se,
        bias_bound: 0.0,
        acceptance_probability: p0,
    })
}

/// Projects `register` onto `|outcome⟩` and renormalizes; the register stays in the layout.
pub fn postselect_ancilla(
    joint: &RegisteredState,
    register: &str,
    outcome: usize,
) -> Result<(RegisteredState, f64)> {
    joint.project(register, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, trace_distance};
    use crate::random::{density_with_spectrum, random_density, random_unit_complex};

    fn exact_conjugation(sigma: &DensityOperator, rho: &DensityOperator, dt: f64) -> CMatrix {
        let e = sigma.eig();
        let phases = CVector::from_iterator(
            e.eigenvalues.len(),
            e.eigenvalues.iter().map(|l| C64::from_polar(1.0, -l * dt)),
        );
        let u = &e.eigenvectors * CMatrix::from_diagonal(&phases) * e.eigenvectors.adjoint();
        &u * rho.matrix() * u.adjoint()
    }

    #[test]
    fn exponentiation_step_trivial_cases() {
        let rho = random_density(3, 5.0, &mut rng(1));
        let mixed = DensityOperator::maximally_mixed(3);
        let out = density_exponentiation_step(&mixed, &rho, 1e-7).unwrap();
        assert!(max_abs(&(out.matrix() - rho.matrix())) < 1e-12);
        // at finite Δt the swap interaction mixes in s²(σ − ρ)
        let s2 = 0.3f64.sin().powi(2);
        let out = density_exponentiation_step(&mixed, &rho, 0.3).unwrap();
        let want = rho.matrix() * c64(1.0 - s2) + CMatrix::identity(3, 3) * c64(s2 / 3.0);
        assert!(max_abs(&(out.matrix() - want)) < 1e-12);

        let a = DensityOperator::new(HermitianOperator::diagonal(&[0.7, 0.3])).unwrap();
        let b = DensityOperator::new(HermitianOperator::diagonal(&[0.7, 0.3])).unwrap();
        let out = density_exponentiation_step(&a, &b, 0.2).unwrap();
        assert!(max_abs(&(out.matrix() - b.matrix())) < 1e-12);
        assert!(density_exponentiation_step(&a, &rho, 0.1).is_err());
        assert!(density_exponentiation_step(&a, &b, 1.5).is_err());
    }

    #[test]
    fn exponentiation_step_matches_closed_form() {
        let sigma = random_density(3, 5.0, &mut rng(2));
        let rho = random_density(3, 5.0, &mut rng(3));
        let dt = 0.37;
        let out = density_exponentiation_step(&sigma, &rho, dt).unwrap();
        let (c, s) = (dt.cos(), dt.sin());
        let (sm, rm) = (sigma.matrix(), rho.matrix());
        let want = rm * c64(c * c) + sm * c64(s * s)
            - (sm * rm - rm * sm) * C64::new(0.0, c * s);
        assert!(max_abs(&(out.matrix() - want)) < 1e-12);
    }

    #[test]
    fn exponentiation_step_second_order() {
        let plus = DensityOperator::pure_real(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]).unwrap();
        let zero = DensityOperator::basis_state(2, 0);
        let err = |dt: f64| {
            let got = density_exponentiation_step(&plus, &zero, dt).unwrap();
            max_abs(&(got.matrix() - exact_conjugation(&plus, &zero, dt)))
        };
        let (e1, e2) = (err(0.01), err(0.005));
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
        assert!(e1 < 1e-3);
    }

    #[test]
    fn qpe_representable_eigenvalue() {
        let gen = DensityOperator::new(HermitianOperator::diagonal(&[0.25, 0.75])).unwrap();
        let input = DensityOperator::basis_state(2, 1);
        let joint = phase_estimation(&gen, &input, &PhaseEstimation::new(2)).unwrap();
        let p = joint.probabilities(EIGENVALUE).unwrap();
        assert!((p[3] - 1.0).abs() < 1e-12);

        let mixed = DensityOperator::maximally_mixed(2);
        let joint = phase_estimation(&gen, &mixed, &PhaseEstimation::new(2)).unwrap();
        let p = joint.probabilities(EIGENVALUE).unwrap();
        assert!((p[1] - 0.5).abs() < 1e-12 && (p[3] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn qpe_non_representable_concentrates() {
        let gen = DensityOperator::new(HermitianOperator::diagonal(&[0.3, 0.7])).unwrap();
        let input = DensityOperator::basis_state(2, 0);
        let joint = phase_estimation(&gen, &input, &PhaseEstimation::new(8)).unwrap();
        let p = joint.probabilities(EIGENVALUE).unwrap();
        let near: f64 = p
            .iter()
            .enumerate()
            .filter(|(x, _)| ((*x as f64) / 256.0 - 0.3).abs() <= 1.0 / 256.0)
            .map(|(_, q)| q)
            .sum();
        assert!(near >= 0.8, "{near}");
    }

    #[test]
    fn qpe_rejects_bad_input() {
        let gen = DensityOperator::maximally_mixed(2);
        assert!(phase_estimation(&gen, &gen, &PhaseEstimation::new(1)).is_err());
        assert!(phase_estimation(&gen, &gen, &PhaseEstimation::new(13)).is_err());
        let mut cfg = PhaseEstimation::new(4);
        cfg.encoding.scale = 2.0;
        assert!(matches!(
            phase_estimation(&gen, &gen, &cfg),
            Err(Error::SpectrumOutOfRange { .. })
        ));
    }

    #[test]
    fn simulated_qpe_matches_exact_for_representable_spectrum() {
        let gen = density_with_spectrum(&[0.25, 0.75], &mut rng(4));
        let input = DensityOperator::maximally_mixed(2);
        let exact = phase_estimation(&gen, &input, &PhaseEstimation::new(2)).unwrap();
        let sim =
            phase_estimation(&gen, &input, &PhaseEstimation::new(2).simulated(4096)).unwrap();
        let pe = exact.probabilities(EIGENVALUE).unwrap();
        let ps = sim.probabilities(EIGENVALUE).unwrap();
        for (a, b) in pe.iter().zip(&ps) {
            assert!((a - b).abs() < 0.02, "{pe:?} vs {ps:?}");
        }
        let d = trace_distance(&sim.state(), &exact.state()).unwrap();
        assert!(d < 0.05, "{d}");
    }

    #[test]
    fn sample_eigenpairs_examples() {
        let gen = DensityOperator::new(HermitianOperator::diagonal(&[0.25, 0.75])).unwrap();
        let joint =
            phase_estimation(&gen, &DensityOperator::basis_state(2, 1), &PhaseEstimation::new(2))
                .unwrap();
        let s = sample_eigenpairs(&joint, 100, 0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].frequency, 1.0);
        assert!((s[0].eigenvalue - 0.75).abs() < 1e-12);

        let joint = phase_estimation(
            &gen,
            &DensityOperator::maximally_mixed(2),
            &PhaseEstimation::new(2),
        )
        .unwrap();
        let s = sample_eigenpairs(&joint, 10_000, 1).unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|e| (e.frequency - 0.5).abs() < 0.02));
        assert!(sample_eigenpairs(&joint, 0, 1).is_err());

        // rank-1 input in one eigenspace of a generic generator
        let gen = density_with_spectrum(&[0.2, 0.5, 0.3], &mut rng(6));
        let e = gen.eig();
        let v = e.eigenvector(1);
        let joint = phase_estimation(
            &gen,
            &DensityOperator::pure(&v).unwrap(),
            &PhaseEstimation::for_spectrum(8, e.max_eigenvalue()),
        )
        .unwrap();
        let s = sample_eigenpairs(&joint, 2000, 2).unwrap();
        assert!(s[0].eigenvector.dotc(&v).norm() >= 0.99);
        assert!((s[0].eigenvalue - e.eigenvalues[1]).abs() < 0.02);
    }

    #[test]
    fn swap_test_examples() {
        let a = random_unit_complex(3, &mut rng(7));
        let r = swap_test(&a, &a, 1000, 0).unwrap();
        assert!((r.acceptance_probability - 1.0).abs() < 1e-12);
        assert_eq!(r.estimate, 1.0);

        let e0 = crate::linalg::real_vector(&[1.0, 0.0]);
        let e1 = crate::linalg::real_vector(&[0.0, 1.0]);
        let r = swap_test(&e0, &e1, 1000, 0).unwrap();
        assert!((r.acceptance_probability - 0.5).abs() < 1e-12);

        // |⟨a|b⟩|² = 0.25
        let b = crate::linalg::real_vector(&[0.5, 3f64.sqrt() / 2.0]);
        let r = swap_test(&e0, &b, 10_000, 1).unwrap();
        assert!((r.estimate - 0.25).abs() < 0.02);
        assert!(r.standard_error <= 1.0 / 100.0);

        let bad = crate::linalg::real_vector(&[1.0, 1.0]);
        assert!(swap_test(&e0, &bad, 10, 0).is_err());
    }

    #[test]
    fn signed_overlap_examples() {
        let a = crate::linalg::real_vector(&[0.6, 0.8]);
        assert_eq!(overlap_test_signed(&a, &a, 500, 0).unwrap().estimate, 1.0);
        assert_eq!(overlap_test_signed(&a, &(-&a), 500, 0).unwrap().estimate, -1.0);
        let b = crate::linalg::real_vector(&[-0.6, 0.8]);
        let c = crate::linalg::real_vector(&[1.0, 0.0]);
        // ⟨c|b⟩ = −0.6
        let r = overlap_test_signed(&c, &b, 10_000, 3).unwrap();
        assert!((r.estimate + 0.6).abs() < 0.02);
    }

    #[test]
    fn postselect_examples() {
        let sys = random_density(2, 4.0, &mut rng(8));
        let one = DensityOperator::basis_state(2, 1);
        let joint = RegisteredState::new(
            vec![(SYSTEM.into(), 2), (ANCILLA.into(), 2)],
            sys.tensor(&one),
        )
        .unwrap();
        let (out, p) = postselect_ancilla(&joint, ANCILLA, 1).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        assert!(max_abs(&(out.state().matrix() - joint.state().matrix())) < 1e-12);
        assert!(matches!(
            postselect_ancilla(&joint, ANCILLA, 0),
            Err(Error::VanishingBranch { .. })
        ));

        let plus = DensityOperator::pure_real(&[1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]).unwrap();
        let joint = RegisteredState::new(
            vec![(SYSTEM.into(), 2), (ANCILLA.into(), 2)],
            sys.tensor(&plus),
        )
        .unwrap();
        let (out, p) = postselect_ancilla(&joint, ANCILLA, 1).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!(max_abs(&(out.reduced(SYSTEM).unwrap().matrix() - sys.matrix())) < 1e-12);
        assert!(postselect_ancilla(&joint, "nope", 0).is_err());
    }

    #[test]
    fn postselect_rotation_probability_by_summation() {
        // spectrum {1, 0.5} normalized, f = inverse, C = λ_min
        let lam = [1.0 / 1.5, 0.5 / 1.5];
        let gen = density_with_spectrum(&lam, &mut rng(9));
        let input = random_density(2, 3.0, &mut rng(10));
        let joint = phase_estimation(&gen, &input, &PhaseEstimation::new(2)).unwrap();
        let e = gen.eig();
        // rotate the ancilla by the exact eigenvalue, controlled on the system eigenbasis
        let c = lam[1];
        let mut joint = joint.trace_out(EIGENVALUE).unwrap().append_register(ANCILLA, 2, 0).unwrap();
        let u = e.eigenvectors.clone();
        let vals = e.eigenvalues.clone();
        joint
            .apply_on(&[SYSTEM, ANCILLA], |amps| {
                let n = u.nrows();
                let mut out = vec![c64(0.0); 2 * n];
                for (l, &lv) in vals.iter().enumerate() {
                    let a1 = c / lv;
                    let a0 = (1.0 - a1 * a1).sqrt();
                    let (mut b0, mut b1) = (c64(0.0), c64(0.0));
                    for a in 0..n {
                        b0 += u[(a, l)].conj() * amps[a * 2];
                        b1 += u[(a, l)].conj() * amps[a * 2 + 1];
                    }
                    for a in 0..n {
                        out[a * 2] += u[(a, l)] * (b0 * a0 - b1 * a1);
                        out[a * 2 + 1] += u[(a, l)] * (b0 * a1 + b1 * a0);
                    }
                }
                amps.copy_from_slice(&out);
            })
            .unwrap();
        let (_, p) = postselect_ancilla(&joint, ANCILLA, 1).unwrap();
        let beta = e.eigenvectors.adjoint() * input.matrix() * &e.eigenvectors;
        let want: f64 = (0..2).map(|l| beta[(l, l)].re * (c / vals[l]).powi(2)).sum();
        assert!((p - want).abs() < 1e-12);
    }

    #[test]
    fn registered_state_operations_agree_with_dense() {
        let gen = density_with_spectrum(&[0.1, 0.3, 0.6], &mut rng(11));
        let input = random_density(3, 4.0, &mut rng(12));
        let joint = phase_estimation(&gen, &input, &PhaseEstimation::for_spectrum(4, 0.6)).unwrap();
        let dense = RegisteredState::new(joint.layout().to_vec(), joint.state()).unwrap();
        let a = joint.reduced(SYSTEM).unwrap();
        let b = dense.reduced(SYSTEM).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-12);
        // the register dephases the system in the generator eigenbasis but keeps populations
        let u = gen.eig().eigenvectors;
        let (pa, pi) = (u.adjoint() * a.matrix() * &u, u.adjoint() * input.matrix() * &u);
        assert!((0..3).all(|l| (pa[(l, l)] - pi[(l, l)]).norm() < 1e-12));
        let pa = joint.probabilities(EIGENVALUE).unwrap();
        let pb = dense.probabilities(EIGENVALUE).unwrap();
        assert!(pa.iter().zip(&pb).all(|(x, y)| (x - y).abs() < 1e-12));
        let (ca, qa) = joint.condition(EIGENVALUE, 5).unwrap();
        let (cb, qb) = dense.condition(EIGENVALUE, 5).unwrap();
        assert!((qa - qb).abs() < 1e-12);
        assert!(max_abs(&(ca.state().matrix() - cb.state().matrix())) < 1e-10);
        let ta = joint.trace_out(SYSTEM).unwrap().state();
        let tb = dense.trace_out(SYSTEM).unwrap().state();
        assert!(max_abs(&(ta.matrix() - tb.matrix())) < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            #[test]
            fn swap_acceptance_in_range(seed in 0u64..1_000_000) {
                let a = random_unit_complex(3, &mut rng(seed));
                let b = random_unit_complex(3, &mut rng(seed ^ 0xABCD));
                let r = swap_test(&a, &b, 256, seed).unwrap();
                prop_assert!(r.acceptance_probability >= 0.5 - 1e-12);
                prop_assert!(r.acceptance_probability <= 1.0 + 1e-12);
                let truth = a.dotc(&b).norm_sqr();
                prop_assert!((2.0 * r.acceptance_probability - 1.0 - truth).abs() < 1e-12);
                prop_assert!(r.standard_error <= 1.0 / 16.0 + r.bias_bound);
            }

            #[test]
            fn postselection_yields_density(seed in 0u64..1_000_000) {
                let sys = random_density(2, 4.0, &mut rng(seed));
                let anc = random_density(2, 4.0, &mut rng(seed + 1));
                let joint = RegisteredState::new(
                    vec![(SYSTEM.into(), 2), (ANCILLA.into(), 2)],
                    sys.tensor(&anc),
                ).unwrap();
                let (out, _) = postselect_ancilla(&joint, ANCILLA, 1).unwrap();
                let rho = out.state();
                prop_assert!((rho.as_hermitian().trace() - 1.0).abs() < 1e-9);
                prop_assert!(*rho.eig().eigenvalues.last().unwrap() > -1e-10);
            }
        }
    }

    #[test]
    fn swap_test_estimator_coverage() {
        let mut inside = 0;
        for seed in 0..1000u64 {
            let a = random_unit_complex(2, &mut rng(seed));
            let b = random_unit_complex(2, &mut rng(seed + 5000));
            let truth = a.dotc(&b).norm_sqr();
            let r = swap_test(&a, &b, 1000, seed).unwrap();
            if (r.estimate - truth).abs() <= 3.0 * r.standard_error {
                inside += 1;
            }
        }
        assert!(inside >= 990, "{inside}");
    }
}
