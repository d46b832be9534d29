//! Phase-estimation register: initial window, Fourier transforms, and the
//! per-eigenvalue register unitary `Q(μ) = F† · P(μ) · W`.
//!
//! `W` is a Householder reflection taking `|0⟩` to the window state `ψ₀`,
//! `P(μ)` multiplies `|y⟩` by `e^{2πi y μ}` (the controlled powers of
//! `U = e^{2πi μ}` acting on an eigenvector) and `F†` is the inverse QFT.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::linalg::{c64, C64};

pub const MIN_BITS: u32 = 2;
pub const MAX_BITS: u32 = 12;

/// Initial state of the eigenvalue register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    /// `H^{⊗t}|0⟩`. Exact for eigenvalues representable in `t` bits.
    Uniform,
    /// `√(2/T) sin(π(τ+½)/T)`: outcome tails fall off as the fourth power of the distance.
    Sine,
}

impl Window {
    pub fn amplitudes(&self, dim: usize) -> Vec<f64> {
        match self {
            Window::Uniform => vec![1.0 / (dim as f64).sqrt(); dim],
            Window::Sine => {
                let norm = (2.0 / dim as f64).sqrt();
                (0..dim)
                    .map(|tau| norm * (PI * (tau as f64 + 0.5) / dim as f64).sin())
                    .collect()
            }
        }
    }
}

/// Maps eigenvalues to register phases: `μ = λ·scale + offset`, which must lie in `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseEncoding {
    pub bits: u32,
    pub window: Window,
    pub scale: f64,
    pub offset: f64,
}

impl PhaseEncoding {
    pub fn dim(&self) -> usize {
        1 << self.bits
    }

    pub fn phase(&self, lambda: f64) -> f64 {
        lambda * self.scale + self.offset
    }

    /// Eigenvalue read off register value `x`.
    pub fn estimate(&self, x: usize) -> f64 {
        (x as f64 / self.dim() as f64 - self.offset) / self.scale
    }

    /// Register value `x` read as a scaled eigenvalue `λ·scale`.
    pub fn scaled_estimate(&self, x: usize) -> f64 {
        x as f64 / self.dim() as f64 - self.offset
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_BITS..=MAX_BITS).contains(&self.bits) {
            return Err(Error::InvalidParameter(format!(
                "register width {} outside [{MIN_BITS}, {MAX_BITS}]",
                self.bits
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) || !(0.0..0.5).contains(&self.offset) {
            return Err(Error::InvalidParameter(format!(
                "bad phase encoding: scale {}, offset {}",
                self.scale, self.offset
            )));
        }
        Ok(())
    }

    /// Rejects spectra whose phases leave `[0, 1)`.
    pub fn check_spectrum(&self, eigenvalues: &[f64]) -> Result<()> {
        let max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-10 || self.phase(max) >= 1.0 {
            return Err(Error::SpectrumOutOfRange {
                max_eigenvalue: max,
                suggested_scale: (1.0 - self.offset) / max.max(1e-300) * (1.0 - 1e-9) / self.scale,
            });
        }
        Ok(())
    }
}

/// FFT plans and window vector for one register width.
#[derive(Clone)]
pub struct PhaseRegister {
    encoding: PhaseEncoding,
    psi0: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PhaseRegister {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseRegister")
            .field("encoding", &self.encoding)
            .finish()
    }
}

impl PhaseRegister {
    pub fn new(encoding: PhaseEncoding) -> Result<Self> {
        encoding.validate()?;
        let dim = encoding.dim();
        let mut planner = FftPlanner::new();
        Ok(Self {
            encoding,
            psi0: encoding.window.amplitudes(dim),
            forward: planner.plan_fft_forward(dim),
            inverse: planner.plan_fft_inverse(dim),
        })
    }

    pub fn encoding(&self) -> &PhaseEncoding {
        &self.encoding
    }

    pub fn dim(&self) -> usize {
        self.encoding.dim()
    }

    pub fn window_state(&self) -> &[f64] {
        &self.psi0
    }

    /// `F†`: `|y⟩ ↦ T^{-1/2} Σ_x e^{−2πixy/T}|x⟩`.
    pub fn inverse_qft(&self, v: &mut [C64]) {
        self.forward.process(v);
        let s = 1.0 / (v.len() as f64).sqrt();
        v.iter_mut().for_each(|z| *z *= s);
    }

    /// `F`: `|y⟩ ↦ T^{-1/2} Σ_x e^{+2πixy/T}|x⟩`.
    pub fn qft(&self, v: &mut [C64]) {
        self.inverse.process(v);
        let s = 1.0 / (v.len() as f64).sqrt();
        v.iter_mut().for_each(|z| *z *= s);
    }

    /// Householder `W = I − 2ww†/‖w‖²` with `w = |0⟩ − ψ₀`; `W|0⟩ = ψ₀` and `W = W†`.
    pub fn apply_window_reflection(&self, v: &mut [C64]) {
        let mut w = self.psi0.iter().map(|x| -x).collect::<Vec<_>>();
        w[0] += 1.0;
        let n2: f64 = w.iter().map(|x| x * x).sum();
        if n2 < 1e-30 {
            return;
        }
        let dot: C64 = w.iter().zip(v.iter()).map(|(a, z)| z * a).sum();
        let k = dot * (2.0 / n2);
        for (z, a) in v.iter_mut().zip(&w) {
            *z -= k * a;
        }
    }

    fn apply_phases(&self, v: &mut [C64], mu: f64, sign: f64) {
        for (y, z) in v.iter_mut().enumerate() {
            // reduce y·μ mod 1 before taking the exponential to keep the argument small
            let arg = (y as f64 * mu).fract();
            *z *= C64::from_polar(1.0, sign * 2.0 * PI * arg);
        }
    }

    /// Register amplitudes `Q(μ)|0⟩` for eigenvalue `λ`.
    pub fn amplitudes(&self, lambda: f64) -> Vec<C64> {
        let mu = self.encoding.phase(lambda);
        let mut v: Vec<C64> = self.psi0.iter().map(|&x| c64(x)).collect();
        self.apply_phases(&mut v, mu, 1.0);
        self.inverse_qft(&mut v);
        v
    }

    /// `Q(μ)† = W · P(μ)† · F` in place.
    pub fn uncompute(&self, lambda: f64, v: &mut [C64]) {
        let mu = self.encoding.phase(lambda);
        self.qft(v);
        self.apply_phases(v, mu, -1.0);
        self.apply_window_reflection(v);
    }

    /// `Q(μ)` in place.
    pub fn compute(&self, lambda: f64, v: &mut [C64]) {
        let mu = self.encoding.phase(lambda);
        self.apply_window_reflection(v);
        self.apply_phases(v, mu, 1.0);
        self.inverse_qft(v);
    }
}
