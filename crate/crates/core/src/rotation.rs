//! Fixed-point angle pipeline for the eigenvalue-controlled rotation.
//!
//! The rotation angle `θ = arcsin(C·f(λ))` is computed the way a reversible
//! arithmetic circuit would: `C·f(λ)` from a truncated Taylor series around a
//! window midpoint `x₀`, then `θ` from the arcsin Maclaurin series, with every
//! product formed by shift-and-add and truncated toward zero.
//!
//! Expansion points come from a dyadic partition of `[1/κ, 1]`: the octave
//! `[2^{-m-1}, 2^{-m})` is cut into equal windows, so `|λ − x₀|` shrinks with
//! `λ`. The Taylor variable is stored as `u = (λ − x₀)·2^s` with `|u| ≤ 1` and the
//! coefficients absorb the matching powers of `2^{-s}`; this keeps small
//! eigenvalues from underflowing the fraction bits.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::SpectralFunction;

pub const DEFAULT_INTEGER_BITS: u32 = 4;
pub const DEFAULT_FRACTION_BITS: u32 = 16;
pub const DEFAULT_TAYLOR_ORDER: usize = 8;
pub const DEFAULT_ARCSIN_TERMS: usize = 6;
pub const DEFAULT_WINDOWS_PER_OCTAVE: usize = 8;

/// Sign-magnitude binary fixed-point number `±magnitude·2^{-b}`.
///
/// Results that do not fit in `integer_bits + fraction_bits` magnitude bits
/// saturate and carry the overflow flag; the flag propagates through arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPointValue {
    negative: bool,
    magnitude: u64,
    integer_bits: u32,
    fraction_bits: u32,
    overflow: bool,
}

impl FixedPointValue {
    fn limit(integer_bits: u32, fraction_bits: u32) -> u128 {
        1u128 << (integer_bits + fraction_bits)
    }

    fn build(negative: bool, magnitude: u128, integer_bits: u32, fraction_bits: u32, overflow: bool) -> Self {
        let limit = Self::limit(integer_bits, fraction_bits);
        let (magnitude, overflow) = if magnitude >= limit {
            ((limit - 1) as u64, true)
        } else {
            (magnitude as u64, overflow)
        };
        Self {
            negative: negative && magnitude != 0,
            magnitude,
            integer_bits,
            fraction_bits,
            overflow,
        }
    }

    /// Raw constructor; `magnitude` is in units of `2^{-fraction_bits}`.
    pub fn from_raw(negative: bool, magnitude: u64, integer_bits: u32, fraction_bits: u32) -> Self {
        assert!(integer_bits + fraction_bits <= 60, "fixed-point width exceeds 60 bits");
        Self::build(negative, magnitude as u128, integer_bits, fraction_bits, false)
    }

    /// Truncates `x` toward zero onto the grid `2^{-fraction_bits}`.
    pub fn from_f64(x: f64, integer_bits: u32, fraction_bits: u32) -> Self {
        assert!(integer_bits + fraction_bits <= 60, "fixed-point width exceeds 60 bits");
        if !x.is_finite() {
            return Self::build(x < 0.0, u128::MAX, integer_bits, fraction_bits, true);
        }
        let scaled = (x.abs() * (fraction_bits as f64).exp2()).floor();
        let mag = if scaled >= u128::MAX as f64 { u128::MAX } else { scaled as u128 };
        Self::build(x < 0.0, mag, integer_bits, fraction_bits, false)
    }

    pub fn zero(integer_bits: u32, fraction_bits: u32) -> Self {
        Self::from_raw(false, 0, integer_bits, fraction_bits)
    }

    pub fn one(integer_bits: u32, fraction_bits: u32) -> Self {
        Self::from_raw(false, 1 << fraction_bits, integer_bits, fraction_bits)
    }

    pub fn to_f64(&self) -> f64 {
        let v = self.magnitude as f64 * (-(self.fraction_bits as f64)).exp2();
        if self.negative {
            -v
        } else {
            v
        }
    }

    pub fn magnitude(&self) -> u64 {
        self.magnitude
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn integer_bits(&self) -> u32 {
        self.integer_bits
    }

    pub fn fraction_bits(&self) -> u32 {
        self.fraction_bits
    }

    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    /// Grid spacing `2^{-b}`.
    pub fn resolution(&self) -> f64 {
        (-(self.fraction_bits as f64)).exp2()
    }

    pub fn abs(&self) -> Self {
        Self { negative: false, ..*self }
    }

    /// Converts an overflowed value into an error.
    pub fn checked(self) -> Result<Self> {
        if self.overflow {
            Err(Error::Overflow(format!(
                "value exceeds {} integer bits",
                self.integer_bits
            )))
        } else {
            Ok(self)
        }
    }

    /// Multiplies by `2^k` (left shift), flagging overflow.
    pub fn shl(&self, k: u32) -> Self {
        Self::build(
            self.negative,
            (self.magnitude as u128) << k,
            self.integer_bits,
            self.fraction_bits,
            self.overflow,
        )
    }

    /// Divides by `2^k`, truncating toward zero.
    pub fn shr(&self, k: u32) -> Self {
        Self::build(
            self.negative,
            (self.magnitude >> k.min(63)) as u128,
            self.integer_bits,
            self.fraction_bits,
            self.overflow,
        )
    }

    fn same_widths(&self, other: &Self) -> bool {
        self.integer_bits == other.integer_bits && self.fraction_bits == other.fraction_bits
    }
}

impl Add for FixedPointValue {
    type Output = FixedPointValue;

    /// Exact up to overflow. Panics on mismatched widths.
    fn add(self, rhs: Self) -> Self {
        assert!(self.same_widths(&rhs), "fixed-point widths differ");
        let (a, b) = (self.magnitude as u128, rhs.magnitude as u128);
        let (neg, mag) = if self.negative == rhs.negative {
            (self.negative, a + b)
        } else if a >= b {
            (self.negative, a - b)
        } else {
            (rhs.negative, b - a)
        };
        Self::build(neg, mag, self.integer_bits, self.fraction_bits, self.overflow || rhs.overflow)
    }
}

impl Neg for FixedPointValue {
    type Output = FixedPointValue;

    fn neg(self) -> Self {
        Self {
            negative: !self.negative && self.magnitude != 0,
            ..self
        }
    }
}

impl Sub for FixedPointValue {
    type Output = FixedPointValue;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl fmt::Display for FixedPointValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())?;
        if self.overflow {
            write!(f, " (overflow)")?;
        }
        Ok(())
    }
}

/// Number of partial products `shift_add_multiply(a, b)` accumulates.
pub fn partial_products(b: &FixedPointValue) -> u32 {
    b.magnitude.count_ones()
}

/// Grade-school product: one controlled addition of `a` shifted left by `i`
/// for every set bit `i` of `b`, accumulated exactly and then truncated
/// toward zero to the fraction width.
pub fn shift_add_multiply(a: &FixedPointValue, b: &FixedPointValue) -> Result<FixedPointValue> {
    if !a.same_widths(b) {
        return Err(Error::InvalidParameter(format!(
            "incompatible widths ({}.{}) and ({}.{})",
            a.integer_bits, a.fraction_bits, b.integer_bits, b.fraction_bits
        )));
    }
    let mut acc: u128 = 0;
    let mut bits = b.magnitude;
    let mut shift = 0u32;
    while bits != 0 {
        if bits & 1 == 1 {
            acc += (a.magnitude as u128) << shift;
        }
        bits >>= 1;
        shift += 1;
    }
    Ok(FixedPointValue::build(
        a.negative != b.negative,
        acc >> a.fraction_bits,
        a.integer_bits,
        a.fraction_bits,
        a.overflow || b.overflow,
    ))
}

/// Truncated Taylor series `Σ_{i≤n} c_i u^i` with `u = (λ − x₀)·2^shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSpec {
    /// `c_i = g^{(i)}(x₀)/i! · 2^{-shift·i}` for `i = 0..=order`.
    pub coefficients: Vec<FixedPointValue>,
    pub expansion_point: FixedPointValue,
    pub order: usize,
    pub shift: u32,
    /// Convergence radius of the series in `λ`.
    pub radius: f64,
}

impl TaylorSpec {
    /// Quantizes real coefficients given in the unshifted variable `λ − x₀`.
    pub fn new(
        coefficients: &[f64],
        expansion_point: f64,
        shift: u32,
        radius: f64,
        integer_bits: u32,
        fraction_bits: u32,
    ) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::InvalidParameter("Taylor order must be at least 1".into()));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite Taylor coefficient".into()));
        }
        let coefficients = coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| {
                FixedPointValue::from_f64(c * (-(shift as f64) * i as f64).exp2(), integer_bits, fraction_bits)
                    .checked()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            order: coefficients.len() - 1,
            coefficients,
            expansion_point: FixedPointValue::from_f64(expansion_point, integer_bits, fraction_bits),
            shift,
            radius,
        })
    }

    /// Series of `C·f` around `x₀`, with `shift` chosen so that a window of
    /// half-width `2^{-shift}` maps onto `|u| ≤ 1`.
    pub fn for_function(
        f: SpectralFunction,
        c: f64,
        x0: f64,
        shift: u32,
        order: usize,
        integer_bits: u32,
        fraction_bits: u32,
    ) -> Result<Self> {
        let coeffs: Vec<f64> = f.taylor_coefficients(x0, order).into_iter().map(|v| c * v).collect();
        let radius = match f {
            SpectralFunction::Identity => f64::INFINITY,
            _ => x0,
        };
        Self::new(&coeffs, x0, shift, radius, integer_bits, fraction_bits)
    }

    /// Maclaurin series of arcsin with `terms` nonzero (odd) terms.
    pub fn arcsin(terms: usize, integer_bits: u32, fraction_bits: u32) -> Result<Self> {
        if terms == 0 {
            return Err(Error::InvalidParameter("arcsin needs at least one term".into()));
        }
        let mut coeffs = vec![0.0; 2 * terms];
        for (k, c) in arcsin_coefficients(terms).into_iter().enumerate() {
            coeffs[2 * k + 1] = c;
        }
        Self::new(&coeffs, 0.0, 0, 1.0, integer_bits, fraction_bits)
    }
}

/// Algorithm-3 accumulation: a running power register, one coefficient
/// multiplication per order and a running total.
pub fn taylor_eval(spec: &TaylorSpec, lambda: &FixedPointValue) -> Result<FixedPointValue> {
    let (ib, fb) = (spec.expansion_point.integer_bits, spec.expansion_point.fraction_bits);
    if lambda.integer_bits != ib || lambda.fraction_bits != fb {
        return Err(Error::InvalidParameter("argument width differs from Taylor spec".into()));
    }
    let delta = *lambda - spec.expansion_point;
    if !(delta.to_f64().abs() < spec.radius) {
        return Err(Error::InvalidParameter(format!(
            "|λ − x₀| = {} outside convergence radius {}",
            delta.to_f64().abs(),
            spec.radius
        )));
    }
    let u = delta.shl(spec.shift);
    let mut power = FixedPointValue::one(ib, fb);
    let mut total = spec.coefficients[0];
    for c in &spec.coefficients[1..] {
        power = shift_add_multiply(&power, &u)?;
        if c.magnitude != 0 {
            total = total + shift_add_multiply(c, &power)?;
        }
    }
    Ok(total)
}

/// `(2k)! / (4^k (k!)² (2k+1))`, the coefficient of `x^{2k+1}` in arcsin.
pub fn arcsin_coefficients(terms: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(terms);
    let mut central = 1.0; // (2k)!/(4^k (k!)²)
    for k in 0..terms {
        if k > 0 {
            central *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        out.push(central / (2 * k + 1) as f64);
    }
    out
}

/// Partial sum of the arcsin Maclaurin series in floating point.
pub fn arcsin_series(x: f64, terms: usize) -> f64 {
    let x2 = x * x;
    let mut p = x;
    let mut sum = 0.0;
    for c in arcsin_coefficients(terms) {
        sum += c * p;
        p *= x2;
    }
    sum
}

/// Smallest term count whose tail bound at `|x| ≤ x_max` is below `tol`.
pub fn arcsin_terms_for(x_max: f64, tol: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&x_max) {
        return Err(Error::InvalidParameter(format!(
            "arcsin series diverges at |x| = {x_max}"
        )));
    }
    let x2 = x_max * x_max;
    let mut terms = 1;
    loop {
        // coefficients decrease, so the tail is at most c_n·x^{2n+1}/(1 − x²)
        let c = arcsin_coefficients(terms + 1)[terms];
        let tail = c * x_max.powi(2 * terms as i32 + 1) / (1.0 - x2);
        if tail < tol || terms >= 10_000 {
            return Ok(terms);
        }
        terms += 1;
    }
}

/// `θ = arcsin(Cf)` by the truncated Maclaurin series in fixed point.
pub fn arcsin_angle(cf: &FixedPointValue, terms: usize) -> Result<FixedPointValue> {
    if cf.to_f64().abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "arcsin argument |{}| ≥ 1",
            cf.to_f64()
        )));
    }
    let spec = TaylorSpec::arcsin(terms, cf.integer_bits, cf.fraction_bits)?;
    taylor_eval(&spec, cf)
}

/// Exact-arithmetic amplitudes `(√(1 − C²f(λ)²), C·f(λ))`.
pub fn rotation_amplitudes(lambda: f64, f: SpectralFunction, c: f64) -> Result<(f64, f64)> {
    let a1 = c * f.eval(lambda);
    if !a1.is_finite() || a1.abs() > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!("|C·f(λ)| = {} exceeds 1", a1.abs())));
    }
    let a1 = a1.clamp(-1.0, 1.0);
    Ok(((1.0 - a1 * a1).max(0.0).sqrt(), a1))
}

/// Register widths and series lengths of the fixed-point pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RotationConfig {
    pub integer_bits: u32,
    pub fraction_bits: u32,
    pub taylor_order: usize,
    pub arcsin_terms: usize,
    pub windows_per_octave: usize,
}

impl Default for RotationConfig {
    fn default() -> Self {
        Self {
            integer_bits: DEFAULT_INTEGER_BITS,
            fraction_bits: DEFAULT_FRACTION_BITS,
            taylor_order: DEFAULT_TAYLOR_ORDER,
            arcsin_terms: DEFAULT_ARCSIN_TERMS,
            windows_per_octave: DEFAULT_WINDOWS_PER_OCTAVE,
        }
    }
}

/// Precomputed window series of `C·f` over `[1/κ, 1]`.
#[derive(Clone, Debug)]
pub struct RotationPipeline {
    f: SpectralFunction,
    c: f64,
    config: RotationConfig,
    lower: f64,
    arcsin: TaylorSpec,
    // octave m ↦ windows of [2^{-m-1}, 2^{-m})
    octaves: Vec<Vec<TaylorSpec>>,
    window_log2: u32,
}

impl RotationPipeline {
    pub fn new(f: SpectralFunction, c: f64, kappa_eff: f64, config: RotationConfig) -> Result<Self> {
        if !(kappa_eff >= 1.0) {
            return Err(Error::InvalidParameter(format!("kappa_eff must be ≥ 1, got {kappa_eff}")));
        }
        let w = config.windows_per_octave;
        if w == 0 || !w.is_power_of_two() {
            return Err(Error::InvalidParameter("windows per octave must be a power of two".into()));
        }
        let window_log2 = w.trailing_zeros();
        let lower = 1.0 / kappa_eff;
        let octaves_needed = (kappa_eff.log2().ceil() as u32).max(1);
        let (ib, fb) = (config.integer_bits, config.fraction_bits);
        let mut octaves = Vec::new();
        for m in 0..octaves_needed {
            // window half-width 2^{-(m + 2 + log2 w)}
            let shift = m + 2 + window_log2;
            if shift > fb {
                return Err(Error::InvalidParameter(format!(
                    "{fb} fraction bits cannot resolve eigenvalues down to {lower}"
                )));
            }
            let start = (-(m as f64 + 1.0)).exp2();
            let width = start / w as f64;
            let specs = (0..w)
                .map(|k| {
                    let x0 = start + (k as f64 + 0.5) * width;
                    TaylorSpec::for_function(f, c, x0, shift, config.taylor_order, ib, fb)
                })
                .collect::<Result<Vec<_>>>()?;
            octaves.push(specs);
        }
        Ok(Self {
            f,
            c,
            config,
            lower,
            arcsin: TaylorSpec::arcsin(config.arcsin_terms, ib, fb)?,
            octaves,
            window_log2,
        })
    }

    pub fn config(&self) -> &RotationConfig {
        &self.config
    }

    pub fn function(&self) -> SpectralFunction {
        self.f
    }

    pub fn normalization(&self) -> f64 {
        self.c
    }

    /// Eigenvalue register contents for `λ` (truncated to the fraction width).
    pub fn quantize(&self, lambda: f64) -> FixedPointValue {
        FixedPointValue::from_f64(lambda, self.config.integer_bits, self.config.fraction_bits)
    }

    fn window(&self, lambda: &FixedPointValue) -> Result<&TaylorSpec> {
        let fb = self.config.fraction_bits;
        let mag = lambda.magnitude;
        let v = lambda.to_f64();
        if lambda.negative || v > 1.0 || v < self.lower - lambda.resolution() || mag == 0 {
            return Err(Error::InvalidParameter(format!(
                "λ = {v} outside [{}, 1]",
                self.lower
            )));
        }
        if mag == 1 << fb {
            // λ = 1 sits on the edge of the top window
            return Ok(self.octaves[0].last().expect("octave has windows"));
        }
        let lead = 63 - mag.leading_zeros(); // λ ∈ [2^{lead-b}, 2^{lead-b+1})
        let m = (fb - 1 - lead) as usize;
        let octave = self.octaves.get(m).ok_or_else(|| {
            Error::InvalidParameter(format!("λ = {v} below the pipeline's lowest octave"))
        })?;
        let offset = mag - (1u64 << lead);
        let k = (offset >> (lead - self.window_log2)) as usize;
        Ok(&octave[k])
    }

    /// `C·f(λ)` from the window's Taylor series.
    pub fn value(&self, lambda: &FixedPointValue) -> Result<FixedPointValue> {
        taylor_eval(self.window(lambda)?, lambda)?.checked()
    }

    /// `θ = arcsin(C·f(λ))` on the fixed-point path.
    pub fn angle(&self, lambda: f64) -> Result<FixedPointValue> {
        let cf = self.value(&self.quantize(lambda))?;
        if cf.to_f64().abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "|C·f(λ)| = {} reaches 1; the arcsin series diverges",
                cf.to_f64().abs()
            )));
        }
        taylor_eval(&self.arcsin, &cf)?.checked()
    }

    /// `(cos θ, sin θ)` from the fixed-point angle.
    pub fn amplitudes(&self, lambda: f64) -> Result<(f64, f64)> {
        let theta = self.angle(lambda)?.to_f64();
        Ok((theta.cos(), theta.sin()))
    }
}

/// `λ = j·2^{-bits}` for every `j` with `λ ∈ [1/κ, 1]`.
pub fn dyadic_grid(kappa_eff: f64, bits: u32) -> Vec<f64> {
    let n = 1u64 << bits;
    let lo = (n as f64 / kappa_eff).ceil() as u64;
    (lo.max(1)..=n).map(|j| j as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;
    use rand::Rng;

    fn fx(x: f64, b: u32) -> FixedPointValue {
        FixedPointValue::from_f64(x, 12, b)
    }

    #[test]
    fn multiply_examples() {
        let p = shift_add_multiply(&fx(3.0, 0), &fx(5.0, 0)).unwrap();
        assert_eq!(p.to_f64(), 15.0);
        let p = shift_add_multiply(&fx(0.5, 8), &fx(0.5, 8)).unwrap();
        assert_eq!(p.to_f64(), 0.25);
        let big = FixedPointValue::from_f64(3.0, 2, 8);
        assert!(shift_add_multiply(&big, &big).unwrap().overflowed());
        assert!(shift_add_multiply(&fx(1.0, 8), &fx(1.0, 9)).is_err());
    }

    #[test]
    fn multiply_error_bound_random_pairs() {
        let mut r = rng(0);
        for _ in 0..100 {
            let b = 12;
            let a = fx(r.random_range(-4.0..4.0), b);
            let c = fx(r.random_range(-4.0..4.0), b);
            let p = shift_add_multiply(&a, &c).unwrap();
            let exact = a.to_f64() * c.to_f64();
            let bound = a.resolution() * partial_products(&c).max(1) as f64;
            assert!((p.to_f64() - exact).abs() <= bound);
        }
    }

    #[test]
    fn fixed_point_truncates_toward_zero() {
        let v = FixedPointValue::from_f64(-0.7, 2, 2);
        assert_eq!(v.to_f64(), -0.5);
        assert!(FixedPointValue::from_f64(8.0, 3, 4).overflowed());
        assert!(!FixedPointValue::from_f64(7.9, 3, 4).overflowed());
        assert_eq!((fx(0.25, 8) - fx(0.75, 8)).to_f64(), -0.5);
        assert!(!(-fx(0.0, 8)).is_negative());
    }

    #[test]
    fn taylor_examples() {
        let id = TaylorSpec::new(&[0.0, 1.0], 0.0, 0, f64::INFINITY, 4, 16).unwrap();
        let lam = FixedPointValue::from_f64(0.3, 4, 16);
        assert_eq!(taylor_eval(&id, &lam).unwrap(), lam);

        let c = SpectralFunction::Inverse.taylor_coefficients(1.0, 3);
        let spec = TaylorSpec::new(&c, 1.0, 0, 1.0, 4, 30).unwrap();
        let v = taylor_eval(&spec, &FixedPointValue::from_f64(0.9, 4, 30)).unwrap();
        assert!((v.to_f64() - 1.111).abs() < 1e-7, "{}", v);
        assert!((v.to_f64() - 1.0 / 0.9).abs() < 2e-4);
    }

    #[test]
    fn taylor_error_within_remainder_plus_rounding() {
        // coefficients of order one, so per-operation rounding is not amplified
        let b = 16;
        let order = 3;
        for f in [SpectralFunction::Inverse, SpectralFunction::Sqrt, SpectralFunction::InverseSqrt] {
            for &lam in &[0.8, 0.9, 1.08] {
                let c = f.taylor_coefficients(1.0, order + 1);
                let spec = TaylorSpec::new(&c[..=order], 1.0, 0, 1.0, 4, b).unwrap();
                let q = FixedPointValue::from_f64(lam, 4, b);
                let v = taylor_eval(&spec, &q).unwrap();
                let h = q.to_f64() - 1.0;
                let remainder = c[order + 1].abs() * h.abs().powi(order as i32 + 1) / (1.0 - h.abs());
                let budget = remainder + 3.0 * order as f64 * q.resolution();
                let err = (v.to_f64() - f.eval(q.to_f64())).abs();
                assert!(err <= budget, "{f} at {lam}: {err} > {budget}");
            }
        }
    }

    #[test]
    fn taylor_order_monotone_for_alternating_series() {
        let b = 40;
        for &lam in &[0.8, 0.9, 0.95, 1.1, 1.25] {
            let mut last = f64::INFINITY;
            for n in 1..=8 {
                let c = SpectralFunction::Inverse.taylor_coefficients(1.0, n);
                let spec = TaylorSpec::new(&c, 1.0, 0, 1.0, 4, b).unwrap();
                let q = FixedPointValue::from_f64(lam, 4, b);
                let err = (taylor_eval(&spec, &q).unwrap().to_f64() - 1.0 / q.to_f64()).abs();
                assert!(err <= last + 1e-11, "λ={lam} n={n}");
                last = err;
            }
        }
    }

    #[test]
    fn arcsin_examples() {
        assert_eq!(arcsin_angle(&fx(0.0, 16), 4).unwrap().to_f64(), 0.0);
        assert_eq!(arcsin_coefficients(4), vec![1.0, 1.0 / 6.0, 3.0 / 40.0, 5.0 / 112.0]);
        let s = arcsin_series(0.5, 4);
        assert!((s - 0.523526).abs() < 1e-6);
        assert!((s - 0.5f64.asin()).abs() < 1e-4);
        let fixed = arcsin_angle(&FixedPointValue::from_f64(0.5, 4, 16), 4).unwrap();
        assert!((fixed.to_f64() - s).abs() <= 12.0 * (-16f64).exp2());
        assert!(arcsin_angle(&fx(1.0, 16), 4).is_err());
    }

    #[test]
    fn arcsin_is_odd() {
        let mut r = rng(4);
        for _ in 0..200 {
            let x = FixedPointValue::from_f64(r.random_range(-0.95..0.95), 4, 16);
            let a = arcsin_angle(&x, 6).unwrap();
            let b = arcsin_angle(&-x, 6).unwrap();
            assert_eq!(a, -b);
        }
    }

    #[test]
    fn arcsin_term_count_meets_tolerance() {
        for &x in &[0.3, 0.5, 0.9] {
            let n = arcsin_terms_for(x, 1e-8).unwrap();
            assert!((arcsin_series(x, n) - x.asin()).abs() < 1e-8);
        }
        assert!(arcsin_terms_for(1.0, 1e-3).is_err());
    }

    #[test]
    fn rotation_amplitude_examples() {
        let (a0, a1) = rotation_amplitudes(1.0, SpectralFunction::Identity, 1.0).unwrap();
        assert_eq!((a0, a1), (0.0, 1.0));
        let (a0, a1) = rotation_amplitudes(0.6, SpectralFunction::Identity, 1.0).unwrap();
        assert!((a0 - 0.8).abs() < 1e-15 && (a1 - 0.6).abs() < 1e-15);
        assert!(rotation_amplitudes(0.5, SpectralFunction::Inverse, 1.0).is_err());
    }

    fn max_pipeline_error(f: SpectralFunction, kappa: f64, config: RotationConfig, bits: u32) -> f64 {
        let grid = dyadic_grid(kappa, bits);
        let c = 0.5 / grid.iter().map(|&l| f.eval(l)).fold(0.0, f64::max);
        let p = RotationPipeline::new(f, c, kappa, config).unwrap();
        grid.iter()
            .map(|&l| (p.angle(l).unwrap().to_f64() - (c * f.eval(l)).asin()).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn pipeline_tracks_exact_angle() {
        for f in [SpectralFunction::Identity, SpectralFunction::Inverse, SpectralFunction::InverseSqrt] {
            let err = max_pipeline_error(f, 100.0, RotationConfig::default(), 8);
            eprintln!("{f}: max |θ error| = {err:e}");
            assert!(err <= (-13f64).exp2(), "{f}: {err}");
            let grid = dyadic_grid(100.0, 8);
            let c = 0.5 / grid.iter().map(|&l| f.eval(l)).fold(0.0, f64::max);
            let p = RotationPipeline::new(f, c, 100.0, RotationConfig::default()).unwrap();
            for &l in &grid {
                let (e0, e1) = rotation_amplitudes(l, f, c).unwrap();
                let (a0, a1) = p.amplitudes(l).unwrap();
                assert!((a0 - e0).abs() <= (-13f64).exp2() && (a1 - e1).abs() <= (-13f64).exp2());
            }
        }
    }

    #[test]
    fn pipeline_error_shrinks_with_width() {
        let cfg = |b| RotationConfig {
            fraction_bits: b,
            arcsin_terms: 12,
            taylor_order: 10,
            ..RotationConfig::default()
        };
        for f in [SpectralFunction::Identity, SpectralFunction::Inverse, SpectralFunction::InverseSqrt] {
            let coarse = max_pipeline_error(f, 16.0, cfg(12), 8);
            let fine = max_pipeline_error(f, 16.0, cfg(24), 8);
            assert!(coarse / fine >= 100.0, "{f}: {coarse} / {fine}");
        }
    }

    #[test]
    fn pipeline_rejects_out_of_range() {
        let p = RotationPipeline::new(SpectralFunction::Inverse, 0.005, 100.0, RotationConfig::default())
            .unwrap();
        assert!(p.angle(0.001).is_err());
        assert!(p.angle(1.5).is_err());
        assert!(p.angle(0.01).is_ok());
    }
}
