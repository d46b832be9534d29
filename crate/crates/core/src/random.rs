//! Seeded random operators for tests, examples and benchmarks.

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c64, CMatrix, DensityOperator, HermitianOperator, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent child seed for sub-task `index` (a separate ChaCha stream).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut r = rng(seed);
    r.set_stream(index);
    r.next_u64()
}

/// Haar-ish random unitary from the QR factorization of a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // fix the phases of R's diagonal so the distribution does not depend on the QR convention
    let mut q = q.clone();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= ph;
            }
        }
    }
    q
}

/// Random real orthogonal matrix (Gaussian QR).
pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// `U diag(spectrum) U†` with a random unitary `U`; the spectrum is normalized to unit sum.
pub fn density_with_spectrum<R: Rng>(spectrum: &[f64], rng: &mut R) -> DensityOperator {
    let total: f64 = spectrum.iter().sum();
    let u = random_unitary(spectrum.len(), rng);
    let d = HermitianOperator::diagonal(&spectrum.iter().map(|x| x / total).collect::<Vec<_>>());
    let m = &u * d.matrix() * u.adjoint();
    DensityOperator::new(HermitianOperator::hermitize(m))
        .expect("unitary conjugation of a normalized spectrum is a density operator")
}

/// Full-rank density operator whose eigenvalues are drawn uniformly from
/// `[1/condition, 1]` before normalization.
pub fn random_density<R: Rng>(n: usize, condition: f64, rng: &mut R) -> DensityOperator {
    let spectrum: Vec<f64> = (0..n)
        .map(|_| rng.random_range(1.0 / condition..=1.0))
        .collect();
    density_with_spectrum(&spectrum, rng)
}

/// Random unit vector with real Gaussian components.
pub fn random_unit_real<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn random_unit_complex<R: Rng>(n: usize, rng: &mut R) -> crate::linalg::CVector {
    let v = crate::linalg::CVector::from_fn(n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.norm();
    v / c64(norm)
}
