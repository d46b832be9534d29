//! Emulated quantum-RAM oracles.
//!
//! The oracles are replaced by exact state construction: a list of real vectors
//! `v_i` becomes the norm-weighted joint state `Σ_i ‖v_i‖ |i⟩|v_i/‖v_i‖⟩ / √Σ‖v_i‖²`,
//! and tracing out the index register leaves `Σ_i v_i v_iᵀ / Σ‖v_i‖²`. The scatter
//! and covariance operators are produced exactly that way.

use nalgebra::{DMatrix, DVector};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{c64, CMatrix, CVector, DensityOperator, HermitianOperator};

// Squared norms below this are treated as zero vectors.
const ZERO_NORM_SQ: f64 = 1e-24;

/// Means and norm constants of a labelled dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassStatistics {
    pub class_means: Vec<DVector<f64>>,
    pub global_mean: DVector<f64>,
    pub class_counts: Vec<usize>,
    /// `B = Σ_j ‖x_j − μ_{c_j}‖²`
    pub norm_b: f64,
    /// `A = Σ_c ‖μ_c − x̄‖²`
    pub norm_a: f64,
    /// `A_c = Σ_{j∈c} ‖x_j − μ_c‖²`
    pub per_class_norm: Vec<f64>,
}

impl ClassStatistics {
    pub fn num_classes(&self) -> usize {
        self.class_means.len()
    }

    pub fn dim(&self) -> usize {
        self.global_mean.len()
    }

    pub fn total_count(&self) -> usize {
        self.class_counts.iter().sum()
    }
}

pub fn class_statistics(data: &LabeledDataset) -> Result<ClassStatistics> {
    let n = data.dim();
    let k = data.num_classes();
    let mut sums = vec![DVector::zeros(n); k];
    let mut counts = vec![0usize; k];
    for (x, &c) in data.samples().iter().zip(data.labels()) {
        sums[c] += x;
        counts[c] += 1;
    }
    if let Some(c) = counts.iter().position(|&m| m == 0) {
        return Err(Error::Degenerate(format!("class {c} has no samples")));
    }
    let class_means: Vec<DVector<f64>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &m)| s / m as f64)
        .collect();
    let global_mean =
        data.samples().iter().fold(DVector::zeros(n), |acc, x| acc + x) / data.len() as f64;

    let mut per_class_norm = vec![0.0; k];
    for (x, &c) in data.samples().iter().zip(data.labels()) {
        per_class_norm[c] += (x - &class_means[c]).norm_squared();
    }
    let norm_b = per_class_norm.iter().sum();
    let norm_a = class_means
        .iter()
        .map(|m| (m - &global_mean).norm_squared())
        .sum();
    Ok(ClassStatistics {
        class_means,
        global_mean,
        class_counts: counts,
        norm_b,
        norm_a,
        per_class_norm,
    })
}

/// Norm-weighted joint state over `index ⊗ feature`, index register first.
pub fn weighted_superposition(vectors: &[DVector<f64>]) -> Result<CVector> {
    let n = vectors
        .first()
        .map(|v| v.len())
        .ok_or_else(|| Error::Degenerate("no vectors to superpose".into()))?;
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    let total: f64 = vectors.iter().map(|v| v.norm_squared()).sum();
    if !(total > ZERO_NORM_SQ) {
        return Err(Error::Degenerate("all vectors are zero".into()));
    }
    let scale = 1.0 / total.sqrt();
    // ‖v‖·(v/‖v‖) = v, so the amplitudes are the raw entries
    let mut psi = CVector::zeros(vectors.len() * n);
    for (i, v) in vectors.iter().enumerate() {
        for (a, &x) in v.iter().enumerate() {
            psi[i * n + a] = c64(x * scale);
        }
    }
    Ok(psi)
}

/// Reduced operator of a pure joint state after tracing out a leading register of size `m`.
pub fn trace_out_index(psi: &CVector, m: usize) -> Result<DensityOperator> {
    if m == 0 || psi.len() % m != 0 {
        return Err(Error::DimensionMismatch {
            expected: psi.len(),
            found: m,
        });
    }
    let n = psi.len() / m;
    // reshape ψ into an N×m matrix Ψ; then Tr_index |ψ⟩⟨ψ| = Ψ Ψ†
    let block = CMatrix::from_fn(n, m, |a, i| psi[i * n + a]);
    DensityOperator::new(HermitianOperator::hermitize(&block * block.adjoint()))
}

fn nonzero(vs: impl Iterator<Item = DVector<f64>>) -> Vec<DVector<f64>> {
    vs.filter(|v| v.norm_squared() > ZERO_NORM_SQ).collect()
}

/// Normalized between-class scatter `(1/A) Σ_c (μ_c − x̄)(μ_c − x̄)ᵀ`.
pub fn between_scatter(stats: &ClassStatistics) -> Result<DensityOperator> {
    let diffs = nonzero(stats.class_means.iter().map(|m| m - &stats.global_mean));
    if diffs.is_empty() || !(stats.norm_a > ZERO_NORM_SQ) {
        return Err(Error::Degenerate(
            "between-class norm A is zero: all class means coincide".into(),
        ));
    }
    let psi = weighted_superposition(&diffs)?;
    trace_out_index(&psi, diffs.len())
}

/// Normalized within-class scatter `(1/B) Σ_j (x_j − μ_{c_j})(x_j − μ_{c_j})ᵀ`.
///
/// The class label register is traced out together with the sample index.
pub fn within_scatter(data: &LabeledDataset, stats: &ClassStatistics) -> Result<DensityOperator> {
    let diffs = nonzero(
        data.samples()
            .iter()
            .zip(data.labels())
            .map(|(x, &c)| x - &stats.class_means[c]),
    );
    if diffs.is_empty() {
        return Err(Error::Degenerate(
            "within-class norm B is zero: every sample equals its class mean".into(),
        ));
    }
    let psi = weighted_superposition(&diffs)?;
    trace_out_index(&psi, diffs.len())
}

/// Normalized covariance `Σ_c = (1/A_c) Σ_{j∈c} (x_j − μ_c)(x_j − μ_c)ᵀ` of class `c`.
pub fn class_covariance_operator(
    data: &LabeledDataset,
    stats: &ClassStatistics,
    c: usize,
) -> Result<DensityOperator> {
    if c >= stats.num_classes() {
        return Err(Error::InvalidParameter(format!(
            "class {c} outside 0..{}",
            stats.num_classes()
        )));
    }
    let diffs = nonzero(data.class_members(c).map(|x| x - &stats.class_means[c]));
    if diffs.is_empty() {
        return Err(Error::Degenerate(format!(
            "class {c} has zero spread (A_c = 0)"
        )));
    }
    let psi = weighted_superposition(&diffs)?;
    trace_out_index(&psi, diffs.len())
}

/// Unnormalized between-class scatter `Σ_c (μ_c − x̄)(μ_c − x̄)ᵀ`.
pub fn classical_between_scatter(stats: &ClassStatistics) -> DMatrix<f64> {
    let n = stats.dim();
    stats.class_means.iter().fold(DMatrix::zeros(n, n), |acc, m| {
        let d = m - &stats.global_mean;
        acc + &d * d.transpose()
    })
}

/// Unnormalized within-class scatter `Σ_c Σ_{x∈c} (x − μ_c)(x − μ_c)ᵀ`.
pub fn classical_within_scatter(data: &LabeledDataset, stats: &ClassStatistics) -> DMatrix<f64> {
    let n = stats.dim();
    data.samples()
        .iter()
        .zip(data.labels())
        .fold(DMatrix::zeros(n, n), |acc, (x, &c)| {
            let d = x - &stats.class_means[c];
            acc + &d * d.transpose()
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::random::rng;
    use rand::Rng;

    fn ds(samples: Vec<Vec<f64>>, labels: Vec<usize>, k: usize) -> LabeledDataset {
        LabeledDataset::new(samples, labels, k).unwrap()
    }

    fn diag(v: &[f64]) -> CMatrix {
        HermitianOperator::diagonal(v).into_matrix()
    }

    #[test]
    fn statistics_examples() {
        let s = class_statistics(&ds(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![0, 0], 1)).unwrap();
        assert_eq!(s.class_means[0].as_slice(), &[0.0, 0.0]);
        assert_eq!(s.global_mean.as_slice(), &[0.0, 0.0]);
        assert_eq!((s.norm_a, s.norm_b), (0.0, 2.0));

        let s = class_statistics(&ds(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![0, 1], 2)).unwrap();
        assert_eq!(s.global_mean.as_slice(), &[0.0, 0.0]);
        assert_eq!((s.norm_a, s.norm_b), (2.0, 0.0));

        let s = class_statistics(&ds(vec![vec![3.0, 1.0]; 4], vec![0, 1, 0, 1], 2)).unwrap();
        assert_eq!((s.norm_a, s.norm_b), (0.0, 0.0));
        assert!(between_scatter(&s).is_err());
    }

    #[test]
    fn between_scatter_examples() {
        let s = class_statistics(&ds(vec![vec![1.0, 0.0], vec![-1.0, 0.0]], vec![0, 1], 2)).unwrap();
        let sb = between_scatter(&s).unwrap();
        assert!(max_abs(&(sb.matrix() - diag(&[1.0, 0.0]))) < 1e-12);

        // means e₁, e₂ around a zero global mean needs a third balancing class
        let s = ClassStatistics {
            class_means: vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 1.0])],
            global_mean: DVector::zeros(2),
            class_counts: vec![1, 1],
            norm_b: 0.0,
            norm_a: 2.0,
            per_class_norm: vec![0.0, 0.0],
        };
        let sb = between_scatter(&s).unwrap();
        assert!(max_abs(&(sb.matrix() - diag(&[0.5, 0.5]))) < 1e-12);
    }

    #[test]
    fn within_scatter_examples() {
        let d = ds(vec![vec![2.0, 1.0], vec![2.0, -1.0]], vec![0, 0], 1);
        let s = class_statistics(&d).unwrap();
        let sw = within_scatter(&d, &s).unwrap();
        assert!(max_abs(&(sw.matrix() - diag(&[0.0, 1.0]))) < 1e-12);

        let d = ds(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0], vec![0.0, 0.0]],
            vec![0, 0, 0, 0, 0],
            1,
        );
        let s = class_statistics(&d).unwrap();
        let sw = within_scatter(&d, &s).unwrap();
        assert!(max_abs(&(sw.matrix() - diag(&[0.5, 0.5]))) < 1e-12);

        let d = ds(vec![vec![1.0], vec![1.0]], vec![0, 1], 2);
        let s = class_statistics(&d).unwrap();
        assert!(matches!(within_scatter(&d, &s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn class_covariance_examples() {
        let d = ds(
            vec![vec![4.0, 1.0], vec![2.0, 1.0], vec![0.0, 0.0]],
            vec![0, 0, 1],
            2,
        );
        let s = class_statistics(&d).unwrap();
        let cov = class_covariance_operator(&d, &s, 0).unwrap();
        assert!(max_abs(&(cov.matrix() - diag(&[1.0, 0.0]))) < 1e-12);
        assert!(matches!(
            class_covariance_operator(&d, &s, 1),
            Err(Error::Degenerate(_))
        ));

        // deviations ±e₁ and ±2e₂ give squared-norm weights 1:4
        let d = ds(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 2.0], vec![0.0, -2.0]],
            vec![0, 0, 0, 0],
            1,
        );
        let s = class_statistics(&d).unwrap();
        let cov = class_covariance_operator(&d, &s, 0).unwrap();
        assert!(max_abs(&(cov.matrix() - diag(&[0.2, 0.8]))) < 1e-12);
    }

    #[test]
    fn superposition_examples() {
        let v = DVector::from_vec(vec![3.0, 4.0]);
        let psi = weighted_superposition(&[v]).unwrap();
        assert!((psi[0].re - 0.6).abs() < 1e-15 && (psi[1].re - 0.8).abs() < 1e-15);

        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let psi = weighted_superposition(&[e1.clone(), e1.clone()]).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let want = [h, 0.0, h, 0.0];
        assert!(psi.iter().zip(want).all(|(z, w)| (z.re - w).abs() < 1e-15));

        let psi = weighted_superposition(&[e1, DVector::from_vec(vec![0.0, 2.0])]).unwrap();
        // index-register amplitudes are the block norms
        let a0 = (psi[0].norm_sqr() + psi[1].norm_sqr()).sqrt();
        let a1 = (psi[2].norm_sqr() + psi[3].norm_sqr()).sqrt();
        assert!((a0 - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert!((a1 - 2.0 / 5f64.sqrt()).abs() < 1e-15);

        assert!(weighted_superposition(&[DVector::zeros(2)]).is_err());
    }

    fn random_dataset(seed: u64, n: usize, k: usize, per_class: usize) -> LabeledDataset {
        let mut r = rng(seed);
        let mut samples = vec![];
        let mut labels = vec![];
        for c in 0..k {
            let centre: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
            for _ in 0..per_class {
                samples.push(centre.iter().map(|m| m + r.random_range(-1.0..1.0)).collect());
                labels.push(c);
            }
        }
        ds(samples, labels, k)
    }

    #[test]
    fn scale_bridge_to_classical_scatter() {
        for seed in 0..10 {
            let d = random_dataset(seed, 4, 3, 6);
            let s = class_statistics(&d).unwrap();
            let sw = within_scatter(&d, &s).unwrap();
            let sb = between_scatter(&s).unwrap();
            let cw = classical_within_scatter(&d, &s).map(c64);
            let cb = classical_between_scatter(&s).map(c64);
            assert!(max_abs(&(sw.matrix() * c64(s.norm_b) - cw)) < 1e-9);
            assert!(max_abs(&(sb.matrix() * c64(s.norm_a) - cb)) < 1e-9);
        }
    }

    #[test]
    fn superposition_pathway_matches_full_projector_trace() {
        // oracle: build the full projector and use the generic partial trace
        let d = random_dataset(5, 3, 4, 5);
        let s = class_statistics(&d).unwrap();
        let diffs: Vec<_> = s.class_means.iter().map(|m| m - &s.global_mean).collect();
        let psi = weighted_superposition(&diffs).unwrap();
        let full = DensityOperator::pure(&psi).unwrap();
        let red = crate::linalg::partial_trace(&full, (diffs.len(), 3), crate::linalg::Subsystem::First)
            .unwrap();
        let sb = between_scatter(&s).unwrap();
        assert!(max_abs(&(red.matrix() - sb.matrix())) < 1e-10);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            #[test]
            fn scatter_operators_are_densities(seed in 0u64..1_000_000, n in 2usize..6, k in 2usize..5) {
                let d = random_dataset(seed, n, k, 4);
                let s = class_statistics(&d).unwrap();
                let sb = between_scatter(&s).unwrap();
                let sw = within_scatter(&d, &s).unwrap();
                for rho in [&sb, &sw] {
                    prop_assert!((rho.as_hermitian().trace() - 1.0).abs() < 1e-9);
                    prop_assert!(rho.eig().eigenvalues.last().unwrap() > &-1e-10);
                }
                prop_assert!(s.norm_a >= 0.0 && s.norm_b >= 0.0);
                prop_assert_eq!(s.class_counts.iter().sum::<usize>(), d.len());
            }

            #[test]
            fn balanced_between_scatter_rank(seed in 0u64..1_000_000, k in 2usize..4) {
                let d = random_dataset(seed, 5, k, 3);
                let s = class_statistics(&d).unwrap();
                let e = between_scatter(&s).unwrap().eig();
                for l in &e.eigenvalues[k - 1..] {
                    prop_assert!(l.abs() < 1e-9);
                }
            }
        }
    }
}
