use nalgebra::DVector;

use crate::error::{Error, Result};

/// `M` real feature vectors of dimension `N`, each labelled with one of `k` classes.
///
/// Class labels are zero-based (`0..k`). Every class must own at least one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    samples: Vec<DVector<f64>>,
    labels: Vec<usize>,
    num_classes: usize,
    feature_names: Vec<String>,
    class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(samples: Vec<Vec<f64>>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidParameter("dataset has no samples".into()));
        }
        if samples.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: samples.len(),
                found: labels.len(),
            });
        }
        let dim = samples[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("feature dimension must be positive".into()));
        }
        for (j, s) in samples.iter().enumerate() {
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.len(),
                });
            }
            if s.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter(format!("sample {j} has a non-finite entry")));
            }
        }
        let mut counts = vec![0usize; num_classes];
        for &l in &labels {
            if l >= num_classes {
                return Err(Error::InvalidParameter(format!(
                    "label {l} outside 0..{num_classes}"
                )));
            }
            counts[l] += 1;
        }
        if let Some(c) = counts.iter().position(|&n| n == 0) {
            return Err(Error::Degenerate(format!("class {c} has no samples")));
        }
        Ok(Self {
            samples: samples.into_iter().map(DVector::from_vec).collect(),
            labels,
            num_classes,
            feature_names: (1..=dim).map(|i| format!("x{i}")).collect(),
            class_names: (1..=num_classes).map(|c| c.to_string()).collect(),
        })
    }

    pub fn with_names(mut self, features: Vec<String>, classes: Vec<String>) -> Result<Self> {
        if features.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: features.len(),
            });
        }
        if classes.len() != self.num_classes {
            return Err(Error::DimensionMismatch {
                expected: self.num_classes,
                found: classes.len(),
            });
        }
        self.feature_names = features;
        self.class_names = classes;
        Ok(self)
    }

    /// Feature dimension `N`.
    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    /// Sample count `M`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn samples(&self) -> &[DVector<f64>] {
        &self.samples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sample(&self, j: usize) -> &DVector<f64> {
        &self.samples[j]
    }

    pub fn label(&self, j: usize) -> usize {
        self.labels[j]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self, c: usize) -> usize {
        self.labels.iter().filter(|&&l| l == c).count()
    }

    pub fn class_members(&self, c: usize) -> impl Iterator<Item = &DVector<f64>> + '_ {
        self.samples
            .iter()
            .zip(&self.labels)
            .filter(move |(_, &l)| l == c)
            .map(|(s, _)| s)
    }

    /// Same labels, new feature vectors (used by projections and feature maps).
    pub fn map_samples<F>(&self, names: Vec<String>, f: F) -> Result<Self>
    where
        F: Fn(&DVector<f64>) -> Vec<f64>,
    {
        let samples = self.samples.iter().map(f).collect();
        Self::new(samples, self.labels.clone(), self.num_classes)?
            .with_names(names, self.class_names.clone())
    }

    /// Splits into the samples whose position satisfies `keep` and the rest.
    pub fn split<F: Fn(usize) -> bool>(&self, keep: F) -> Result<(Self, Self)> {
        let (mut a, mut b) = ((vec![], vec![]), (vec![], vec![]));
        for (j, (s, &l)) in self.samples.iter().zip(&self.labels).enumerate() {
            let dst = if keep(j) { &mut a } else { &mut b };
            dst.0.push(s.as_slice().to_vec());
            dst.1.push(l);
        }
        let first = Self::new(a.0, a.1, self.num_classes)?
            .with_names(self.feature_names.clone(), self.class_names.clone())?;
        let second = Self::new(b.0, b.1, self.num_classes)?
            .with_names(self.feature_names.clone(), self.class_names.clone())?;
        Ok((first, second))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_class_and_ragged_rows() {
        assert!(matches!(
            LabeledDataset::new(vec![vec![1.0], vec![2.0]], vec![0, 0], 2),
            Err(Error::Degenerate(_))
        ));
        assert!(LabeledDataset::new(vec![vec![1.0], vec![2.0, 3.0]], vec![0, 1], 2).is_err());
        assert!(LabeledDataset::new(vec![vec![f64::NAN]], vec![0], 1).is_err());
    }

    #[test]
    fn class_accessors() {
        let d = LabeledDataset::new(vec![vec![1.0], vec![2.0], vec![3.0]], vec![0, 1, 0], 2).unwrap();
        assert_eq!(d.class_count(0), 2);
        assert_eq!(d.class_members(1).next().unwrap()[0], 2.0);
        // the tail keeps only class 0
        assert!(matches!(d.split(|j| j < 2), Err(Error::Degenerate(_))));
        let d = LabeledDataset::new(vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]], vec![0, 1, 0, 1], 2)
            .unwrap();
        let (a, b) = d.split(|j| j < 2).unwrap();
        assert_eq!((a.len(), b.len()), (2, 2));
    }
}
