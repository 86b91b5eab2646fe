//! Probability vectors over `C` classes and the seeded randomness used
//! throughout the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{LlpError, Result};

/// Absolute tolerance on `|sum - 1|` accepted by [`make_simplex`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// A validated probability vector: non-negative, summing to one, `C >= 2`.
///
/// Holds ground-truth bag proportions, predicted proportions and per-instance
/// class distributions. Class indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexVector {
    values: Vec<f64>,
}

impl SimplexVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(LlpError::TooFewClasses(values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LlpError::NonFiniteInput);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(LlpError::NegativeComponent { index, value });
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(LlpError::SumNotOne { sum });
        }
        Ok(Self { values })
    }

    /// Uniform distribution over `num_classes` classes.
    pub fn uniform(num_classes: usize) -> Result<Self> {
        Self::new(vec![1.0 / num_classes as f64; num_classes])
    }

    /// Point mass on `class`.
    pub fn vertex(class: usize, num_classes: usize) -> Result<Self> {
        if class >= num_classes {
            return Err(LlpError::LabelOutOfRange { label: class, num_classes });
        }
        let mut values = vec![0.0; num_classes];
        values[class] = 1.0;
        Self::new(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn num_classes(&self) -> usize {
        self.values.len()
    }

    /// Index of the largest component, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate().skip(1) {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }
}

impl<'de> Deserialize<'de> for SimplexVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(deserializer)?;
        SimplexVector::new(values).map_err(serde::de::Error::custom)
    }
}

/// Validate `values` as a probability vector. Never renormalizes.
pub fn make_simplex(values: &[f64]) -> Result<SimplexVector> {
    SimplexVector::new(values.to_vec())
}

/// Seed for a deterministic random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Child seed for stream `index`, e.g. the bag shuffle of one epoch.
    ///
    /// SplitMix64 finalizer over the pair; stable across platforms and
    /// compiler versions, unlike `std::hash`.
    pub fn derive(self, index: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

/// Draw from Dirichlet(1, ..., 1), the uniform law on the simplex, by
/// normalizing i.i.d. unit exponentials.
pub fn sample_uniform_simplex<R: Rng + ?Sized>(rng: &mut R, num_classes: usize) -> Vec<f64> {
    let mut draws: Vec<f64> = (0..num_classes).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    for d in &mut draws {
        *d /= total;
    }
    draws
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_uniform_and_vertex() {
        assert!(make_simplex(&[0.5, 0.5]).is_ok());
        assert!(make_simplex(&[1.0, 0.0]).is_ok());
    }

    #[test]
    fn rejects_bad_sum_without_renormalizing() {
        match make_simplex(&[0.6, 0.5]) {
            Err(LlpError::SumNotOne { sum }) => assert!((sum - 1.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_and_single_class() {
        assert!(matches!(
            make_simplex(&[1.5, -0.5]),
            Err(LlpError::NegativeComponent { index: 1, .. })
        ));
        assert!(matches!(make_simplex(&[1.0]), Err(LlpError::TooFewClasses(1))));
        assert!(matches!(make_simplex(&[f64::NAN, 1.0]), Err(LlpError::NonFiniteInput)));
    }

    #[test]
    fn tolerance_is_absolute_1e9() {
        assert!(make_simplex(&[0.5 + 5e-10, 0.5]).is_ok());
        assert!(make_simplex(&[0.5 + 2e-9, 0.5]).is_err());
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(make_simplex(&[0.5, 0.5]).unwrap().argmax(), 0);
        assert_eq!(make_simplex(&[0.2, 0.8]).unwrap().argmax(), 1);
    }

    #[test]
    fn derived_seeds_differ() {
        let s = RngSeed(7);
        assert_ne!(s.derive(0), s.derive(1));
        assert_eq!(s.derive(3), RngSeed(7).derive(3));
    }

    #[test]
    fn dirichlet_samples_are_simplex() {
        let mut rng = RngSeed(1).rng();
        for c in 2..6 {
            let v = sample_uniform_simplex(&mut rng, c);
            assert!(make_simplex(&v).is_ok());
        }
    }
}
