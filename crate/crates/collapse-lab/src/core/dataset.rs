//! Scalar samples and the accumulating, generation-tagged dataset.

use thiserror::Error;

/// Errors from constructing or growing the core data types.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("sample value must be finite, got {0}")]
    NonFiniteSample(f64),
    #[error("coordinate {index} must be finite, got {value}")]
    NonFiniteCoord { index: usize, value: f64 },
    #[error("samples per generation must be positive")]
    ZeroSamplesPerGeneration,
    #[error("generation-order violation: expected generation {expected}, got {got}")]
    GenerationOrder { expected: usize, got: usize },
    #[error("sample count mismatch: expected {expected} samples, got {got}")]
    SampleCountMismatch { expected: usize, got: usize },
}

/// A single scalar observation. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Sample(f64);

impl Sample {
    pub fn new(value: f64) -> Result<Self, CoreError> {
        if value.is_finite() {
            Ok(Sample(value))
        } else {
            Err(CoreError::NonFiniteSample(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Samples pooled across generations `0..=T`, in insertion order.
///
/// Every generation holds exactly `n` samples, so the generation of the
/// sample at index `i` is `i / n` and the three structural invariants
/// (non-decreasing generation tags, exactly `n` per generation, total size
/// `(T+1)*n`) hold by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    values: Vec<Sample>,
}

impl Dataset {
    /// Empty dataset expecting `n` samples per generation.
    pub fn new(n: usize) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::ZeroSamplesPerGeneration);
        }
        Ok(Dataset {
            n,
            values: Vec::new(),
        })
    }

    /// Appends one generation of samples tagged `t`, consuming the dataset
    /// and returning the grown one.
    ///
    /// `t` must be the next unseen generation index and `new_samples` must
    /// hold exactly `n` values.
    pub fn accumulate(mut self, new_samples: &[Sample], t: usize) -> Result<Self, CoreError> {
        let expected = self.generation_count();
        if t != expected {
            return Err(CoreError::GenerationOrder { expected, got: t });
        }
        if new_samples.len() != self.n {
            return Err(CoreError::SampleCountMismatch {
                expected: self.n,
                got: new_samples.len(),
            });
        }
        self.values.extend_from_slice(new_samples);
        Ok(self)
    }

    /// Samples per generation.
    pub fn samples_per_generation(&self) -> usize {
        self.n
    }

    /// Total number of pooled samples.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of generations accumulated so far.
    pub fn generation_count(&self) -> usize {
        self.values.len() / self.n
    }

    /// Largest generation tag present, or `None` while empty.
    pub fn max_generation(&self) -> Option<usize> {
        self.generation_count().checked_sub(1)
    }

    /// Generation tag of the sample at `index`.
    pub fn generation_of(&self, index: usize) -> usize {
        index / self.n
    }

    /// All pooled samples in insertion order.
    pub fn samples(&self) -> &[Sample] {
        &self.values
    }

    /// The samples of one generation.
    pub fn generation(&self, t: usize) -> Option<&[Sample]> {
        let start = t.checked_mul(self.n)?;
        let end = start + self.n;
        self.values.get(start..end)
    }

    /// Raw values in insertion order.
    pub fn iter_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(|s| s.value())
    }

    /// Raw values collected into a vector, for hot numeric loops.
    pub fn values_vec(&self) -> Vec<f64> {
        self.values.iter().map(|s| s.value()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(values: &[f64]) -> Vec<Sample> {
        values.iter().map(|&v| Sample::new(v).unwrap()).collect()
    }

    #[test]
    fn sample_rejects_non_finite() {
        assert!(Sample::new(f64::NAN).is_err());
        assert!(Sample::new(f64::INFINITY).is_err());
        assert_eq!(Sample::new(0.5).unwrap().value(), 0.5);
    }

    #[test]
    fn accumulate_base_case() {
        let d = Dataset::new(1).unwrap();
        let d = d.accumulate(&samples(&[0.5]), 0).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.max_generation(), Some(0));
    }

    #[test]
    fn accumulate_rejects_generation_gap() {
        let d = Dataset::new(1).unwrap();
        let err = d.accumulate(&samples(&[0.5]), 2).unwrap_err();
        assert_eq!(err, CoreError::GenerationOrder { expected: 0, got: 2 });
    }

    #[test]
    fn accumulate_rejects_wrong_count() {
        let d = Dataset::new(2).unwrap();
        let err = d.accumulate(&samples(&[0.5]), 0).unwrap_err();
        assert_eq!(
            err,
            CoreError::SampleCountMismatch {
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn four_generations_of_five() {
        let mut d = Dataset::new(5).unwrap();
        for t in 0..4 {
            d = d.accumulate(&samples(&[0.1, 0.2, 0.3, 0.4, 0.5]), t).unwrap();
        }
        assert_eq!(d.len(), 20);
        assert_eq!(d.generation_count(), 4);
        assert_eq!(d.generation_of(14), 2);
        assert_eq!(d.generation(3).unwrap().len(), 5);
        assert!(d.generation(4).is_none());
    }
}
