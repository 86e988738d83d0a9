//! Convex combinations of experts.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A convex combination `sum_s w_s F_{support[s]}` of experts.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl Prediction {
    /// Validates a combination over `experts` experts: distinct indices in
    /// range, nonnegative weights summing to one.
    pub fn new(support: Vec<usize>, weights: Vec<f64>, experts: usize) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidPrediction("empty support"));
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidPrediction("support and weights differ in length"));
        }
        for (s, &i) in support.iter().enumerate() {
            if i >= experts {
                return Err(Error::IndexOutOfRange { index: i, experts });
            }
            if support[..s].contains(&i) {
                return Err(Error::InvalidPrediction("repeated expert in support"));
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidPrediction("negative or NaN weight"));
        }
        let total: f64 = weights.iter().sum();
        if crate::math::abs(total - 1.0) > WEIGHT_SUM_TOL {
            return Err(Error::InvalidPrediction("weights do not sum to one"));
        }
        Ok(Self { support, weights })
    }

    pub fn singleton(i: usize) -> Self {
        Self {
            support: vec![i],
            weights: vec![1.0],
        }
    }

    /// `(F_i + F_j) / 2`, collapsing to a singleton when `i == j`.
    pub fn midpoint(i: usize, j: usize) -> Self {
        if i == j {
            Self::singleton(i)
        } else {
            Self {
                support: vec![i, j],
                weights: vec![0.5, 0.5],
            }
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.support.len() == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    /// Evaluates the combination on row-major expert values `advice`
    /// (`dim` coordinates per expert).
    pub fn predict(&self, advice: &[f64], dim: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; dim];
        self.predict_into(advice, dim, &mut out)?;
        Ok(out)
    }

    pub fn predict_into(&self, advice: &[f64], dim: usize, out: &mut [f64]) -> Result<()> {
        if dim == 0 || !advice.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: advice.len(),
            });
        }
        if out.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: out.len(),
            });
        }
        let experts = advice.len() / dim;
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, w) in self.iter() {
            if i >= experts {
                return Err(Error::IndexOutOfRange { index: i, experts });
            }
            for (o, f) in out.iter_mut().zip(&advice[i * dim..(i + 1) * dim]) {
                *o += w * f;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn predict_examples() {
        let f = [0.3, 0.9];
        assert_eq!(Prediction::singleton(0).predict(&f, 1).unwrap(), vec![0.3]);
        let f = [0.0, 1.0];
        assert_eq!(Prediction::midpoint(0, 1).predict(&f, 1).unwrap(), vec![0.5]);
        let p = Prediction::new(vec![0, 1], vec![0.25, 0.75], 2).unwrap();
        assert_eq!(p.predict(&f, 1).unwrap(), vec![0.75]);
    }

    #[test]
    fn out_of_range_support_is_rejected() {
        assert_eq!(
            Prediction::new(vec![2], vec![1.0], 2),
            Err(Error::IndexOutOfRange {
                index: 2,
                experts: 2
            })
        );
        assert_eq!(
            Prediction::singleton(3).predict(&[0.0, 1.0], 1),
            Err(Error::IndexOutOfRange {
                index: 3,
                experts: 2
            })
        );
    }

    #[test]
    fn invalid_weights_are_rejected() {
        assert!(Prediction::new(vec![0, 1], vec![0.5, 0.6], 2).is_err());
        assert!(Prediction::new(vec![0, 1], vec![1.5, -0.5], 2).is_err());
        assert!(Prediction::new(vec![0, 0], vec![0.5, 0.5], 2).is_err());
        assert!(Prediction::new(vec![], vec![], 2).is_err());
    }

    #[test]
    fn midpoint_of_same_expert_is_singleton() {
        assert_eq!(Prediction::midpoint(4, 4), Prediction::singleton(4));
    }

    #[test]
    fn vector_valued_prediction() {
        let f = [0.0, 1.0, 1.0, 0.0];
        let p = Prediction::midpoint(0, 1);
        assert_eq!(p.predict(&f, 2).unwrap(), vec![0.5, 0.5]);
    }

    proptest! {
        #[test]
        fn permuting_support_with_weights_is_invariant(
            w in 0.0f64..=1.0, a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0,
        ) {
            let f = [a, b, c];
            let p = Prediction::new(vec![0, 2], vec![w, 1.0 - w], 3).unwrap();
            let q = Prediction::new(vec![2, 0], vec![1.0 - w, w], 3).unwrap();
            let lhs = p.predict(&f, 1).unwrap()[0];
            let rhs = q.predict(&f, 1).unwrap()[0];
            prop_assert!(libm::fabs(lhs - rhs) <= 1e-15);
        }

        #[test]
        fn prediction_is_linear_in_weights(w in 0.0f64..=1.0, a in -1.0f64..1.0, b in -1.0f64..1.0) {
            let f = [a, b];
            let p = Prediction::new(vec![0, 1], vec![w, 1.0 - w], 2).unwrap();
            let expected = w * a + (1.0 - w) * b;
            prop_assert!(libm::fabs(p.predict(&f, 1).unwrap()[0] - expected) <= 1e-15);
        }
    }
}
