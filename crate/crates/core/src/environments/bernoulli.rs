use alloc::vec;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::instance::{Instance, Moments};
use crate::loss::LossSpec;
use crate::round::Round;

/// How the two Bernoulli experts are generated. Throughout,
/// `a- = (1 - eps) / 2` and `a+ = (1 + eps) / 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// `Y = 0`, `F_1 = 1{U <= a-}`, `F_2 = 1{U <= a+}` with a shared uniform
    /// `U`. Single-expert queries cannot reveal the coupling.
    Coupled,
    /// `Y = 0` and independent experts with the same marginals as `Coupled`.
    Independent,
    /// `F_1 = 0`, `F_2 = 1`, `Y ~ Bernoulli(a-)`.
    ConstantExperts,
}

/// Two-expert instances where the better expert is hard to identify. With
/// `flipped`, the roles of `a-` and `a+` are exchanged.
#[derive(Clone, Debug)]
pub struct BernoulliTwoExpert {
    epsilon: f64,
    construction: Construction,
    flipped: bool,
    loss: LossSpec,
    moments: Moments,
}

impl BernoulliTwoExpert {
    pub fn new(epsilon: f64, construction: Construction, flipped: bool) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid("epsilon", epsilon, "must lie in (0, 1)"));
        }
        let (lo, hi) = ((1.0 - epsilon) / 2.0, (1.0 + epsilon) / 2.0);
        let (a1, a2) = if flipped { (hi, lo) } else { (lo, hi) };
        // Rows/columns: Y, F_1, F_2.
        let gram = match construction {
            Construction::Coupled => vec![0.0, 0.0, 0.0, 0.0, a1, lo, 0.0, lo, a2],
            Construction::Independent => vec![0.0, 0.0, 0.0, 0.0, a1, a1 * a2, 0.0, a1 * a2, a2],
            Construction::ConstantExperts => {
                let p = a1;
                vec![p, 0.0, p, 0.0, 0.0, 0.0, p, 0.0, 1.0]
            }
        };
        Ok(Self {
            epsilon,
            construction,
            flipped,
            loss: LossSpec::squared_unit_interval(),
            moments: Moments::from_gram(2, gram)?,
        })
    }

    pub fn coupled(epsilon: f64, flipped: bool) -> Result<Self> {
        Self::new(epsilon, Construction::Coupled, flipped)
    }

    pub fn independent(epsilon: f64, flipped: bool) -> Result<Self> {
        Self::new(epsilon, Construction::Independent, flipped)
    }

    pub fn constant_experts(epsilon: f64, flipped: bool) -> Result<Self> {
        Self::new(epsilon, Construction::ConstantExperts, flipped)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn flipped(&self) -> bool {
        self.flipped
    }

    pub fn alpha_minus(&self) -> f64 {
        (1.0 - self.epsilon) / 2.0
    }

    pub fn alpha_plus(&self) -> f64 {
        (1.0 + self.epsilon) / 2.0
    }

    /// Success probabilities `(a_1, a_2)` of the two experts (for
    /// `ConstantExperts`, `a_1` is the target mean).
    pub fn parameters(&self) -> (f64, f64) {
        let (lo, hi) = (self.alpha_minus(), self.alpha_plus());
        if self.flipped {
            (hi, lo)
        } else {
            (lo, hi)
        }
    }

    /// Expert values of the coupled construction for a given latent `u`.
    pub fn coupled_advice(&self, u: f64) -> (f64, f64) {
        let (a1, a2) = self.parameters();
        (indicator(u <= a1), indicator(u <= a2))
    }
}

#[inline]
fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// The two-expert lower-bound instance: `coupled` selects the shared-latent
/// construction, otherwise constant experts with a Bernoulli target.
pub fn make_two_expert_bernoulli(epsilon: f64, coupled: bool, flipped: bool) -> Result<BernoulliTwoExpert> {
    let construction = if coupled {
        Construction::Coupled
    } else {
        Construction::ConstantExperts
    };
    BernoulliTwoExpert::new(epsilon, construction, flipped)
}

impl Instance for BernoulliTwoExpert {
    fn experts(&self) -> usize {
        2
    }

    fn loss(&self) -> &LossSpec {
        &self.loss
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, t: u64, round: &mut Round) {
        let (a1, a2) = self.parameters();
        let (slot, target, advice) = round.parts_mut();
        *slot = t;
        match self.construction {
            Construction::Coupled => {
                let (f1, f2) = self.coupled_advice(rng.gen::<f64>());
                target[0] = 0.0;
                advice[0] = f1;
                advice[1] = f2;
            }
            Construction::Independent => {
                target[0] = 0.0;
                advice[0] = indicator(rng.gen::<f64>() <= a1);
                advice[1] = indicator(rng.gen::<f64>() <= a2);
            }
            Construction::ConstantExperts => {
                target[0] = indicator(rng.gen::<f64>() < a1);
                advice[0] = 0.0;
                advice[1] = 1.0;
            }
        }
    }

    fn moments(&self) -> Option<&Moments> {
        Some(&self.moments)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prediction::Prediction;
    use crate::rng::{substream, Purpose};

    fn close(a: f64, b: f64) -> bool {
        libm::fabs(a - b) <= 1e-12
    }

    #[test]
    fn coupled_thresholds() {
        let b = BernoulliTwoExpert::coupled(0.4, false).unwrap();
        assert_eq!(b.coupled_advice(0.2), (1.0, 1.0));
        assert_eq!(b.coupled_advice(0.5), (0.0, 1.0));
        assert_eq!(b.coupled_advice(0.9), (0.0, 0.0));
        let f = BernoulliTwoExpert::coupled(0.4, true).unwrap();
        assert_eq!(f.coupled_advice(0.5), (1.0, 0.0));
    }

    // Brute force over the atoms (1,1), (0,1), (0,0) of the coupled pair,
    // with probabilities a-, eps, 1 - a+.
    #[test]
    fn coupled_moments_match_atoms() {
        for &eps in &[0.4, 0.1, 0.73] {
            let b = BernoulliTwoExpert::coupled(eps, false).unwrap();
            let lo = (1.0 - eps) / 2.0;
            let hi = (1.0 + eps) / 2.0;
            let atoms = [((1.0, 1.0), lo), ((0.0, 1.0), eps), ((0.0, 0.0), 1.0 - hi)];
            let r1: f64 = atoms.iter().map(|((a, _), p)| p * a * a).sum();
            let r2: f64 = atoms.iter().map(|((_, c), p)| p * c * c).sum();
            let d2: f64 = atoms.iter().map(|((a, c), p)| p * (a - c) * (a - c)).sum();
            let m = b.moments().unwrap();
            assert!(close(m.risk(0), r1));
            assert!(close(m.risk(1), r2));
            assert!(close(m.distance_sq(0, 1), d2));
            assert!(close(m.optimal_risk(), lo));
        }
        let b = BernoulliTwoExpert::coupled(0.4, false).unwrap();
        let m = b.moments().unwrap();
        assert!(close(m.risk(0), 0.3) && close(m.risk(1), 0.7) && close(m.distance_sq(0, 1), 0.4));
    }

    #[test]
    fn vanishing_epsilon_is_symmetric() {
        let b = BernoulliTwoExpert::coupled(1e-9, false).unwrap();
        let m = b.moments().unwrap();
        assert!(libm::fabs(m.risk(0) - 0.5) < 1e-9);
        assert!(libm::fabs(m.risk(1) - 0.5) < 1e-9);
        assert!(m.distance_sq(0, 1) < 1e-8);
    }

    #[test]
    fn flipping_swaps_risks() {
        let m = BernoulliTwoExpert::coupled(0.4, true).unwrap().moments().unwrap().clone();
        assert!(close(m.risk(0), 0.7) && close(m.risk(1), 0.3));
        let m = BernoulliTwoExpert::constant_experts(0.4, false).unwrap().moments().unwrap().clone();
        assert!(close(m.risk(0), 0.3) && close(m.risk(1), 0.7));
        assert!(close(m.combination_risk(&Prediction::midpoint(0, 1)).unwrap(), 0.25));
    }

    #[test]
    fn constant_experts_are_constant() {
        let b = make_two_expert_bernoulli(0.2, false, false).unwrap();
        let mut rng = substream(9, 0, Purpose::Environment);
        for t in 1..200 {
            let r = b.sample(&mut rng, t);
            assert_eq!(r.advice(), &[0.0, 1.0]);
        }
    }

    #[test]
    fn epsilon_range_is_checked() {
        assert!(make_two_expert_bernoulli(0.0, true, false).is_err());
        assert!(make_two_expert_bernoulli(1.0, true, false).is_err());
    }
}
