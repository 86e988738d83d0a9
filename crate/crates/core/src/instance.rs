//! Stochastic environments and the query gate learners talk to.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::loss::LossSpec;
use crate::math;
use crate::prediction::Prediction;
use crate::round::{Observation, Round};

/// A sampleable joint law of `(Y, F_1, .., F_K)`.
pub trait Instance {
    fn experts(&self) -> usize;

    fn loss(&self) -> &LossSpec;

    fn dim(&self) -> usize {
        self.loss().dim()
    }

    /// Overwrites `round` with a fresh i.i.d. draw stamped with index `t`.
    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, t: u64, round: &mut Round);

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, t: u64) -> Round {
        let mut round = Round::zeroed(self.experts(), self.dim());
        self.sample_into(rng, t, &mut round);
        round
    }

    /// Closed-form second moments, when the instance has them.
    fn moments(&self) -> Option<&Moments> {
        None
    }
}

/// Second moments `E<U, V>` over `U, V in {Y, F_1, .., F_K}` for the squared
/// loss. Index 0 is the target, index `i + 1` is expert `i`.
///
/// These determine every risk of a convex combination exactly:
/// `E|Y - sum w_i F_i|^2 = G_yy - 2 sum w_i G_yi + sum w_i w_j G_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    experts: usize,
    gram: Vec<f64>,
}

impl Moments {
    /// `gram` is the symmetric `(K + 1) x (K + 1)` matrix, row-major.
    pub fn from_gram(experts: usize, gram: Vec<f64>) -> Result<Self> {
        let n = experts + 1;
        if gram.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                actual: gram.len(),
            });
        }
        for a in 0..n {
            for b in 0..a {
                if math::abs(gram[a * n + b] - gram[b * n + a]) > 1e-12 {
                    return Err(Error::Infeasible("moment matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self { experts, gram })
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    #[inline]
    fn g(&self, a: usize, b: usize) -> f64 {
        self.gram[a * (self.experts + 1) + b]
    }

    /// `R_i = E|Y - F_i|^2`.
    pub fn risk(&self, i: usize) -> f64 {
        self.g(0, 0) - 2.0 * self.g(0, i + 1) + self.g(i + 1, i + 1)
    }

    pub fn risks(&self) -> Vec<f64> {
        (0..self.experts).map(|i| self.risk(i)).collect()
    }

    /// `R* = min_i R_i`.
    pub fn optimal_risk(&self) -> f64 {
        self.risks().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// `d_ij^2 = E|F_i - F_j|^2`.
    pub fn distance_sq(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let v = self.g(i + 1, i + 1) + self.g(j + 1, j + 1) - 2.0 * self.g(i + 1, j + 1);
        v.max(0.0)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        math::sqrt(self.distance_sq(i, j))
    }

    /// Exact risk of a convex combination of experts.
    pub fn combination_risk(&self, p: &Prediction) -> Result<f64> {
        let mut risk = self.g(0, 0);
        for (i, wi) in p.iter() {
            if i >= self.experts {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    experts: self.experts,
                });
            }
            risk -= 2.0 * wi * self.g(0, i + 1);
            for (j, wj) in p.iter() {
                risk += wi * wj * self.g(i + 1, j + 1);
            }
        }
        Ok(risk)
    }
}

/// How a risk is evaluated: exactly from moments, or by Monte-Carlo.
pub enum RiskEvaluation<'r, R: Rng + ?Sized> {
    ClosedForm,
    MonteCarlo { samples: usize, rng: &'r mut R },
}

/// A risk value and its standard error (zero for closed-form values).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte-Carlo estimate of `E l(sum w_i F_i, Y)` from `samples` draws.
pub fn monte_carlo_risk<I: Instance, R: Rng + ?Sized>(
    instance: &I,
    p: &Prediction,
    samples: usize,
    rng: &mut R,
) -> Result<RiskEstimate> {
    if samples < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            got: samples,
        });
    }
    let dim = instance.dim();
    let loss = instance.loss();
    let mut round = Round::zeroed(instance.experts(), dim);
    let mut x = vec![0.0; dim];
    // Welford.
    let (mut mean, mut m2) = (0.0, 0.0);
    for n in 1..=samples {
        instance.sample_into(rng, n as u64, &mut round);
        p.predict_into(round.advice(), dim, &mut x)?;
        let v = loss.eval_unchecked(&x, round.target());
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok(RiskEstimate {
        value: mean,
        std_error: math::sqrt(var / samples as f64),
    })
}

/// The interface a learner queries each round. Implementations must expose
/// the advice of the requested experts only.
pub trait ExpertOracle {
    fn experts(&self) -> usize;

    fn dim(&self) -> usize;

    /// Draws the next round and reveals the target and the advice of
    /// `experts`. Indices must be in range.
    fn query(&mut self, experts: &[usize]) -> &Observation;

    /// Rounds drawn so far.
    fn rounds(&self) -> u64;
}

/// An oracle backed by i.i.d. draws from an [`Instance`]. The full joint
/// draw stays private; only the queried coordinates are copied out.
pub struct SampledOracle<'a, I, R> {
    instance: &'a I,
    rng: R,
    round: Round,
    observation: Observation,
    t: u64,
}

impl<'a, I: Instance, R: Rng> SampledOracle<'a, I, R> {
    pub fn new(instance: &'a I, rng: R) -> Self {
        let round = Round::zeroed(instance.experts(), instance.dim());
        let observation = Observation::from_round(&round, &[]).expect("empty query");
        Self {
            instance,
            rng,
            round,
            observation,
            t: 0,
        }
    }

    pub fn into_rng(self) -> R {
        self.rng
    }
}

impl<I: Instance, R: Rng> ExpertOracle for SampledOracle<'_, I, R> {
    fn experts(&self) -> usize {
        self.instance.experts()
    }

    fn dim(&self) -> usize {
        self.instance.dim()
    }

    fn query(&mut self, experts: &[usize]) -> &Observation {
        self.t += 1;
        self.instance.sample_into(&mut self.rng, self.t, &mut self.round);
        self.observation
            .fill_from(&self.round, experts)
            .expect("queried expert index out of range");
        &self.observation
    }

    fn rounds(&self) -> u64 {
        self.t
    }
}
