//! Training rounds and the masked views learners receive.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One joint draw `(Y, F_1, .., F_K)`. Expert values are stored row-major,
/// `dim` coordinates per expert.
#[derive(Clone, Debug, PartialEq)]
pub struct Round {
    t: u64,
    target: Vec<f64>,
    advice: Vec<f64>,
    experts: usize,
}

impl Round {
    pub fn new(t: u64, target: Vec<f64>, advice: Vec<f64>, experts: usize) -> Result<Self> {
        let dim = target.len();
        if dim == 0 || experts == 0 {
            return Err(Error::InvalidPrediction("round needs a target and at least one expert"));
        }
        if advice.len() != dim * experts {
            return Err(Error::DimensionMismatch {
                expected: dim * experts,
                actual: advice.len(),
            });
        }
        Ok(Self {
            t,
            target,
            advice,
            experts,
        })
    }

    /// A scalar round (`dim = 1`).
    pub fn scalar(t: u64, target: f64, advice: &[f64]) -> Result<Self> {
        Self::new(t, vec![target], advice.to_vec(), advice.len())
    }

    pub(crate) fn zeroed(experts: usize, dim: usize) -> Self {
        Self {
            t: 0,
            target: vec![0.0; dim],
            advice: vec![0.0; dim * experts],
            experts,
        }
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn expert(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.advice[i * d..(i + 1) * d]
    }

    /// All expert values, row-major.
    pub fn advice(&self) -> &[f64] {
        &self.advice
    }

    /// Mutable access for samplers filling a reused buffer.
    pub fn parts_mut(&mut self) -> (&mut u64, &mut [f64], &mut [f64]) {
        (&mut self.t, &mut self.target, &mut self.advice)
    }
}

/// The part of a round a learner is allowed to see: the target and the
/// advice of the experts it queried, nothing else.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    t: u64,
    target: Vec<f64>,
    queried: Vec<usize>,
    values: Vec<f64>,
}

impl Observation {
    /// Restricts `round` to the experts in `queried`.
    pub fn from_round(round: &Round, queried: &[usize]) -> Result<Self> {
        let mut obs = Self {
            t: 0,
            target: Vec::new(),
            queried: Vec::new(),
            values: Vec::new(),
        };
        obs.fill_from(round, queried)?;
        Ok(obs)
    }

    pub(crate) fn fill_from(&mut self, round: &Round, queried: &[usize]) -> Result<()> {
        self.t = round.t();
        self.target.clear();
        self.target.extend_from_slice(round.target());
        self.queried.clear();
        self.values.clear();
        for &i in queried {
            if i >= round.experts() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    experts: round.experts(),
                });
            }
            self.queried.push(i);
            self.values.extend_from_slice(round.expert(i));
        }
        Ok(())
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    /// Queried expert indices, in query order.
    pub fn queried(&self) -> &[usize] {
        &self.queried
    }

    /// Advice of the `pos`-th queried expert.
    pub fn value(&self, pos: usize) -> &[f64] {
        let d = self.dim();
        &self.values[pos * d..(pos + 1) * d]
    }

    /// Advice of expert `i`, if it was queried.
    pub fn advice_of(&self, i: usize) -> Option<&[f64]> {
        self.queried
            .iter()
            .position(|&q| q == i)
            .map(|pos| self.value(pos))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.queried
            .iter()
            .enumerate()
            .map(move |(pos, &i)| (i, self.value(pos)))
    }
}
