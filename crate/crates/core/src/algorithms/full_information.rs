use alloc::vec::Vec;

use super::{farthest_pair, Branch, Learner, Outcome, StepReport, Survivors};
use crate::error::{invalid, Error, Result};
use crate::instance::ExpertOracle;
use crate::loss::LossSpec;
use crate::prediction::Prediction;
use crate::round::{Observation, Round};
use crate::stats::{check_delta, confidence_log, PairStats};

/// Batch rule with every expert observed every round. Nothing is eliminated
/// while rounds accumulate; the candidate set is computed once, at a fixed
/// confidence level, when the learner is finalized.
#[derive(Clone, Debug)]
pub struct FullInformation {
    loss: LossSpec,
    delta: f64,
    stats: PairStats,
    all: Survivors,
    report: StepReport,
}

impl FullInformation {
    pub fn new(experts: usize, delta: f64, loss: LossSpec) -> Result<Self> {
        check_delta(delta)?;
        if experts == 0 {
            return Err(invalid("experts", 0.0, "need at least one expert"));
        }
        Ok(Self {
            loss,
            delta,
            stats: PairStats::new(experts),
            all: Survivors::new(experts),
            report: StepReport::default(),
        })
    }

    // The oracle's round index need not start at ours; keep our own count.
    fn absorb(&mut self, obs: &Observation) {
        let t = self.stats.round() + 1;
        self.stats.observe(obs, &self.loss);
        self.stats.set_round(t);
        self.report.t = t;
        self.report.queried.clear();
        self.report.queried.extend_from_slice(obs.queried());
        self.report.survivors = self.all.len();
        self.report.queries_used = t * self.all.len() as u64;
    }

    /// Experts `j` with `Delta_ij <= 0` for every `i`, at `T` = rounds seen.
    pub fn candidates(&self) -> Result<Vec<usize>> {
        let t = self.stats.round();
        if t == 0 {
            return Err(Error::NoRounds);
        }
        let k = self.stats.experts();
        let log_term = confidence_log(self.delta, k);
        let set: Vec<usize> = (0..k)
            .filter(|&j| (0..k).all(|i| self.stats.statistic(i, j, t, log_term, &self.loss) <= 0.0))
            .collect();
        if set.is_empty() {
            return Err(Error::Internal("every expert failed a test"));
        }
        Ok(set)
    }
}

impl Learner for FullInformation {
    fn experts(&self) -> usize {
        self.stats.experts()
    }

    fn survivors(&self) -> &[usize] {
        self.all.list()
    }

    fn is_alive(&self, _i: usize) -> bool {
        true
    }

    fn stats(&self) -> &PairStats {
        &self.stats
    }

    fn queries_used(&self) -> u64 {
        self.report.queries_used
    }

    fn step<O: ExpertOracle + ?Sized>(&mut self, oracle: &mut O) -> bool {
        let obs = oracle.query(self.all.list());
        self.absorb(obs);
        true
    }

    fn last_step(&self) -> &StepReport {
        &self.report
    }

    fn finalize(&self) -> Result<Outcome> {
        let survivors = self.candidates()?;
        let (k, j) = farthest_pair(&self.stats, &survivors);
        Ok(Outcome {
            prediction: Prediction::midpoint(k, j),
            branch: Branch::Midpoint,
            survivors,
        })
    }
}

/// Runs the full-information rule on a batch of complete rounds.
pub fn full_information_rule(rounds: &[Round], delta: f64, loss: &LossSpec) -> Result<Prediction> {
    let first = rounds.first().ok_or(Error::NoRounds)?;
    let k = first.experts();
    let all: Vec<usize> = (0..k).collect();
    let mut learner = FullInformation::new(k, delta, *loss)?;
    for round in rounds {
        if round.experts() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: round.experts(),
            });
        }
        if round.dim() != loss.dim() {
            return Err(Error::DimensionMismatch {
                expected: loss.dim(),
                actual: round.dim(),
            });
        }
        learner.absorb(&Observation::from_round(round, &all)?);
    }
    Ok(learner.finalize()?.prediction)
}
