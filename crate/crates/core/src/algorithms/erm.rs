use alloc::vec::Vec;

use super::{empirical_minimizer, Branch, Learner, Outcome, StepReport, Survivors};
use crate::error::{invalid, Error, Result};
use crate::instance::ExpertOracle;
use crate::loss::LossSpec;
use crate::prediction::Prediction;
use crate::stats::PairStats;

/// Comparator with one query per round: experts are queried round-robin
/// and the empirical risk minimizer is returned. Never eliminates.
#[derive(Clone, Debug)]
pub struct SingleQueryErm {
    loss: LossSpec,
    stats: PairStats,
    all: Survivors,
    report: StepReport,
}

impl SingleQueryErm {
    pub fn new(experts: usize, loss: LossSpec) -> Result<Self> {
        if experts == 0 {
            return Err(invalid("experts", 0.0, "need at least one expert"));
        }
        Ok(Self {
            loss,
            stats: PairStats::new(experts),
            all: Survivors::new(experts),
            report: StepReport::default(),
        })
    }
}

impl Learner for SingleQueryErm {
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
        self.stats.round()
    }

    fn step<O: ExpertOracle + ?Sized>(&mut self, oracle: &mut O) -> bool {
        let t = self.stats.round() + 1;
        let i = ((t - 1) % self.stats.experts() as u64) as usize;
        self.stats.observe(oracle.query(&[i]), &self.loss);
        self.stats.set_round(t);
        self.report.t = t;
        self.report.queried.clear();
        self.report.queried.push(i);
        self.report.survivors = self.all.len();
        self.report.queries_used = t;
        true
    }

    fn last_step(&self) -> &StepReport {
        &self.report
    }

    fn finalize(&self) -> Result<Outcome> {
        if self.stats.round() == 0 {
            return Err(Error::NoRounds);
        }
        let q = empirical_minimizer(&self.stats, self.all.list());
        Ok(Outcome {
            prediction: Prediction::singleton(q),
            branch: Branch::Erm,
            survivors: Vec::from(self.all.list()),
        })
    }
}
