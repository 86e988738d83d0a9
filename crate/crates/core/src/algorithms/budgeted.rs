use alloc::vec::Vec;

use super::{farthest_pair, Branch, Learner, Outcome, StepReport, Survivors};
use crate::error::{invalid, Error, Result};
use crate::instance::ExpertOracle;
use crate::loss::LossSpec;
use crate::prediction::Prediction;
use crate::stats::{anytime_log, check_delta, PairStats};

/// Global query budget: every round queries all survivors jointly and
/// stops before a round it cannot pay for in full.
#[derive(Clone, Debug)]
pub struct Budgeted {
    loss: LossSpec,
    delta: f64,
    budget: u64,
    stats: PairStats,
    survivors: Survivors,
    queries_used: u64,
    report: StepReport,
    queried: Vec<usize>,
}

impl Budgeted {
    pub fn new(experts: usize, budget: u64, delta: f64, loss: LossSpec) -> Result<Self> {
        check_delta(delta)?;
        if experts == 0 {
            return Err(invalid("experts", 0.0, "need at least one expert"));
        }
        if budget < experts as u64 {
            return Err(invalid("budget", budget as f64, "must cover one round over all experts"));
        }
        Ok(Self {
            loss,
            delta,
            budget,
            stats: PairStats::new(experts),
            survivors: Survivors::new(experts),
            queries_used: 0,
            report: StepReport::default(),
            queried: Vec::with_capacity(experts),
        })
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.queries_used
    }
}

impl Learner for Budgeted {
    fn experts(&self) -> usize {
        self.stats.experts()
    }

    fn survivors(&self) -> &[usize] {
        self.survivors.list()
    }

    fn is_alive(&self, i: usize) -> bool {
        self.survivors.is_alive(i)
    }

    fn stats(&self) -> &PairStats {
        &self.stats
    }

    fn queries_used(&self) -> u64 {
        self.queries_used
    }

    fn suppressed(&self) -> u64 {
        self.survivors.suppressed()
    }

    fn step<O: ExpertOracle + ?Sized>(&mut self, oracle: &mut O) -> bool {
        let cost = self.survivors.len() as u64;
        if self.remaining() < cost {
            return false;
        }
        self.queried.clear();
        self.queried.extend_from_slice(self.survivors.list());
        let t = self.stats.round() + 1;
        self.stats.observe(oracle.query(&self.queried), &self.loss);
        self.stats.set_round(t);
        self.queries_used += cost;

        // Surviving pairs have been queried together in every round so far,
        // so their joint count is `t`.
        let log_term = anytime_log(self.delta, self.stats.experts(), t);
        let elim = &mut self.report.eliminated;
        elim.clear();
        for &u in &self.queried {
            for &v in &self.queried {
                if u != v && self.stats.statistic(u, v, t, log_term, &self.loss) > 0.0 {
                    elim.push((u, v));
                }
            }
        }
        self.survivors.apply(elim);

        self.report.t = t;
        self.report.queried.clear();
        self.report.queried.extend_from_slice(&self.queried);
        self.report.survivors = self.survivors.len();
        self.report.queries_used = self.queries_used;
        true
    }

    fn last_step(&self) -> &StepReport {
        &self.report
    }

    fn finalize(&self) -> Result<Outcome> {
        if self.stats.round() == 0 {
            return Err(Error::NoRounds);
        }
        let survivors = self.survivors.list().to_vec();
        let (k, j) = farthest_pair(&self.stats, &survivors);
        Ok(Outcome {
            prediction: Prediction::midpoint(k, j),
            branch: Branch::Midpoint,
            survivors,
        })
    }
}
