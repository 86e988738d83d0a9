use alloc::vec::Vec;

use rand::Rng;

use super::{farthest_pair, pairwise_tests, Branch, Learner, Outcome, StepReport, Survivors};
use crate::error::{invalid, Error, Result};
use crate::instance::ExpertOracle;
use crate::loss::LossSpec;
use crate::prediction::Prediction;
use crate::stats::{anytime_log, check_delta, PairStats};

/// `m` queries per round on a uniformly random `m`-subset of all experts
/// (eliminated ones included). Survivors only matter at output time.
#[derive(Clone, Debug)]
pub struct MultiPoint<R> {
    loss: LossSpec,
    delta: f64,
    m: usize,
    rng: R,
    stats: PairStats,
    survivors: Survivors,
    queries_used: u64,
    report: StepReport,
    queried: Vec<usize>,
}

impl<R: Rng> MultiPoint<R> {
    pub fn new(experts: usize, m: usize, delta: f64, loss: LossSpec, rng: R) -> Result<Self> {
        check_delta(delta)?;
        if m < 2 || m > experts {
            return Err(invalid("m", m as f64, "need 2 <= m <= number of experts"));
        }
        Ok(Self {
            loss,
            delta,
            m,
            rng,
            stats: PairStats::new(experts),
            survivors: Survivors::new(experts),
            queries_used: 0,
            report: StepReport::default(),
            queried: Vec::with_capacity(m),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

impl<R: Rng> Learner for MultiPoint<R> {
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
        let k = self.stats.experts();
        self.queried.clear();
        if self.m == k {
            self.queried.extend(0..k);
        } else {
            self.queried.extend(rand::seq::index::sample(&mut self.rng, k, self.m).iter());
            self.queried.sort_unstable();
        }
        let t = self.stats.round() + 1;
        self.stats.observe(oracle.query(&self.queried), &self.loss);
        self.stats.set_round(t);
        self.queries_used += self.m as u64;

        let log_term = anytime_log(self.delta, k, t);
        pairwise_tests(
            &self.stats,
            &self.survivors,
            &self.queried,
            log_term,
            &self.loss,
            &mut self.report.eliminated,
        );
        self.survivors.apply(&mut self.report.eliminated);

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
        let (k, l) = farthest_pair(&self.stats, &survivors);
        Ok(Outcome {
            prediction: Prediction::midpoint(k, l),
            branch: Branch::Midpoint,
            survivors,
        })
    }
}
