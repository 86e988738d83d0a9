use alloc::vec::Vec;

use super::{empirical_minimizer, farthest_pair, pairwise_tests, Branch, Learner, Outcome, StepReport, Survivors};
use crate::error::{invalid, Error, Result};
use crate::instance::ExpertOracle;
use crate::loss::LossSpec;
use crate::math;
use crate::prediction::Prediction;
use crate::stats::{anytime_log, check_delta, PairStats};

/// Two queries per round: always the surviving pair with the fewest joint
/// observations. A lone survivor is queried by itself.
#[derive(Clone, Debug)]
pub struct TwoPoint {
    loss: LossSpec,
    delta: f64,
    stats: PairStats,
    survivors: Survivors,
    queries_used: u64,
    report: StepReport,
    queried: Vec<usize>,
}

impl TwoPoint {
    pub fn new(experts: usize, delta: f64, loss: LossSpec) -> Result<Self> {
        check_delta(delta)?;
        if experts == 0 {
            return Err(invalid("experts", 0.0, "need at least one expert"));
        }
        Ok(Self {
            loss,
            delta,
            stats: PairStats::new(experts),
            survivors: Survivors::new(experts),
            queries_used: 0,
            report: StepReport::default(),
            queried: Vec::with_capacity(2),
        })
    }

    /// Surviving pair `(i, j)`, `i < j`, minimizing `T_ij`; ties go to the
    /// lexicographically smallest pair.
    pub fn next_pair(&self) -> Option<(usize, usize)> {
        let s = self.survivors.list();
        let mut best: Option<((usize, usize), u64)> = None;
        for (a, &i) in s.iter().enumerate() {
            for &j in &s[a + 1..] {
                let n = self.stats.pair_count(i, j);
                if best.is_none_or(|(_, m)| n < m) {
                    best = Some(((i, j), n));
                }
            }
        }
        best.map(|(p, _)| p)
    }

    /// `(k, l, q)`: smallest survivor, its farthest survivor, and the
    /// empirical risk minimizer over survivors.
    pub fn selection(&self) -> (usize, usize, usize) {
        let s = self.survivors.list();
        let (k, l) = farthest_pair(&self.stats, s);
        (k, l, empirical_minimizer(&self.stats, s))
    }
}

/// Output rule: midpoint when `T_kl > sqrt(log_term * T_q)`, else `q`.
pub fn choose_branch(t_kl: u64, t_q: u64, log_term: f64) -> Branch {
    if t_kl as f64 > math::sqrt(log_term * t_q as f64) {
        Branch::Midpoint
    } else {
        Branch::Erm
    }
}

impl Learner for TwoPoint {
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
        self.queried.clear();
        match self.next_pair() {
            Some((i, j)) => self.queried.extend_from_slice(&[i, j]),
            None => self.queried.push(self.survivors.list()[0]),
        }
        let t = self.stats.round() + 1;
        self.stats.observe(oracle.query(&self.queried), &self.loss);
        self.stats.set_round(t);
        self.queries_used += self.queried.len() as u64;

        let log_term = anytime_log(self.delta, self.stats.experts(), t);
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
        let t = self.stats.round();
        if t == 0 {
            return Err(Error::NoRounds);
        }
        let (k, l, q) = self.selection();
        let k_count = self.stats.experts() as f64;
        let log_term = math::ln(k_count * t as f64 / self.delta);
        let survivors = self.survivors.list().to_vec();
        let branch = choose_branch(self.stats.pair_count(k, l), self.stats.expert_count(q), log_term);
        let prediction = match branch {
            Branch::Midpoint => Prediction::midpoint(k, l),
            Branch::Erm => Prediction::singleton(q),
        };
        Ok(Outcome {
            prediction,
            branch,
            survivors,
        })
    }
}
