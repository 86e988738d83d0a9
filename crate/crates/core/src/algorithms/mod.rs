//! Elimination learners under different query constraints.
//!
//! Every learner keeps a set `S` of surviving experts, plays rounds against
//! an [`ExpertOracle`] and, when interrupted, returns a combination of at
//! most two experts.

mod budgeted;
mod erm;
mod full_information;
mod multi_point;
mod two_point;

use alloc::vec::Vec;

pub use budgeted::Budgeted;
pub use erm::SingleQueryErm;
pub use full_information::{full_information_rule, FullInformation};
pub use multi_point::MultiPoint;
pub use two_point::TwoPoint;

use crate::error::Result;
use crate::instance::ExpertOracle;
use crate::loss::LossSpec;
use crate::prediction::Prediction;
use crate::stats::PairStats;

/// Which output rule produced a prediction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// Average of the smallest survivor and its farthest survivor.
    Midpoint,
    /// Empirical risk minimizer.
    Erm,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Midpoint => "midpoint",
            Branch::Erm => "erm",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub prediction: Prediction,
    pub branch: Branch,
    /// Candidate set the output was chosen from.
    pub survivors: Vec<usize>,
}

/// What happened in one round.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StepReport {
    pub t: u64,
    pub queried: Vec<usize>,
    /// `(eliminator, eliminated)` pairs applied this round.
    pub eliminated: Vec<(usize, usize)>,
    pub survivors: usize,
    pub queries_used: u64,
}

pub trait Learner {
    fn experts(&self) -> usize;

    /// Surviving experts, ascending.
    fn survivors(&self) -> &[usize];

    fn is_alive(&self, i: usize) -> bool;

    fn stats(&self) -> &PairStats;

    fn queries_used(&self) -> u64;

    fn rounds(&self) -> u64 {
        self.stats().round()
    }

    /// Rounds whose eliminations were skipped because they would have
    /// emptied `S`.
    fn suppressed(&self) -> u64 {
        0
    }

    /// Plays one round. Returns `false`, without querying, when the learner
    /// cannot afford another round.
    fn step<O: ExpertOracle + ?Sized>(&mut self, oracle: &mut O) -> bool;

    /// Report for the most recent successful step.
    fn last_step(&self) -> &StepReport;

    fn finalize(&self) -> Result<Outcome>;
}

/// Steps until `horizon` rounds have been played or the learner stops,
/// calling `observe` after every round. Returns the rounds played.
pub fn drive<L, O, F>(learner: &mut L, oracle: &mut O, horizon: Option<u64>, mut observe: F) -> u64
where
    L: Learner + ?Sized,
    O: ExpertOracle + ?Sized,
    F: FnMut(&L),
{
    let mut played = 0;
    while horizon.is_none_or(|h| played < h) {
        if !learner.step(oracle) {
            break;
        }
        played += 1;
        observe(learner);
    }
    played
}

/// The surviving set with simultaneous elimination.
#[derive(Clone, Debug)]
pub(crate) struct Survivors {
    alive: Vec<bool>,
    list: Vec<usize>,
    suppressed: u64,
}

impl Survivors {
    pub(crate) fn new(experts: usize) -> Self {
        Self {
            alive: alloc::vec![true; experts],
            list: (0..experts).collect(),
            suppressed: 0,
        }
    }

    pub(crate) fn list(&self) -> &[usize] {
        &self.list
    }

    pub(crate) fn len(&self) -> usize {
        self.list.len()
    }

    pub(crate) fn is_alive(&self, i: usize) -> bool {
        self.alive[i]
    }

    pub(crate) fn suppressed(&self) -> u64 {
        self.suppressed
    }

    /// Applies one round of eliminations collected as `(by, victim)`.
    /// Duplicate victims keep their first eliminator. If the round would
    /// remove every survivor, nothing is removed and `eliminations` is
    /// cleared.
    pub(crate) fn apply(&mut self, eliminations: &mut Vec<(usize, usize)>) {
        if eliminations.is_empty() {
            return;
        }
        let mut keep = 0;
        for idx in 0..eliminations.len() {
            let v = eliminations[idx].1;
            if eliminations[..keep].iter().any(|&(_, w)| w == v) {
                continue;
            }
            eliminations[keep] = eliminations[idx];
            keep += 1;
        }
        eliminations.truncate(keep);
        if keep >= self.list.len() {
            self.suppressed += 1;
            eliminations.clear();
            return;
        }
        for &(_, v) in eliminations.iter() {
            self.alive[v] = false;
        }
        let alive = &self.alive;
        self.list.retain(|&i| alive[i]);
    }
}

/// Smallest survivor `k` and the survivor farthest from it in empirical
/// distance (ties to the smallest index, so `k` itself when all distances
/// vanish).
pub(crate) fn farthest_pair(stats: &PairStats, survivors: &[usize]) -> (usize, usize) {
    let k = survivors[0];
    let mut best = (k, 0.0);
    for &j in &survivors[1..] {
        let d = stats.dist(k, j);
        if d > best.1 {
            best = (j, d);
        }
    }
    (k, best.0)
}

/// `argmin` of the mean loss over `candidates` (unqueried experts rank
/// last, ties to the smallest index).
pub(crate) fn empirical_minimizer(stats: &PairStats, candidates: &[usize]) -> usize {
    let mut best = (candidates[0], f64::INFINITY);
    for &i in candidates {
        let r = stats.expert_mean_loss(i).unwrap_or(f64::INFINITY);
        if r < best.1 {
            best = (i, r);
        }
    }
    best.0
}

/// Collects `(u, v)` with `v` alive and a positive pairwise test, over
/// ordered pairs of distinct experts in `queried` (ascending).
///
/// Only pairs updated this round need checking: for any other pair the
/// means, distance and count are unchanged while the log term grows with
/// `t`, so its statistic can only have decreased since it was last checked.
pub(crate) fn pairwise_tests(
    stats: &PairStats,
    survivors: &Survivors,
    queried: &[usize],
    log_term: f64,
    loss: &LossSpec,
    out: &mut Vec<(usize, usize)>,
) {
    out.clear();
    for &u in queried {
        for &v in queried {
            if u != v
                && survivors.is_alive(v)
                && stats.statistic(u, v, stats.pair_count(u, v), log_term, loss) > 0.0
            {
                out.push((u, v));
            }
        }
    }
}
