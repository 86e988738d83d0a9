//! One replication: build a learner, play it against a fresh oracle and
//! score its output.

use budgex_core::algorithms::{
    Branch, Budgeted, FullInformation, Learner, MultiPoint, Outcome, SingleQueryErm, TwoPoint,
};
use budgex_core::analysis::excess_risk;
use budgex_core::instance::RiskEvaluation;
use budgex_core::rng::{substream, Purpose, StreamRng};
use budgex_core::stats::{pair_trace, PairTraceRow};
use budgex_core::{Instance, LossSpec, SampledOracle};
use rayon::prelude::*;

use crate::config::{EvalMode, EvaluationConfig, LearnerKind};
use crate::error::CliError;
use crate::instances::{AnyInstance, Setting};

/// Sees the learner after every round.
pub trait Observer {
    fn observe<L: Learner + ?Sized>(&mut self, learner: &L);
}

pub struct Ignore;

impl Observer for Ignore {
    fn observe<L: Learner + ?Sized>(&mut self, _: &L) {}
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationResult {
    pub replication: u64,
    pub size: u64,
    pub excess: f64,
    /// Monte-Carlo standard error, 0 for closed-form evaluation.
    pub std_error: f64,
    pub survivors: usize,
    pub branch: Branch,
    pub queries_used: u64,
    pub rounds: u64,
    pub suppressed: u64,
    pub epsilon: Option<f64>,
}

pub fn run_replication<Ob: Observer>(
    instance: &AnyInstance,
    setting: &Setting,
    eval: &EvaluationConfig,
    seed: u64,
    replication: u64,
    observer: &mut Ob,
) -> Result<(ReplicationResult, Outcome), CliError> {
    let k = instance.experts();
    let loss = *instance.loss();
    let delta = setting.delta;
    let horizon = setting.horizon;
    let oracle = SampledOracle::new(instance, substream(seed, replication, Purpose::Environment));
    let played = match setting.kind {
        LearnerKind::FullInfo => play(FullInformation::new(k, delta, loss)?, oracle, horizon, observer),
        LearnerKind::Budgeted => {
            let budget = setting.budget.unwrap_or(0);
            play(Budgeted::new(k, budget, delta, loss)?, oracle, None, observer)
        }
        LearnerKind::TwoPoint => play(TwoPoint::new(k, delta, loss)?, oracle, horizon, observer),
        LearnerKind::MultiPoint => {
            let rng = substream(seed, replication, Purpose::Learner);
            let learner = MultiPoint::new(k, setting.m.unwrap_or(0), delta, loss, rng)?;
            play(learner, oracle, horizon, observer)
        }
        LearnerKind::SingleQueryErm => play(SingleQueryErm::new(k, loss)?, oracle, horizon, observer),
    }?;
    let estimate = match eval.mode {
        EvalMode::ClosedForm => {
            excess_risk::<_, StreamRng>(instance, &played.outcome.prediction, RiskEvaluation::ClosedForm)?
        }
        EvalMode::MonteCarlo => {
            let mut rng = substream(seed, replication, Purpose::Evaluation);
            excess_risk(
                instance,
                &played.outcome.prediction,
                RiskEvaluation::MonteCarlo {
                    samples: eval.samples,
                    rng: &mut rng,
                },
            )?
        }
    };
    let result = ReplicationResult {
        replication,
        size: setting.size(),
        excess: estimate.value,
        std_error: estimate.std_error,
        survivors: played.survivors,
        branch: played.outcome.branch,
        queries_used: played.queries_used,
        rounds: played.rounds,
        suppressed: played.suppressed,
        epsilon: instance.epsilon(),
    };
    Ok((result, played.outcome))
}

struct Played {
    outcome: Outcome,
    survivors: usize,
    queries_used: u64,
    rounds: u64,
    suppressed: u64,
}

fn play<L: Learner, Ob: Observer>(
    mut learner: L,
    mut oracle: SampledOracle<'_, AnyInstance, StreamRng>,
    horizon: Option<u64>,
    observer: &mut Ob,
) -> Result<Played, CliError> {
    let rounds = budgex_core::algorithms::drive(&mut learner, &mut oracle, horizon, |l| observer.observe(l));
    Ok(Played {
        outcome: learner.finalize()?,
        survivors: learner.survivors().len(),
        queries_used: learner.queries_used(),
        rounds,
        suppressed: learner.suppressed(),
    })
}

/// Runs `f` for every replication in parallel, keeping replication order.
pub fn replicate<T, F>(replications: u64, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(u64) -> Result<T, CliError> + Send + Sync,
{
    (0..replications).into_par_iter().map(f).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRow {
    pub t: u64,
    pub event: &'static str,
    pub i: usize,
    pub j: Option<usize>,
    pub survivors: usize,
    pub queries_used: u64,
}

/// Records queries, eliminations and pair statistics at every round with
/// an elimination and at the last round.
pub struct TraceRecorder {
    delta: f64,
    loss: LossSpec,
    pub events: Vec<EventRow>,
    pub pairs: Vec<PairTraceRow>,
    last: Vec<PairTraceRow>,
}

impl TraceRecorder {
    pub fn new(delta: f64, loss: LossSpec) -> Self {
        Self {
            delta,
            loss,
            events: Vec::new(),
            pairs: Vec::new(),
            last: Vec::new(),
        }
    }

    /// Appends the final-round pair statistics unless already recorded.
    pub fn finish(&mut self) {
        let t = self.last.first().map(|r| r.t);
        if t.is_some() && self.pairs.last().map(|r| r.t) != t {
            self.pairs.append(&mut self.last);
        }
    }
}

impl Observer for TraceRecorder {
    fn observe<L: Learner + ?Sized>(&mut self, learner: &L) {
        let step = learner.last_step();
        for &i in &step.queried {
            self.events.push(EventRow {
                t: step.t,
                event: "query",
                i,
                j: None,
                survivors: step.survivors,
                queries_used: step.queries_used,
            });
        }
        for &(by, victim) in &step.eliminated {
            self.events.push(EventRow {
                t: step.t,
                event: "eliminate",
                i: by,
                j: Some(victim),
                survivors: step.survivors,
                queries_used: step.queries_used,
            });
        }
        let rows = pair_trace(learner.stats(), self.delta, &self.loss).unwrap_or_default();
        if step.eliminated.is_empty() {
            self.last = rows;
        } else {
            self.pairs.extend(rows);
            self.last.clear();
        }
    }
}
