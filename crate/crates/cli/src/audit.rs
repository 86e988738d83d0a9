//! Invariant checks over many replications.

use budgex_core::algorithms::Learner;
use budgex_core::event::EventA;
use budgex_core::Instance;

use crate::config::LearnerKind;
use crate::error::CliError;
use crate::instances::{AnyInstance, Setting};
use crate::experiment::Observer;

// Risks within this of the optimum count as optimal.
const OPTIMAL_TOL: f64 = 1e-12;

/// What went wrong in one replication.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunFlags {
    pub event_a_failed: bool,
    pub optimal_eliminated: bool,
    pub eliminated_any: bool,
    pub monotone: u64,
    pub accounting: u64,
    pub spread: u64,
    pub budget: u64,
    pub arity: u64,
    pub suppressed: u64,
}

/// Per-round checks for one replication.
pub struct Auditor {
    event: Option<EventA>,
    optimal: Vec<usize>,
    check_spread: bool,
    prev: Vec<usize>,
    prev_queries: u64,
    pub flags: RunFlags,
}

impl Auditor {
    pub fn new(instance: &AnyInstance, setting: &Setting, event_a: bool) -> Result<Self, CliError> {
        let moments = instance
            .moments()
            .ok_or_else(|| CliError::Config("audits need an instance with closed-form moments".into()))?;
        let best = moments.optimal_risk();
        let optimal = (0..instance.experts())
            .filter(|&i| moments.risk(i) - best <= OPTIMAL_TOL)
            .collect();
        let event = if event_a {
            Some(EventA::new(Some(moments), instance.loss(), setting.delta)?)
        } else {
            None
        };
        Ok(Self {
            event,
            optimal,
            check_spread: setting.kind == LearnerKind::TwoPoint,
            prev: (0..instance.experts()).collect(),
            prev_queries: 0,
            flags: RunFlags::default(),
        })
    }

    /// Checks that need the final state.
    pub fn finish(&mut self, setting: &Setting, survivors: usize, queries_used: u64, support: usize, suppressed: u64) {
        if setting.kind == LearnerKind::Budgeted {
            let c = setting.budget.unwrap_or(0);
            if queries_used > c || c - queries_used >= survivors as u64 {
                self.flags.budget += 1;
            }
        }
        if support > 2 {
            self.flags.arity += 1;
        }
        self.flags.suppressed = suppressed;
    }
}

impl Observer for Auditor {
    fn observe<L: Learner + ?Sized>(&mut self, learner: &L) {
        let s = learner.survivors();
        let f = &mut self.flags;
        if s.is_empty() || s.iter().any(|i| !self.prev.contains(i)) {
            f.monotone += 1;
        }
        let step = learner.last_step();
        if step.queries_used != self.prev_queries + step.queried.len() as u64 || learner.queries_used() != step.queries_used {
            f.accounting += 1;
        }
        self.prev_queries = step.queries_used;
        if self.optimal.iter().any(|&i| !learner.is_alive(i)) {
            f.optimal_eliminated = true;
        }
        if s.len() < learner.experts() {
            f.eliminated_any = true;
        }
        if self.check_spread && s.len() >= 2 {
            let stats = learner.stats();
            let (mut lo, mut hi) = (u64::MAX, 0);
            for (a, &u) in s.iter().enumerate() {
                for &v in &s[a + 1..] {
                    let c = stats.pair_count(u, v);
                    lo = lo.min(c);
                    hi = hi.max(c);
                }
            }
            if hi - lo > 1 {
                f.spread += 1;
            }
        }
        if let Some(event) = &self.event {
            if !f.event_a_failed && !event.holds(learner.stats()) {
                f.event_a_failed = true;
            }
        }
        self.prev.clear();
        self.prev.extend_from_slice(s);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// Must never fail.
    Hard,
    /// Failure frequency compared with its nominal level.
    Statistical,
    /// Reported only.
    Info,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::Hard => "hard",
            CheckKind::Statistical => "statistical",
            CheckKind::Info => "info",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub check: &'static str,
    pub kind: CheckKind,
    pub runs: u64,
    pub violations: u64,
    pub frequency: f64,
    pub std_error: f64,
    /// Largest admissible frequency (statistical) or count (hard).
    pub limit: f64,
}

impl CheckRow {
    pub fn passed(&self) -> bool {
        match self.kind {
            CheckKind::Hard => self.violations == 0,
            CheckKind::Statistical => self.frequency <= self.limit,
            CheckKind::Info => true,
        }
    }

    pub fn status(&self) -> &'static str {
        match (self.kind, self.passed()) {
            (CheckKind::Info, _) => "info",
            (_, true) => "pass",
            (_, false) => "fail",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub rows: Vec<CheckRow>,
}

impl AuditReport {
    /// Aggregates per-replication flags. Statistical checks allow
    /// `4 delta` plus three standard errors at that level.
    pub fn from_flags(flags: &[RunFlags], setting: &Setting, event_a: bool) -> Self {
        let n = flags.len() as u64;
        let nf = n.max(1) as f64;
        let level = (4.0 * setting.delta).min(1.0);
        let level_se = (level * (1.0 - level) / nf).sqrt();
        let count = |f: &dyn Fn(&RunFlags) -> bool| flags.iter().filter(|x| f(x)).count() as u64;
        let sum = |f: &dyn Fn(&RunFlags) -> u64| flags.iter().map(f).sum::<u64>();
        let statistical = |check, v: u64| {
            let p = v as f64 / nf;
            CheckRow {
                check,
                kind: CheckKind::Statistical,
                runs: n,
                violations: v,
                frequency: p,
                std_error: (p * (1.0 - p) / nf).sqrt(),
                limit: level + 3.0 * level_se,
            }
        };
        let hard = |check, v: u64| CheckRow {
            check,
            kind: CheckKind::Hard,
            runs: n,
            violations: v,
            frequency: v as f64 / nf,
            std_error: 0.0,
            limit: 0.0,
        };
        let mut rows = Vec::new();
        if event_a {
            rows.push(statistical("event_a", count(&|f| f.event_a_failed)));
        }
        rows.push(statistical("optimal_eliminated", count(&|f| f.optimal_eliminated)));
        rows.push(hard("monotone_survivors", sum(&|f| f.monotone)));
        rows.push(hard("query_accounting", sum(&|f| f.accounting)));
        rows.push(hard("output_arity", sum(&|f| f.arity)));
        if setting.kind == LearnerKind::TwoPoint {
            rows.push(hard("pair_spread", sum(&|f| f.spread)));
        }
        if setting.kind == LearnerKind::Budgeted {
            rows.push(hard("budget_exactness", sum(&|f| f.budget)));
        }
        let active = count(&|f| f.eliminated_any);
        rows.push(CheckRow {
            check: "elimination_activity",
            kind: CheckKind::Info,
            runs: n,
            violations: active,
            frequency: active as f64 / nf,
            std_error: 0.0,
            limit: 0.0,
        });
        let suppressed = sum(&|f| f.suppressed);
        rows.push(CheckRow {
            check: "suppressed_rounds",
            kind: CheckKind::Info,
            runs: n,
            violations: suppressed,
            frequency: suppressed as f64 / nf,
            std_error: 0.0,
            limit: 0.0,
        });
        Self { rows }
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(CheckRow::passed)
    }

    pub fn row(&self, check: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.check == check)
    }
}
