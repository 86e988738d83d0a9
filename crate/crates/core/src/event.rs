//! Direct evaluation of the concentration event behind the elimination
//! guarantees. On instances with known moments every inequality can be
//! checked against the truth at every round.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::Moments;
use crate::loss::LossSpec;
use crate::math;
use crate::stats::{anytime_log, check_delta, radius, PairStats};

/// The four inequality families, all at level `delta_t = delta / (t (t + 1))`:
///
/// * `PairGap`: `|(R^_ij(i) - R^_ij(j)) - (R_i - R_j)| <= 3 max{L d^_ij a_ij, B a_ij^2}`
/// * `ExpertRisk`: `|R^_i - R_i| <= 2 B a_i`
/// * `EmpiricalDistance`: `d^_ij^2 <= 12 max{d_ij^2, (B/L)^2 a_ij^2}`
/// * `TrueDistance`: `d_ij^2 <= 12 max{d^_ij^2, (B/L)^2 a_ij^2}`
///
/// Hats mark empirical quantities; `a_ij` is the radius at count `T_ij`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Inequality {
    PairGap,
    ExpertRisk,
    EmpiricalDistance,
    TrueDistance,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub t: u64,
    pub i: usize,
    pub j: usize,
    pub inequality: Inequality,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checker bound to the true risks and distances of one instance.
#[derive(Clone, Debug)]
pub struct EventA {
    experts: usize,
    risks: Vec<f64>,
    dist_sq: Vec<f64>,
    lipschitz: f64,
    bound: f64,
    delta: f64,
}

impl EventA {
    pub fn new(moments: Option<&Moments>, loss: &LossSpec, delta: f64) -> Result<Self> {
        let moments = moments.ok_or(Error::MissingMoments)?;
        check_delta(delta)?;
        let k = moments.experts();
        let mut dist_sq = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                dist_sq.push(moments.distance_sq(i, j));
            }
        }
        Ok(Self {
            experts: k,
            risks: moments.risks(),
            dist_sq,
            lipschitz: loss.lipschitz(),
            bound: loss.bound(),
            delta,
        })
    }

    /// Every violated inequality at the current state. Pairs never observed
    /// together hold vacuously (infinite radius).
    pub fn violations(&self, stats: &PairStats) -> Vec<Violation> {
        let mut out = Vec::new();
        self.scan(stats, |v| {
            out.push(v);
            true
        });
        out
    }

    pub fn holds(&self, stats: &PairStats) -> bool {
        let mut ok = true;
        self.scan(stats, |_| {
            ok = false;
            false
        });
        ok
    }

    // Calls `f` for each violation; stops early when `f` returns false.
    fn scan(&self, stats: &PairStats, mut f: impl FnMut(Violation) -> bool) {
        let t = stats.round();
        if t == 0 {
            return;
        }
        let k = self.experts;
        let log_term = anytime_log(self.delta, k, t);
        let (l, b) = (self.lipschitz, self.bound);
        let beta2 = (b / l) * (b / l);

        for i in 0..k {
            let n = stats.expert_count(i);
            if n == 0 {
                continue;
            }
            let lhs = math::abs(stats.expert_mean_loss(i).unwrap() - self.risks[i]);
            let rhs = 2.0 * b * radius(n, log_term);
            if lhs > rhs
                && !f(Violation {
                    t,
                    i,
                    j: i,
                    inequality: Inequality::ExpertRisk,
                    lhs,
                    rhs,
                })
            {
                return;
            }
        }

        for i in 0..k {
            for j in (i + 1)..k {
                let n = stats.pair_count(i, j);
                if n == 0 {
                    continue;
                }
                let a = radius(n, log_term);
                let d2_hat = stats.dist_sq(i, j).unwrap();
                let d2 = self.dist_sq[i * k + j];
                let emp_gap = stats.pair_mean_loss(i, j).unwrap() - stats.pair_mean_loss(j, i).unwrap();
                let checks = [
                    (
                        Inequality::PairGap,
                        math::abs(emp_gap - (self.risks[i] - self.risks[j])),
                        3.0 * f64::max(l * math::sqrt(d2_hat) * a, b * a * a),
                    ),
                    (Inequality::EmpiricalDistance, d2_hat, 12.0 * f64::max(d2, beta2 * a * a)),
                    (Inequality::TrueDistance, d2, 12.0 * f64::max(d2_hat, beta2 * a * a)),
                ];
                for (inequality, lhs, rhs) in checks {
                    if lhs > rhs && !f(Violation { t, i, j, inequality, lhs, rhs }) {
                        return;
                    }
                }
            }
        }
    }
}

/// True iff all four families hold at every state in `trace`.
pub fn check_event_a<'s, I>(moments: Option<&Moments>, trace: I, loss: &LossSpec, delta: f64) -> Result<bool>
where
    I: IntoIterator<Item = &'s PairStats>,
{
    let event = EventA::new(moments, loss, delta)?;
    Ok(trace.into_iter().all(|s| event.holds(s)))
}
