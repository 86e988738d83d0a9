//! Running pairwise statistics and the elimination tests built on them.
//!
//! For every pair `(i, j)` we keep the number `T_ij` of rounds in which both
//! experts were queried, the loss of each of them summed over exactly those
//! rounds, and the summed squared distance `|F_i - F_j|^2`. From these:
//!
//! * `R_ij(i) = sum_loss(i, j) / T_ij`, the empirical risk of `i` on the
//!   rounds shared with `j`;
//! * `d_ij^2 = sum_sqdist(i, j) / T_ij` (biased estimator);
//! * `alpha = sqrt(log(4K / delta_eff) / count)`, `+inf` when `count = 0`.
//!
//! A test statistic `R(j) - R(i) - 6 max{L alpha d_ij, B alpha^2}` that is
//! strictly positive certifies (with high probability) that `j` is worse
//! than `i`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::loss::LossSpec;
use crate::math;
use crate::round::Observation;

#[derive(Clone, Debug, PartialEq)]
pub struct PairStats {
    experts: usize,
    round: u64,
    pair_count: Vec<u64>,
    // (i, j): loss of expert i summed over the rounds shared with j.
    pair_loss: Vec<f64>,
    pair_sqdist: Vec<f64>,
    expert_count: Vec<u64>,
    expert_loss: Vec<f64>,
    scratch: Vec<f64>,
}

impl PairStats {
    pub fn new(experts: usize) -> Self {
        Self {
            experts,
            round: 0,
            pair_count: vec![0; experts * experts],
            pair_loss: vec![0.0; experts * experts],
            pair_sqdist: vec![0.0; experts * experts],
            expert_count: vec![0; experts],
            expert_loss: vec![0.0; experts],
            scratch: Vec::with_capacity(experts),
        }
    }

    pub fn experts(&self) -> usize {
        self.experts
    }

    /// Index `t` of the last recorded round.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn set_round(&mut self, t: u64) {
        self.round = t;
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.experts {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                experts: self.experts,
            })
        }
    }

    /// Records one joint observation of experts `i` and `j`. Per-expert
    /// counters are not touched: the caller records each expert once per
    /// round with [`PairStats::record_expert`].
    pub fn update_pair(
        &mut self,
        i: usize,
        j: usize,
        f_i: &[f64],
        f_j: &[f64],
        y: &[f64],
        loss: &LossSpec,
    ) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::SelfPair(i));
        }
        let loss_i = loss.eval(f_i, y)?;
        let loss_j = loss.eval(f_j, y)?;
        self.accumulate_pair(i, j, loss_i, loss_j, math::sq_dist(f_i, f_j));
        Ok(())
    }

    /// Records one observation of expert `i` in the per-expert counters.
    pub fn record_expert(&mut self, i: usize, f_i: &[f64], y: &[f64], loss: &LossSpec) -> Result<()> {
        self.check_index(i)?;
        let l = loss.eval(f_i, y)?;
        self.expert_count[i] += 1;
        self.expert_loss[i] += l;
        Ok(())
    }

    #[inline]
    fn accumulate_pair(&mut self, i: usize, j: usize, loss_i: f64, loss_j: f64, sqdist: f64) {
        let (ij, ji) = (i * self.experts + j, j * self.experts + i);
        self.pair_count[ij] += 1;
        self.pair_count[ji] += 1;
        self.pair_loss[ij] += loss_i;
        self.pair_loss[ji] += loss_j;
        self.pair_sqdist[ij] += sqdist;
        self.pair_sqdist[ji] += sqdist;
    }

    /// Folds in a whole observation: every queried expert once, and every
    /// pair of distinct queried experts. Queried indices must be distinct.
    pub fn observe(&mut self, obs: &Observation, loss: &LossSpec) {
        let y = obs.target();
        self.scratch.clear();
        for (i, f) in obs.iter() {
            let l = loss.eval_unchecked(f, y);
            self.expert_count[i] += 1;
            self.expert_loss[i] += l;
            self.scratch.push(l);
        }
        let queried = obs.queried();
        for a in 0..queried.len() {
            for b in (a + 1)..queried.len() {
                let sqdist = math::sq_dist(obs.value(a), obs.value(b));
                let (la, lb) = (self.scratch[a], self.scratch[b]);
                self.accumulate_pair(queried[a], queried[b], la, lb, sqdist);
            }
        }
        self.round = obs.t();
    }

    /// `T_ij`; for `i == j` this is `T_i`.
    pub fn pair_count(&self, i: usize, j: usize) -> u64 {
        if i == j {
            self.expert_count[i]
        } else {
            self.pair_count[i * self.experts + j]
        }
    }

    /// Empirical risk of `i` on the rounds shared with `j`.
    pub fn pair_mean_loss(&self, i: usize, j: usize) -> Option<f64> {
        if i == j {
            return self.expert_mean_loss(i);
        }
        let n = self.pair_count[i * self.experts + j];
        (n > 0).then(|| self.pair_loss[i * self.experts + j] / n as f64)
    }

    /// Empirical squared `L2` distance on the shared rounds.
    pub fn dist_sq(&self, i: usize, j: usize) -> Option<f64> {
        if i == j {
            return Some(0.0);
        }
        let n = self.pair_count[i * self.experts + j];
        (n > 0).then(|| self.pair_sqdist[i * self.experts + j] / n as f64)
    }

    /// Empirical distance, `0` for a pair never observed together.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        math::sqrt(self.dist_sq(i, j).unwrap_or(0.0))
    }

    /// `T_i`.
    pub fn expert_count(&self, i: usize) -> u64 {
        self.expert_count[i]
    }

    /// `R_i`, over every round in which `i` was queried.
    pub fn expert_mean_loss(&self, i: usize) -> Option<f64> {
        let n = self.expert_count[i];
        (n > 0).then(|| self.expert_loss[i] / n as f64)
    }

    /// `R_ij(j) - R_ij(i) - 6 max{L a d_ij, B a^2}` with `a = sqrt(log_term / count)`.
    pub(crate) fn statistic(&self, i: usize, j: usize, count: u64, log_term: f64, loss: &LossSpec) -> f64 {
        if count == 0 || self.pair_count(i, j) == 0 {
            return f64::NEG_INFINITY;
        }
        let a = radius(count, log_term);
        if i == j {
            return penalised_gap(0.0, a, 0.0, loss.lipschitz(), loss.bound());
        }
        let gap = self.pair_mean_loss(j, i).unwrap() - self.pair_mean_loss(i, j).unwrap();
        penalised_gap(gap, a, self.dist(i, j), loss.lipschitz(), loss.bound())
    }
}

/// Fixed level, or the anytime schedule `delta_t = delta / (t (t + 1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfidenceSchedule {
    Fixed,
    Anytime,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceParams {
    delta: f64,
    experts: usize,
    schedule: ConfidenceSchedule,
}

impl ConfidenceParams {
    pub fn new(delta: f64, experts: usize, schedule: ConfidenceSchedule) -> Result<Self> {
        check_delta(delta)?;
        if experts == 0 {
            return Err(invalid("experts", 0.0, "need at least one expert"));
        }
        Ok(Self {
            delta,
            experts,
            schedule,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn schedule(&self) -> ConfidenceSchedule {
        self.schedule
    }

    /// Confidence level in force at round `t >= 1`.
    pub fn effective_delta(&self, t: u64) -> f64 {
        match self.schedule {
            ConfidenceSchedule::Fixed => self.delta,
            ConfidenceSchedule::Anytime => anytime_delta(self.delta, t),
        }
    }

    /// `log(4K / delta_eff)` at round `t`.
    pub fn log_term(&self, t: u64) -> f64 {
        match self.schedule {
            ConfidenceSchedule::Fixed => confidence_log(self.delta, self.experts),
            ConfidenceSchedule::Anytime => anytime_log(self.delta, self.experts, t),
        }
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(invalid("delta", delta, "confidence level must lie in (0, 1)"))
    }
}

/// `delta / (t (t + 1))`.
pub fn anytime_delta(delta: f64, t: u64) -> f64 {
    let t = t as f64;
    delta / (t * (t + 1.0))
}

#[inline]
pub(crate) fn confidence_log(delta_eff: f64, experts: usize) -> f64 {
    math::ln(4.0 * experts as f64 / delta_eff)
}

// log(4K t (t+1) / delta), computed without forming delta_t so that large t
// never underflows.
#[inline]
pub(crate) fn anytime_log(delta: f64, experts: usize, t: u64) -> f64 {
    let t = t as f64;
    math::ln(4.0 * experts as f64 / delta) + math::ln(t) + math::ln(t + 1.0)
}

#[inline]
pub(crate) fn radius(count: u64, log_term: f64) -> f64 {
    if count == 0 {
        f64::INFINITY
    } else {
        math::sqrt(log_term / count as f64)
    }
}

/// `gap - 6 max{L a d, B a^2}`.
#[inline]
pub(crate) fn penalised_gap(gap: f64, a: f64, dist: f64, lipschitz: f64, bound: f64) -> f64 {
    gap - 6.0 * f64::max(lipschitz * a * dist, bound * a * a)
}

/// Confidence radius `sqrt(log(4K / delta_eff) / count)`, `+inf` for `count = 0`.
pub fn alpha(count: u64, delta_eff: f64, experts: usize) -> Result<f64> {
    check_delta(delta_eff)?;
    if experts == 0 {
        return Err(invalid("experts", 0.0, "need at least one expert"));
    }
    Ok(radius(count, confidence_log(delta_eff, experts)))
}

/// Full-information test `Delta_ij` after `rounds` rounds in which every
/// expert was observed. `-inf` when there is no evidence yet.
pub fn delta_full(
    stats: &PairStats,
    i: usize,
    j: usize,
    rounds: u64,
    delta: f64,
    loss: &LossSpec,
) -> Result<f64> {
    check_pair(stats, i, j)?;
    check_delta(delta)?;
    Ok(stats.statistic(i, j, rounds, confidence_log(delta, stats.experts()), loss))
}

/// Anytime test `Delta_ij(t, delta)`: as [`delta_full`] with `alpha`
/// evaluated at count `t` and level `delta / (t (t + 1))`.
pub fn delta_anytime(
    stats: &PairStats,
    i: usize,
    j: usize,
    t: u64,
    delta: f64,
    loss: &LossSpec,
) -> Result<f64> {
    check_pair(stats, i, j)?;
    check_delta(delta)?;
    if t < 1 {
        return Err(invalid("t", 0.0, "round index starts at 1"));
    }
    Ok(stats.statistic(i, j, t, anytime_log(delta, stats.experts(), t), loss))
}

/// Pairwise test `Delta'_ij` using only the `T_ij` jointly queried rounds,
/// at level `delta / (t (t + 1))`. `-inf` when `T_ij = 0`.
pub fn delta_pairwise(
    stats: &PairStats,
    i: usize,
    j: usize,
    t: u64,
    delta: f64,
    loss: &LossSpec,
) -> Result<f64> {
    check_pair(stats, i, j)?;
    check_delta(delta)?;
    if t < 1 {
        return Err(invalid("t", 0.0, "round index starts at 1"));
    }
    let count = stats.pair_count(i, j);
    Ok(stats.statistic(i, j, count, anytime_log(delta, stats.experts(), t), loss))
}

fn check_pair(stats: &PairStats, i: usize, j: usize) -> Result<()> {
    stats.check_index(i)?;
    stats.check_index(j)
}

/// One row of the pairwise trace dump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairTraceRow {
    pub t: u64,
    pub i: usize,
    pub j: usize,
    pub count: u64,
    pub mean_loss_i: Option<f64>,
    pub mean_loss_j: Option<f64>,
    pub dist: f64,
    pub statistic: f64,
}

/// Snapshot of every ordered pair `i != j` at the current round.
pub fn pair_trace(stats: &PairStats, delta: f64, loss: &LossSpec) -> Result<Vec<PairTraceRow>> {
    check_delta(delta)?;
    let t = stats.round().max(1);
    let log_term = anytime_log(delta, stats.experts(), t);
    let k = stats.experts();
    let mut rows = Vec::with_capacity(k * k.saturating_sub(1));
    for i in 0..k {
        for j in (0..k).filter(|&j| j != i) {
            rows.push(PairTraceRow {
                t: stats.round(),
                i,
                j,
                count: stats.pair_count(i, j),
                mean_loss_i: stats.pair_mean_loss(i, j),
                mean_loss_j: stats.pair_mean_loss(j, i),
                dist: stats.dist(i, j),
                statistic: stats.statistic(i, j, stats.pair_count(i, j), log_term, loss),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        libm::fabs(a - b) <= 1e-12
    }

    #[test]
    fn single_pair_update() {
        let loss = LossSpec::squared_unit_interval();
        let mut s = PairStats::new(2);
        s.update_pair(0, 1, &[0.2], &[0.5], &[1.0], &loss).unwrap();
        assert_eq!(s.pair_count(0, 1), 1);
        assert_eq!(s.pair_count(1, 0), 1);
        assert!(close(s.pair_mean_loss(0, 1).unwrap(), 0.64));
        assert!(close(s.pair_mean_loss(1, 0).unwrap(), 0.25));
        assert!(close(s.dist_sq(0, 1).unwrap(), 0.09));

        s.update_pair(0, 1, &[0.2], &[0.5], &[1.0], &loss).unwrap();
        assert_eq!(s.pair_count(0, 1), 2);
        assert!(close(s.dist_sq(0, 1).unwrap(), 0.09));
    }

    #[test]
    fn self_pair_is_rejected() {
        let loss = LossSpec::squared_unit_interval();
        let mut s = PairStats::new(2);
        assert_eq!(
            s.update_pair(1, 1, &[0.2], &[0.5], &[1.0], &loss),
            Err(Error::SelfPair(1))
        );
        assert!(s.update_pair(0, 2, &[0.2], &[0.5], &[1.0], &loss).is_err());
    }

    #[test]
    fn radius_examples() {
        assert_eq!(radius(0, 1.0), f64::INFINITY);
        assert!(close(radius(100, 1.0), 0.1));
        assert!(close(radius(400, 4.0), 0.1));
        assert_eq!(alpha(0, 0.05, 3).unwrap(), f64::INFINITY);
        assert!(alpha(10, 1.0, 3).is_err());
        assert!(alpha(10, 0.0, 3).is_err());
    }

    #[test]
    fn penalised_gap_examples() {
        assert!(close(penalised_gap(0.5, 0.1, 0.3, 1.0, 16.0), -0.46));
        assert!(close(penalised_gap(0.5, 0.1, 2.0, 1.0, 16.0), -0.7));
        // T_ij = 400, log term 4 => alpha = 0.1.
        let a = radius(400, 4.0);
        assert!(close(penalised_gap(1.2, a, 0.5, 1.0, 16.0), 0.24));
    }

    #[test]
    fn anytime_levels() {
        let p = ConfidenceParams::new(0.05, 2, ConfidenceSchedule::Anytime).unwrap();
        assert!(close(p.effective_delta(1), 0.025));
        let p = ConfidenceParams::new(0.12, 2, ConfidenceSchedule::Anytime).unwrap();
        assert!(close(p.effective_delta(3), 0.01));
        assert!(close(p.log_term(3), libm::log(8.0 / 0.01)));
        let fixed = ConfidenceParams::new(0.12, 2, ConfidenceSchedule::Fixed).unwrap();
        assert_eq!(fixed.effective_delta(3), 0.12);
        assert!(ConfidenceParams::new(1.0, 2, ConfidenceSchedule::Fixed).is_err());
    }

    #[test]
    fn tests_without_evidence_are_minus_infinity() {
        let loss = LossSpec::squared_unit_interval();
        let s = PairStats::new(3);
        assert_eq!(delta_pairwise(&s, 0, 1, 5, 0.05, &loss).unwrap(), f64::NEG_INFINITY);
        assert_eq!(delta_anytime(&s, 0, 1, 1, 0.05, &loss).unwrap(), f64::NEG_INFINITY);
        assert_eq!(delta_full(&s, 0, 1, 0, 0.05, &loss).unwrap(), f64::NEG_INFINITY);
        assert!(delta_anytime(&s, 0, 1, 0, 0.05, &loss).is_err());
        assert!(delta_pairwise(&s, 0, 3, 1, 0.05, &loss).is_err());
    }

    #[test]
    fn self_test_never_fires() {
        let loss = LossSpec::squared_unit_interval();
        let mut s = PairStats::new(2);
        let obs = Observation::from_round(&crate::Round::scalar(1, 1.0, &[0.2, 0.9]).unwrap(), &[0, 1]).unwrap();
        s.observe(&obs, &loss);
        let v = delta_full(&s, 0, 0, 1, 0.05, &loss).unwrap();
        let a = alpha(1, 0.05, 2).unwrap();
        assert!(close(v, -6.0 * 16.0 * a * a));
        assert!(v < 0.0);
    }

    #[test]
    fn delta_anytime_uses_shrunk_level() {
        let loss = LossSpec::squared_unit_interval();
        let mut s = PairStats::new(2);
        let round = crate::Round::scalar(1, 1.0, &[0.2, 0.9]).unwrap();
        for t in 1..=3 {
            let mut r = round.clone();
            *r.parts_mut().0 = t;
            s.observe(&Observation::from_round(&r, &[0, 1]).unwrap(), &loss);
        }
        // t = 3, delta = 0.12 -> delta_t = 0.01.
        let got = delta_anytime(&s, 1, 0, 3, 0.12, &loss).unwrap();
        let want = delta_full(&s, 1, 0, 3, 0.01, &loss).unwrap();
        assert!(close(got, want));
    }

    #[test]
    fn pair_trace_covers_ordered_pairs() {
        let loss = LossSpec::squared_unit_interval();
        let mut s = PairStats::new(3);
        let obs = Observation::from_round(&crate::Round::scalar(1, 1.0, &[0.2, 0.9, 0.4]).unwrap(), &[0, 2]).unwrap();
        s.observe(&obs, &loss);
        let rows = pair_trace(&s, 0.05, &loss).unwrap();
        assert_eq!(rows.len(), 6);
        let r = rows.iter().find(|r| r.i == 0 && r.j == 2).unwrap();
        assert_eq!(r.count, 1);
        assert!(close(r.mean_loss_i.unwrap(), 0.64));
        assert!(close(r.mean_loss_j.unwrap(), 0.36));
        let unseen = rows.iter().find(|r| r.i == 0 && r.j == 1).unwrap();
        assert_eq!(unseen.statistic, f64::NEG_INFINITY);
    }

    fn random_stats(values: &[(f64, f64, f64)]) -> PairStats {
        let loss = LossSpec::squared_unit_interval();
        let mut s = PairStats::new(2);
        for (t, &(y, a, b)) in values.iter().enumerate() {
            let round = crate::Round::new(t as u64 + 1, vec![y], vec![a, b], 2).unwrap();
            s.observe(&Observation::from_round(&round, &[0, 1]).unwrap(), &loss);
        }
        s
    }

    proptest! {
        #[test]
        fn pairwise_evidence_is_antisymmetric(
            values in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0), 1..60),
            delta in 0.001f64..0.5,
        ) {
            let loss = LossSpec::squared_unit_interval();
            let s = random_stats(&values);
            let t = values.len() as u64;
            let ij = delta_pairwise(&s, 0, 1, t, delta, &loss).unwrap();
            let ji = delta_pairwise(&s, 1, 0, t, delta, &loss).unwrap();
            prop_assert!(!(ij > 0.0 && ji > 0.0));
            let a = radius(s.pair_count(0, 1), anytime_log(delta, 2, t));
            let pen = 6.0 * f64::max(2.0 * a * s.dist(0, 1), 16.0 * a * a);
            prop_assert!(libm::fabs(ij + ji + 2.0 * pen) <= 1e-9);
        }

        #[test]
        fn alpha_is_monotone(count in 1u64..10_000, extra in 1u64..1000, d1 in 0.001f64..0.9, d2 in 0.001f64..0.9) {
            let a = alpha(count, d1, 4).unwrap();
            prop_assert!(alpha(count + extra, d1, 4).unwrap() <= a);
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(alpha(count, hi, 4).unwrap() <= alpha(count, lo, 4).unwrap());
        }

        // Repeating the same round keeps means and distances fixed, so only
        // T_ij moves: the summed penalty must shrink strictly toward zero.
        #[test]
        fn penalty_shrinks_with_joint_count(y in 0.0f64..=1.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let loss = LossSpec::squared_unit_interval();
            let mut s = PairStats::new(2);
            let round = crate::Round::scalar(1, y, &[a, b]).unwrap();
            let obs = Observation::from_round(&round, &[0, 1]).unwrap();
            let mut last = f64::NEG_INFINITY;
            for _ in 0..50 {
                s.observe(&obs, &loss);
                let sum = delta_pairwise(&s, 0, 1, 100, 0.05, &loss).unwrap()
                    + delta_pairwise(&s, 1, 0, 100, 0.05, &loss).unwrap();
                prop_assert!(sum > last);
                prop_assert!(sum <= 1e-12);
                last = sum;
            }
        }
    }
}
