use alloc::vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::instance::{monte_carlo_risk, Instance, RiskEstimate, RiskEvaluation};
use crate::math;
use crate::prediction::Prediction;
use crate::round::Round;

/// Error-probability lower bound for telling `Bernoulli((1 - eps)/2)` from
/// `Bernoulli((1 + eps)/2)` with `m` samples:
/// `(1 - sqrt(1 - exp(-2 ceil(m/2) eps^2 / (1 - eps^2)))) / 4`.
pub fn bernoulli_lb_value(m: u64, eps: f64) -> Result<f64> {
    if m == 0 {
        return Err(invalid("m", 0.0, "need at least one sample"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("epsilon", eps, "must lie in (0, 1)"));
    }
    let half = m.div_ceil(2) as f64;
    let e = math::exp(-2.0 * half * eps * eps / (1.0 - eps * eps));
    Ok(0.25 * (1.0 - math::sqrt(1.0 - e)))
}

/// `exp(-4 eps^2 T) / 2`, the two-point bound under single-expert feedback.
pub fn bandit_lb_value(t: u64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(invalid("epsilon", eps, "must lie in (0, 1/2]"));
    }
    Ok(0.5 * math::exp(-4.0 * eps * eps * t as f64))
}

/// Risk of a combination: exact from moments (squared loss only) or a
/// Monte-Carlo estimate with its standard error.
pub fn oracle_risk<I: Instance, R: Rng + ?Sized>(
    instance: &I,
    p: &Prediction,
    eval: RiskEvaluation<'_, R>,
) -> Result<RiskEstimate> {
    match eval {
        RiskEvaluation::ClosedForm => {
            let m = closed_form_moments(instance)?;
            Ok(RiskEstimate {
                value: m.combination_risk(p)?,
                std_error: 0.0,
            })
        }
        RiskEvaluation::MonteCarlo { samples, rng } => monte_carlo_risk(instance, p, samples, rng),
    }
}

fn closed_form_moments<I: Instance>(instance: &I) -> Result<&crate::instance::Moments> {
    if !instance.loss().is_squared() {
        return Err(Error::MissingMoments);
    }
    instance.moments().ok_or(Error::MissingMoments)
}

/// `R(p) - min_i R_i`. Negative values are possible for combinations.
///
/// The Monte-Carlo variant evaluates the combination and every expert on
/// the same draws and reports the standard error of the paired difference
/// against the empirically best expert.
pub fn excess_risk<I: Instance, R: Rng + ?Sized>(
    instance: &I,
    p: &Prediction,
    eval: RiskEvaluation<'_, R>,
) -> Result<RiskEstimate> {
    match eval {
        RiskEvaluation::ClosedForm => {
            let m = closed_form_moments(instance)?;
            Ok(RiskEstimate {
                value: m.combination_risk(p)? - m.optimal_risk(),
                std_error: 0.0,
            })
        }
        RiskEvaluation::MonteCarlo { samples, rng } => {
            if samples < 2 {
                return Err(Error::InsufficientPoints {
                    needed: 2,
                    got: samples,
                });
            }
            let k = instance.experts();
            let dim = instance.dim();
            let loss = instance.loss();
            let mut round = Round::new(0, vec![0.0; dim], vec![0.0; dim * k], k)?;
            let mut x = vec![0.0; dim];
            // Per expert: summed loss, summed and squared paired difference.
            let mut sums = vec![(0.0, 0.0, 0.0); k];
            for n in 0..samples {
                instance.sample_into(rng, n as u64 + 1, &mut round);
                p.predict_into(round.advice(), dim, &mut x)?;
                let lp = loss.eval_unchecked(&x, round.target());
                for (i, acc) in sums.iter_mut().enumerate() {
                    let l = loss.eval_unchecked(round.expert(i), round.target());
                    acc.0 += l;
                    acc.1 += lp - l;
                    acc.2 += (lp - l) * (lp - l);
                }
            }
            let best = (0..k).min_by(|&a, &b| sums[a].0.total_cmp(&sums[b].0)).unwrap_or(0);
            let nf = samples as f64;
            let mean = sums[best].1 / nf;
            let var = ((sums[best].2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
            Ok(RiskEstimate {
                value: mean,
                std_error: math::sqrt(var / nf),
            })
        }
    }
}

/// Reference curve `c B log(4K/delta) / T` for the full-information rule.
pub fn reference_full_information(c: f64, bound: f64, experts: usize, t: f64, delta: f64) -> f64 {
    c * bound * math::ln(4.0 * experts as f64 / delta) / t
}

/// Reference curve `c B min{K^2 log(TK/delta) / T, sqrt(K log(TK/delta) / T)}`.
pub fn reference_two_point(c: f64, bound: f64, experts: usize, t: f64, delta: f64) -> f64 {
    let k = experts as f64;
    let l = math::ln(t * k / delta);
    c * bound * f64::min(k * k * l / t, math::sqrt(k * l / t))
}

/// Reference curve `c B sqrt(K log(TK/delta) / T)` of the ERM branch.
pub fn reference_two_point_erm(c: f64, bound: f64, experts: usize, t: f64, delta: f64) -> f64 {
    let k = experts as f64;
    c * bound * math::sqrt(k * math::ln(t * k / delta) / t)
}

/// Reference curve `c B (K/m)^2 log(2TK/delta) / T` with `m` advices per round.
pub fn reference_multi_point(c: f64, bound: f64, experts: usize, m: usize, t: f64, delta: f64) -> f64 {
    let ratio = experts as f64 / m as f64;
    c * bound * ratio * ratio * math::ln(2.0 * t * experts as f64 / delta) / t
}
