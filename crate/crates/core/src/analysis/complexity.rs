use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::Moments;
use crate::loss::LossSpec;
use crate::math;
use crate::stats::{anytime_delta, check_delta};

// Risks within this of the optimum count as optimal.
const OPTIMAL_TOL: f64 = 1e-12;

/// `Lambda_i = min over optimal i* of max{L^2 d^2 / gap^2, B / gap}`,
/// `+inf` for optimal experts.
pub fn lambda_i(moments: &Moments, loss: &LossSpec, i: usize) -> f64 {
    let risks = moments.risks();
    let best = risks.iter().copied().fold(f64::INFINITY, f64::min);
    let gap_i = risks[i] - best;
    if gap_i <= OPTIMAL_TOL {
        return f64::INFINITY;
    }
    let (l, b) = (loss.lipschitz(), loss.bound());
    (0..risks.len())
        .filter(|&s| risks[s] - best <= OPTIMAL_TOL)
        .map(|s| {
            let gap = risks[i] - risks[s];
            f64::max(l * l * moments.distance_sq(i, s) / (gap * gap), b / gap)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn lambdas(moments: &Moments, loss: &LossSpec) -> Vec<f64> {
    (0..moments.experts()).map(|i| lambda_i(moments, loss, i)).collect()
}

/// Largest finite `Lambda_i`, `0` when every expert is optimal.
pub fn lambda_star(lambda: &[f64]) -> f64 {
    lambda.iter().copied().filter(|l| l.is_finite()).fold(0.0, f64::max)
}

/// `S_eps = {i : Lambda_i > 1/eps}`; for `eps = 0` the optimal experts.
pub fn s_eps(lambda: &[f64], eps: f64) -> Vec<usize> {
    (0..lambda.len())
        .filter(|&i| if eps == 0.0 { lambda[i].is_infinite() } else { lambda[i] > 1.0 / eps })
        .collect()
}

// (sum of Lambda_i over the complement of S_eps, |S_eps|, min{1/eps, Lambda*}).
fn parts(lambda: &[f64], eps: f64) -> (f64, f64, f64) {
    let inside = s_eps(lambda, eps);
    let outside: f64 = (0..lambda.len())
        .filter(|i| !inside.contains(i))
        .map(|i| lambda[i])
        .sum();
    let cap = if eps == 0.0 { f64::INFINITY } else { 1.0 / eps };
    (outside, inside.len() as f64, f64::min(cap, lambda_star(lambda)))
}

/// `C_eps = sum_{S_eps^c} Lambda_i + |S_eps| min{1/eps, Lambda*}`.
pub fn complexity_budgeted(lambda: &[f64], eps: f64) -> f64 {
    let (sum, n, m) = parts(lambda, eps);
    sum + n * m
}

/// `C_eps = K sum_{S_eps^c} Lambda_i + 2 |S_eps|^2 min{1/eps, Lambda*}`.
pub fn complexity_two_point(lambda: &[f64], eps: f64) -> f64 {
    let (sum, n, m) = parts(lambda, eps);
    lambda.len() as f64 * sum + 2.0 * n * n * m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Budgeted,
    TwoPoint,
}

/// Sufficient budget (`578 C log(K C / delta)`) or number of rounds
/// (`578 C log(C / delta)`); `0` when `c_eps <= 0`.
pub fn required_threshold(c_eps: f64, delta: f64, experts: usize, variant: Variant) -> f64 {
    if !(c_eps > 0.0) {
        return 0.0;
    }
    let inner = match variant {
        Variant::Budgeted => experts as f64 * c_eps / delta,
        Variant::TwoPoint => c_eps / delta,
    };
    578.0 * c_eps * math::ln(inner)
}

/// Window `(3 log_term M, 289 log_term M)` on `T_ij` with
/// `M = max{(L d)^2 / gap^2, B / |gap|}`.
pub fn elimination_window_from(gap: f64, ld: f64, bound: f64, log_term: f64) -> (f64, f64) {
    let g = math::abs(gap);
    let m = f64::max(ld * ld / (g * g), bound / g);
    (3.0 * log_term * m, 289.0 * log_term * m)
}

/// Elimination window for the pair `(i, j)` at round `t`, with
/// `log_term = log(K / delta_t)`.
pub fn elimination_window(
    moments: &Moments,
    loss: &LossSpec,
    i: usize,
    j: usize,
    t: u64,
    delta: f64,
) -> Result<(f64, f64)> {
    check_delta(delta)?;
    let gap = moments.risk(i) - moments.risk(j);
    if math::abs(gap) <= OPTIMAL_TOL {
        return Err(Error::EqualRisks(i, j));
    }
    let t = t.max(1);
    let log_term = math::ln(moments.experts() as f64 / anytime_delta(delta, t));
    Ok(elimination_window_from(
        gap,
        loss.lipschitz() * moments.distance(i, j),
        loss.bound(),
        log_term,
    ))
}

/// All complexity quantities of one instance at a given `eps` and `delta`.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceComplexity {
    pub lambda: Vec<f64>,
    pub lambda_star: f64,
    pub s_eps: Vec<usize>,
    pub c_eps_budgeted: f64,
    pub c_eps_two_point: f64,
    pub required_budget: f64,
    pub required_rounds: f64,
}

impl InstanceComplexity {
    pub fn new(moments: &Moments, loss: &LossSpec, eps: f64, delta: f64) -> Self {
        let lambda = lambdas(moments, loss);
        let k = lambda.len();
        let c_b = complexity_budgeted(&lambda, eps);
        let c_t = complexity_two_point(&lambda, eps);
        Self {
            lambda_star: lambda_star(&lambda),
            s_eps: s_eps(&lambda, eps),
            c_eps_budgeted: c_b,
            c_eps_two_point: c_t,
            required_budget: required_threshold(c_b, delta, k, Variant::Budgeted),
            required_rounds: required_threshold(c_t, delta, k, Variant::TwoPoint),
            lambda,
        }
    }
}
