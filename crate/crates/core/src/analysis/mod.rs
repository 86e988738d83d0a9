//! Instance complexity, theoretical thresholds, lower-bound reference
//! values and rate estimation.

mod bounds;
mod complexity;
mod rates;

pub use bounds::{
    bandit_lb_value, bernoulli_lb_value, excess_risk, oracle_risk, reference_full_information,
    reference_multi_point, reference_two_point, reference_two_point_erm,
};
pub use complexity::{
    complexity_budgeted, complexity_two_point, elimination_window, elimination_window_from, lambda_i, lambda_star,
    lambdas, required_threshold, s_eps, InstanceComplexity, Variant,
};
pub use rates::{loglog_slope, quantile, summarize, SlopeFit, Summary};
