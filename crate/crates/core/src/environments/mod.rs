//! Synthetic scalar instances with closed-form moments under the squared
//! loss on `[0, 1]`.

mod bernoulli;
mod gap;

pub use bernoulli::{make_two_expert_bernoulli, BernoulliTwoExpert, Construction};
pub use gap::{make_gap_instance, GapInstance, GapSpec, Layout, NoiseCoupling};
