use budgex_core::environments::{
    make_gap_instance, BernoulliTwoExpert, Construction, GapInstance, GapSpec, Layout, NoiseCoupling,
};
use budgex_core::{Instance, LossSpec, Moments, Round};
use rand::Rng;

use crate::config::{Config, ConstructionName, Coupling, Flip, InstanceConfig, LayoutName, LearnerKind};
use crate::error::CliError;

/// Learner parameters for one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub kind: LearnerKind,
    pub delta: f64,
    pub horizon: Option<u64>,
    pub budget: Option<u64>,
    pub m: Option<usize>,
    /// Overrides the Bernoulli instance's `epsilon`.
    pub epsilon: Option<f64>,
}

impl Setting {
    pub fn from_config(config: &Config) -> Self {
        let l = &config.learner;
        Self {
            kind: l.kind,
            delta: l.delta,
            horizon: l.horizon,
            budget: l.budget,
            m: l.m,
            epsilon: None,
        }
    }

    /// The horizon, or the budget for the budgeted learner.
    pub fn size(&self) -> u64 {
        match self.kind {
            LearnerKind::Budgeted => self.budget.unwrap_or(0),
            _ => self.horizon.unwrap_or(0),
        }
    }
}

/// Every environment family the runner knows about.
#[derive(Clone, Debug)]
pub enum AnyInstance {
    Gap(GapInstance),
    Bernoulli(BernoulliTwoExpert),
}

impl AnyInstance {
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            AnyInstance::Gap(_) => None,
            AnyInstance::Bernoulli(b) => Some(b.epsilon()),
        }
    }
}

impl Instance for AnyInstance {
    fn experts(&self) -> usize {
        match self {
            AnyInstance::Gap(g) => g.experts(),
            AnyInstance::Bernoulli(b) => b.experts(),
        }
    }

    fn loss(&self) -> &LossSpec {
        match self {
            AnyInstance::Gap(g) => g.loss(),
            AnyInstance::Bernoulli(b) => b.loss(),
        }
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, t: u64, round: &mut Round) {
        match self {
            AnyInstance::Gap(g) => g.sample_into(rng, t, round),
            AnyInstance::Bernoulli(b) => b.sample_into(rng, t, round),
        }
    }

    fn moments(&self) -> Option<&Moments> {
        match self {
            AnyInstance::Gap(g) => g.moments(),
            AnyInstance::Bernoulli(b) => b.moments(),
        }
    }
}

fn coupling(c: Coupling) -> NoiseCoupling {
    match c {
        Coupling::Shared => NoiseCoupling::Shared,
        Coupling::Independent => NoiseCoupling::Independent,
    }
}

/// The instances replications draw from; replication `r` uses entry
/// `r % len`.
pub fn build_instances(config: &Config, setting: &Setting) -> Result<Vec<AnyInstance>, CliError> {
    let wrap = |e: budgex_core::Error| CliError::Config(format!("instance: {e}"));
    match &config.instance {
        InstanceConfig::Gap {
            target_mean,
            noise,
            coupling: c,
            risks,
            layout,
            distances,
            seed,
            ..
        } => {
            let layout = match (distances, layout) {
                (Some(d), _) => Layout::Distances(d.concat()),
                (None, LayoutName::Alternating) => Layout::Alternating,
                (None, LayoutName::Random) => Layout::Random,
            };
            let spec = GapSpec {
                target_mean: *target_mean,
                noise: *noise,
                coupling: coupling(*c),
                risks: risks.clone(),
                layout,
            };
            Ok(vec![AnyInstance::Gap(make_gap_instance(&spec, *seed).map_err(wrap)?)])
        }
        InstanceConfig::ScaledGap {
            target_mean,
            noise,
            coupling: c,
            shape,
            scale,
            ..
        } => {
            let n = match setting.kind {
                LearnerKind::Budgeted => setting.size() / shape.len() as u64,
                _ => setting.size(),
            }
            .max(1) as f64;
            let centers: Vec<f64> = shape.iter().map(|a| target_mean + scale * a / n.sqrt()).collect();
            let g = GapInstance::from_centers(*target_mean, *noise, coupling(*c), &centers).map_err(wrap)?;
            Ok(vec![AnyInstance::Gap(g)])
        }
        InstanceConfig::Bernoulli {
            epsilon,
            epsilon_from_horizon,
            construction,
            flip,
            ..
        } => {
            let eps = match (setting.epsilon, epsilon_from_horizon) {
                (Some(e), _) => e,
                (None, true) => 0.5 / (setting.size().max(1) as f64).sqrt(),
                (None, false) => *epsilon,
            };
            let construction = match construction {
                ConstructionName::Coupled => Construction::Coupled,
                ConstructionName::Independent => Construction::Independent,
                ConstructionName::ConstantExperts => Construction::ConstantExperts,
            };
            let flips: &[bool] = match flip {
                Flip::Minus => &[false],
                Flip::Plus => &[true],
                Flip::Alternate => &[false, true],
            };
            flips
                .iter()
                .map(|&f| {
                    BernoulliTwoExpert::new(eps, construction, f)
                        .map(AnyInstance::Bernoulli)
                        .map_err(wrap)
                })
                .collect()
        }
    }
}
