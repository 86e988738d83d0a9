use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::instance::{Instance, Moments};
use crate::loss::LossSpec;
use crate::math;
use crate::round::Round;

const MATCH_TOL: f64 = 1e-9;
const MAX_SEARCH_EXPERTS: usize = 20;

/// Whether the experts share one noise draw per round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NoiseCoupling {
    #[default]
    Shared,
    Independent,
}

/// Which side of the target mean each expert's center is placed on.
#[derive(Clone, Debug, PartialEq)]
pub enum Layout {
    /// Even indices above the target mean, odd indices below.
    Alternating,
    /// Sides drawn from the construction seed.
    Random,
    /// Sides chosen so that the `K x K` distance matrix (row-major) is
    /// matched to within `1e-9`.
    Distances(Vec<f64>),
}

/// Requested risks and geometry for [`make_gap_instance`].
#[derive(Clone, Debug, PartialEq)]
pub struct GapSpec {
    /// `p = P(Y = 1)`.
    pub target_mean: f64,
    /// Width `h` of the uniform noise added to every expert.
    pub noise: f64,
    pub coupling: NoiseCoupling,
    pub risks: Vec<f64>,
    pub layout: Layout,
}

/// `Y ~ Bernoulli(p)` and `F_i = c_i + h (U_i - 1/2)` with `U_i` uniform on
/// `[0, 1]`, either one shared `U` or independent draws. Then
/// `R_i = p (1 - p) + (p - c_i)^2 + h^2 / 12` and
/// `d_ij^2 = (c_i - c_j)^2`, plus `h^2 / 6` for independent noise.
#[derive(Clone, Debug)]
pub struct GapInstance {
    target_mean: f64,
    noise: f64,
    coupling: NoiseCoupling,
    centers: Vec<f64>,
    loss: LossSpec,
    moments: Moments,
}

impl GapInstance {
    pub fn from_centers(target_mean: f64, noise: f64, coupling: NoiseCoupling, centers: &[f64]) -> Result<Self> {
        if !(0.0..=1.0).contains(&target_mean) {
            return Err(invalid("target_mean", target_mean, "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&noise) {
            return Err(invalid("noise", noise, "must lie in [0, 1]"));
        }
        if centers.is_empty() {
            return Err(invalid("experts", 0.0, "need at least one expert"));
        }
        for (i, &c) in centers.iter().enumerate() {
            if !(c - noise / 2.0 >= -1e-12 && c + noise / 2.0 <= 1.0 + 1e-12) {
                return Err(Error::Infeasible(format!(
                    "expert {i}: center {c} with noise width {noise} leaves [0, 1]"
                )));
            }
        }
        let k = centers.len();
        let n = k + 1;
        let h2 = noise * noise / 12.0;
        let mut gram = vec![0.0; n * n];
        gram[0] = target_mean;
        for (i, &ci) in centers.iter().enumerate() {
            gram[i + 1] = target_mean * ci;
            gram[(i + 1) * n] = target_mean * ci;
            for (j, &cj) in centers.iter().enumerate() {
                let shared = i == j || coupling == NoiseCoupling::Shared;
                gram[(i + 1) * n + j + 1] = ci * cj + if shared { h2 } else { 0.0 };
            }
        }
        Ok(Self {
            target_mean,
            noise,
            coupling,
            centers: centers.to_vec(),
            loss: LossSpec::squared_unit_interval(),
            moments: Moments::from_gram(k, gram)?,
        })
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn coupling(&self) -> NoiseCoupling {
        self.coupling
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Smallest achievable risk, `p (1 - p) + h^2 / 12`.
    pub fn risk_floor(&self) -> f64 {
        risk_floor(self.target_mean, self.noise)
    }
}

fn risk_floor(p: f64, h: f64) -> f64 {
    p * (1.0 - p) + h * h / 12.0
}

/// Builds an instance realizing the requested risks exactly. The distance
/// layout only decides on which side of `p` each center lies.
pub fn make_gap_instance(spec: &GapSpec, seed: u64) -> Result<GapInstance> {
    let k = spec.risks.len();
    if k == 0 {
        return Err(invalid("experts", 0.0, "need at least one expert"));
    }
    let (p, h) = (spec.target_mean, spec.noise);
    let floor = risk_floor(p, h);
    let mut offsets = Vec::with_capacity(k);
    for (i, &r) in spec.risks.iter().enumerate() {
        if r < floor - 1e-12 {
            return Err(Error::Infeasible(format!(
                "expert {i}: risk {r} is below the floor {floor} set by the target and noise"
            )));
        }
        offsets.push(math::sqrt((r - floor).max(0.0)));
    }
    let centers_for = |signs: u64| -> Vec<f64> {
        (0..k)
            .map(|i| if signs >> i & 1 == 0 { p + offsets[i] } else { p - offsets[i] })
            .collect()
    };
    let centers = match &spec.layout {
        Layout::Alternating => centers_for(0xAAAA_AAAA_AAAA_AAAA),
        Layout::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            centers_for(rng.gen())
        }
        Layout::Distances(d) => {
            check_distance_matrix(d, k)?;
            if k > MAX_SEARCH_EXPERTS {
                return Err(Error::Infeasible(format!(
                    "distance matching supports at most {MAX_SEARCH_EXPERTS} experts, got {k}"
                )));
            }
            let extra = if spec.coupling == NoiseCoupling::Independent { h * h / 6.0 } else { 0.0 };
            let mut best = f64::INFINITY;
            let mut found = None;
            for signs in 0..(1u64 << k) {
                let c = centers_for(signs);
                let mut worst: f64 = 0.0;
                for i in 0..k {
                    for j in (i + 1)..k {
                        let model = math::sqrt((c[i] - c[j]) * (c[i] - c[j]) + extra);
                        worst = worst.max(math::abs(model - d[i * k + j]));
                    }
                }
                let inside = c.iter().all(|&ci| ci - h / 2.0 >= -1e-12 && ci + h / 2.0 <= 1.0 + 1e-12);
                if inside && worst <= MATCH_TOL {
                    found = Some(c);
                    break;
                }
                best = best.min(worst);
            }
            found.ok_or_else(|| {
                Error::Infeasible(format!(
                    "no placement of the centers matches the distances; smallest mismatch {best:.3e}"
                ))
            })?
        }
    };
    GapInstance::from_centers(p, h, spec.coupling, &centers)
}

fn check_distance_matrix(d: &[f64], k: usize) -> Result<()> {
    if d.len() != k * k {
        return Err(Error::DimensionMismatch {
            expected: k * k,
            actual: d.len(),
        });
    }
    for i in 0..k {
        if d[i * k + i] != 0.0 {
            return Err(Error::Infeasible(format!("distance of expert {i} to itself is not zero")));
        }
        for j in 0..k {
            let v = d[i * k + j];
            if !(v >= 0.0) || math::abs(v - d[j * k + i]) > MATCH_TOL {
                return Err(Error::Infeasible(format!(
                    "distances ({i}, {j}) must be nonnegative and symmetric"
                )));
            }
            for m in 0..k {
                if d[i * k + m] > v + d[j * k + m] + MATCH_TOL {
                    return Err(Error::Infeasible(format!(
                        "distances violate the triangle inequality at ({i}, {j}, {m})"
                    )));
                }
            }
        }
    }
    Ok(())
}

impl Instance for GapInstance {
    fn experts(&self) -> usize {
        self.centers.len()
    }

    fn loss(&self) -> &LossSpec {
        &self.loss
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, t: u64, round: &mut Round) {
        let (slot, target, advice) = round.parts_mut();
        *slot = t;
        target[0] = if rng.gen::<f64>() < self.target_mean { 1.0 } else { 0.0 };
        let h = self.noise;
        match self.coupling {
            NoiseCoupling::Shared => {
                let shift = h * (rng.gen::<f64>() - 0.5);
                for (f, &c) in advice.iter_mut().zip(&self.centers) {
                    *f = c + shift;
                }
            }
            NoiseCoupling::Independent => {
                for (f, &c) in advice.iter_mut().zip(&self.centers) {
                    *f = c + h * (rng.gen::<f64>() - 0.5);
                }
            }
        }
    }

    fn moments(&self) -> Option<&Moments> {
        Some(&self.moments)
    }
}
