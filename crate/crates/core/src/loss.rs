//! Loss functions and the constants derived from their regularity.
//!
//! Every loss must be `L`-Lipschitz and `rho`-strongly convex in its first
//! argument, meaning `x -> l(x, y) - rho^2/2 |x|^2` is convex. Together these
//! bound both the prediction set and the loss range:
//! `diam(X) <= 8 L / rho^2` and `|l(x, y) - l(x', y)| <= B := 8 L^2 / rho^2`.

use crate::error::{invalid, Error, Result};
use crate::math;

/// A user-supplied scalar loss `l(x, y)`.
pub type LossFn = fn(&[f64], &[f64]) -> f64;

#[derive(Clone, Copy, Debug)]
pub enum LossKind {
    /// `|y - x|^2` (squared Euclidean norm).
    Squared,
    Custom(LossFn),
}

/// A loss together with its Lipschitz constant, strong-convexity modulus and
/// the derived range bound `B`.
#[derive(Clone, Copy, Debug)]
pub struct LossSpec {
    kind: LossKind,
    lipschitz: f64,
    rho2: f64,
    bound: f64,
    dim: usize,
}

impl LossSpec {
    /// Builds a loss specification. `rho2` is the squared strong-convexity
    /// modulus. The constants are declared by the caller, never estimated.
    pub fn new(kind: LossKind, lipschitz: f64, rho2: f64, dim: usize) -> Result<Self> {
        let (bound, _) = derived_constants(lipschitz, rho2)?;
        if dim == 0 {
            return Err(invalid("dim", 0.0, "dimension must be positive"));
        }
        Ok(Self {
            kind,
            lipschitz,
            rho2,
            bound,
            dim,
        })
    }

    /// Squared loss on `X = Y = [0, 1]`: `L = 2`, `rho^2 = 2`, `B = 16`.
    pub fn squared_unit_interval() -> Self {
        Self::squared_unit_cube(1)
    }

    /// Squared loss on the unit cube `[0, 1]^dim`. The gradient `2 (x - y)`
    /// has norm at most `2 sqrt(dim)`.
    pub fn squared_unit_cube(dim: usize) -> Self {
        assert!(dim > 0, "dimension must be positive");
        let lipschitz = 2.0 * math::sqrt(dim as f64);
        Self {
            kind: LossKind::Squared,
            lipschitz,
            rho2: 2.0,
            bound: 8.0 * lipschitz * lipschitz / 2.0,
            dim,
        }
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn is_squared(&self) -> bool {
        matches!(self.kind, LossKind::Squared)
    }

    /// Lipschitz constant `L`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Squared strong-convexity modulus `rho^2`.
    pub fn rho2(&self) -> f64 {
        self.rho2
    }

    /// Range bound `B = 8 L^2 / rho^2`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Diameter bound of the prediction set, `B / L`.
    pub fn diameter_bound(&self) -> f64 {
        self.bound / self.lipschitz
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates `l(x, y)`, checking dimensions.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        for len in [x.len(), y.len()] {
            if len != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    actual: len,
                });
            }
        }
        Ok(self.eval_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match self.kind {
            LossKind::Squared => math::sq_dist(x, y),
            LossKind::Custom(f) => f(x, y),
        }
    }
}

/// Returns `(B, diam)` with `B = 8 L^2 / rho2` and `diam = B / L = 8 L / rho2`.
pub fn derived_constants(lipschitz: f64, rho2: f64) -> Result<(f64, f64)> {
    if !(lipschitz > 0.0 && lipschitz.is_finite()) {
        return Err(invalid("lipschitz", lipschitz, "must be positive and finite"));
    }
    if !(rho2 > 0.0 && rho2.is_finite()) {
        return Err(invalid("rho2", rho2, "must be positive and finite"));
    }
    let bound = 8.0 * lipschitz * lipschitz / rho2;
    Ok((bound, bound / lipschitz))
}
