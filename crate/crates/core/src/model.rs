//! Model parameters shared by every solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One instance of `D^α k = p k^μ - q k`, `k(0) = k₀`.
///
/// `D^α` is the Caputo derivative for `α < 1` and the ordinary derivative
/// at `α = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    /// Productivity coefficient.
    pub p: T,
    /// Depreciation plus labour-growth rate.
    pub q: T,
    /// Capital elasticity, `0 < μ < 1`.
    pub mu: T,
    /// Order of the time derivative, `0 < α ≤ 1`.
    pub alpha: T,
    /// Initial capital-labour ratio.
    pub k0: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(p: T, q: T, mu: T, alpha: T, k0: T) -> Result<Self> {
        let params = Self {
            p,
            q,
            mu,
            alpha,
            k0,
        };
        params.validate()?;
        Ok(params)
    }

    /// p = 0.5, q = 0.2, μ = 1/3, α = 1, k₀ = 1.
    pub fn reference() -> Self {
        Self {
            p: T::of(0.5),
            q: T::of(0.2),
            mu: T::one() / T::of(3.0),
            alpha: T::one(),
            k0: T::one(),
        }
    }

    pub fn with_alpha(self, alpha: T) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_k0(self, k0: T) -> Self {
        Self { k0, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: T| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(Error::param(
                    name,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        };
        positive("p", self.p)?;
        positive("q", self.q)?;
        positive("k0", self.k0)?;
        if !(self.mu > T::zero() && self.mu < T::one()) {
            return Err(Error::param(
                "mu",
                format!("must lie in (0, 1), got {}", self.mu),
            ));
        }
        if !(self.alpha > T::zero() && self.alpha <= T::one()) {
            return Err(Error::param(
                "alpha",
                format!("must lie in (0, 1], got {}", self.alpha),
            ));
        }
        Ok(())
    }

    pub fn is_classical(&self) -> bool {
        self.alpha == T::one()
    }

    pub(crate) fn require_classical(&self, op: &'static str) -> Result<()> {
        if self.is_classical() {
            Ok(())
        } else {
            Err(Error::param(
                "alpha",
                format!("{op} needs alpha = 1, got {}", self.alpha),
            ))
        }
    }

    /// Right-hand side `p k^μ - q k`.
    pub fn growth_rate(&self, k: T) -> T {
        self.p * k.powf(self.mu) - self.q * k
    }

    /// `d/dk (p k^μ - q k)`.
    pub fn growth_rate_slope(&self, k: T) -> T {
        self.p * self.mu * k.powf(self.mu - T::one()) - self.q
    }

    /// Nonzero fixed point `(p/q)^{1/(1-μ)}`.
    pub fn equilibrium(&self) -> T {
        (self.p / self.q).powf((T::one() - self.mu).recip())
    }

    /// Lossless widening to `f64` for reporting.
    pub fn to_f64(&self) -> ModelParams<f64> {
        ModelParams {
            p: self.p.as_f64(),
            q: self.q.as_f64(),
            mu: self.mu.as_f64(),
            alpha: self.alpha.as_f64(),
            k0: self.k0.as_f64(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parameters_are_valid() {
        let p = ModelParams::<f64>::reference();
        p.validate().unwrap();
        assert!(p.is_classical());
        assert!((p.equilibrium() - 2.5_f64.powf(1.5)).abs() < 1e-14);
    }

    #[test]
    fn validation_rejects_each_field() {
        let base = ModelParams::<f64>::reference();
        let cases = [
            ModelParams { p: 0.0, ..base },
            ModelParams { q: -1.0, ..base },
            ModelParams { mu: 1.0, ..base },
            ModelParams { mu: 0.0, ..base },
            ModelParams { alpha: 0.0, ..base },
            ModelParams { alpha: 1.2, ..base },
            ModelParams { k0: 0.0, ..base },
            ModelParams {
                k0: f64::NAN,
                ..base
            },
        ];
        for c in cases {
            assert!(
                matches!(c.validate(), Err(Error::InvalidParameter { .. })),
                "{c:?}"
            );
        }
    }

    #[test]
    fn growth_rate_vanishes_at_equilibrium() {
        let p = ModelParams::<f64>::reference();
        assert!(p.growth_rate(p.equilibrium()).abs() < 1e-12);
    }
}
