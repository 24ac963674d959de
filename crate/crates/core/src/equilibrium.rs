//! Fixed points of `p k^μ - q k`, their stability, and the balanced-growth
//! level of total capital.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::oracle::exact_classical_value;
use crate::scalar::Scalar;

/// Relative distance from `k*` below which a trajectory counts as settled.
pub const NEAR_EQUILIBRIUM_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Unstable,
    AsymptoticallyStable,
    /// Zero linearization; the sign test is inconclusive.
    Degenerate,
}

impl Stability {
    /// Classifies a fixed point by the slope of the right-hand side there.
    pub fn from_slope<T: Scalar>(slope: T) -> Self {
        if slope > T::zero() {
            Stability::Unstable
        } else if slope < T::zero() {
            Stability::AsymptoticallyStable
        } else {
            Stability::Degenerate
        }
    }
}

impl fmt::Display for Stability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stability::Unstable => "unstable",
            Stability::AsymptoticallyStable => "asymptotically stable",
            Stability::Degenerate => "degenerate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport<T> {
    pub k_zero_stability: Stability,
    pub k_star: T,
    pub k_star_stability: Stability,
    /// Slope of the right-hand side at `k*`; equals `q(μ - 1)`.
    pub derivative_at_star: T,
    /// Right-hand side evaluated at `k*` (zero up to rounding).
    pub rhs_at_star: T,
    /// Capital where the growth rate peaks, `(pμ/q)^{1/(1-μ)}`. A
    /// trajectory's curvature changes sign here, not at `k*`.
    pub inflection_candidate: T,
}

/// Both fixed points and their linearized stability.
///
/// At `k → 0⁺` the slope `pμk^{μ-1} - q` diverges to `+∞`, so the origin is
/// unstable for every valid parameter set.
pub fn find_equilibria<T: Scalar>(params: &ModelParams<T>) -> Result<EquilibriumReport<T>> {
    params.validate()?;
    let k_star = params.equilibrium();
    let slope = params.growth_rate_slope(k_star);
    let one_minus_mu = T::one() - params.mu;
    Ok(EquilibriumReport {
        k_zero_stability: Stability::Unstable,
        k_star,
        k_star_stability: Stability::from_slope(slope),
        derivative_at_star: slope,
        rhs_at_star: params.growth_rate(k_star),
        inflection_candidate: (params.p * params.mu / params.q).powf(one_minus_mu.recip()),
    })
}

impl<T: Scalar> fmt::Display for EquilibriumReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<22} {:>24} stability", "point", "value")?;
        writeln!(
            f,
            "{:<22} {:>24.16e} {}",
            "k = 0", 0.0, self.k_zero_stability
        )?;
        writeln!(
            f,
            "{:<22} {:>24.16e} {}",
            "k* = (p/q)^(1/(1-mu))",
            self.k_star.as_f64(),
            self.k_star_stability
        )?;
        writeln!(
            f,
            "{:<22} {:>24.16e}",
            "slope at k*",
            self.derivative_at_star.as_f64()
        )?;
        writeln!(
            f,
            "{:<22} {:>24.16e}",
            "rhs at k*",
            self.rhs_at_star.as_f64()
        )?;
        write!(
            f,
            "{:<22} {:>24.16e}",
            "max growth rate at",
            self.inflection_candidate.as_f64()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BalancedGrowth {
    /// `k* L₀ e^{ψt}`.
    pub capital: f64,
    /// Whether the classical trajectory is within 1% of `k*` at `t`.
    pub near_equilibrium: bool,
    /// `|k(t) - k*| / k*` along the classical closed form.
    pub relative_gap: f64,
}

/// Asymptotic total capital `K(t) ≈ k* L₀ e^{ψt}` with labour
/// `L(t) = L₀ e^{ψt}`.
///
/// The approximation presumes `k(t)` has settled; this is checked on the
/// classical closed form and a warning is logged when it has not.
pub fn balanced_growth_capital(
    params: &ModelParams<f64>,
    l0: f64,
    psi: f64,
    t: f64,
) -> Result<BalancedGrowth> {
    params.validate()?;
    if !(l0 > 0.0) || !l0.is_finite() {
        return Err(Error::param(
            "l0",
            format!("must be finite and > 0, got {l0}"),
        ));
    }
    if !psi.is_finite() {
        return Err(Error::param("psi", "must be finite"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param(
            "t",
            format!("must be finite and >= 0, got {t}"),
        ));
    }
    let k_star = params.equilibrium();
    let relative_gap = ((exact_classical_value(params, t) - k_star) / k_star).abs();
    let near_equilibrium = relative_gap <= NEAR_EQUILIBRIUM_TOL;
    if !near_equilibrium {
        log::warn!(
            "balanced growth: k(t) is still {:.2}% away from k* at t = {t}; the asymptotic formula is premature",
            100.0 * relative_gap
        );
    }
    Ok(BalancedGrowth {
        capital: k_star * l0 * (psi * t).exp(),
        near_equilibrium,
        relative_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::solve_abm_fractional;
    use proptest::prelude::*;

    fn reference() -> ModelParams<f64> {
        ModelParams::reference()
    }

    #[test]
    fn equal_rates_give_unit_equilibrium() {
        for mu in [0.1, 0.5, 0.9] {
            let p = ModelParams::<f64>::new(0.3, 0.3, mu, 1.0, 2.0).unwrap();
            assert!((find_equilibria(&p).unwrap().k_star - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn reference_equilibrium() {
        let r = find_equilibria(&reference()).unwrap();
        assert!((r.k_star - 3.952847075210474165).abs() < 1e-14);
        assert!(r.rhs_at_star.abs() < 1e-12);
        assert_eq!(r.k_zero_stability, Stability::Unstable);
        assert_eq!(r.k_star_stability, Stability::AsymptoticallyStable);
        assert!((r.derivative_at_star - 0.2 * (1.0 / 3.0 - 1.0)).abs() < 1e-15);
        assert!(r.inflection_candidate < r.k_star);
        let table = r.to_string();
        assert!(table.contains("asymptotically stable") && table.contains("unstable"));
    }

    proptest! {
        #[test]
        fn slope_at_star_is_q_times_mu_minus_one(
            p in 0.05..3.0f64, q in 0.05..3.0f64, mu in 0.05..0.95f64,
        ) {
            let params = ModelParams::new(p, q, mu, 1.0, 1.0).unwrap();
            let r = find_equilibria(&params).unwrap();
            prop_assert!((r.derivative_at_star - q * (mu - 1.0)).abs() <= 1e-10 * q);
            prop_assert!(r.rhs_at_star.abs() <= 1e-12 * r.k_star.max(1.0));
            prop_assert_eq!(r.k_star_stability, Stability::AsymptoticallyStable);
        }

        #[test]
        fn scale_equivariance(
            p in 0.05..3.0f64, q in 0.05..3.0f64, mu in 0.05..0.9f64, lambda in 0.1..10.0f64,
        ) {
            let base = ModelParams::new(p, q, mu, 1.0, 1.0).unwrap();
            let k = base.equilibrium();
            let scaled = ModelParams { p: lambda * p, q: lambda * q, ..base };
            prop_assert!((scaled.equilibrium() / k - 1.0).abs() < 1e-12);
            let doubled = ModelParams { p: 2.0 * p, ..base };
            let factor = 2.0_f64.powf(1.0 / (1.0 - mu));
            prop_assert!((doubled.equilibrium() / (k * factor) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn origin_repels() {
        let base = reference();
        let eps = 1e-6 * base.equilibrium();
        let p = base.with_k0(eps);
        assert!(p.growth_rate(eps) > 0.0);
        let later = exact_classical_value(&p, 1.0);
        assert!(later > 10.0 * eps);
    }

    #[test]
    fn trajectories_reach_equilibrium() {
        let p = reference();
        let star = p.equilibrium();
        // e^{-q(1-μ)T} ≤ 1e-4
        let horizon = 1e-4_f64.ln() / (-p.q * (1.0 - p.mu));
        let k = exact_classical_value(&p, horizon);
        assert!(((k - star) / star).abs() <= 1e-3);

        // Caputo relaxation is algebraic (~t^{-α}), so the horizon is long.
        let tr = solve_abm_fractional(&p.with_alpha(0.8), 1000.0, 4000).unwrap();
        let (_, k) = tr.last().unwrap();
        assert!(((k - star) / star).abs() <= 1e-2, "{k} vs {star}");
    }

    #[test]
    fn balanced_growth_examples() {
        let p = reference();
        let star = p.equilibrium();
        let r = balanced_growth_capital(&p, 100.0, 0.02, 50.0).unwrap();
        assert!((r.capital - star * 100.0 * std::f64::consts::E).abs() < 1e-11);
        assert!(r.near_equilibrium);

        let flat = balanced_growth_capital(&p, 3.0, 0.0, 80.0).unwrap();
        assert!((flat.capital - 3.0 * star).abs() < 1e-13);

        let settled = p.with_k0(star * (1.0 + 1e-4));
        let r = balanced_growth_capital(&settled, 1.0, 0.5, 0.0).unwrap();
        assert!((r.capital - star).abs() < 1e-14 && r.near_equilibrium);

        let early = balanced_growth_capital(&p, 1.0, 0.0, 1.0).unwrap();
        assert!(!early.near_equilibrium && early.relative_gap > 0.5);

        assert!(balanced_growth_capital(&p, 0.0, 0.0, 1.0).is_err());
        assert!(balanced_growth_capital(&p, 1.0, 0.0, -1.0).is_err());
    }
}
