//! Truncated Sumudu/Adomian series solution `k(t) = Σ cₙ t^{nα}`.
//!
//! Applying the Sumudu transform to `D^α k = p k^μ - q k` and inverting the
//! monomial rule `S[t^γ] = Γ(γ+1) u^γ` term by term gives
//!
//! ```text
//! c₀ = k₀
//! c_{n+1} = (p aₙ - q cₙ) Γ(nα + 1) / Γ((n+1)α + 1)
//! ```
//!
//! with `aₙ` the Adomian coefficients of `k^μ` (see [`crate::adomian`]).
//! For α = 1 the ratio collapses to `1/(n+1)` and the series is the Taylor
//! expansion of the classical solution.

use serde::Serialize;

use crate::adomian::{miller_step, CoeffVec};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::Scalar;
use crate::special::{gamma, gamma_ratio};

/// Truncation order used when none is given.
pub const DEFAULT_ORDER: usize = 5;
/// Largest accepted truncation order.
pub const MAX_ORDER: usize = 64;
/// Last-term ratio above which an evaluation is flagged untrusted.
pub const TRUST_TOL: f64 = 0.05;

/// Coefficients of the truncated series together with the parameters
/// they were built from. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution<T> {
    params: ModelParams<T>,
    coeffs: CoeffVec<T>,
}

/// A series evaluation and whether its last retained term is negligible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue<T> {
    pub value: T,
    pub trusted: bool,
}

impl<T: Scalar> SeriesSolution<T> {
    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn coeffs(&self) -> &CoeffVec<T> {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.order()
    }

    pub fn eval(&self, t: T) -> Result<SeriesValue<T>> {
        eval_series(self, t)
    }
}

/// Builds the order-`order` series for `params`.
///
/// When `k₀` is bitwise equal to the computed nonzero equilibrium every
/// higher coefficient is set to zero exactly.
pub fn build_series<T: Scalar>(params: &ModelParams<T>, order: usize) -> Result<SeriesSolution<T>> {
    params.validate()?;
    if order == 0 || order > MAX_ORDER {
        return Err(Error::param(
            "order",
            format!("must lie in 1..={MAX_ORDER}, got {order}"),
        ));
    }
    let mut c = Vec::with_capacity(order + 1);
    c.push(params.k0);
    if params.k0 == params.equilibrium() {
        c.resize(order + 1, T::zero());
        return Ok(SeriesSolution {
            params: *params,
            coeffs: CoeffVec::from_vec_unchecked(c),
        });
    }
    let alpha = params.alpha;
    let mut a = Vec::with_capacity(order + 1);
    a.push(params.k0.powf(params.mu));
    for n in 0..order {
        if n > 0 {
            let an = miller_step(params.mu, &c, &a, n);
            a.push(an);
        }
        let nf = T::of_usize(n);
        let ratio = gamma_ratio(nf * alpha + T::one(), (nf + T::one()) * alpha + T::one())?;
        c.push((params.p * a[n] - params.q * c[n]) * ratio);
    }
    Ok(SeriesSolution {
        params: *params,
        coeffs: CoeffVec::from_vec_unchecked(c),
    })
}

/// `Σ cₙ t^{nα}` at `t ≥ 0`.
///
/// `trusted` holds when `|c_N t^{Nα}| / max(|k₀|, |Σ|) ≤ TRUST_TOL`.
pub fn eval_series<T: Scalar>(sol: &SeriesSolution<T>, t: T) -> Result<SeriesValue<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::domain(
            "eval_series",
            format!("t must be >= 0, got {t}"),
        ));
    }
    let c = sol.coeffs.as_slice();
    let x = t.powf(sol.params.alpha);
    let value = c.iter().rev().fold(T::zero(), |acc, &cn| acc * x + cn);
    let last = c[c.len() - 1] * x.powi((c.len() - 1) as i32);
    let scale = sol.params.k0.abs().max(value.abs());
    let trusted = value.is_finite() && last.abs() <= T::of(TRUST_TOL) * scale;
    Ok(SeriesValue { value, trusted })
}

/// Closed-form coefficients `[k₀, w₁, w₂, w₃]` (truncated to `order`)
/// in their hand-expanded form for the classical model:
///
/// ```text
/// w₁ = (p k₀^μ - q k₀)
/// w₂ = (p k₀^μ - q k₀)(p μ k₀^{μ-1} - q) / 2!
/// w₃ = (p k₀^μ - q k₀){(p μ k₀^{μ-1} - q)² - p μ (μ-1)/2 k₀^{μ-2}} / 3!
/// ```
///
/// `w₁` and `w₂` agree with [`build_series`]. This `w₃` does not:
/// the Taylor coefficient of the exact solution is [`third_coefficient`].
pub fn classical_taylor_check<T: Scalar>(
    params: &ModelParams<T>,
    order: usize,
) -> Result<CoeffVec<T>> {
    params.validate()?;
    params.require_classical("classical_taylor_check")?;
    if order == 0 || order > 3 {
        return Err(Error::param(
            "order",
            format!("must lie in 1..=3, got {order}"),
        ));
    }
    let ModelParams { p, q, mu, k0, .. } = *params;
    let drift = p * k0.powf(mu) - q * k0;
    let slope = p * mu * k0.powf(mu - T::one()) - q;
    let correction = p * mu * (mu - T::one()) / T::of(2.0) * k0.powf(mu - T::of(2.0));
    let w = [
        k0,
        drift,
        drift * slope / T::of(2.0),
        drift * (slope * slope - correction) / T::of(6.0),
    ];
    Ok(CoeffVec::from_vec_unchecked(w[..=order].to_vec()))
}

/// Closed form of `c₃` produced by the recursion for any α:
///
/// ```text
/// c₃ = D {B² + p μ (μ-1)/2 · D k₀^{μ-2} · Γ(2α+1)/Γ(α+1)²} / Γ(3α+1)
/// D = p k₀^μ - q k₀,  B = p μ k₀^{μ-1} - q
/// ```
///
/// At α = 1 the gamma factor is 2, which gives the Taylor coefficient of
/// the exact Bernoulli solution.
pub fn third_coefficient<T: Scalar>(params: &ModelParams<T>) -> Result<T> {
    params.validate()?;
    let ModelParams {
        p,
        q,
        mu,
        alpha,
        k0,
    } = *params;
    let drift = p * k0.powf(mu) - q * k0;
    let slope = p * mu * k0.powf(mu - T::one()) - q;
    let g1 = gamma(alpha + T::one())?;
    let memory = gamma(T::of(2.0) * alpha + T::one())? / (g1 * g1);
    let curvature =
        p * mu * (mu - T::one()) / T::of(2.0) * drift * k0.powf(mu - T::of(2.0)) * memory;
    Ok(drift * (slope * slope + curvature) / gamma(T::of(3.0) * alpha + T::one())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_classical_value;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn reference() -> ModelParams<f64> {
        ModelParams::reference()
    }

    #[test]
    fn first_coefficient_matches_closed_form() {
        for alpha in [0.3, 0.6, 0.8, 1.0] {
            let p = reference().with_alpha(alpha);
            let s = build_series(&p, 3).unwrap();
            let want = (p.p * p.k0.powf(p.mu) - p.q * p.k0) / gamma(alpha + 1.0).unwrap();
            assert!(rel(s.coeffs()[1], want) < 1e-14, "alpha = {alpha}");
        }
    }

    #[test]
    fn exact_bernoulli_taylor_coefficients() {
        // k(t) = (2 - e^{-t/2})² = 1 + t + 0·t² - t³/12 + ...
        let p = ModelParams::<f64>::new(2.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let s = build_series(&p, 3).unwrap();
        assert!((s.coeffs()[1] - 1.0).abs() < 1e-15);
        assert!(s.coeffs()[2].abs() < 1e-15);
        assert!((s.coeffs()[3] + 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_start_has_no_higher_terms() {
        let p = reference();
        let p = p.with_k0(p.equilibrium());
        for alpha in [0.5, 1.0] {
            let s = build_series(&p.with_alpha(alpha), 10).unwrap();
            assert!(s.coeffs().as_slice()[1..].iter().all(|&c| c == 0.0));
            for t in [0.0, 0.7, 5.0, 100.0] {
                let v = s.eval(t).unwrap();
                assert_eq!(v.value, p.k0);
                assert!(v.trusted);
            }
            let w = classical_taylor_check(&p, 3).unwrap();
            assert!(w.as_slice()[1..].iter().all(|c| c.abs() < 1e-15));
        }
    }

    #[test]
    fn evaluation_at_origin_is_initial_capital() {
        let s = build_series(&reference().with_alpha(0.7), 8).unwrap();
        let v = s.eval(0.0).unwrap();
        assert_eq!(v.value, 1.0);
        assert!(v.trusted);
    }

    #[test]
    fn classical_order_five_near_closed_form() {
        let p = ModelParams::<f64>::new(2.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let s = build_series(&p, 5).unwrap();
        let exact = (2.0 - (-0.25_f64).exp()).powi(2);
        assert!((s.eval(0.5).unwrap().value - exact).abs() < 1e-3);
    }

    #[test]
    fn untrusted_far_outside_convergence_region() {
        let s = build_series(&reference(), 5).unwrap();
        let v = s.eval(200.0).unwrap();
        assert!(!v.trusted);
        assert!(eval_series(&s, -1.0).is_err());
    }

    #[test]
    fn order_and_alpha_validation() {
        assert!(build_series(&reference(), 0).is_err());
        assert!(build_series(&reference(), MAX_ORDER + 1).is_err());
        assert!(build_series(&reference(), MAX_ORDER).is_ok());
        assert!(classical_taylor_check(&reference().with_alpha(0.9), 2).is_err());
        assert!(classical_taylor_check(&reference(), 4).is_err());
    }

    #[test]
    fn closed_form_third_term_differs_from_recursion() {
        // Regression: the closed-form w₃ lacks the factor D, has the opposite
        // sign and half the size of the curvature term.
        let p = ModelParams::<f64>::new(0.5, 0.2, 1.0 / 3.0, 1.0, 1.0).unwrap();
        let closed = classical_taylor_check(&p, 3).unwrap()[3];
        let exact = third_coefficient(&p).unwrap();
        let drift = p.p - p.q;
        let curv = p.p * p.mu * (p.mu - 1.0);
        let expected_gap = drift * (-curv / 2.0 - curv * drift) / 6.0;
        assert!(((closed - exact) - expected_gap).abs() < 1e-15);
        assert!(rel(build_series(&p, 3).unwrap().coeffs()[3], exact) < 1e-13);
    }

    #[test]
    fn third_coefficient_matches_recursion_for_fractional_orders() {
        for alpha in [0.4, 0.6, 0.8, 0.95, 1.0] {
            let p = reference().with_alpha(alpha).with_k0(0.6);
            let s = build_series(&p, 3).unwrap();
            assert!(rel(s.coeffs()[3], third_coefficient(&p).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn single_precision_series() {
        let p = ModelParams::<f32>::reference();
        let s = build_series(&p, 5).unwrap();
        let exact = exact_classical_value(&p.to_f64(), 0.5);
        assert!((s.eval(0.5).unwrap().value as f64 - exact).abs() < 1e-5);
    }

    fn valid_params() -> impl Strategy<Value = ModelParams<f64>> {
        (0.05_f64..2.0, 0.05_f64..1.0, 0.05_f64..0.95, 0.1_f64..5.0)
            .prop_map(|(p, q, mu, k0)| ModelParams::<f64>::new(p, q, mu, 1.0, k0).unwrap())
    }

    proptest! {
        #[test]
        fn classical_reduction_first_two_terms(params in valid_params()) {
            let s = build_series(&params, 3).unwrap();
            let w = classical_taylor_check(&params, 3).unwrap();
            // Relative to the magnitude of the terms before cancellation:
            // D and B can each pass through zero.
            let ModelParams { p, q, mu, k0, .. } = params;
            let d_mag = p * k0.powf(mu) + q * k0;
            let b_mag = p * mu * k0.powf(mu - 1.0) + q;
            for (n, scale) in [(1, d_mag), (2, d_mag * b_mag / 2.0)] {
                prop_assert!((s.coeffs()[n] - w[n]).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn sign_of_first_coefficient(params in valid_params(), alpha in 0.1_f64..=1.0) {
            let params = params.with_alpha(alpha);
            let s = build_series(&params, 2).unwrap();
            let star = params.equilibrium();
            if params.k0 < star * (1.0 - 1e-9) {
                prop_assert!(s.coeffs()[1] > 0.0);
            } else if params.k0 > star * (1.0 + 1e-9) {
                prop_assert!(s.coeffs()[1] < 0.0);
            }
        }

        #[test]
        fn series_starts_at_initial_capital(params in valid_params(), alpha in 0.1_f64..=1.0, order in 1usize..20) {
            let s = build_series(&params.with_alpha(alpha), order).unwrap();
            prop_assert_eq!(s.eval(0.0).unwrap().value, params.k0);
        }
    }
}
