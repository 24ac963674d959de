//! Numerical Sumudu transform `S[f](u) = ∫₀^∞ f(tu) e^{-t} dt` and checks of
//! the transform identities the series derivation relies on.
//!
//! Nothing in the solver path uses this module; it exists so that every
//! identity can be confirmed by quadrature.
//!
//! The integral is split at `t = H`. The head `[0, H]` goes to tanh-sinh,
//! which copes with the `t^γ`-type endpoint behaviour of fractional test
//! functions. On the tail the integrand is smooth, so it is written as
//! `e^{-H} ∫₀^∞ f((x + H)u) e^{-x} dx` and handed to Gauss-Laguerre with
//! 64 and 128 nodes. The gap between the two tail rules plus the head's
//! refinement gap is reported as `refinement_gap`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::oracle::exact_classical_value;
use crate::quadrature::{tanh_sinh, GaussLaguerre};
use crate::scalar::Scalar;
use crate::special::{gamma, gamma_ratio, mittag_leffler, MlParams, ML_Z_MAX_NEG};

/// Integration variable beyond which `e^{-t}` is treated as zero.
pub const SUMUDU_T_CUT: f64 = 40.0;
/// Refinement gap above which a transform is reported as unconverged.
pub const SUMUDU_REFINE_TOL: f64 = 1e-6;
/// Default absolute tolerance of the identity checks.
pub const IDENTITY_TOL: f64 = 1e-5;

const HEAD_END: f64 = 4.0;
const COARSE_NODES: usize = 64;
const FINE_NODES: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumuduSample<T> {
    pub u: T,
    pub value: T,
    pub refinement_gap: T,
}

impl<T: Scalar> SumuduSample<T> {
    pub fn converged(&self) -> bool {
        self.refinement_gap <= T::of(SUMUDU_REFINE_TOL)
    }
}

/// Sumudu transform of an infallible `f` at `u > 0`.
pub fn sumudu_numeric<T, F>(mut f: F, u: T) -> Result<SumuduSample<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    try_sumudu_numeric(|t| Ok(f(t)), u)
}

/// Sumudu transform of a fallible `f`; the first error raised by `f` is
/// returned unchanged.
///
/// `f` is sampled on `(0, SUMUDU_T_CUT · u]`. A refinement gap above
/// [`SUMUDU_REFINE_TOL`] is logged, not treated as an error.
pub fn try_sumudu_numeric<T, F>(mut f: F, u: T) -> Result<SumuduSample<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if !(u > T::zero()) || !u.is_finite() {
        return Err(Error::param(
            "u",
            format!("must be finite and > 0, got {u}"),
        ));
    }
    let h = T::of(HEAD_END);
    let tol = T::of(1e-13).max(T::epsilon() * T::of(16.0));
    let head = tanh_sinh(|t: T| Ok(f(t * u)? * (-t).exp()), T::zero(), h, tol)?;

    let cutoff = SUMUDU_T_CUT - HEAD_END;
    let scale = (-h).exp();
    let mut tail = |n: usize| -> Result<T> {
        let rule = GaussLaguerre::cached(n);
        rule.integrate(|x: T| f((x + h) * u), cutoff)
    };
    let coarse = tail(COARSE_NODES)?;
    let fine = tail(FINE_NODES)?;

    let sample = SumuduSample {
        u,
        value: head.value + scale * fine,
        refinement_gap: head.error + scale * (fine - coarse).abs(),
    };
    if !sample.value.is_finite() {
        return Err(Error::domain(
            "sumudu_numeric",
            format!("non-finite transform at u = {u}; is f of exponential order below 1/u?"),
        ));
    }
    if !sample.converged() {
        log::warn!(
            "sumudu: node refinement disagrees by {:e} at u = {}",
            sample.refinement_gap.as_f64(),
            u
        );
    }
    Ok(sample)
}

/// `S[t^γ](u) = Γ(γ+1) u^γ`.
pub fn sumudu_monomial<T: Scalar>(gamma_exp: T, u: T) -> Result<T> {
    if !(gamma_exp >= T::zero()) || !gamma_exp.is_finite() {
        return Err(Error::domain(
            "sumudu_monomial",
            format!("exponent must be finite and >= 0, got {gamma_exp}"),
        ));
    }
    if !(u > T::zero()) || !u.is_finite() {
        return Err(Error::param(
            "u",
            format!("must be finite and > 0, got {u}"),
        ));
    }
    Ok(gamma(gamma_exp + T::one())? * u.powf(gamma_exp))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityPoint {
    pub u: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
}

/// Outcome of checking one identity on a grid of `u` values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub tolerance: f64,
    pub points: Vec<IdentityPoint>,
}

impl IdentityReport {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            tolerance,
            points: Vec::new(),
        }
    }

    fn push(&mut self, u: f64, lhs: f64, rhs: f64) {
        self.points.push(IdentityPoint {
            u,
            lhs,
            rhs,
            deviation: (lhs - rhs).abs(),
        });
    }

    pub fn max_deviation(&self) -> f64 {
        self.points.iter().map(|p| p.deviation).fold(0.0, f64::max)
    }

    /// NaN deviations count as failures.
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.deviation <= self.tolerance)
    }

    pub fn failing_points(&self) -> impl Iterator<Item = &IdentityPoint> {
        self.points
            .iter()
            .filter(move |p| !(p.deviation <= self.tolerance))
    }
}

fn check_grid(u_grid: &[f64]) -> Result<()> {
    if u_grid.is_empty() || u_grid.iter().any(|&u| !(u > 0.0) || !u.is_finite()) {
        return Err(Error::param("u_grid", "needs at least one finite u > 0"));
    }
    Ok(())
}

/// `S[1](u) = 1`.
pub fn verify_unit_preservation(u_grid: &[f64], tol: f64) -> Result<IdentityReport> {
    check_grid(u_grid)?;
    let mut report = IdentityReport::new("unit preservation", tol);
    for &u in u_grid {
        report.push(u, sumudu_numeric(|_| 1.0, u)?.value, 1.0);
    }
    Ok(report)
}

/// `S[E_α(-a t^α)] = 1/(1 + a u^α)` and its complement
/// `S[1 - E_α(-a t^α)] = a u^α/(1 + a u^α)`, each by its own quadrature.
///
/// The test function is sampled up to `t = SUMUDU_T_CUT · u`, so
/// `a (SUMUDU_T_CUT · u)^α` has to stay inside the Mittag-Leffler domain.
pub fn verify_ml_identities(
    alpha: f64,
    a: f64,
    u_grid: &[f64],
    tol: f64,
) -> Result<[IdentityReport; 2]> {
    check_grid(u_grid)?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::param(
            "a",
            format!("must be finite and > 0, got {a}"),
        ));
    }
    let u_max = u_grid.iter().copied().fold(0.0, f64::max);
    let reach = a * (SUMUDU_T_CUT * u_max).powf(alpha);
    if !(reach <= ML_Z_MAX_NEG) {
        return Err(Error::domain(
            "verify_ml_identities",
            format!(
                "a·(t_cut·u)^alpha = {reach:.3} leaves the Mittag-Leffler domain; shrink u or a"
            ),
        ));
    }
    let ml = |t: f64| mittag_leffler(MlParams::new(alpha, -a * t.powf(alpha)));
    let mut direct = IdentityReport::new(format!("Mittag-Leffler (i), alpha={alpha}, a={a}"), tol);
    let mut complement =
        IdentityReport::new(format!("Mittag-Leffler (ii), alpha={alpha}, a={a}"), tol);
    for &u in u_grid {
        let au = a * u.powf(alpha);
        let lhs = try_sumudu_numeric(ml, u)?.value;
        direct.push(u, lhs, 1.0 / (1.0 + au));
        let lhs = try_sumudu_numeric(|t| Ok(1.0 - ml(t)?), u)?.value;
        complement.push(u, lhs, au / (1.0 + au));
    }
    Ok([direct, complement])
}

/// First- and second-order derivative rules on the closed-form classical
/// trajectory `k`:
/// `S[k'] = (K - k₀)/u` and `S[k''] = (K - k₀ - u k'(0))/u²`.
pub fn verify_derivative_rule(
    params: &ModelParams<f64>,
    u_grid: &[f64],
    tol: f64,
) -> Result<[IdentityReport; 2]> {
    params.validate()?;
    params.require_classical("verify_derivative_rule")?;
    check_grid(u_grid)?;
    let k = |t: f64| exact_classical_value(params, t);
    let dk = |t: f64| params.growth_rate(k(t));
    let ddk = |t: f64| params.growth_rate_slope(k(t)) * dk(t);
    let k0 = params.k0;
    let mut first = IdentityReport::new("derivative rule, first order", tol);
    let mut second = IdentityReport::new("derivative rule, second order", tol);
    for &u in u_grid {
        let big_k = sumudu_numeric(k, u)?.value;
        first.push(u, sumudu_numeric(dk, u)?.value, (big_k - k0) / u);
        second.push(
            u,
            sumudu_numeric(ddk, u)?.value,
            (big_k - k0 - u * dk(0.0)) / (u * u),
        );
    }
    Ok([first, second])
}

/// Caputo rule `S[D^α k] = u^{-α}(K - k(0))` for `k = t^β`, whose Caputo
/// derivative is `Γ(β+1)/Γ(β+1-α) t^{β-α}`.
pub fn verify_caputo_rule(
    alpha: f64,
    beta: f64,
    u_grid: &[f64],
    tol: f64,
) -> Result<IdentityReport> {
    check_grid(u_grid)?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(
            "alpha",
            format!("must lie in (0, 1], got {alpha}"),
        ));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::param(
            "beta",
            format!("must be finite and > 0, got {beta}"),
        ));
    }
    let coef = gamma_ratio(beta + 1.0, beta + 1.0 - alpha)?;
    let mut report = IdentityReport::new(format!("Caputo rule, alpha={alpha}, t^{beta}"), tol);
    for &u in u_grid {
        let lhs = sumudu_numeric(|t| coef * t.powf(beta - alpha), u)?.value;
        let big_k = sumudu_numeric(|t| t.powf(beta), u)?.value;
        report.push(u, lhs, u.powf(-alpha) * big_k);
    }
    Ok(report)
}

/// `S[ψ * ζ] = u S[ψ] S[ζ]` with `(ψ * ζ)(t) = ∫₀^t ψ(t - x) ζ(x) dx`
/// evaluated by tanh-sinh.
pub fn verify_convolution<P, Z>(
    name: &str,
    psi: P,
    zeta: Z,
    u_grid: &[f64],
    tol: f64,
) -> Result<IdentityReport>
where
    P: Fn(f64) -> f64,
    Z: Fn(f64) -> f64,
{
    check_grid(u_grid)?;
    let conv = |t: f64| -> Result<f64> {
        Ok(tanh_sinh(|x: f64| Ok(psi(t - x) * zeta(x)), 0.0, t, 1e-13)?.value)
    };
    let mut report = IdentityReport::new(format!("convolution, {name}"), tol);
    for &u in u_grid {
        let lhs = try_sumudu_numeric(conv, u)?.value;
        let rhs = u * sumudu_numeric(&psi, u)?.value * sumudu_numeric(&zeta, u)?.value;
        report.push(u, lhs, rhs);
    }
    Ok(report)
}

/// Transform variables used by [`identity_suite`].
pub const SUITE_U_GRID: [f64; 4] = [0.1, 0.25, 0.5, 0.75];
/// Mittag-Leffler orders used by [`identity_suite`], all with `a = 1`.
pub const SUITE_ML_ALPHAS: [f64; 4] = [0.5, 0.6, 0.8, 1.0];
/// `(α, β)` pairs for the Caputo rule in [`identity_suite`].
pub const SUITE_CAPUTO_CASES: [(f64, f64); 4] = [(0.6, 1.5), (0.8, 1.5), (0.6, 2.0), (0.5, 0.7)];

/// Every transform identity on the documented grids:
/// unit preservation, derivative rules on the classical reference
/// trajectory, the Caputo rule on monomials, three convolution pairs and
/// both Mittag-Leffler identities.
pub fn identity_suite(tol: f64) -> Result<Vec<IdentityReport>> {
    let grid = &SUITE_U_GRID;
    let mut reports = vec![verify_unit_preservation(grid, tol)?];
    reports.extend(verify_derivative_rule(
        &ModelParams::reference(),
        grid,
        tol,
    )?);
    for (alpha, beta) in SUITE_CAPUTO_CASES {
        reports.push(verify_caputo_rule(alpha, beta, grid, tol)?);
    }
    reports.push(verify_convolution("1 * 1", |_| 1.0, |_| 1.0, grid, tol)?);
    reports.push(verify_convolution("t * 1", |t| t, |_| 1.0, grid, tol)?);
    reports.push(verify_convolution(
        "exp(-t) * t",
        |t: f64| (-t).exp(),
        |t| t,
        grid,
        tol,
    )?);
    for alpha in SUITE_ML_ALPHAS {
        reports.extend(verify_ml_identities(alpha, 1.0, grid, tol)?);
    }
    Ok(reports)
}
