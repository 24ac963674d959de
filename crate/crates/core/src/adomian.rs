//! Adomian polynomials of the power nonlinearity `N[k] = k^μ`.
//!
//! With the ansatz `k = Σ cₙ t^{nα}` every Adomian polynomial `Aₙ` of
//! `k^μ` is a single monomial `aₙ t^{nα}`, where `aₙ` is the n-th
//! power-series coefficient of `(Σ cᵢ xⁱ)^μ`. Those coefficients follow
//! J.C.P. Miller's recurrence
//!
//! ```text
//! a₀ = c₀^μ
//! aₙ = 1/(n c₀) Σ_{j=1..n} (jμ - (n - j)) c_j a_{n-j}
//! ```
//!
//! which is exact and O(N²). The collapse to scalars relies on each term
//! of the decomposition being one monomial in `t^α`; it does not carry over
//! to nonlinearities or ansätze without that structure.

use std::ops::Index;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Coefficients `c₀..c_N` of a generalized power series in `t^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVec<T>(Vec<T>);

impl<T: Scalar> CoeffVec<T> {
    /// Checks `c₀ > 0` and that every entry is finite.
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        match coeffs.first() {
            None => return Err(Error::param("c", "coefficient vector is empty")),
            Some(&c0) if !(c0 > T::zero()) => {
                return Err(Error::domain(
                    "adomian",
                    format!("c0 must be > 0, got {c0}"),
                ))
            }
            _ => {}
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::param("c", format!("non-finite coefficient {bad}")));
        }
        Ok(Self(coeffs))
    }

    pub(crate) fn from_vec_unchecked(coeffs: Vec<T>) -> Self {
        Self(coeffs)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Highest power `N` (length minus one).
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }
}

impl<T> Index<usize> for CoeffVec<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

/// One step of Miller's recurrence: `aₙ` from `c₀..cₙ` and `a₀..a_{n-1}`.
pub(crate) fn miller_step<T: Scalar>(mu: T, c: &[T], a: &[T], n: usize) -> T {
    debug_assert!(n >= 1 && c.len() > n && a.len() >= n);
    let nf = T::of_usize(n);
    let mut acc = T::zero();
    for j in 1..=n {
        let weight = T::of_usize(j) * mu - T::of_usize(n - j);
        acc = acc + weight * c[j] * a[n - j];
    }
    acc / (nf * c[0])
}

/// Power-series coefficients `a₀..a_N` of `(Σ cᵢ xⁱ)^μ`.
///
/// Any finite real exponent is accepted; the model itself only uses
/// `0 < μ < 1`.
pub fn adomian_power_coeffs<T: Scalar>(mu: T, c: &CoeffVec<T>) -> Result<CoeffVec<T>> {
    if !mu.is_finite() {
        return Err(Error::param("mu", format!("must be finite, got {mu}")));
    }
    let c = c.as_slice();
    if !(c[0] > T::zero()) {
        return Err(Error::domain("adomian_power_coeffs", "c0 must be > 0"));
    }
    let mut a = Vec::with_capacity(c.len());
    a.push(c[0].powf(mu));
    for n in 1..c.len() {
        let next = miller_step(mu, c, &a, n);
        a.push(next);
    }
    Ok(CoeffVec(a))
}

/// Largest derivative order for which the brute-force oracle is vouched for.
pub const BRUTE_FORCE_MAX_ORDER: usize = 6;
const CONTOUR_POINTS: usize = 128;

/// `aₙ = f⁽ⁿ⁾(0) / n!` for `f(x) = (Σ cᵢ xⁱ)^μ`, straight from the
/// definition of the Adomian polynomials.
///
/// The derivative is a central difference on a complex stencil: `f` is
/// sampled at the `M = 128` roots of unity scaled to a radius `r` with
/// `Σ_{i≥1} |cᵢ| rⁱ ≤ c₀/4`, so `Re P > 0` on the circle and the principal
/// branch of `P^μ` is analytic inside it. The trapezoidal Cauchy integral
/// then converges geometrically. Nothing here touches Miller's recurrence.
pub fn adomian_bruteforce_oracle<T: Scalar>(mu: T, c: &CoeffVec<T>, n: usize) -> Result<T> {
    let c = c.as_slice();
    if !(c[0] > T::zero()) {
        return Err(Error::domain("adomian_bruteforce_oracle", "c0 must be > 0"));
    }
    if n > BRUTE_FORCE_MAX_ORDER {
        log::warn!(
            "adomian_bruteforce_oracle: n = {n} exceeds the vouched accuracy limit {BRUTE_FORCE_MAX_ORDER}"
        );
    }
    let r = stencil_radius(c);
    let m = T::of_usize(CONTOUR_POINTS);
    let mut acc = Complex::new(T::zero(), T::zero());
    for j in 0..CONTOUR_POINTS {
        let theta = T::TAU() * T::of_usize(j) / m;
        let z = Complex::from_polar(r, theta);
        let poly = c
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &ci| acc * z + ci);
        let f = poly.powf(mu);
        acc = acc + f * Complex::from_polar(T::one(), -theta * T::of_usize(n));
    }
    Ok(acc.re / m / r.powi(n as i32))
}

fn stencil_radius<T: Scalar>(c: &[T]) -> T {
    let tail = |r: T| {
        c.iter()
            .enumerate()
            .skip(1)
            .map(|(i, ci)| ci.abs() * r.powi(i as i32))
            .fold(T::zero(), |a, b| a + b)
    };
    let budget = c[0] / T::of(4.0);
    if tail(T::one()) <= budget {
        return T::one();
    }
    let (mut lo, mut hi) = (T::zero(), T::one());
    for _ in 0..60 {
        let mid = (lo + hi) / T::of(2.0);
        if tail(mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cv(v: &[f64]) -> CoeffVec<f64> {
        CoeffVec::new(v.to_vec()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn constant_series() {
        assert_eq!(
            adomian_power_coeffs(0.5, &cv(&[1.0])).unwrap().as_slice(),
            &[1.0]
        );
    }

    #[test]
    fn first_polynomial_matches_closed_form() {
        let (mu, c0, c1) = (0.37, 1.7, -0.4);
        let a = adomian_power_coeffs(mu, &cv(&[c0, c1])).unwrap();
        assert!(rel(a[1], mu * c1 * c0.powf(mu - 1.0)) < 1e-14);
    }

    #[test]
    fn second_polynomial_matches_closed_form() {
        let (mu, c0, c1, c2) = (0.3, 2.0, 1.0, 0.5);
        let a = adomian_power_coeffs(mu, &cv(&[c0, c1, c2])).unwrap();
        let want =
            mu * c2 * c0.powf(mu - 1.0) + 0.5 * mu * (mu - 1.0) * c1 * c1 * c0.powf(mu - 2.0);
        assert!(rel(a[2], want) < 1e-12);
    }

    #[test]
    fn reference_coefficients_for_cubic_input() {
        // Taylor coefficients of (2 + x + x²/2 - x³/5)^0.3 at 50 digits.
        let want = [
            1.231_144_413_344_916_284_5,
            0.184_671_662_001_737_442_67,
            0.060_018_290_150_564_668_869,
            -0.060_095_236_676_398_726_137,
        ];
        let c = cv(&[2.0, 1.0, 0.5, -0.2]);
        let a = adomian_power_coeffs(0.3, &c).unwrap();
        for n in 0..4 {
            assert!(rel(a[n], want[n]) < 1e-13, "n = {n}");
            let brute = adomian_bruteforce_oracle(0.3, &c, n).unwrap();
            assert!(rel(brute, want[n]) < 1e-9, "oracle n = {n}");
        }
    }

    #[test]
    fn oracle_examples() {
        let c = cv(&[1.3, -0.7, 2.0, 0.1]);
        for n in 0..4 {
            assert!((adomian_bruteforce_oracle(1.0, &c, n).unwrap() - c[n]).abs() < 1e-12);
        }
        let sq = adomian_bruteforce_oracle(2.0, &cv(&[1.0, 1.0]), 2).unwrap();
        assert!((sq - 1.0).abs() < 1e-12);
        let root = adomian_bruteforce_oracle(0.5, &cv(&[4.0, 2.0]), 1).unwrap();
        assert!((root - 0.5).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_leading_coefficient_is_a_domain_error() {
        assert!(matches!(
            CoeffVec::new(vec![0.0, 1.0]),
            Err(Error::Domain { .. })
        ));
        let raw = CoeffVec::from_vec_unchecked(vec![-1.0, 1.0]);
        assert!(adomian_power_coeffs(0.5, &raw).is_err());
        assert!(adomian_bruteforce_oracle(0.5, &raw, 1).is_err());
        assert!(CoeffVec::<f64>::new(vec![]).is_err());
        assert!(CoeffVec::new(vec![1.0, f64::INFINITY]).is_err());
    }

    proptest! {
        #[test]
        fn unit_exponent_is_identity(c0 in 0.5_f64..4.0, rest in proptest::collection::vec(-2.0_f64..2.0, 0..8)) {
            let mut v = vec![c0];
            v.extend(rest);
            let c = cv(&v);
            let a = adomian_power_coeffs(1.0, &c).unwrap();
            for (x, y) in a.as_slice().iter().zip(c.as_slice()) {
                prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0));
            }
        }

        #[test]
        fn leading_coefficient_is_power(c0 in 1e-3_f64..1e3, mu in 0.01_f64..0.99) {
            let a = adomian_power_coeffs(mu, &cv(&[c0])).unwrap();
            prop_assert!(rel(a[0], c0.powf(mu)) < 1e-15);
        }

        #[test]
        fn miller_agrees_with_bruteforce(
            c0 in 0.5_f64..4.0,
            rest in proptest::collection::vec(-2.0_f64..2.0, 5),
            mu_idx in 0usize..4,
        ) {
            let mu = [0.2, 0.33, 0.5, 0.8][mu_idx];
            let mut v = vec![c0];
            v.extend(rest);
            let c = cv(&v);
            let a = adomian_power_coeffs(mu, &c).unwrap();
            for n in 0..=5 {
                let b = adomian_bruteforce_oracle(mu, &c, n).unwrap();
                prop_assert!((a[n] - b).abs() <= 1e-6 * a[n].abs().max(1e-9), "n={} {} vs {}", n, a[n], b);
            }
        }
    }
}
