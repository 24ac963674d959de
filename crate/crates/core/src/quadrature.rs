//! Quadrature rules shared by the special functions and the transform checks.
//!
//! Two rules are provided:
//!
//! - [`tanh_sinh`] on a finite interval. Nodes cluster doubly-exponentially
//!   at both endpoints, so integrable endpoint singularities such as
//!   `t^(-0.6)` or `t^0.5` are handled without special treatment.
//! - [`GaussLaguerre`] for `∫₀^∞ g(x) e^{-x} dx`. Nodes and weights are
//!   computed once per node count in `f64` and cached.

use std::sync::OnceLock;

use crate::error::Result;
use crate::scalar::{CompensatedSum, Scalar};

/// Value of a quadrature together with the gap between the last two
/// refinement levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate<T> {
    pub value: T,
    pub error: T,
}

const TANH_SINH_MAX_LEVEL: u32 = 12;
const TANH_SINH_MIN_LEVEL: u32 = 3;
/// Abscissa beyond which nodes lie within ~1e-13 of an endpoint.
const TANH_SINH_TAIL_START: f64 = 3.0;

/// Integrates `f` over `[a, b]` with the tanh-sinh (double exponential) rule.
///
/// Refinement halves the step until two successive levels agree to
/// `tol · max(1, |I|)`. `f` is never evaluated exactly at an endpoint.
pub fn tanh_sinh<T, F>(mut f: F, a: T, b: T, tol: T) -> Result<QuadEstimate<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if a == b {
        return Ok(QuadEstimate {
            value: T::zero(),
            error: T::zero(),
        });
    }
    let half = (b - a) / T::of(2.0);
    let mid = a + half;
    let pi_2 = T::FRAC_PI_2();
    let eps = T::epsilon();

    // Sum over all nodes at the current level, before multiplying by h.
    let mut raw = CompensatedSum::new();
    raw.add(pi_2 * f(mid)?);

    let mut h = T::one();
    let mut prev: Option<T> = None;
    let mut level = 0u32;
    loop {
        // Level 0 visits k = 1, 2, 3, ...; deeper levels only the odd multiples
        // of the new, halved step.
        let stride = if level == 0 { 1 } else { 2 };
        let mut k = 1usize;
        loop {
            let y = T::of_usize(k) * h;
            let s = pi_2 * y.sinh();
            // 1 - tanh(s), computed without cancellation.
            let e = (T::of(2.0) * s).exp();
            if !e.is_finite() {
                break;
            }
            let delta = T::of(2.0) / (e + T::one());
            let offset = half * delta;
            if offset.abs() <= T::min_positive_value() || delta == T::zero() {
                break;
            }
            let w = pi_2 * y.cosh() * delta * (T::of(2.0) - delta);
            let left = a + offset;
            let right = b - offset;
            let mut contrib = T::zero();
            if left != a && left != b {
                contrib = contrib + f(left)?;
            }
            if right != a && right != b {
                contrib = contrib + f(right)?;
            }
            let term = w * contrib;
            raw.add(term);
            // Only trust a small term once the nodes sit next to the endpoints;
            // closer to the centre the integrand may merely vanish locally.
            if y >= T::of(TANH_SINH_TAIL_START)
                && (term.abs() <= eps * eps * raw.value().abs() || w <= T::min_positive_value())
            {
                break;
            }
            k += stride;
        }
        let estimate = half * h * raw.value();
        if let Some(p) = prev {
            let gap = (estimate - p).abs();
            if level >= TANH_SINH_MIN_LEVEL && gap <= tol * T::one().max(estimate.abs()) {
                return Ok(QuadEstimate {
                    value: estimate,
                    error: gap,
                });
            }
            if level == TANH_SINH_MAX_LEVEL {
                log::warn!(
                    "tanh-sinh: no convergence after {} levels (gap {:e})",
                    level,
                    gap.as_f64()
                );
                return Ok(QuadEstimate {
                    value: estimate,
                    error: gap,
                });
            }
        }
        prev = Some(estimate);
        h = h / T::of(2.0);
        level += 1;
    }
}

/// Gauss-Laguerre rule for the weight `e^{-x}` on `[0, ∞)`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    /// Computes an `n`-point rule by Newton iteration on the three-term
    /// recurrence for `L_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "Gauss-Laguerre rule needs at least two nodes");
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut z = 0.0_f64;
        for i in 0..n {
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - nodes[i - 2])
                }
            };
            let mut pp = 0.0;
            let mut p_prev = 0.0;
            for _ in 0..100 {
                let (mut p1, mut p2) = (1.0_f64, 0.0_f64);
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j as f64 + 1.0 - z) * p2 - j as f64 * p3) / (j as f64 + 1.0);
                }
                pp = nf * (p1 - p2) / z;
                p_prev = p2;
                let z_old = z;
                z = z_old - p1 / pp;
                if (z - z_old).abs() <= 1e-15 * z.abs() {
                    break;
                }
            }
            nodes.push(z);
            weights.push(-1.0 / (pp * nf * p_prev));
        }
        Self { nodes, weights }
    }

    /// Cached rule for `n`; rules for 32, 64 and 128 nodes are shared
    /// process-wide, other sizes are built on demand.
    pub fn cached(n: usize) -> std::borrow::Cow<'static, GaussLaguerre> {
        static R32: OnceLock<GaussLaguerre> = OnceLock::new();
        static R64: OnceLock<GaussLaguerre> = OnceLock::new();
        static R128: OnceLock<GaussLaguerre> = OnceLock::new();
        let cell = match n {
            32 => &R32,
            64 => &R64,
            128 => &R128,
            _ => return std::borrow::Cow::Owned(GaussLaguerre::new(n)),
        };
        std::borrow::Cow::Borrowed(cell.get_or_init(|| GaussLaguerre::new(n)))
    }

    /// `Σ wᵢ g(xᵢ)` over nodes not exceeding `cutoff`.
    pub fn integrate<T, F>(&self, mut g: F, cutoff: f64) -> Result<T>
    where
        T: Scalar,
        F: FnMut(T) -> Result<T>,
    {
        let mut acc = CompensatedSum::new();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            if x > cutoff {
                break;
            }
            acc.add(T::of(w) * g(T::of(x))?);
        }
        Ok(acc.value())
    }
}
