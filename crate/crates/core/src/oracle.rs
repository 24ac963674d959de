//! Reference solutions that do not go through the series: the closed-form
//! solution of the classical (Bernoulli) equation and a fractional
//! Adams-Bashforth-Moulton predictor-corrector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::Scalar;
use crate::series::SeriesSolution;
use crate::special::gamma;

/// Which solver produced a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactClassical,
    AbmFractional,
    Series,
}

impl Method {
    /// Short label used in CSV output.
    pub fn label(self) -> &'static str {
        match self {
            Method::ExactClassical => "exact",
            Method::AbmFractional => "abm",
            Method::Series => "series",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "exact" => Some(Method::ExactClassical),
            "abm" => Some(Method::AbmFractional),
            "series" => Some(Method::Series),
            _ => None,
        }
    }
}

/// Sampled `(t, k)` pairs.
///
/// Oracle trajectories are strictly positive and start at `k₀` when the
/// first time is 0. Series trajectories carry a per-sample trust flag and
/// may leave the positive range where they are untrusted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub values: Vec<T>,
    pub trusted: Vec<bool>,
    pub method: Method,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(T, T)> {
        Some((*self.times.last()?, *self.values.last()?))
    }

    /// Samples a series at the given times.
    pub fn from_series(sol: &SeriesSolution<T>, times: &[T]) -> Result<Self> {
        check_times(times)?;
        let mut values = Vec::with_capacity(times.len());
        let mut trusted = Vec::with_capacity(times.len());
        for &t in times {
            let v = sol.eval(t)?;
            values.push(v.value);
            trusted.push(v.trusted);
        }
        Ok(Self {
            times: times.to_vec(),
            values,
            trusted,
            method: Method::Series,
        })
    }
}

fn check_times<T: Scalar>(times: &[T]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::param(
            "times",
            "at least one sample time is required",
        ));
    }
    if !(times[0] >= T::zero()) {
        return Err(Error::param("times", "times must be nonnegative"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::param(
            "times",
            "times must be finite and strictly increasing",
        ));
    }
    Ok(())
}

/// `k(t) = [p/q + (k₀^{1-μ} - p/q) e^{-q(1-μ)t}]^{1/(1-μ)}`, the solution of
/// the classical equation obtained with `v = k^{1-μ}`, which turns it into
/// the linear `v' = (1-μ)(p - q v)`.
pub fn exact_classical_value<T: Scalar>(params: &ModelParams<T>, t: T) -> T {
    let one_minus_mu = T::one() - params.mu;
    let ratio = params.p / params.q;
    let v = ratio + (params.k0.powf(one_minus_mu) - ratio) * (-params.q * one_minus_mu * t).exp();
    v.powf(one_minus_mu.recip())
}

pub fn solve_exact_classical<T: Scalar>(
    params: &ModelParams<T>,
    times: &[T],
) -> Result<Trajectory<T>> {
    params.validate()?;
    params.require_classical("solve_exact_classical")?;
    check_times(times)?;
    let values: Vec<T> = times
        .iter()
        .map(|&t| exact_classical_value(params, t))
        .collect();
    Ok(Trajectory {
        times: times.to_vec(),
        trusted: vec![true; values.len()],
        values,
        method: Method::ExactClassical,
    })
}

/// Smallest step count accepted by [`solve_abm_fractional`].
pub const ABM_MIN_STEPS: usize = 16;
/// Relative gap between `steps` and `2·steps` above which
/// [`abm_self_convergence`] warns.
pub const ABM_REFINEMENT_TOL: f64 = 1e-3;

/// Fractional Adams-Bashforth-Moulton on a uniform grid of `steps`
/// intervals over `[0, t_end]` (the Diethelm-Ford-Freed scheme).
///
/// The predictor uses product-rectangle weights and the corrector
/// product-trapezoid weights, with one corrector pass per step. The whole
/// history enters every step, so the cost is O(steps²). At α = 1 the
/// scheme is Heun's method.
///
/// Fails with [`Error::NonPositiveState`] if capital stops being positive.
pub fn solve_abm_fractional<T: Scalar>(
    params: &ModelParams<T>,
    t_end: T,
    steps: usize,
) -> Result<Trajectory<T>> {
    params.validate()?;
    if !(t_end > T::zero()) || !t_end.is_finite() {
        return Err(Error::param(
            "t_end",
            format!("must be finite and > 0, got {t_end}"),
        ));
    }
    if steps < ABM_MIN_STEPS {
        return Err(Error::param(
            "steps",
            format!("need at least {ABM_MIN_STEPS}, got {steps}"),
        ));
    }
    let alpha = params.alpha;
    let h = t_end / T::of_usize(steps);
    let h_alpha = h.powf(alpha);
    let pred_scale = h_alpha / gamma(alpha + T::one())?;
    let corr_scale = h_alpha / gamma(alpha + T::of(2.0))?;
    let a1 = alpha + T::one();

    // Weights depend only on the lag m = n - j.
    let pow_alpha: Vec<T> = (0..=steps + 1)
        .map(|m| T::of_usize(m).powf(alpha))
        .collect();
    let pow_a1: Vec<T> = (0..=steps + 1).map(|m| T::of_usize(m).powf(a1)).collect();
    let rect: Vec<T> = (0..=steps)
        .map(|m| pow_alpha[m + 1] - pow_alpha[m])
        .collect();
    let trap: Vec<T> = (0..steps)
        .map(|m| pow_a1[m + 2] + pow_a1[m] - T::of(2.0) * pow_a1[m + 1])
        .collect();

    let k0 = params.k0;
    let mut times = Vec::with_capacity(steps + 1);
    let mut values = Vec::with_capacity(steps + 1);
    let mut rates = Vec::with_capacity(steps + 1);
    times.push(T::zero());
    values.push(k0);
    rates.push(params.growth_rate(k0));

    for n in 0..steps {
        let t_next = T::of_usize(n + 1) * h;
        let mut history = T::zero();
        for (j, &f) in rates.iter().enumerate() {
            history = history + rect[n - j] * f;
        }
        let predicted = k0 + pred_scale * history;
        if !(predicted > T::zero()) {
            return Err(Error::NonPositiveState {
                step: n + 1,
                time: t_next.as_f64(),
                value: predicted.as_f64(),
            });
        }

        let nf = T::of_usize(n);
        let first = pow_a1[n] - (nf - alpha) * pow_alpha[n + 1];
        let mut memory = first * rates[0];
        for (j, &f) in rates.iter().enumerate().skip(1) {
            memory = memory + trap[n - j] * f;
        }
        let corrected = k0 + corr_scale * (params.growth_rate(predicted) + memory);
        if !(corrected > T::zero()) || !corrected.is_finite() {
            return Err(Error::NonPositiveState {
                step: n + 1,
                time: t_next.as_f64(),
                value: corrected.as_f64(),
            });
        }
        times.push(t_next);
        values.push(corrected);
        rates.push(params.growth_rate(corrected));
    }
    if let Some(last) = times.last_mut() {
        *last = t_end;
    }
    Ok(Trajectory {
        trusted: vec![true; values.len()],
        times,
        values,
        method: Method::AbmFractional,
    })
}

/// Relative difference at `t_end` between runs with `steps` and
/// `2·steps`. Logs a warning above [`ABM_REFINEMENT_TOL`].
pub fn abm_self_convergence<T: Scalar>(
    params: &ModelParams<T>,
    t_end: T,
    steps: usize,
) -> Result<T> {
    let coarse = solve_abm_fractional(params, t_end, steps)?;
    let fine = solve_abm_fractional(params, t_end, 2 * steps)?;
    let (_, a) = coarse.last().expect("non-empty trajectory");
    let (_, b) = fine.last().expect("non-empty trajectory");
    let gap = ((a - b) / b).abs();
    if gap > T::of(ABM_REFINEMENT_TOL) {
        log::warn!(
            "abm: {} vs {} steps differ by {:e} (relative) at t = {}; refine the grid",
            steps,
            2 * steps,
            gap.as_f64(),
            t_end
        );
    }
    Ok(gap)
}
