//! Series and reference solvers for the Solow-Swan capital equation
//! `D^α k = p k^μ - q k` with classical (α = 1) or Caputo (0 < α < 1) time
//! derivative.
//!
//! The series solution `k(t) = Σ cₙ t^{nα}` comes from a coefficient
//! recursion in which the power nonlinearity is expanded by Adomian
//! polynomials (see [`adomian`]). Independent checks: the closed-form
//! classical solution and a fractional Adams-Bashforth-Moulton scheme
//! ([`oracle`]), and quadrature confirmations of the integral-transform
//! identities behind the recursion ([`transform`]).
//!
//! Numerical kernels are generic over [`Scalar`] (`f32` or `f64`); reports
//! and sweeps work in `f64`.

// `!(x > 0)` is the NaN-rejecting form used throughout; tabulated constants
// are kept at full published precision for the f64 path.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod adomian;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod series;
pub mod special;
pub mod sweep;
pub mod transform;

pub use adomian::{adomian_bruteforce_oracle, adomian_power_coeffs, CoeffVec};
pub use equilibrium::{balanced_growth_capital, find_equilibria, EquilibriumReport, Stability};
pub use error::{Error, Result};
pub use model::ModelParams;
pub use oracle::{solve_abm_fractional, solve_exact_classical, Method, Trajectory};
pub use scalar::Scalar;
pub use series::{build_series, classical_taylor_check, eval_series, SeriesSolution, SeriesValue};
pub use special::{gamma_ratio, ln_gamma, mittag_leffler, MlParams};
pub use sweep::{run_solve, run_sweep, SweepConfig, SweepGrid};
pub use transform::{sumudu_monomial, sumudu_numeric, IdentityReport, SumuduSample};

pub type Params64 = ModelParams<f64>;
pub type Params32 = ModelParams<f32>;
pub type Series64 = SeriesSolution<f64>;
pub type Series32 = SeriesSolution<f32>;
pub type Coeffs64 = CoeffVec<f64>;
pub type Coeffs32 = CoeffVec<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
