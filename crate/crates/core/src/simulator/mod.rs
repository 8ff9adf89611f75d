//! Small-blocklength realization of the random-binning key agreement code.
//!
//! Alice draws `m` uniformly and sends `s^n(m)`. She observes `x^n` and
//! publishes `φ(m, x^n)`; her key is `k(m, x^n)`. Bob decodes `(m, x^n)` from
//! `(y^n, φ)` by ML-MAP and outputs the key of his estimate. Error and leakage
//! are computed exactly by enumeration; ensembles compare their averages with
//! the finite-n bounds.

mod bounds;
mod code;
mod decode;
mod ensemble;
mod evaluate;

pub use bounds::{ensemble_error_bound, ensemble_leakage_bound, BoundKernel, ErrorBound, OptimizedBound};
pub use code::{
    generate_code, generate_code_on_stream, rate_bits, CodeSizes, SecretKeyCode, DEFAULT_TABLE_BUDGET,
};
pub use decode::{mlmap_decode, Decoded};
pub use ensemble::{
    empirical_exponent_fit, ensemble_average, fit_slope, BoundCheck, EnsembleReport, EnsembleRow, ExponentFit,
    SlopeFit,
};
pub use evaluate::{
    exact_evaluate, exact_evaluate_with_budget, monte_carlo_evaluate, wilson_interval, Method, SimReport,
    DEFAULT_ENUMERATION_BUDGET, Z_95,
};
