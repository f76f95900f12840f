//! Special functions behind the projection kernels: Airy `Ai`/`Ai'`, Bessel
//! `J_s` of real order `s > -1`, and the (complex) log-Gamma and digamma
//! functions.
//!
//! Every routine returns a [`SpecialValue`] carrying a rough absolute error
//! bound next to the value. Series/asymptotic crossovers were tuned against
//! an extended-precision reference table (see `data/reference_values.csv`).

mod airy;
mod bessel;
mod gamma;

use serde::Serialize;

pub use airy::{airy, AiryPair, AIRY_MAX_ARG, AIRY_MIN_ARG};
pub use bessel::bessel_j;
pub use gamma::{digamma, ln_gamma_real, log_gamma};

/// A function value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialValue<T = f64> {
    pub value: T,
    pub abs_error_bound: f64,
}

impl<T> SpecialValue<T> {
    pub(crate) fn new(value: T, abs_error_bound: f64) -> Self {
        Self {
            value,
            abs_error_bound,
        }
    }
}

/// `sin(pi x)` with exact argument reduction.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    // fold r in [0, 2) onto [-1/2, 1/2]
    let y = if r <= 0.5 {
        r
    } else if r <= 1.5 {
        1.0 - r
    } else {
        r - 2.0
    };
    // `+ 0.0` maps -0.0 to +0.0 so integer arguments give a signless zero
    (std::f64::consts::PI * y).sin() + 0.0
}

/// `cos(pi x)` with exact argument reduction.
pub(crate) fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}
