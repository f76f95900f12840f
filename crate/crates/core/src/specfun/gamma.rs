//! Log-Gamma and digamma for complex arguments.
//!
//! Arguments with `Re w >= 1/2` are shifted upward until `|w| >= 15` and then
//! summed with the Stirling series; the left half-plane goes through the
//! reflection formula with the branch correction that keeps `log_gamma` equal
//! to the analytic continuation of `ln Γ` from the positive axis.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{cos_pi, sin_pi, SpecialValue};
use crate::error::{Error, Result};

const LN_PI: f64 = 1.144_729_885_849_400_2;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const STIRLING_MIN: f64 = 15.0;

/// B_{2k} for k = 1..=12.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

fn is_nonpositive_integer(w: Complex64) -> bool {
    w.im == 0.0 && w.re <= 0.0 && w.re == w.re.round()
}

fn stirling(w: Complex64) -> Complex64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = (k + 1) as f64;
        let term = pow * (b / (2.0 * k * (2.0 * k - 1.0)));
        series += term;
        if term.norm() < 1e-17 * series.norm() {
            break;
        }
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + HALF_LN_2PI + series
}

fn sin_pi_complex(w: Complex64) -> Complex64 {
    let b = PI * w.im;
    Complex64::new(sin_pi(w.re) * b.cosh(), cos_pi(w.re) * b.sinh())
}

/// Principal branch of `ln Γ(w)`.
///
/// On the negative real axis (the branch cut) the value is the limit from the
/// upper half-plane, so `Im = π·floor(w)` there.
pub fn log_gamma(w: Complex64) -> Result<SpecialValue<Complex64>> {
    if !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::Parameter(format!("log_gamma argument {w} is not finite")));
    }
    if is_nonpositive_integer(w) {
        return Err(Error::Pole {
            function: "log_gamma",
            arg: w.re,
        });
    }
    if w.im == 0.0 {
        let (ln_abs, _) = ln_gamma_real_unchecked(w.re);
        let im = if w.re < 0.0 { PI * w.re.floor() } else { 0.0 };
        let value = Complex64::new(ln_abs, im);
        return Ok(SpecialValue::new(value, error_scale(value, w)));
    }
    let value = log_gamma_complex(w);
    Ok(SpecialValue::new(value, error_scale(value, w)))
}

fn error_scale(value: Complex64, w: Complex64) -> f64 {
    let shifts = (STIRLING_MIN - w.re).max(0.0);
    8.0 * f64::EPSILON * (1.0 + value.norm() + shifts * (1.0 + w.norm().ln().abs()))
}

fn log_gamma_complex(w: Complex64) -> Complex64 {
    if w.re < 0.5 {
        let branch = (2.0 * PI).copysign(w.im) * (0.5 * w.re + 0.25).floor();
        return Complex64::new(LN_PI, branch) - sin_pi_complex(w).ln() - log_gamma_complex(1.0 - w);
    }
    if w.norm() >= STIRLING_MIN {
        return stirling(w);
    }
    let n = (STIRLING_MIN - w.re).ceil().max(0.0) as usize;
    let mut shifted = w;
    let mut correction = Complex64::new(0.0, 0.0);
    for _ in 0..n {
        correction += shifted.ln();
        shifted += 1.0;
    }
    stirling(shifted) - correction
}

/// `(ln|Γ(x)|, sign Γ(x))` for real non-pole `x`.
pub fn ln_gamma_real(x: f64) -> Result<(SpecialValue, f64)> {
    if !x.is_finite() {
        return Err(Error::Parameter(format!("ln_gamma argument {x} is not finite")));
    }
    if x <= 0.0 && x == x.round() {
        return Err(Error::Pole {
            function: "ln_gamma",
            arg: x,
        });
    }
    let (v, sign) = ln_gamma_real_unchecked(x);
    let err = error_scale(Complex64::new(v, 0.0), Complex64::new(x, 0.0));
    Ok((SpecialValue::new(v, err), sign))
}

fn ln_gamma_real_unchecked(x: f64) -> (f64, f64) {
    if x < 0.5 {
        let s = sin_pi(x);
        let (rest, _) = ln_gamma_real_unchecked(1.0 - x);
        let sign = if s < 0.0 { -1.0 } else { 1.0 };
        return (LN_PI - s.abs().ln() - rest, sign);
    }
    if x >= STIRLING_MIN {
        return (stirling(Complex64::new(x, 0.0)).re, 1.0);
    }
    let n = (STIRLING_MIN - x).ceil() as usize;
    let mut prod = 1.0;
    let mut shifted = x;
    for _ in 0..n {
        prod *= shifted;
        shifted += 1.0;
    }
    (stirling(Complex64::new(shifted, 0.0)).re - prod.ln(), 1.0)
}

/// Digamma `ψ(w) = Γ'(w)/Γ(w)`.
pub fn digamma(w: Complex64) -> Result<SpecialValue<Complex64>> {
    if !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::Parameter(format!("digamma argument {w} is not finite")));
    }
    if is_nonpositive_integer(w) {
        return Err(Error::Pole {
            function: "digamma",
            arg: w.re,
        });
    }
    let value = digamma_unchecked(w);
    let err = 8.0 * f64::EPSILON * (1.0 + value.norm()) * (1.0 + (STIRLING_MIN - w.re).max(0.0));
    Ok(SpecialValue::new(value, err))
}

fn digamma_unchecked(w: Complex64) -> Complex64 {
    if w.re < 0.5 {
        let b = PI * w.im;
        let cot = if w.im == 0.0 {
            Complex64::new(cos_pi(w.re) / sin_pi(w.re), 0.0)
        } else {
            let cos = Complex64::new(cos_pi(w.re) * b.cosh(), -sin_pi(w.re) * b.sinh());
            cos / sin_pi_complex(w)
        };
        return digamma_unchecked(1.0 - w) - PI * cot;
    }
    let mut shifted = w;
    let mut correction = Complex64::new(0.0, 0.0);
    while shifted.norm() < STIRLING_MIN {
        correction += shifted.inv();
        shifted += 1.0;
    }
    let inv = shifted.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv2;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = pow * (b / (2.0 * (k + 1) as f64));
        series += term;
        if term.norm() < 1e-17 * series.norm() {
            break;
        }
        pow *= inv2;
    }
    shifted.ln() - 0.5 * inv - series - correction
}
