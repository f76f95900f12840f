//! Bessel functions of the first kind `J_s(x)` for real order `s > -1` and
//! `x >= 0`: ascending series below the crossover, Hankel's asymptotic
//! expansion above it.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::{ln_gamma_real, SpecialValue};
use crate::error::{Error, Result};

/// Ascending series is used for `x < crossover(order)`.
fn crossover(order: f64) -> f64 {
    // Hankel terms shrink from the first one on only while 4s² < 8x; above
    // order 6 the switch moves out and accuracy degrades (orders used by the
    // kernels stay well below that).
    12.0_f64.max(order * order / 3.0)
}

pub fn bessel_j(order: f64, x: f64) -> Result<SpecialValue> {
    if !order.is_finite() || order <= -1.0 {
        return Err(Error::Parameter(format!(
            "Bessel order must be > -1, got {order}"
        )));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Range {
            function: "bessel_j",
            arg: x,
        });
    }
    if x == 0.0 {
        return if order == 0.0 {
            Ok(SpecialValue::new(1.0, 0.0))
        } else if order > 0.0 {
            Ok(SpecialValue::new(0.0, 0.0))
        } else {
            Err(Error::Range {
                function: "bessel_j",
                arg: x,
            })
        };
    }
    if x < crossover(order) {
        ascending_series(order, x)
    } else {
        Ok(hankel(order, x))
    }
}

fn ascending_series(order: f64, x: f64) -> Result<SpecialValue> {
    let (ln_gamma, _) = ln_gamma_real(order + 1.0)?;
    let half = 0.5 * x;
    let mut term = (order * half.ln() - ln_gamma.value).exp();
    let step = -half * half;
    let mut sum = term;
    let mut abs_sum = term.abs();
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= step / (k * (k + order));
        sum += term;
        abs_sum += term.abs();
        if term.abs() <= 1e-17 * abs_sum && k > half {
            break;
        }
        if k > 500.0 {
            break;
        }
    }
    let err = 4.0 * f64::EPSILON * abs_sum + ln_gamma.abs_error_bound * sum.abs();
    Ok(SpecialValue::new(sum, err))
}

fn hankel(order: f64, x: f64) -> SpecialValue {
    let mu = 4.0 * order * order;
    let eight_x = 8.0 * x;
    // a_k = prod_{j<=k} (mu - (2j-1)^2) / (k! (8x)^k)
    let mut a = 1.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut last = f64::INFINITY;
    let mut truncation = 0.0;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * eight_x);
        let mag = a.abs();
        if mag > last {
            // series started diverging; stop at the smallest term
            truncation = last;
            break;
        }
        // P takes even k with sign (-1)^{k/2}, Q odd k with sign (-1)^{(k-1)/2}
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        last = mag;
        if mag < 1e-17 {
            truncation = mag;
            break;
        }
    }
    let chi = x - (0.5 * order * PI + FRAC_PI_4);
    let (sin, cos) = chi.sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    let value = amp * (p * cos - q * sin);
    let phase_err = f64::EPSILON * (x + order * FRAC_PI_2);
    let err = amp * (truncation + phase_err * (p.abs() + q.abs()) + 4.0 * f64::EPSILON);
    SpecialValue::new(value, err)
}
