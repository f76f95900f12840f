//! Airy function `Ai` and its derivative on the real line.
//!
//! Three regimes: the Maclaurin series around the origin, the exponentially
//! decaying asymptotic expansion for large positive `x`, and the oscillatory
//! expansion for large negative `x`.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::Serialize;

use super::SpecialValue;
use crate::error::{Error, Result};

/// Ai(0) = 3^(-2/3) / Γ(2/3)
const AI0: f64 = 0.355_028_053_887_817_24;
/// -Ai'(0) = 3^(-1/3) / Γ(1/3)
const AIP0: f64 = 0.258_819_403_792_806_8;

/// Beyond this `Ai(x)` underflows towards the subnormal range.
pub const AIRY_MAX_ARG: f64 = 100.0;
/// Below this the phase `2/3 |x|^{3/2}` no longer carries absolute accuracy.
pub const AIRY_MIN_ARG: f64 = -1e8;

const SERIES_MAX_POS: f64 = 5.5;
const SERIES_MIN_NEG: f64 = -7.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AiryPair {
    pub ai: SpecialValue,
    pub ai_prime: SpecialValue,
}

pub fn airy(x: f64) -> Result<AiryPair> {
    if !x.is_finite() || x > AIRY_MAX_ARG || x < AIRY_MIN_ARG {
        return Err(Error::Range {
            function: "airy",
            arg: x,
        });
    }
    Ok(if x > SERIES_MAX_POS {
        positive_asymptotic(x)
    } else if x < SERIES_MIN_NEG {
        negative_asymptotic(-x)
    } else {
        maclaurin(x)
    })
}

fn maclaurin(x: f64) -> AiryPair {
    let x3 = x * x * x;
    // f, g and their derivatives as power series in x^3
    let (mut f, mut g, mut df, mut dg): (f64, f64, f64, f64) = (1.0, x, 0.5 * x * x, 1.0);
    let (mut tf, mut tg, mut tdf, mut tdg) = (f, g, df, dg);
    let (mut af, mut ag, mut adf, mut adg) = (f.abs(), g.abs(), df.abs(), dg.abs());
    let mut k = 0.0;
    loop {
        tf *= x3 / ((3.0 * k + 2.0) * (3.0 * k + 3.0));
        tg *= x3 / ((3.0 * k + 3.0) * (3.0 * k + 4.0));
        tdf *= x3 / ((3.0 * k + 3.0) * (3.0 * k + 5.0));
        tdg *= x3 / ((3.0 * k + 1.0) * (3.0 * k + 3.0));
        f += tf;
        g += tg;
        df += tdf;
        dg += tdg;
        af += tf.abs();
        ag += tg.abs();
        adf += tdf.abs();
        adg += tdg.abs();
        k += 1.0;
        let small = tf.abs().max(tg.abs()).max(tdf.abs()).max(tdg.abs());
        if small < 1e-18 * (1.0 + af.max(ag)) || k > 200.0 {
            break;
        }
    }
    let ai = AI0 * f - AIP0 * g;
    let aip = AI0 * df - AIP0 * dg;
    let eps = 4.0 * f64::EPSILON;
    AiryPair {
        ai: SpecialValue::new(ai, eps * (AI0 * af + AIP0 * ag)),
        ai_prime: SpecialValue::new(aip, eps * (AI0 * adf + AIP0 * adg)),
    }
}

/// Coefficients u_k of the Airy asymptotic expansions, and v_k = -(6k+1)/(6k-1) u_k.
fn expansion_coefficients(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    u.push(1.0);
    v.push(1.0);
    for k in 1..n {
        let kf = k as f64;
        let prev = u[k - 1];
        let uk = prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

/// Sums `sum_k sign_k c_k / zeta^k` over the indices in `ks` until the terms
/// stop decreasing. Returns (sum, first neglected term).
fn truncated_sum(coeffs: &[f64], zeta: f64, ks: impl Iterator<Item = usize>, alternate: bool) -> (f64, f64) {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for (i, k) in ks.enumerate() {
        if k >= coeffs.len() {
            break;
        }
        let term = coeffs[k] / zeta.powi(k as i32);
        if term.abs() > last {
            return (sum, last);
        }
        let sign = if alternate && i % 2 == 1 { -1.0 } else { 1.0 };
        sum += sign * term;
        last = term.abs();
        if last < 1e-17 * sum.abs() {
            return (sum, last);
        }
    }
    (sum, last)
}

fn positive_asymptotic(x: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (u, v) = expansion_coefficients(40);
    // alternating in every term: sum (-1)^k u_k zeta^-k
    let (su, eu) = truncated_sum(&u, zeta, 0..40, true);
    let (sv, ev) = truncated_sum(&v, zeta, 0..40, true);
    let decay = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.sqrt().sqrt();
    let ai = decay / q * su;
    let aip = -decay * q * sv;
    let eps = 4.0 * f64::EPSILON;
    AiryPair {
        ai: SpecialValue::new(ai, decay / q * eu + eps * ai.abs()),
        ai_prime: SpecialValue::new(aip, decay * q * ev + eps * aip.abs()),
    }
}

fn negative_asymptotic(t: f64) -> AiryPair {
    let zeta = 2.0 / 3.0 * t * t.sqrt();
    let (u, v) = expansion_coefficients(40);
    let (pu, epu) = truncated_sum(&u, zeta, (0..40).step_by(2), true);
    let (qu, equ) = truncated_sum(&u, zeta, (1..40).step_by(2), true);
    let (pv, epv) = truncated_sum(&v, zeta, (0..40).step_by(2), true);
    let (qv, eqv) = truncated_sum(&v, zeta, (1..40).step_by(2), true);
    let theta = zeta + FRAC_PI_4;
    let (sin, cos) = theta.sin_cos();
    let q = t.sqrt().sqrt();
    let amp = 1.0 / PI.sqrt();
    let ai = amp / q * (sin * pu - cos * qu);
    let aip = -amp * q * (cos * pv + sin * qv);
    // phase of zeta carries ~ulp(zeta) absolute error
    let phase = 2.0 * f64::EPSILON * zeta;
    let eps = 4.0 * f64::EPSILON;
    AiryPair {
        ai: SpecialValue::new(ai, amp / q * (epu + equ + phase * (pu.abs() + qu.abs())) + eps * ai.abs()),
        ai_prime: SpecialValue::new(
            aip,
            amp * q * (epv + eqv + phase * (pv.abs() + qv.abs())) + eps * aip.abs(),
        ),
    }
}
