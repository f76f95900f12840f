//! Projection kernels in integrable form
//! `Π(x, y) = c · (A(x)B(y) − B(x)A(y)) / (x − y)`.
//!
//! Shipped families: sine (baseline), Bessel, Airy and the Gamma kernel on
//! the half-integer lattice, plus polynomial "custom" kernels used as
//! counterexamples. Every family is reduced to real `A`, `B` with their
//! derivatives so diagonal and near-diagonal values come from the same
//! handles.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{airy, bessel_j, digamma, ln_gamma_real, log_gamma, sin_pi, cos_pi, AIRY_MAX_ARG};

/// Relative size of the near-diagonal band, measured in local length scales.
pub const NEAR_DIAGONAL_BAND: f64 = 1e-3;

/// Beyond this point the Airy kernel is below 1e−12 in absolute value.
pub const AIRY_RIGHT_CUTOFF: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PhaseSpace {
    /// Open interval with Lebesgue measure; infinite ends allowed.
    Continuous { lo: f64, hi: f64 },
    /// `Z` with counting measure.
    IntegerLattice,
    /// `1/2 + Z` with counting measure.
    HalfIntegerLattice,
}

impl PhaseSpace {
    pub fn is_lattice(&self) -> bool {
        !matches!(self, PhaseSpace::Continuous { .. })
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            PhaseSpace::Continuous { lo, hi } => x > lo && x < hi,
            PhaseSpace::IntegerLattice => x == x.round(),
            PhaseSpace::HalfIntegerLattice => (x - 0.5) == (x - 0.5).round(),
        }
    }

    /// Lattice points in `[lo, hi]`, in increasing order.
    pub fn lattice_points(&self, lo: f64, hi: f64) -> Vec<f64> {
        let offset = match self {
            PhaseSpace::IntegerLattice => 0.0,
            PhaseSpace::HalfIntegerLattice => 0.5,
            PhaseSpace::Continuous { .. } => return Vec::new(),
        };
        let first = (lo - offset).ceil() as i64;
        let last = (hi - offset).floor() as i64;
        (first..=last).map(|k| k as f64 + offset).collect()
    }
}

/// Which of the two admissible parameter regimes a Gamma kernel lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaSeries {
    Principal,
    Complementary,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Sine,
    Bessel { s: f64 },
    Airy,
    Gamma { z: Complex64, zp: Complex64, series: GammaSeries },
    /// Polynomial `A`, `B` (coefficients in increasing degree).
    Custom { a: Vec<f64>, b: Vec<f64> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Sine => "sine",
            Family::Bessel { .. } => "bessel",
            Family::Airy => "airy",
            Family::Gamma { .. } => "gamma",
            Family::Custom { .. } => "custom",
        }
    }
}

/// `A`, `B` and their derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegrableParts {
    pub a: f64,
    pub b: f64,
    pub da: f64,
    pub db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Generic,
    NearDiagonal,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: f64,
    pub regime: Regime,
}

/// JSON form of a kernel: `{family, s?, z_re?, z_im?, zp_re?, zp_im?, window?}`;
/// custom kernels add `a`, `b`, `prefactor`, `lattice`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zp_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zp_im: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<bool>,
}

/// An immutable projection kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: Family,
    phase_space: PhaseSpace,
    prefactor: f64,
    window: Option<(f64, f64)>,
}

impl KernelSpec {
    /// `sin(π(x−y)) / (π(x−y))` on the real line.
    pub fn sine() -> Self {
        Self {
            family: Family::Sine,
            phase_space: PhaseSpace::Continuous {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            },
            prefactor: 1.0 / PI,
            window: None,
        }
    }

    /// Bessel kernel of order `s > -1` on `(0, ∞)`.
    pub fn bessel(s: f64) -> Result<Self> {
        if !s.is_finite() || s <= -1.0 {
            return Err(Error::Parameter(format!("Bessel kernel needs s > -1, got {s}")));
        }
        Ok(Self {
            family: Family::Bessel { s },
            phase_space: PhaseSpace::Continuous {
                lo: 0.0,
                hi: f64::INFINITY,
            },
            prefactor: 0.5,
            window: None,
        })
    }

    /// Airy kernel `(Ai(x)Ai'(y) − Ai(y)Ai'(x)) / (x − y)`, stored as
    /// `A = Ai'`, `B = Ai` with prefactor −1.
    pub fn airy() -> Self {
        Self {
            family: Family::Airy,
            phase_space: PhaseSpace::Continuous {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            },
            prefactor: -1.0,
            window: None,
        }
    }

    /// Gamma kernel on the half-integers. Requires either `zp = conj(z)` with
    /// `z` non-real, or real `z != zp` inside a common interval `(m, m+1)`.
    pub fn gamma(z: Complex64, zp: Complex64) -> Result<Self> {
        let finite = [z.re, z.im, zp.re, zp.im].iter().all(|v| v.is_finite());
        let series = if !finite {
            None
        } else if z.im != 0.0 && zp == z.conj() {
            Some(GammaSeries::Principal)
        } else if z.im == 0.0
            && zp.im == 0.0
            && z.re != zp.re
            && z.re.fract() != 0.0
            && zp.re.fract() != 0.0
            && z.re.floor() == zp.re.floor()
        {
            Some(GammaSeries::Complementary)
        } else {
            None
        };
        let series = series.ok_or_else(|| {
            Error::Parameter(format!(
                "Gamma kernel parameters z={z}, z'={zp} are in neither the principal nor the complementary series"
            ))
        })?;
        let prefactor = match series {
            GammaSeries::Principal => {
                let s = complex_sin_pi(z).norm_sqr();
                2.0 * s / (PI * (2.0 * PI * z.im).sinh())
            }
            GammaSeries::Complementary => {
                sin_pi(z.re) * sin_pi(zp.re) / (PI * sin_pi(z.re - zp.re))
            }
        };
        Ok(Self {
            family: Family::Gamma { z, zp, series },
            phase_space: PhaseSpace::HalfIntegerLattice,
            prefactor,
            window: None,
        })
    }

    /// Polynomial kernel `c (A(x)B(y) − B(x)A(y))/(x−y)`; not a projection in
    /// general, used to exercise the bound checks.
    pub fn custom(a: Vec<f64>, b: Vec<f64>, prefactor: f64, lattice: bool) -> Result<Self> {
        if a.is_empty() || b.is_empty() || !prefactor.is_finite() {
            return Err(Error::Parameter("custom kernel needs non-empty a, b and a finite prefactor".into()));
        }
        let phase_space = if lattice {
            PhaseSpace::IntegerLattice
        } else {
            PhaseSpace::Continuous {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            }
        };
        Ok(Self {
            family: Family::Custom { a, b },
            phase_space,
            prefactor,
            window: None,
        })
    }

    pub fn with_window(mut self, lo: f64, hi: f64) -> Self {
        self.window = Some((lo, hi));
        self
    }

    pub fn from_config(config: &KernelConfig) -> Result<Self> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::Parameter(format!("{} kernel needs `{name}`", config.family)))
        };
        let spec = match config.family.as_str() {
            "sine" => Self::sine(),
            "bessel" => Self::bessel(need(config.s, "s")?)?,
            "airy" => Self::airy(),
            "gamma" => {
                let z = Complex64::new(need(config.z_re, "z_re")?, config.z_im.unwrap_or(0.0));
                let zp = Complex64::new(need(config.zp_re, "zp_re")?, config.zp_im.unwrap_or(0.0));
                Self::gamma(z, zp)?
            }
            "custom" => Self::custom(
                config.a.clone().unwrap_or_default(),
                config.b.clone().unwrap_or_default(),
                config.prefactor.unwrap_or(1.0),
                config.lattice.unwrap_or(false),
            )?,
            other => return Err(Error::Parameter(format!("unknown kernel family `{other}`"))),
        };
        Ok(match config.window {
            Some([lo, hi]) => spec.with_window(lo, hi),
            None => spec,
        })
    }

    pub fn config(&self) -> KernelConfig {
        let mut config = KernelConfig {
            family: self.family.name().to_string(),
            window: self.window.map(|(lo, hi)| [lo, hi]),
            ..Default::default()
        };
        match &self.family {
            Family::Bessel { s } => config.s = Some(*s),
            Family::Gamma { z, zp, .. } => {
                config.z_re = Some(z.re);
                config.z_im = Some(z.im);
                config.zp_re = Some(zp.re);
                config.zp_im = Some(zp.im);
            }
            Family::Custom { a, b } => {
                config.a = Some(a.clone());
                config.b = Some(b.clone());
                config.prefactor = Some(self.prefactor);
                config.lattice = Some(self.phase_space.is_lattice());
            }
            Family::Sine | Family::Airy => {}
        }
        config
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn phase_space(&self) -> PhaseSpace {
        self.phase_space
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn window(&self) -> Option<(f64, f64)> {
        self.window
    }

    /// Short label used in CSV output, e.g. `bessel(s=0)`.
    pub fn label(&self) -> String {
        match &self.family {
            Family::Bessel { s } => format!("bessel(s={s})"),
            Family::Gamma { z, zp, .. } => format!("gamma(z={z},z'={zp})"),
            other => other.name().to_string(),
        }
    }

    pub fn gamma_series(&self) -> Option<GammaSeries> {
        match self.family {
            Family::Gamma { series, .. } => Some(series),
            _ => None,
        }
    }

    /// Interval carrying all of the kernel's mass to double precision: the
    /// phase space, with the Airy right tail cut where `Ai` is below 1e−12.
    pub fn effective_domain(&self) -> (f64, f64) {
        match (self.phase_space, &self.family) {
            (PhaseSpace::Continuous { lo, .. }, Family::Airy) => (lo, AIRY_RIGHT_CUTOFF),
            (PhaseSpace::Continuous { lo, hi }, _) => (lo, hi),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Length over which `A` and `B` change by O(1) near `x`.
    pub fn length_scale(&self, x: f64) -> f64 {
        match &self.family {
            Family::Sine => 1.0 / PI,
            Family::Bessel { .. } => {
                let x = x.abs();
                2.0 * x / (1.0 + 2.0 * x.sqrt())
            }
            Family::Airy => 1.0 / (1.0 + x.abs().sqrt()),
            Family::Gamma { .. } => 1.0,
            Family::Custom { .. } => 1.0 + x.abs(),
        }
    }

    /// `|x − y|` below which the difference quotient is replaced by the
    /// midpoint expansion.
    pub fn near_diagonal_threshold(&self, x: f64, y: f64) -> f64 {
        NEAR_DIAGONAL_BAND * self.length_scale(0.5 * (x + y))
    }

    /// `A`, `B`, `A'`, `B'` at `x`, analytically continued off the lattice
    /// for the Gamma kernel.
    pub fn parts(&self, x: f64) -> Result<IntegrableParts> {
        match &self.family {
            Family::Sine => {
                let (s, c) = (sin_pi(x), cos_pi(x));
                Ok(IntegrableParts {
                    a: s,
                    b: c,
                    da: PI * c,
                    db: -PI * s,
                })
            }
            Family::Bessel { s } => bessel_parts(*s, x),
            Family::Airy => {
                if x > AIRY_MAX_ARG {
                    // Ai and Ai' are below the smallest normal double here
                    return Ok(IntegrableParts::default());
                }
                let p = airy(x)?;
                let (ai, aip) = (p.ai.value, p.ai_prime.value);
                Ok(IntegrableParts {
                    a: aip,
                    b: ai,
                    da: x * ai,
                    db: aip,
                })
            }
            Family::Gamma { z, zp, series } => gamma_parts(*z, *zp, *series, x),
            Family::Custom { a, b } => {
                let (a, da) = polynomial(a, x);
                let (b, db) = polynomial(b, x);
                Ok(IntegrableParts { a, b, da, db })
            }
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if self.phase_space.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{x} is not in the phase space of the {} kernel", self.family.name())))
        }
    }

    /// `Π(x, y)`.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<KernelValue> {
        self.check_domain(x)?;
        self.check_domain(y)?;
        self.evaluate_unchecked(x, y)
    }

    pub(crate) fn evaluate_unchecked(&self, x: f64, y: f64) -> Result<KernelValue> {
        if x == y {
            return self.diagonal_unchecked(x);
        }
        // distinct lattice points are at least 1 apart; no cancellation issue
        if !self.phase_space.is_lattice() && (x - y).abs() < self.near_diagonal_threshold(x, y) {
            return Ok(KernelValue {
                value: self.midpoint_expansion(x, y)?,
                regime: Regime::NearDiagonal,
            });
        }
        let (px, py) = (self.parts(x)?, self.parts(y)?);
        Ok(KernelValue {
            value: generic_value(self.prefactor, &px, x, &py, y),
            regime: Regime::Generic,
        })
    }

    /// `Π(m + e, m − e) = c [(A′B − AB′) + e² ((A‴B − AB‴)/6 + (A′B″ − A″B′)/2)]`
    /// at the midpoint `m`, exact to O(e⁴).
    fn midpoint_expansion(&self, x: f64, y: f64) -> Result<f64> {
        let m = 0.5 * (x + y);
        let e = 0.5 * (x - y);
        let [a0, a1, a2, a3, b0, b1, b2, b3] = self.jet(m)?;
        let lead = a1 * b0 - a0 * b1;
        let curvature = (a3 * b0 - a0 * b3) / 6.0 + (a1 * b2 - a2 * b1) / 2.0;
        Ok(self.prefactor * (lead + e * e * curvature))
    }

    /// `A..A‴` followed by `B..B‴` at `x` for the continuous families.
    fn jet(&self, x: f64) -> Result<[f64; 8]> {
        let p = self.parts(x)?;
        match &self.family {
            Family::Sine => {
                let k = PI * PI;
                Ok([p.a, p.da, -k * p.a, -k * p.da, p.b, p.db, -k * p.b, -k * p.db])
            }
            Family::Airy => {
                // A = Ai', B = Ai, Ai'' = x Ai
                let (ai, aip) = (p.b, p.a);
                Ok([
                    aip,
                    x * ai,
                    ai + x * aip,
                    2.0 * aip + x * x * ai,
                    ai,
                    aip,
                    x * ai,
                    ai + x * aip,
                ])
            }
            Family::Bessel { s } => {
                // B = J_s(√x) solves 4x B'' + 4B' + (1 − s²/x) B = 0 and A = sB − 2xB'
                let s2 = s * s;
                let (b, b1) = (p.b, p.db);
                let b2 = -(4.0 * b1 + (1.0 - s2 / x) * b) / (4.0 * x);
                let b3 = -(8.0 * b2 + s2 / (x * x) * b + (1.0 - s2 / x) * b1) / (4.0 * x);
                let b4 = -(12.0 * b3 - 2.0 * s2 * b / (x * x * x) + 2.0 * s2 * b1 / (x * x) + (1.0 - s2 / x) * b2)
                    / (4.0 * x);
                Ok([
                    p.a,
                    p.da,
                    (s - 4.0) * b2 - 2.0 * x * b3,
                    (s - 6.0) * b3 - 2.0 * x * b4,
                    b,
                    b1,
                    b2,
                    b3,
                ])
            }
            Family::Custom { a, b } => {
                let (a2, a3) = polynomial_high(a, x);
                let (b2, b3) = polynomial_high(b, x);
                Ok([p.a, p.da, a2, a3, p.b, p.db, b2, b3])
            }
            Family::Gamma { .. } => Err(Error::Domain("the Gamma kernel lives on a lattice".into())),
        }
    }

    /// `Π(x, x) = c (A'(x)B(x) − A(x)B'(x))`; a one-point intensity, so a
    /// value below −1e−10 is reported as an inconsistency.
    pub fn evaluate_diagonal(&self, x: f64) -> Result<KernelValue> {
        self.check_domain(x)?;
        self.diagonal_unchecked(x)
    }

    fn diagonal_unchecked(&self, x: f64) -> Result<KernelValue> {
        let p = self.parts(x)?;
        let value = diagonal_from_parts(self.prefactor, &p);
        if value < -1e-10 && !matches!(self.family, Family::Custom { .. }) {
            return Err(Error::Consistency(format!(
                "negative intensity {value:e} at x = {x} for the {} kernel",
                self.family.name()
            )));
        }
        Ok(KernelValue {
            value,
            regime: Regime::Diagonal,
        })
    }

    /// Gamma kernel computed in complex arithmetic straight from the Gamma
    /// function ratios, without the real reduction. The imaginary part
    /// vanishes up to rounding for both series.
    pub fn evaluate_complex(&self, x: f64, y: f64) -> Result<Complex64> {
        let Family::Gamma { z, zp, .. } = self.family else {
            return Err(Error::Parameter("complex evaluation is only defined for the Gamma kernel".into()));
        };
        self.check_domain(x)?;
        self.check_domain(y)?;
        if x == y {
            return Err(Error::Domain("complex route has no diagonal formula".into()));
        }
        let lg = |w: Complex64| log_gamma(w).map(|v| v.value);
        let (gx, hx) = (lg(z + x + 0.5)?, lg(zp + x + 0.5)?);
        let (gy, hy) = (lg(z + y + 0.5)?, lg(zp + y + 0.5)?);
        // principal square root of the product of the four Gamma values
        let total = gx + hx + gy + hy;
        let arg = total.im - 2.0 * PI * ((total.im + PI) / (2.0 * PI)).floor();
        let root = 0.5 * Complex64::new(total.re, arg);
        let numerator = (gx + hy - root).exp() - (hx + gy - root).exp();
        let c = complex_sin_pi(z) * complex_sin_pi(zp) / (PI * complex_sin_pi(z - zp));
        Ok(c * numerator / (x - y))
    }
}

pub(crate) fn generic_value(prefactor: f64, px: &IntegrableParts, x: f64, py: &IntegrableParts, y: f64) -> f64 {
    prefactor * (px.a * py.b - px.b * py.a) / (x - y)
}

pub(crate) fn diagonal_from_parts(prefactor: f64, p: &IntegrableParts) -> f64 {
    prefactor * (p.da * p.b - p.a * p.db)
}

fn complex_sin_pi(w: Complex64) -> Complex64 {
    let b = PI * w.im;
    Complex64::new(sin_pi(w.re) * b.cosh(), cos_pi(w.re) * b.sinh())
}

fn polynomial(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut deriv = 0.0;
    for &c in coeffs.iter().rev() {
        deriv = deriv * x + value;
        value = value * x + c;
    }
    (value, deriv)
}

/// Second and third derivatives of a polynomial.
fn polynomial_high(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut d2 = 0.0;
    let mut d3 = 0.0;
    for (k, &c) in coeffs.iter().enumerate().skip(2) {
        let k = k as i32;
        d2 += c * (k * (k - 1)) as f64 * x.powi(k - 2);
        if k >= 3 {
            d3 += c * (k * (k - 1) * (k - 2)) as f64 * x.powi(k - 3);
        }
    }
    (d2, d3)
}

fn bessel_parts(s: f64, x: f64) -> Result<IntegrableParts> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("Bessel kernel is defined for x > 0, got {x}")));
    }
    let u = x.sqrt();
    let js = bessel_j(s, u)?.value;
    let js1 = bessel_j(s + 1.0, u)?.value;
    // d/dx over u = sqrt(x): d/dx = (1/2u) d/du
    Ok(IntegrableParts {
        a: u * js1,
        b: js,
        da: 0.5 * js - 0.5 * s * js1 / u,
        db: (s * js / u - js1) / (2.0 * u),
    })
}

fn gamma_parts(z: Complex64, zp: Complex64, series: GammaSeries, x: f64) -> Result<IntegrableParts> {
    match series {
        GammaSeries::Principal => {
            let w = z + x + 0.5;
            let theta = log_gamma(w)?.value.im;
            let dtheta = digamma(w)?.value.im;
            let (sin, cos) = theta.sin_cos();
            Ok(IntegrableParts {
                a: sin,
                b: cos,
                da: dtheta * cos,
                db: -dtheta * sin,
            })
        }
        GammaSeries::Complementary => {
            let (wg, wh) = (x + z.re + 0.5, x + zp.re + 0.5);
            let (lg, sg) = ln_gamma_real(wg)?;
            let (lh, sh) = ln_gamma_real(wh)?;
            if sg != sh {
                return Err(Error::Consistency(format!(
                    "Gamma factors change sign between {wg} and {wh}"
                )));
            }
            let r = 0.5 * (lg.value - lh.value);
            let half_dpsi = 0.5
                * (digamma(Complex64::new(wg, 0.0))?.value.re - digamma(Complex64::new(wh, 0.0))?.value.re);
            let (a, b) = (sg * r.exp(), sg * (-r).exp());
            Ok(IntegrableParts {
                a,
                b,
                da: a * half_dpsi,
                db: -b * half_dpsi,
            })
        }
    }
}
