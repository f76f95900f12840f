//! Variance of additive statistics of a projection DPP,
//! `Var S_f = ½ ∫∫ |f(x) − f(y)|² Π(x,y)² dμ(x) dμ(y)`.
//!
//! The statistic is assumed constant (`f_∞`) outside a bounded window `D`.
//! Pairs inside `D` are summed directly; pairs with one point outside use the
//! reproducing property, `∫_{M∖D} Π(x,y)² dμ(y) = Π(x,x) − ∫_D Π(x,y)² dμ(y)`,
//! so no tail of the kernel is ever truncated.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, PhaseSpace, NEAR_DIAGONAL_BAND};
use crate::quadrature;
use crate::rigidity::{Taper, TaperKind, Zone};

/// Default absolute accuracy target for [`variance_additive`].
pub const DEFAULT_ACCURACY: f64 = 1e-8;

/// Gauss orders tried in turn; the error is estimated from consecutive pairs.
const ORDERS: [usize; 4] = [24, 32, 40, 48];

/// Panel width in kernel length scales.
const KERNEL_PANEL: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceResult {
    pub value: f64,
    pub quadrature_error: f64,
    /// Both points in the annulus; one in the annulus and one beyond T; one
    /// inside R and one outside. For statistics that are not tapers: pairs
    /// inside the window, pairs leaving it, and 0.
    pub region_breakdown: [f64; 3],
    /// Radius of the window outside which the statistic is constant.
    pub truncation_radius: f64,
}

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A bounded function `f`, equal to `outside` off `support`, with hints for
/// the quadrature (breakpoints and a local length scale).
#[derive(Clone)]
pub struct AdditiveStatistic {
    f: Scalar,
    support: (f64, f64),
    outside: f64,
    breakpoints: Vec<f64>,
    scale: Scalar,
    taper: Option<Taper>,
    description: String,
}

impl fmt::Debug for AdditiveStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdditiveStatistic")
            .field("description", &self.description)
            .field("support", &self.support)
            .field("outside", &self.outside)
            .finish()
    }
}

impl AdditiveStatistic {
    pub fn new(
        description: impl Into<String>,
        support: (f64, f64),
        outside: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            support,
            outside,
            breakpoints: Vec::new(),
            scale: Arc::new(|_| f64::INFINITY),
            taper: None,
            description: description.into(),
        }
    }

    /// Points where `f` or its derivative jumps.
    pub fn with_breakpoints(mut self, breakpoints: Vec<f64>) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    /// Length over which `f` varies near `x`.
    pub fn with_length_scale(mut self, scale: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.scale = Arc::new(scale);
        self
    }

    /// Indicator of `[lo, hi]`.
    pub fn indicator(lo: f64, hi: f64) -> Self {
        Self::new(format!("indicator[{lo},{hi}]"), (lo, hi), 0.0, move |x| {
            if x >= lo && x <= hi {
                1.0
            } else {
                0.0
            }
        })
        .with_breakpoints(vec![lo, hi])
    }

    /// The taper itself. For the Airy kind `f → 1` at +∞; only differences
    /// of `f` enter the variance, so the window is cut where the kernel is
    /// negligible instead.
    pub fn from_taper(taper: Taper) -> Self {
        let support = match taper.kind {
            TaperKind::Symmetric => (-taper.t, taper.t),
            TaperKind::AiryOneSided => (-taper.t, f64::INFINITY),
        };
        let description = match taper.kind {
            TaperKind::Symmetric => format!("taper(R={},T={})", taper.r, taper.t),
            TaperKind::AiryOneSided => format!("airy-taper(R={},T={})", taper.r, taper.t),
        };
        let mut stat = Self::new(description, support, 0.0, move |x| taper.eval(x))
            .with_breakpoints(taper.breakpoints())
            .with_length_scale(move |x| taper.length_scale(x));
        stat.taper = Some(taper);
        stat
    }

    /// `f + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let f = self.f.clone();
        let mut out = self.clone();
        out.f = Arc::new(move |x| f(x) + c);
        out.outside += c;
        out.description = format!("{} + {c}", self.description);
        out
    }

    /// `a·f`.
    pub fn scaled(&self, a: f64) -> Self {
        let f = self.f.clone();
        let mut out = self.clone();
        out.f = Arc::new(move |x| a * f(x));
        out.outside *= a;
        out.description = format!("{a}·{}", self.description);
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.support.0 || x > self.support.1 {
            self.outside
        } else {
            (self.f)(x)
        }
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Largest `|x|` of the support.
    pub fn support_bound(&self) -> f64 {
        self.support.0.abs().max(self.support.1.abs())
    }

    pub fn outside_value(&self) -> f64 {
        self.outside
    }

    pub fn taper(&self) -> Option<&Taper> {
        self.taper.as_ref()
    }

    fn zone(&self, x: f64) -> usize {
        match self.taper.map(|t| t.zone(x)) {
            Some(Zone::Core) => 0,
            Some(Zone::Far) => 2,
            Some(Zone::Annulus) | None => 1,
        }
    }
}

/// Window in which the statistic varies, intersected with where the kernel
/// lives.
fn window(spec: &KernelSpec, stat: &AdditiveStatistic) -> Result<(f64, f64)> {
    let (lo, hi) = spec.effective_domain();
    let (a, b) = (stat.support.0.max(lo), stat.support.1.min(hi));
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "statistic `{}` is not constant outside a bounded window",
            stat.description
        )));
    }
    if !(b >= a) {
        return Err(Error::Domain(format!("statistic `{}` misses the phase space", stat.description)));
    }
    Ok((a, b))
}

/// Quadrature nodes of the window for one Gauss order (lattice: the points).
fn discretize_window(spec: &KernelSpec, stat: &AdditiveStatistic, order: usize) -> Result<quadrature::Rule> {
    let (a, b) = window(spec, stat)?;
    match spec.phase_space() {
        PhaseSpace::Continuous { lo, .. } => {
            let mut interior = stat.breakpoints.clone();
            interior.push(0.0);
            if a == lo && lo == 0.0 {
                // geometric grading into the hard edge
                interior.push(1e-30);
            }
            let breaks = quadrature::breakpoints(a, b, interior);
            Ok(quadrature::panels(&breaks, order, |x| {
                (KERNEL_PANEL * spec.length_scale(x)).min((stat.scale)(x)).max(1e-30)
            }))
        }
        space => {
            let nodes = space.lattice_points(a, b);
            let weights = vec![1.0; nodes.len()];
            Ok(quadrature::Rule { nodes, weights })
        }
    }
}

/// Sums over one discretization: `pairs[zone_i][zone_j]` and the closure
/// terms per zone.
struct Sums {
    pairs: [[f64; 3]; 3],
    closure: [f64; 3],
    magnitude: f64,
    nodes: usize,
}

impl Sums {
    fn total(&self) -> f64 {
        self.pairs.iter().flatten().sum::<f64>() + self.closure.iter().sum::<f64>()
    }

    fn regions(&self, taper: bool) -> [f64; 3] {
        let (c, a) = (0, 1);
        if taper {
            [
                self.pairs[a][a],
                self.closure[a],
                self.pairs[c][a] + self.pairs[a][c] + self.closure[c],
            ]
        } else {
            [self.pairs.iter().flatten().sum(), self.closure.iter().sum(), 0.0]
        }
    }
}

fn accumulate(spec: &KernelSpec, stat: &AdditiveStatistic, rule: &quadrature::Rule) -> Result<Sums> {
    let n = rule.len();
    let (x, w) = (&rule.nodes, &rule.weights);
    let f: Vec<f64> = x.iter().map(|&t| stat.eval(t)).collect();
    let zone: Vec<usize> = x.iter().map(|&t| stat.zone(t)).collect();
    let parts = x.iter().map(|&t| spec.parts(t)).collect::<Result<Vec<_>>>()?;
    let a: Vec<f64> = parts.iter().map(|p| p.a).collect();
    let b: Vec<f64> = parts.iter().map(|p| p.b).collect();
    let diag = x
        .iter()
        .map(|&t| spec.evaluate_diagonal(t).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    let lattice = spec.phase_space().is_lattice();
    let pref = spec.prefactor();

    // per row: pair sums split by the zone of the partner, and ∫_D Π(x_i, y)² dy
    let rows: Vec<([f64; 3], f64)> = (0..n)
        .into_par_iter()
        .map(|i| -> Result<([f64; 3], f64)> {
            let (xi, ai, bi, fi) = (x[i], a[i], b[i], f[i]);
            let guard = if lattice {
                0.0
            } else {
                2.0 * NEAR_DIAGONAL_BAND * spec.length_scale(xi)
            };
            let mut acc = [0.0; 3];
            let mut mass = 0.0;
            for j in 0..n {
                let dx = xi - x[j];
                let v = if j == i {
                    diag[i]
                } else if dx.abs() < guard {
                    spec.evaluate_unchecked(xi, x[j])?.value
                } else {
                    pref * (ai * b[j] - bi * a[j]) / dx
                };
                let v2 = w[j] * v * v;
                mass += v2;
                let df = fi - f[j];
                acc[zone[j]] += df * df * v2;
            }
            Ok((acc, mass))
        })
        .collect::<Result<_>>()?;

    let mut sums = Sums {
        pairs: [[0.0; 3]; 3],
        closure: [0.0; 3],
        magnitude: 0.0,
        nodes: n,
    };
    for (i, (acc, mass)) in rows.iter().enumerate() {
        for (k, value) in acc.iter().enumerate() {
            sums.pairs[zone[i]][k] += 0.5 * w[i] * value;
        }
        let d = f[i] - stat.outside;
        sums.closure[zone[i]] += w[i] * d * d * (diag[i] - mass);
        sums.magnitude += w[i] * d * d * diag[i] + 0.5 * w[i] * acc.iter().sum::<f64>();
    }
    Ok(sums)
}

fn result_from(sums: &Sums, error: f64, taper: bool, radius: f64) -> VarianceResult {
    VarianceResult {
        value: sums.total(),
        quadrature_error: error,
        region_breakdown: sums.regions(taper),
        truncation_radius: radius,
    }
}

/// `Var S_f` to absolute accuracy `accuracy`. Continuous kernels use
/// composite Gauss rules whose order is raised until two consecutive orders
/// agree; lattice kernels are summed exactly.
pub fn variance_additive(spec: &KernelSpec, stat: &AdditiveStatistic, accuracy: f64) -> Result<VarianceResult> {
    let (a, b) = window(spec, stat)?;
    let radius = a.abs().max(b.abs());
    let taper = stat.taper.is_some();
    let rounding = |s: &Sums| 1e-15 * (s.nodes as f64).sqrt().max(1.0) * s.magnitude;
    if spec.phase_space().is_lattice() {
        let sums = accumulate(spec, stat, &discretize_window(spec, stat, 1)?)?;
        return Ok(result_from(&sums, rounding(&sums), taper, radius));
    }
    let mut previous = accumulate(spec, stat, &discretize_window(spec, stat, ORDERS[0])?)?;
    let mut best = None;
    for &order in &ORDERS[1..] {
        let current = accumulate(spec, stat, &discretize_window(spec, stat, order)?)?;
        let error = (current.total() - previous.total()).abs() + rounding(&current);
        let result = result_from(&current, error, taper, radius);
        if error <= accuracy {
            return Ok(result);
        }
        best = Some(result);
        previous = current;
    }
    let partial = best.expect("at least two orders are tried");
    Err(Error::Budget {
        target: accuracy,
        reached: partial.quadrature_error,
        partial: Box::new(partial),
    })
}

/// Variance of a taper statistic split into the three regions
/// `{R<|x|,|y|<T}`, `{R<|x|<T<|y|}` and `{|x|<R<|y|}`.
pub fn variance_regions(spec: &KernelSpec, taper: &Taper, accuracy: f64) -> Result<VarianceResult> {
    variance_additive(spec, &AdditiveStatistic::from_taper(*taper), accuracy)
}

/// `Var S_f = Σ f_i² K_ii − Σ f_i f_j K_ij²` for a DPP on finitely many
/// sites with symmetric kernel matrix `K`.
pub fn variance_finite(k: &DMatrix<f64>, f: &[f64]) -> f64 {
    let n = f.len();
    let mut v = 0.0;
    for i in 0..n {
        v += f[i] * f[i] * k[(i, i)];
        for j in 0..n {
            v -= f[i] * f[j] * k[(i, j)] * k[(i, j)];
        }
    }
    v
}

/// `½ Σ (f_i − f_j)² P_ij²`, the pairwise form valid when `P` is a projection.
pub fn variance_projection(p: &DMatrix<f64>, f: &[f64]) -> f64 {
    let n = f.len();
    let mut v = 0.0;
    for i in 0..n {
        for j in 0..n {
            let d = f[i] - f[j];
            v += 0.5 * d * d * p[(i, j)] * p[(i, j)];
        }
    }
    v
}

/// Variances of the taper along a list of T, with the fit `Var·log T ≈ c`.
#[derive(Debug, Clone, Serialize)]
pub struct DecayScan {
    pub kernel: String,
    #[serde(rename = "R")]
    pub r: f64,
    pub rows: Vec<(f64, VarianceResult)>,
    pub c_fit: f64,
    /// `Var·log T − c` per row.
    pub residuals: Vec<f64>,
    /// Adjacent pairs where the variance rises beyond the combined error bars.
    pub non_monotone: Vec<(f64, f64)>,
}

impl DecayScan {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].1.value < w[0].1.value)
    }

    /// `Var·log T` per row.
    pub fn products(&self) -> Vec<f64> {
        self.rows.iter().map(|(t, v)| v.value * t.ln()).collect()
    }

    /// CSV with columns `kernel,R,T,variance,region1,region2,region3,quad_error,c_fit`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.into());
        writer
            .write_record(["kernel", "R", "T", "variance", "region1", "region2", "region3", "quad_error", "c_fit"])
            .map_err(io)?;
        for (t, v) in &self.rows {
            let [r1, r2, r3] = v.region_breakdown;
            writer
                .write_record([
                    self.kernel.clone(),
                    self.r.to_string(),
                    t.to_string(),
                    v.value.to_string(),
                    r1.to_string(),
                    r2.to_string(),
                    r3.to_string(),
                    v.quadrature_error.to_string(),
                    self.c_fit.to_string(),
                ])
                .map_err(io)?;
        }
        writer.flush()?;
        Ok(())
    }
}

pub fn decay_scan(
    spec: &KernelSpec,
    kind: TaperKind,
    r: f64,
    t_list: &[f64],
    accuracy: f64,
) -> Result<DecayScan> {
    if t_list.is_empty() {
        return Err(Error::Parameter("decay scan needs at least one T".into()));
    }
    if t_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter(format!("T list must be increasing, got {t_list:?}")));
    }
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let taper = Taper::new(kind, r, t)?;
        rows.push((t, variance_regions(spec, &taper, accuracy)?));
    }
    let products: Vec<f64> = rows.iter().map(|(t, v)| v.value * t.ln()).collect();
    let c_fit = products.iter().sum::<f64>() / products.len() as f64;
    let residuals = products.iter().map(|p| p - c_fit).collect();
    let non_monotone = rows
        .windows(2)
        .filter(|w| w[1].1.value > w[0].1.value + w[0].1.quadrature_error + w[1].1.quadrature_error)
        .map(|w| (w[0].0, w[1].0))
        .collect();
    Ok(DecayScan {
        kernel: spec.label(),
        r,
        rows,
        c_fit,
        residuals,
        non_monotone,
    })
}
