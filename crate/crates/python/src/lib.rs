//! Python bindings: kernels, special functions, taper variances, sampling
//! and Fredholm determinants.

use dpp_rigidity::error::Error;
use dpp_rigidity::kernels::{KernelConfig, KernelSpec};
use dpp_rigidity::rigidity::{check_offdiag_bound, default_alpha, GridResolution, Taper, TaperKind, Verdict};
use dpp_rigidity::spectral::{
    fredholm_det_multi, resolved_spectrum, sample_many, IntegrableSampler, Sampler, WeightedRegion,
};
use dpp_rigidity::{specfun, variance};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A projection kernel. Construct with one of the static methods.
#[pyclass(frozen)]
#[derive(Clone)]
struct Kernel {
    spec: KernelSpec,
}

#[pymethods]
impl Kernel {
    #[staticmethod]
    fn sine() -> Self {
        Self { spec: KernelSpec::sine() }
    }

    #[staticmethod]
    fn bessel(s: f64) -> PyResult<Self> {
        Ok(Self {
            spec: KernelSpec::bessel(s).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn airy() -> Self {
        Self { spec: KernelSpec::airy() }
    }

    #[staticmethod]
    fn gamma(z: Complex64, zp: Complex64) -> PyResult<Self> {
        Ok(Self {
            spec: KernelSpec::gamma(z, zp).map_err(py_err)?,
        })
    }

    /// Kernel from the JSON form used by the CLI configs.
    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        let config: KernelConfig = serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self {
            spec: KernelSpec::from_config(&config).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.spec.config()).expect("kernel config serializes")
    }

    #[getter]
    fn label(&self) -> String {
        self.spec.label()
    }

    #[getter]
    fn is_lattice(&self) -> bool {
        self.spec.phase_space().is_lattice()
    }

    fn __call__(&self, x: f64, y: f64) -> PyResult<f64> {
        Ok(self.spec.evaluate(x, y).map_err(py_err)?.value)
    }

    fn __repr__(&self) -> String {
        format!("Kernel({})", self.spec.label())
    }
}

fn taper_kind(kind: &str) -> PyResult<TaperKind> {
    match kind {
        "symmetric" => Ok(TaperKind::Symmetric),
        "airy-one-sided" => Ok(TaperKind::AiryOneSided),
        other => Err(PyValueError::new_err(format!("unknown taper kind {other:?}"))),
    }
}

/// `(Ai(x), Ai'(x))`.
#[pyfunction]
fn airy(x: f64) -> PyResult<(f64, f64)> {
    let pair = specfun::airy(x).map_err(py_err)?;
    Ok((pair.ai.value, pair.ai_prime.value))
}

#[pyfunction]
fn bessel_j(order: f64, x: f64) -> PyResult<f64> {
    Ok(specfun::bessel_j(order, x).map_err(py_err)?.value)
}

#[pyfunction]
fn log_gamma(z: Complex64) -> PyResult<Complex64> {
    Ok(specfun::log_gamma(z).map_err(py_err)?.value)
}

#[pyfunction]
fn taper(x: f64, r: f64, t: f64, kind: &str) -> PyResult<f64> {
    Ok(Taper::new(taper_kind(kind)?, r, t).map_err(py_err)?.eval(x))
}

/// Variance of the taper statistic: `(value, quadrature_error, [region1, region2, region3])`.
#[pyfunction]
#[pyo3(signature = (kernel, r, t, kind = "symmetric", accuracy = variance::DEFAULT_ACCURACY))]
fn taper_variance(kernel: &Kernel, r: f64, t: f64, kind: &str, accuracy: f64) -> PyResult<(f64, f64, [f64; 3])> {
    let taper = Taper::new(taper_kind(kind)?, r, t).map_err(py_err)?;
    let v = variance::variance_regions(&kernel.spec, &taper, accuracy).map_err(py_err)?;
    Ok((v.value, v.quadrature_error, v.region_breakdown))
}

/// `count` independent configurations on `[lo, hi]`, one list of points each.
#[pyfunction]
fn sample(py: Python<'_>, kernel: &Kernel, lo: f64, hi: f64, seed: u64, count: usize) -> PyResult<Vec<Vec<f64>>> {
    let spec = &kernel.spec;
    let configurations = py
        .allow_threads(|| {
            let sampler: Box<dyn Sampler> = if spec.phase_space().is_lattice() {
                Box::new(IntegrableSampler::new(spec, (lo, hi))?)
            } else {
                Box::new(resolved_spectrum(spec, (lo, hi), 32)?)
            };
            sample_many(sampler.as_ref(), seed, count)
        })
        .map_err(py_err)?;
    Ok(configurations.into_iter().map(|c| c.points).collect())
}

/// `E Π z_j^{#B_j}` for disjoint regions `(lo_j, hi_j, z_j)` inside `[lo, hi]`.
#[pyfunction]
fn fredholm_det(kernel: &Kernel, lo: f64, hi: f64, regions: Vec<(f64, f64, f64)>) -> PyResult<f64> {
    let regions: Vec<WeightedRegion> = regions
        .into_iter()
        .map(|(lo, hi, z)| WeightedRegion { lo, hi, z })
        .collect();
    let sd = resolved_spectrum(&kernel.spec, (lo, hi), 32).map_err(py_err)?;
    fredholm_det_multi(&sd, &regions).map_err(py_err)
}

/// Off-diagonal decay check: `(estimated_C, bounded)`.
#[pyfunction]
#[pyo3(signature = (kernel, r, alpha = None))]
fn offdiag_bound(kernel: &Kernel, r: f64, alpha: Option<f64>) -> PyResult<(f64, bool)> {
    let alpha = alpha.unwrap_or_else(|| default_alpha(&kernel.spec));
    let report = check_offdiag_bound(&kernel.spec, r, alpha, GridResolution::default()).map_err(py_err)?;
    Ok((report.estimated_C, report.verdict == Verdict::Bounded))
}

#[pymodule]
fn rigidity(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Kernel>()?;
    m.add_function(wrap_pyfunction!(airy, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(log_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(taper, m)?)?;
    m.add_function(wrap_pyfunction!(taper_variance, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(fredholm_det, m)?)?;
    m.add_function(wrap_pyfunction!(offdiag_bound, m)?)?;
    Ok(())
}
