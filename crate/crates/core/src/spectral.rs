//! Finite-window realizations of a projection kernel: Nyström matrices,
//! their spectra, exact sampling of the induced DPP, Fredholm determinants
//! and, for tiny lattice windows, the full law by enumeration.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, PhaseSpace};
use crate::quadrature;

/// Largest eigenvalue excursion outside [0, 1] that is silently clipped.
pub const MAX_CLIP: f64 = 1e-6;

/// Largest window handled by [`brute_force_law`].
pub const ENUMERATION_LIMIT: usize = 12;

/// Nodes per Gauss panel when discretizing wide windows.
const PANEL_ORDER: usize = 40;

/// `K_ij = √(w_i w_j) Π(x_i, x_j)` on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub matrix: DMatrix<f64>,
    pub window: (f64, f64),
}

impl DiscretizedOperator {
    /// Wraps a symmetric matrix as an operator on sites `0, 1, …, n−1` with
    /// unit weights.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if matrix.ncols() != n || n == 0 {
            return Err(Error::Parameter("kernel matrix must be square and non-empty".into()));
        }
        let asym = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (matrix[(i, j)] - matrix[(j, i)]).abs())
            .fold(0.0, f64::max);
        if asym > 1e-12 {
            return Err(Error::Parameter(format!("kernel matrix is not symmetric (deviation {asym:e})")));
        }
        Ok(Self {
            nodes: (0..n).map(|i| i as f64).collect(),
            weights: vec![1.0; n],
            matrix,
            window: (0.0, (n - 1) as f64),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// Nyström discretization of `Π` restricted to `window`. Continuous windows
/// get about `n` Gauss–Legendre nodes in equal panels; lattice windows use
/// their lattice points (and ignore `n`).
pub fn discretize(spec: &KernelSpec, window: (f64, f64), n: usize) -> Result<DiscretizedOperator> {
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && b > a) {
        return Err(Error::Domain(format!("window [{a}, {b}] must be bounded and non-empty")));
    }
    let rule = match spec.phase_space() {
        PhaseSpace::Continuous { lo, hi } => {
            if a < lo || b > hi {
                return Err(Error::Domain(format!(
                    "window [{a}, {b}] leaves the phase space ({lo}, {hi}) of the {} kernel",
                    spec.family().name()
                )));
            }
            if n < 2 {
                return Err(Error::Parameter("need at least 2 nodes".into()));
            }
            let panels = n.div_ceil(PANEL_ORDER);
            let order = n.div_ceil(panels);
            let width = (b - a) / panels as f64;
            let breaks: Vec<f64> = (0..=panels).map(|k| if k == panels { b } else { a + width * k as f64 }).collect();
            quadrature::panels(&breaks, order, |_| f64::INFINITY)
        }
        space => {
            let nodes = space.lattice_points(a, b);
            let weights = vec![1.0; nodes.len()];
            quadrature::Rule { nodes, weights }
        }
    };
    let m = rule.len();
    if m == 0 {
        return Err(Error::Domain(format!("window [{a}, {b}] holds no lattice points")));
    }
    let (x, w) = (&rule.nodes, &rule.weights);
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| -> Result<Vec<f64>> {
            (i..m)
                .map(|j| Ok((w[i] * w[j]).sqrt() * spec.evaluate_unchecked(x[i], x[j])?.value))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut matrix = DMatrix::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            matrix[(i, i + k)] = v;
            matrix[(i + k, i)] = v;
        }
    }
    Ok(DiscretizedOperator {
        nodes: rule.nodes,
        weights: rule.weights,
        matrix,
        window,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// Eigenvalues clipped to [0, 1], in decreasing order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    /// Largest distance of a raw eigenvalue from [0, 1].
    pub clip: f64,
    pub source: DiscretizedOperator,
}

impl SpectralData {
    /// `E #window = Σ λ`.
    pub fn expected_count(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    /// `Var #window = Σ λ(1 − λ)`.
    pub fn count_variance(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l * (1.0 - l)).sum()
    }
}

/// Full symmetric eigendecomposition with eigenvalues clipped to [0, 1].
pub fn eigendecompose(op: &DiscretizedOperator) -> Result<SpectralData> {
    let eig = SymmetricEigen::new(op.matrix.clone());
    let n = op.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let mut clip: f64 = 0.0;
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let raw = eig.eigenvalues[i];
        clip = clip.max(-raw).max(raw - 1.0);
        eigenvalues.push(raw.clamp(0.0, 1.0));
        let mut column = eig.eigenvectors.column(i).clone_owned();
        // fix the sign so repeated runs give identical vectors
        let pivot = column.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            column.neg_mut();
        }
        eigenvectors.set_column(k, &column);
    }
    if clip > MAX_CLIP {
        return Err(Error::DiscretizationQuality { clip });
    }
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        clip,
        source: op.clone(),
    })
}

/// Tolerance on trace and `Σλ(1−λ)` when choosing a node count.
pub const RESOLUTION_TOLERANCE: f64 = 1e-4;

const MAX_NODES: usize = 4096;

/// Spectrum on `window` with the node count doubled from `start` until the
/// trace and `Σλ(1−λ)` move by less than [`RESOLUTION_TOLERANCE`]; the
/// coarser of the last two discretizations is returned. Lattice windows are
/// exact and need no search.
pub fn resolved_spectrum(spec: &KernelSpec, window: (f64, f64), start: usize) -> Result<SpectralData> {
    let mut n = start.max(2);
    let mut coarse = eigendecompose(&discretize(spec, window, n)?)?;
    if spec.phase_space().is_lattice() {
        return Ok(coarse);
    }
    while n < MAX_NODES {
        n *= 2;
        let fine = eigendecompose(&discretize(spec, window, n)?)?;
        let moved = (fine.expected_count() - coarse.expected_count())
            .abs()
            .max((fine.count_variance() - coarse.count_variance()).abs());
        if moved < RESOLUTION_TOLERANCE {
            return Ok(coarse);
        }
        coarse = fine;
    }
    Err(Error::Consistency(format!(
        "window [{}, {}] not resolved with {MAX_NODES} nodes",
        window.0, window.1
    )))
}

/// A finite configuration: sorted points of one sample in a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    pub points: Vec<f64>,
    pub window: (f64, f64),
}

impl Configuration {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `#_[lo, hi]`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.points.iter().filter(|&&x| x >= lo && x <= hi).count()
    }

    /// `S_f = Σ f(x_i)`.
    pub fn additive(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().map(|&x| f(x)).sum()
    }
}

/// Seed of sample `index` in a run with master seed `master`.
pub fn sample_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add(index)
}

/// Exact sampling from a finite-window DPP.
pub trait Sampler: Sync {
    fn sample(&self, seed: u64) -> Result<Configuration>;
}

/// Negative conditional densities below this are reported, not clipped.
const DENSITY_FLOOR: f64 = -1e-9;

impl Sampler for SpectralData {
    /// Bernoulli selection of eigenvectors, then sequential draws from the
    /// projection onto their span. The residual density after each draw is
    /// `‖y_i‖² − Σ_s (q_s·y_i)²` with `q_s` an orthonormal basis of the picked
    /// rows.
    fn sample(&self, seed: u64) -> Result<Configuration> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.eigenvalues.len();
        let selected: Vec<usize> = (0..n).filter(|&i| rng.random::<f64>() < self.eigenvalues[i]).collect();
        let k = selected.len();
        let y = self.eigenvectors.select_columns(&selected);
        let mut density: Vec<f64> = (0..n).map(|i| y.row(i).norm_squared()).collect();
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
        let mut picked = Vec::with_capacity(k);
        for t in 0..k {
            let total: f64 = density.iter().sum();
            let remaining = (k - t) as f64;
            if (total - remaining).abs() > 1e-9 * remaining {
                return Err(Error::SamplerConsistency { value: total - remaining });
            }
            let mut u = rng.random::<f64>() * total;
            let mut j = n - 1;
            for (idx, &p) in density.iter().enumerate() {
                if u < p {
                    j = idx;
                    break;
                }
                u -= p;
            }
            picked.push(j);
            let mut w = y.row(j).transpose();
            for q in &basis {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
            let q = w.normalize();
            let proj = &y * &q;
            for (d, p) in density.iter_mut().zip(proj.iter()) {
                *d -= p * p;
                if *d < DENSITY_FLOOR {
                    return Err(Error::SamplerConsistency { value: *d });
                }
                *d = d.max(0.0);
            }
            density[j] = 0.0;
            basis.push(q);
        }
        let mut points: Vec<f64> = picked.iter().map(|&j| self.source.nodes[j]).collect();
        points.sort_by(f64::total_cmp);
        Ok(Configuration {
            points,
            window: self.source.window,
        })
    }
}

/// One exact sample through the spectral algorithm.
pub fn sample(sd: &SpectralData, seed: u64) -> Result<Configuration> {
    sd.sample(seed)
}

/// `count` samples with seeds `master, master+1, …`, in seed order whatever
/// the thread count.
pub fn sample_many<S: Sampler + ?Sized>(sampler: &S, master: u64, count: usize) -> Result<Vec<Configuration>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sampler.sample(sample_seed(master, i)))
        .collect()
}

/// Site-by-site sampler for an integrable kernel on a lattice window.
///
/// The chain rule over sites is Gaussian elimination on `K − N`, `N` the
/// diagonal of empty sites. Diagonal shifts commute with `x ↦ diag(x)`, so
/// every Schur complement keeps the form `c (a_i b_j − b_i a_j)/(x_i − x_j)`
/// off the diagonal with updated generators `a`, `b`; a sample costs `O(n²)`
/// and needs no eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrableSampler {
    nodes: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    diagonal: Vec<f64>,
    prefactor: f64,
    window: (f64, f64),
}

impl IntegrableSampler {
    pub fn new(spec: &KernelSpec, window: (f64, f64)) -> Result<Self> {
        let space = spec.phase_space();
        if !space.is_lattice() {
            return Err(Error::Domain(format!(
                "the integrable sampler needs a lattice kernel, {} is continuous",
                spec.label()
            )));
        }
        let nodes = space.lattice_points(window.0, window.1);
        if nodes.is_empty() {
            return Err(Error::Domain(format!("window [{}, {}] holds no lattice points", window.0, window.1)));
        }
        let mut a = Vec::with_capacity(nodes.len());
        let mut b = Vec::with_capacity(nodes.len());
        let mut diagonal = Vec::with_capacity(nodes.len());
        for &x in &nodes {
            let p = spec.parts(x)?;
            a.push(p.a);
            b.push(p.b);
            diagonal.push(spec.evaluate_diagonal(x)?.value);
        }
        Ok(Self {
            nodes,
            a,
            b,
            diagonal,
            prefactor: spec.prefactor(),
            window,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `Π(x_i, x_i)` at every site.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn expected_count(&self) -> f64 {
        self.diagonal.iter().sum()
    }
}

impl Sampler for IntegrableSampler {
    fn sample(&self, seed: u64) -> Result<Configuration> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, c) = (&self.nodes, self.prefactor);
        let (mut a, mut b, mut d) = (self.a.clone(), self.b.clone(), self.diagonal.clone());
        let mut points = Vec::new();
        for k in 0..x.len() {
            let p = d[k];
            if p < DENSITY_FLOOR || p > 1.0 - DENSITY_FLOOR {
                return Err(Error::SamplerConsistency { value: p });
            }
            let occupied = rng.random::<f64>() < p;
            let pivot = if occupied {
                points.push(x[k]);
                p
            } else {
                p - 1.0
            };
            let (ak, bk, xk) = (a[k], b[k], x[k]);
            for i in k + 1..x.len() {
                let l = c * (a[i] * bk - b[i] * ak) / (x[i] - xk);
                let s = l / pivot;
                d[i] -= l * s;
                a[i] -= s * ak;
                b[i] -= s * bk;
            }
        }
        Ok(Configuration {
            points,
            window: self.window,
        })
    }
}

/// A region of the window together with the value of `g` on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedRegion {
    pub lo: f64,
    pub hi: f64,
    pub z: f64,
}

/// `det(1 + (g − 1) Π χ_B)` on the discretized operator; for `g ≡ z` on `B`
/// this is `E z^{#_B}`.
pub fn fredholm_det(sd: &SpectralData, g: impl Fn(f64) -> f64, subregion: (f64, f64)) -> f64 {
    let op = &sd.source;
    let d: Vec<f64> = op
        .nodes
        .iter()
        .map(|&x| if x >= subregion.0 && x <= subregion.1 { g(x) - 1.0 } else { 0.0 })
        .collect();
    determinant_with_diagonal(&op.matrix, &d)
}

/// `det(1 + Σ_j (z_j − 1) χ_{B_j} Π χ)` for pairwise disjoint regions.
pub fn fredholm_det_multi(sd: &SpectralData, regions: &[WeightedRegion]) -> Result<f64> {
    for (i, a) in regions.iter().enumerate() {
        if !(a.hi >= a.lo) {
            return Err(Error::Parameter(format!("region [{}, {}] is empty", a.lo, a.hi)));
        }
        for b in &regions[i + 1..] {
            if a.lo <= b.hi && b.lo <= a.hi {
                return Err(Error::Parameter(format!(
                    "regions [{}, {}] and [{}, {}] overlap",
                    a.lo, a.hi, b.lo, b.hi
                )));
            }
        }
    }
    let op = &sd.source;
    let d: Vec<f64> = op
        .nodes
        .iter()
        .map(|&x| {
            regions
                .iter()
                .find(|r| x >= r.lo && x <= r.hi)
                .map_or(0.0, |r| r.z - 1.0)
        })
        .collect();
    Ok(determinant_with_diagonal(&op.matrix, &d))
}

/// `det(I + D K)` restricted to the indices where `D ≠ 0`; through the
/// eigenvalues of the symmetric form `|D|^½ K |D|^½` when `D` has one sign,
/// LU otherwise.
fn determinant_with_diagonal(k: &DMatrix<f64>, d: &[f64]) -> f64 {
    let active: Vec<usize> = (0..d.len()).filter(|&i| d[i] != 0.0).collect();
    if active.is_empty() {
        return 1.0;
    }
    let m = active.len();
    let positive = active.iter().all(|&i| d[i] > 0.0);
    let negative = active.iter().all(|&i| d[i] < 0.0);
    if positive || negative {
        let sign = if positive { 1.0 } else { -1.0 };
        let root: Vec<f64> = active.iter().map(|&i| d[i].abs().sqrt()).collect();
        let sym = DMatrix::from_fn(m, m, |a, b| sign * root[a] * k[(active[a], active[b])] * root[b]);
        SymmetricEigen::new(sym).eigenvalues.iter().map(|l| 1.0 + l).product()
    } else {
        let dense = DMatrix::from_fn(m, m, |a, b| {
            let delta = if a == b { 1.0 } else { 0.0 };
            delta + d[active[a]] * k[(active[a], active[b])]
        });
        dense.lu().determinant()
    }
}

/// Exact law of the DPP on at most [`ENUMERATION_LIMIT`] sites, as
/// probabilities indexed by occupation bitmask.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetLaw {
    pub sites: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl SubsetLaw {
    /// `Σ_S P(S) z^{|S ∩ B|}` with `B` given as a site mask.
    pub fn generating_function(&self, mask: u32, z: f64) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(s, p)| p * z.powi((s as u32 & mask).count_ones() as i32))
            .sum()
    }

    /// Distribution of `#_B` for a site mask.
    pub fn count_distribution(&self, mask: u32) -> Vec<f64> {
        let mut out = vec![0.0; mask.count_ones() as usize + 1];
        for (s, p) in self.probabilities.iter().enumerate() {
            out[(s as u32 & mask).count_ones() as usize] += p;
        }
        out
    }

    /// `Var Σ f(x_i)` under the enumerated law.
    pub fn additive_variance(&self, f: &[f64]) -> f64 {
        let (mut m1, mut m2) = (0.0, 0.0);
        for (s, p) in self.probabilities.iter().enumerate() {
            let v: f64 = (0..f.len()).filter(|i| s >> i & 1 == 1).map(|i| f[i]).sum();
            m1 += p * v;
            m2 += p * v * v;
        }
        m2 - m1 * m1
    }

    /// Mask of the sites inside `[lo, hi]`.
    pub fn mask(&self, lo: f64, hi: f64) -> u32 {
        self.sites
            .iter()
            .enumerate()
            .filter(|(_, &x)| x >= lo && x <= hi)
            .fold(0, |m, (i, _)| m | 1 << i)
    }
}

/// `P(exactly S occupied) = (−1)^{|S^c|} det(K − I_{S^c})` for every subset.
pub fn brute_force_law(op: &DiscretizedOperator) -> Result<SubsetLaw> {
    let n = op.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::Size {
            sites: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let probabilities: Vec<f64> = (0..1usize << n)
        .map(|s| {
            let mut m = op.matrix.clone();
            let mut flips = 0;
            for i in 0..n {
                if s >> i & 1 == 0 {
                    m[(i, i)] -= 1.0;
                    flips += 1;
                }
            }
            let det = m.lu().determinant();
            if flips % 2 == 0 {
                det
            } else {
                -det
            }
        })
        .collect();
    let low = probabilities.iter().copied().fold(f64::INFINITY, f64::min);
    let total: f64 = probabilities.iter().sum();
    if low < -1e-12 || (total - 1.0).abs() > 1e-10 {
        return Err(Error::Consistency(format!(
            "enumerated law is not a probability (min {low:e}, total {total})"
        )));
    }
    Ok(SubsetLaw {
        sites: op.nodes.clone(),
        probabilities,
    })
}

/// Writes the spectral cache: `n, lo, hi`, then nodes, weights, eigenvalues
/// and the eigenvector matrix row by row, all little-endian f64.
pub fn write_spectral_cache<W: Write>(sd: &SpectralData, mut out: W) -> Result<()> {
    let n = sd.eigenvalues.len();
    let mut put = |v: f64| out.write_all(&v.to_le_bytes());
    put(n as f64)?;
    put(sd.source.window.0)?;
    put(sd.source.window.1)?;
    for &v in sd.source.nodes.iter().chain(&sd.source.weights).chain(&sd.eigenvalues) {
        put(v)?;
    }
    for i in 0..n {
        for j in 0..n {
            put(sd.eigenvectors[(i, j)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a cache written by [`write_spectral_cache`]; the operator matrix is
/// rebuilt as `V diag(λ) Vᵀ`.
pub fn read_spectral_cache<R: Read>(mut input: R) -> Result<SpectralData> {
    let mut get = || -> Result<f64> {
        let mut buf = [0u8; 8];
        input.read_exact(&mut buf)?;
        Ok(f64::from_le_bytes(buf))
    };
    let n = get()?;
    if !(n >= 0.0 && n.fract() == 0.0 && n < 1e6) {
        return Err(Error::Consistency(format!("corrupt spectral cache header (n = {n})")));
    }
    let n = n as usize;
    let window = (get()?, get()?);
    let mut read_vec = |len: usize| (0..len).map(|_| get()).collect::<Result<Vec<f64>>>();
    let nodes = read_vec(n)?;
    let weights = read_vec(n)?;
    let eigenvalues = read_vec(n)?;
    let flat = read_vec(n * n)?;
    let eigenvectors = DMatrix::from_row_slice(n, n, &flat);
    let matrix = &eigenvectors * DMatrix::from_diagonal(&DVector::from_vec(eigenvalues.clone())) * eigenvectors.transpose();
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
        clip: 0.0,
        source: DiscretizedOperator {
            nodes,
            weights,
            matrix,
            window,
        },
    })
}

/// Writes samples as CSV rows `seed,count,points` with points joined by `;`.
pub fn write_configurations<W: Write>(samples: &[(u64, Configuration)], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.into());
    writer.write_record(["seed", "count", "points"]).map_err(io)?;
    for (seed, config) in samples {
        let points: Vec<String> = config.points.iter().map(|p| p.to_string()).collect();
        writer
            .write_record([seed.to_string(), config.len().to_string(), points.join(";")])
            .map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}
