//! Gauss–Legendre rules and graded composite panels.

use std::f64::consts::PI;

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    fn push_panel(&mut self, reference: &Rule, a: f64, b: f64) {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (&t, &w) in reference.nodes.iter().zip(&reference.weights) {
            self.nodes.push(mid + half * t);
            self.weights.push(half * w);
        }
    }
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes increasing.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(n, x).1;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule over `[breaks[0], breaks[last]]`. Every interval between
/// consecutive breakpoints is cut into panels no wider than `width(x)` at
/// either panel end, each carrying an `order`-point Gauss rule.
pub fn panels(breaks: &[f64], order: usize, width: impl Fn(f64) -> f64) -> Rule {
    let reference = gauss_legendre(order);
    let mut rule = Rule::default();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if !(b > a) {
            continue;
        }
        for (lo, hi) in panel_edges(a, b, &width) {
            rule.push_panel(&reference, lo, hi);
        }
    }
    rule
}

/// Panel endpoints tiling `[a, b]`.
pub fn panel_edges(a: f64, b: f64, width: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut edges = Vec::new();
    let mut x = a;
    while x < b {
        let mut w = width(x).min(b - x);
        for _ in 0..4 {
            let right = width(x + w);
            if right >= w {
                break;
            }
            w = right;
        }
        assert!(w > 0.0 && w.is_finite(), "panel width must be positive at {x}");
        // absorb a sliver at the end of the interval
        if b - (x + w) < 0.25 * w {
            w = b - x;
        }
        edges.push((x, x + w));
        x += w;
    }
    edges
}

/// Sorted, deduplicated breakpoints restricted to `[lo, hi]` (both included).
pub fn breakpoints(lo: f64, hi: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = interior.into_iter().filter(|&x| x > lo && x < hi).collect();
    out.push(lo);
    out.push(hi);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 24, 33, 64] {
            let rule = gauss_legendre(n);
            assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            for k in 0..(2 * n) {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let got = rule.integrate(|x| x.powi(k as i32));
                assert!((got - exact).abs() < 1e-13, "n={n} k={k}: {got} vs {exact}");
            }
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn panels_integrate_oscillatory_function() {
        let rule = panels(&[0.0, 3.0, 100.0], 24, |_| 4.0);
        let got = rule.integrate(|x| (3.0 * x).cos());
        assert!((got - (300.0f64).sin() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn graded_panels_resolve_endpoint_singularity() {
        let breaks = [0.0, 1e-30, 1.0];
        let rule = panels(&breaks, 24, |x| (4.0 * x).max(1e-30));
        let got = rule.integrate(|x| x.powf(-0.5));
        assert!((got - 2.0).abs() < 1e-12, "{got}");
    }

    #[test]
    fn edges_tile_the_interval() {
        let edges = panel_edges(-3.0, 10.0, |x| 0.5 + x.abs());
        assert_eq!(edges.first().unwrap().0, -3.0);
        assert_eq!(edges.last().unwrap().1, 10.0);
        for w in edges.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }
}
