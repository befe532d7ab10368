//! Quadrature rules: Gauss–Legendre (fixed order, composite, log-graded)
//! and an adaptive tanh-sinh rule for vector-valued integrands.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1],
/// ascending in x.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let x = self.nodes.iter().map(|&t| mid + half * t).collect();
        let w = self.weights.iter().map(|&w| half * w).collect();
        (x, w)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A flattened list of (node, weight) pairs for a composite rule.
#[derive(Debug, Clone, Default)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre on [a, b] after the substitution x = a·e^t, which makes
/// integrands behaving like x^(-1-q) near a smooth in t. Requires 0 < a < b.
pub fn log_graded(a: f64, b: f64, n: usize, panels: usize) -> Rule {
    assert!(a > 0.0 && b > a);
    let span = (b / a).ln();
    let gl = GaussLegendre::new(n.div_ceil(panels.max(1)).max(1));
    let mut rule = Rule::default();
    for p in 0..panels.max(1) {
        let t0 = span * p as f64 / panels.max(1) as f64;
        let t1 = span * (p + 1) as f64 / panels.max(1) as f64;
        let (ts, ws) = gl.mapped(t0, t1);
        for (t, w) in ts.into_iter().zip(ws) {
            let x = a * t.exp();
            rule.nodes.push(x);
            rule.weights.push(w * x);
        }
    }
    rule
}

/// Composite Gauss–Legendre over consecutive breakpoints.
pub fn composite(breaks: &[f64], n_per_panel: usize) -> Rule {
    let gl = GaussLegendre::new(n_per_panel);
    let mut rule = Rule::default();
    for pair in breaks.windows(2) {
        if pair[1] <= pair[0] {
            continue;
        }
        let (x, w) = gl.mapped(pair[0], pair[1]);
        rule.nodes.extend(x);
        rule.weights.extend(w);
    }
    rule
}

/// Result of an adaptive quadrature: the value and an estimate of its
/// absolute error, per component.
#[derive(Debug, Clone, Copy)]
pub struct Quad<const N: usize> {
    pub value: [f64; N],
    pub abs_err: [f64; N],
    pub evaluations: usize,
}

const TANH_SINH_T_MAX: f64 = 3.5;
const TANH_SINH_MAX_LEVEL: usize = 12;

/// Adaptive tanh-sinh quadrature of a vector-valued integrand on [a, b].
///
/// Levels halve the step in t; the error estimate is the change between
/// the last two levels. Converged when every component's change is below
/// `rel_tol · |value| + abs_floor`.
pub fn tanh_sinh<const N: usize, F>(a: f64, b: f64, rel_tol: f64, abs_floor: f64, f: F) -> Result<Quad<N>>
where
    F: Fn(f64) -> [f64; N],
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut evaluations = 0usize;

    // Contribution of nodes t = k·h for the k selected by `step`/`offset`.
    let mut accumulate = |h: f64, start: usize, step: usize, sum: &mut [f64; N]| {
        let mut k = start;
        loop {
            let t = k as f64 * h;
            if t > TANH_SINH_T_MAX {
                break;
            }
            let sh = FRAC_PI_2 * t.sinh();
            let ch = FRAC_PI_2 * t.cosh();
            let cosh_sh = sh.cosh();
            let w = ch / (cosh_sh * cosh_sh);
            // Distance of the node from the nearer endpoint, in units of half.
            let gap = 1.0 / (sh.exp() * cosh_sh);
            if w < 1e-300 || gap == 0.0 {
                break;
            }
            if k == 0 {
                let v = f(mid);
                evaluations += 1;
                for c in 0..N {
                    sum[c] += w * v[c];
                }
            } else {
                let xr = b - half * gap;
                let xl = a + half * gap;
                let vr = f(xr);
                let vl = f(xl);
                evaluations += 2;
                for c in 0..N {
                    sum[c] += w * (vr[c] + vl[c]);
                }
            }
            k += step;
        }
    };

    let mut h = 1.0;
    let mut raw = [0.0; N];
    accumulate(h, 0, 1, &mut raw);
    let mut value = raw.map(|v| v * h * half);
    let mut abs_err = [f64::INFINITY; N];

    for _level in 1..=TANH_SINH_MAX_LEVEL {
        h *= 0.5;
        let mut odd = [0.0; N];
        accumulate(h, 1, 2, &mut odd);
        for c in 0..N {
            raw[c] += odd[c];
        }
        let next = raw.map(|v| v * h * half);
        let mut done = true;
        for c in 0..N {
            abs_err[c] = (next[c] - value[c]).abs();
            if abs_err[c] > rel_tol * next[c].abs() + abs_floor {
                done = false;
            }
        }
        value = next;
        if done {
            return Ok(Quad { value, abs_err, evaluations });
        }
    }

    let estimate = (0..N)
        .map(|c| abs_err[c] / value[c].abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Err(Error::QuadratureNonConvergence { estimate, tol: rel_tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(7);
        // degree 13: odd part integrates to 0, 0.5·∫x^12 = 1/13
        let got = gl.integrate(-1.0, 1.0, |x| x.powi(13) + x.powi(12) * 0.5);
        assert!((got - 1.0 / 13.0).abs() < 1e-14);
        let w: f64 = gl.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_large_order_is_accurate() {
        let gl = GaussLegendre::new(96);
        let got = gl.integrate(0.0, 8.0, |x| (-0.5 * x * x).exp());
        let exact = (PI / 2.0).sqrt() * libm::erf(8.0 / 2f64.sqrt());
        assert!((got - exact).abs() < 1e-14, "{got} vs {exact}");
        assert!(gl.nodes.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2, ∫_0^1 ln x dx = -1
        let q = tanh_sinh(0.0, 1.0, 1e-12, 0.0, |x| [x.powf(-0.5), x.ln()]).unwrap();
        assert!((q.value[0] - 2.0).abs() < 1e-10);
        assert!((q.value[1] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn tanh_sinh_reports_nonconvergence() {
        let r = tanh_sinh(0.0, 1.0, 1e-300, 0.0, |x| [(1.0 / x).sin()]);
        assert!(matches!(r, Err(Error::QuadratureNonConvergence { .. })));
    }

    #[test]
    fn log_graded_rule_handles_power_weight() {
        // ∫_{1e-6}^{1} x^{-1.2} dx = (1e-6^{-0.2} - 1)/0.2
        let rule = log_graded(1e-6, 1.0, 32, 2);
        let got = rule.integrate(|x| x.powf(-1.2));
        let exact = ((1e-6f64).powf(-0.2) - 1.0) / 0.2;
        assert!((got / exact - 1.0).abs() < 1e-12);
    }
}
