//! Radial grids, isotropic distributions and their interpolants.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// How a grid's nodes were laid out; decides the quadrature weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// Positive half of a 2n-point Gauss–Legendre rule on [−V, V].
    GaussLegendre,
    /// Arbitrary increasing nodes, trapezoid weights.
    Custom,
}

impl GridKind {
    fn tag(self) -> &'static str {
        match self {
            GridKind::GaussLegendre => "gauss-legendre",
            GridKind::Custom => "custom",
        }
    }
}

/// Speeds in [0, V] with weights for ∫_0^V g(r) dr.
///
/// On a Gauss–Legendre grid the weights integrate even functions of r
/// spectrally, which is what r² f(r) is for a smooth isotropic f.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub kind: GridKind,
    pub v_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl RadialGrid {
    pub fn gauss_legendre(n: usize, v_max: f64) -> Result<Self> {
        if n < 4 {
            return Err(Error::Config(format!("n_r = {n} must be at least 4")));
        }
        if !(v_max > 0.0 && v_max.is_finite()) {
            return Err(Error::Config(format!("v_max = {v_max} must be positive")));
        }
        let gl = GaussLegendre::new(2 * n);
        let (x, w) = gl.mapped(-v_max, v_max);
        Ok(Self { kind: GridKind::GaussLegendre, v_max, nodes: x[n..].to_vec(), weights: w[n..].to_vec() })
    }

    /// Grid on given nodes. Recognizes a Gauss–Legendre layout; anything
    /// else gets trapezoid weights with the integrand taken as 0 at r = 0
    /// (the r² factor) and at r = V.
    pub fn from_nodes(nodes: Vec<f64>, v_max: f64) -> Result<Self> {
        if nodes.len() < 4 {
            return Err(Error::Config(format!("need at least 4 radial nodes, got {}", nodes.len())));
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) || nodes[0] < 0.0 || *nodes.last().unwrap() > v_max {
            return Err(Error::Config("radial nodes must increase strictly within [0, v_max]".into()));
        }
        let gl = Self::gauss_legendre(nodes.len(), v_max)?;
        if gl.nodes.iter().zip(&nodes).all(|(a, b)| (a - b).abs() <= 1e-12 * v_max) {
            return Ok(gl);
        }
        let mut x = Vec::with_capacity(nodes.len() + 2);
        if nodes[0] > 0.0 {
            x.push(0.0);
        }
        let first = x.len();
        x.extend_from_slice(&nodes);
        if *nodes.last().unwrap() < v_max {
            x.push(v_max);
        }
        let mut full = vec![0.0; x.len()];
        for i in 0..x.len() - 1 {
            let h = 0.5 * (x[i + 1] - x[i]);
            full[i] += h;
            full[i + 1] += h;
        }
        let weights = full[first..first + nodes.len()].to_vec();
        Ok(Self { kind: GridKind::Custom, v_max, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// 4π ∫ g(r) r² dr over the grid.
    pub fn integrate_3d(&self, values: impl IntoIterator<Item = f64>) -> f64 {
        let four_pi = 4.0 * std::f64::consts::PI;
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(values)
            .map(|((&r, &w), g)| w * r * r * g)
            .sum::<f64>()
            * four_pi
    }
}

/// Interpolation rule between radial nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interp {
    Linear,
    #[default]
    MonotoneCubic,
    /// Even polynomial through the mirrored Gauss–Legendre nodes.
    Spectral,
}

impl Interp {
    pub fn tag(self) -> &'static str {
        match self {
            Interp::Linear => "linear",
            Interp::MonotoneCubic => "monotone-cubic",
            Interp::Spectral => "spectral",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Interp::Linear),
            "monotone-cubic" => Ok(Interp::MonotoneCubic),
            "spectral" => Ok(Interp::Spectral),
            _ => Err(Error::Parse(format!("unknown interpolation '{s}'"))),
        }
    }
}

/// Isotropic density f(|v|) sampled on a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialDistribution {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
    pub interp: Interp,
}

impl RadialDistribution {
    pub fn new(grid: RadialGrid, values: Vec<f64>, interp: Interp) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Config(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at r = {}", grid.nodes[i])));
        }
        if interp == Interp::Spectral && grid.kind != GridKind::GaussLegendre {
            return Err(Error::Config("spectral interpolation needs a Gauss-Legendre grid".into()));
        }
        Ok(Self { grid, values, interp })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: RadialGrid, interp: Interp, f: F) -> Result<Self> {
        let values = grid.nodes.iter().map(|&r| f(r)).collect();
        Self::new(grid, values, interp)
    }

    pub fn zeros_like(&self) -> Self {
        Self { values: vec![0.0; self.values.len()], ..self.clone() }
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.grid.nodes
    }

    pub fn v_max(&self) -> f64 {
        self.grid.v_max
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self { values, ..self.clone() }
    }

    /// self + a·other, node by node (grids must agree).
    pub fn axpy(&self, a: f64, other: &Self) -> Self {
        assert_eq!(self.grid.nodes, other.grid.nodes, "distributions live on different grids");
        self.with_values(self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect())
    }

    /// Mass 4π∫ f r² dr.
    pub fn mass(&self) -> f64 {
        self.grid.integrate_3d(self.values.iter().copied())
    }

    /// Energy moment 4π∫ f r⁴ dr.
    pub fn energy(&self) -> f64 {
        self.grid.integrate_3d(self.values.iter().zip(&self.grid.nodes).map(|(f, r)| f * r * r))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn interpolant(&self) -> Interpolant {
        Interpolant::new(self)
    }

    /// CSV with a `#` header carrying v_max, interp and grid kind, then `r,f`.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# v_max={} interp={} grid={} n={}\nr,f\n",
            self.grid.v_max,
            self.interp.tag(),
            self.grid.kind.tag(),
            self.grid.len()
        );
        for (r, f) in self.grid.nodes.iter().zip(&self.values) {
            let _ = writeln!(out, "{r:.16e},{f:.16e}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut v_max = None;
        let mut interp = Interp::default();
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        let mut saw_columns = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                for kv in meta.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("v_max", v)) => {
                            v_max = Some(v.parse::<f64>().map_err(|e| Error::Parse(format!("v_max: {e}")))?)
                        }
                        Some(("interp", v)) => interp = Interp::parse(v)?,
                        _ => {}
                    }
                }
                continue;
            }
            if !saw_columns {
                if line.replace(' ', "") != "r,f" {
                    return Err(Error::Parse(format!("line {}: expected header 'r,f'", lineno + 1)));
                }
                saw_columns = true;
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", lineno + 1)))?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            nodes.push(parse(a)?);
            values.push(parse(b)?);
        }
        let v_max = v_max.ok_or_else(|| Error::Parse("missing v_max in header".into()))?;
        let grid = RadialGrid::from_nodes(nodes, v_max)?;
        Self::new(grid, values, interp)
    }
}

/// Continuous extension r ↦ f(r) of a [`RadialDistribution`] on [0, V],
/// zero beyond V.
#[derive(Debug, Clone)]
pub struct Interpolant {
    v_max: f64,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Linear { x: Vec<f64>, y: Vec<f64> },
    Cubic { x: Vec<f64>, y: Vec<f64>, d: Vec<f64> },
    Spectral { x: Vec<f64>, w: Vec<f64>, y: Vec<f64> },
}

impl Interpolant {
    fn new(f: &RadialDistribution) -> Self {
        let v_max = f.grid.v_max;
        let kind = match f.interp {
            Interp::Spectral => {
                let n = f.grid.len();
                let gl = GaussLegendre::new(2 * n);
                let mut x = Vec::with_capacity(2 * n);
                let mut w = Vec::with_capacity(2 * n);
                let mut y = Vec::with_capacity(2 * n);
                for j in 0..2 * n {
                    let t = gl.nodes[j];
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    x.push(t * v_max);
                    w.push(sign * ((1.0 - t * t) * gl.weights[j]).sqrt());
                    y.push(f.values[if j < n { n - 1 - j } else { j - n }]);
                }
                Kind::Spectral { x, w, y }
            }
            interp => {
                // mirror the first node for evenness at 0, pin f(V) = 0
                let mut x = vec![-f.grid.nodes[0]];
                let mut y = vec![f.values[0]];
                x.extend_from_slice(&f.grid.nodes);
                y.extend_from_slice(&f.values);
                if *x.last().unwrap() < v_max {
                    x.push(v_max);
                    y.push(0.0);
                }
                if interp == Interp::Linear {
                    Kind::Linear { x, y }
                } else {
                    let d = pchip_slopes(&x, &y);
                    Kind::Cubic { x, y, d }
                }
            }
        };
        Self { v_max, kind }
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        if r > self.v_max {
            return 0.0;
        }
        match &self.kind {
            Kind::Linear { x, y } => {
                let i = segment(x, r);
                let t = (r - x[i]) / (x[i + 1] - x[i]);
                y[i] + t * (y[i + 1] - y[i])
            }
            Kind::Cubic { x, y, d } => {
                let i = segment(x, r);
                let h = x[i + 1] - x[i];
                let t = (r - x[i]) / h;
                let t2 = t * t;
                let t3 = t2 * t;
                (2.0 * t3 - 3.0 * t2 + 1.0) * y[i]
                    + (t3 - 2.0 * t2 + t) * h * d[i]
                    + (-2.0 * t3 + 3.0 * t2) * y[i + 1]
                    + (t3 - t2) * h * d[i + 1]
            }
            Kind::Spectral { x, w, y } => {
                let mut num = 0.0;
                let mut den = 0.0;
                for j in 0..x.len() {
                    let diff = r - x[j];
                    if diff == 0.0 {
                        return y[j];
                    }
                    let c = w[j] / diff;
                    num += c * y[j];
                    den += c;
                }
                num / den
            }
        }
    }

    /// Centered finite-difference derivative.
    pub fn derivative(&self, r: f64) -> f64 {
        let h = 1e-5 * self.v_max;
        (self.eval(r + h) - self.eval(r - h)) / (2.0 * h)
    }

    /// Sample q ↦ f(√q) for fast lookup in the collision loops.
    pub fn square_table(&self, intervals: usize) -> SquareTable {
        let q_max = self.v_max * self.v_max;
        let h = q_max / intervals as f64;
        let vals: Vec<f64> = (0..=intervals).map(|i| self.eval((i as f64 * h).sqrt())).collect();
        SquareTable::from_samples(h, &vals)
    }
}

/// Index i with x[i] ≤ r ≤ x[i+1], clamped to a valid segment.
fn segment(x: &[f64], r: f64) -> usize {
    x.partition_point(|&xi| xi <= r).saturating_sub(1).min(x.len() - 2)
}

/// Fritsch–Butland slopes: weighted harmonic mean of adjacent secants,
/// zero at local extrema, shape-preserving one-sided ends.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = del[0];
        d[1] = del[0];
        return d;
    }
    for i in 1..n - 1 {
        if del[i - 1] * del[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], del[0], del[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

/// Uniform table of F(q) = f(√q) on [0, V²]: on each interval the cubic
/// through the four nearest samples, stored in Horner form.
#[derive(Debug, Clone)]
pub struct SquareTable {
    h_inv: f64,
    q_max: f64,
    at_max: f64,
    coef: Vec<[f64; 4]>,
}

impl SquareTable {
    fn from_samples(h: f64, vals: &[f64]) -> Self {
        let n = vals.len() - 1;
        let coef = (0..n)
            .map(|i| {
                // stencil start, shifted inward at the ends; u = t + shift
                let j = i.clamp(1, n - 2) - 1;
                let shift = (i - j) as f64;
                let v = &vals[j..j + 4];
                // Lagrange cubic through u = 0..3 in monomial form
                let a0 = v[0];
                let a1 = (-11.0 * v[0] + 18.0 * v[1] - 9.0 * v[2] + 2.0 * v[3]) / 6.0;
                let a2 = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / 2.0;
                let a3 = (-v[0] + 3.0 * v[1] - 3.0 * v[2] + v[3]) / 6.0;
                // re-centre at u = shift so eval uses t ∈ [0, 1)
                let c0 = a0 + shift * (a1 + shift * (a2 + shift * a3));
                let c1 = a1 + shift * (2.0 * a2 + 3.0 * shift * a3);
                let c2 = a2 + 3.0 * shift * a3;
                [c0, c1, c2, a3]
            })
            .collect();
        Self { h_inv: 1.0 / h, q_max: h * n as f64, at_max: vals[n], coef }
    }

    #[inline]
    pub fn eval(&self, q: f64) -> f64 {
        if q >= self.q_max {
            return if q == self.q_max { self.at_max } else { 0.0 };
        }
        let pos = q.max(0.0) * self.h_inv;
        let i = (pos as usize).min(self.coef.len() - 1);
        let t = pos - i as f64;
        let c = &self.coef[i];
        c[0] + t * (c[1] + t * (c[2] + t * c[3]))
    }
}
