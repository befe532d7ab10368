//! Nested-quadrature evaluation of Q(f, f) for isotropic f.
//!
//! For v = (0, 0, r) the partner velocity is parametrized by its speed r_*
//! and the relative speed ρ = |v − v_*|, with dv_* = 2π r_* ρ / r dρ dr_*,
//! and σ by (θ, φ) about (v − v_*)/ρ. Post-collision speeds depend on φ
//! only through ±cos φ; pairing the two signs makes the φ sum even in
//! sin β, so the integrand stays smooth in ρ. Gain and loss are
//! accumulated in the same loops with the same angular weights.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{Interp, RadialDistribution, RadialGrid, SquareTable};
use crate::error::{Error, Result};
use crate::kernel::{b_bar_s, build_map_table, c_s, ImplicitMapTable, DEFAULT_NODES};
use crate::quadrature::{log_graded, GaussLegendre};

/// Upper end of the softness range the operator accepts.
pub const MAX_SOFTNESS: f64 = 0.125;

/// Intervals of the q = r² lookup table.
const TABLE_INTERVALS: usize = 1 << 14;

/// Panels of the log-graded θ rule.
const THETA_PANELS: usize = 2;

/// Quadrature counts (n_rstar, n_beta, n_theta, n_phi); n_rstar is split
/// evenly between the panels r_* < r and r_* > r, n_beta counts nodes in
/// the relative speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 4]", into = "[usize; 4]")]
pub struct QuadCounts {
    pub n_rstar: usize,
    pub n_beta: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl From<[usize; 4]> for QuadCounts {
    fn from(a: [usize; 4]) -> Self {
        Self { n_rstar: a[0], n_beta: a[1], n_theta: a[2], n_phi: a[3] }
    }
}

impl From<QuadCounts> for [usize; 4] {
    fn from(q: QuadCounts) -> Self {
        [q.n_rstar, q.n_beta, q.n_theta, q.n_phi]
    }
}

impl QuadCounts {
    pub fn doubled(self) -> Self {
        Self { n_rstar: 2 * self.n_rstar, n_beta: 2 * self.n_beta, n_theta: 2 * self.n_theta, n_phi: 2 * self.n_phi }
    }
}

fn default_interp() -> Interp {
    Interp::Spectral
}

fn default_remainder_tol() -> f64 {
    1e-2
}

/// Discretization and run parameters shared by the operator and the solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub n_r: usize,
    pub v_max: f64,
    pub n_quad: QuadCounts,
    pub theta_cut: f64,
    /// Time step; `None` picks 0.25 / max ν.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    pub k_weights: Vec<f64>,
    #[serde(default = "default_interp")]
    pub interp: Interp,
    /// Largest admissible angular weight of the cutoff remainder.
    #[serde(default = "default_remainder_tol")]
    pub remainder_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_r: 48,
            v_max: 8.0,
            n_quad: QuadCounts { n_rstar: 48, n_beta: 24, n_theta: 32, n_phi: 24 },
            theta_cut: 1e-3,
            dt: None,
            t_end: 1.0,
            k_weights: vec![2.0, 4.0],
            interp: default_interp(),
            remainder_tol: default_remainder_tol(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let q = self.n_quad;
        let bad = |m: String| Err(Error::Config(m));
        if self.n_r < 4 || q.n_rstar < 4 || q.n_beta < 4 || q.n_theta < 4 || q.n_phi < 4 {
            return bad(format!("all counts must be at least 4 (n_r = {}, n_quad = {:?})", self.n_r, <[usize; 4]>::from(q)));
        }
        if !q.n_phi.is_multiple_of(2) {
            return bad(format!("n_phi = {} must be even", q.n_phi));
        }
        if !(self.theta_cut > 0.0 && self.theta_cut <= 0.1) {
            return bad(format!("theta_cut = {} must lie in (0, 0.1]", self.theta_cut));
        }
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return bad(format!("v_max = {} must be positive", self.v_max));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return bad(format!("dt = {dt} must be positive"));
            }
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if self.k_weights.iter().any(|k| !(*k >= 0.0)) {
            return bad("k_weights must be nonnegative".into());
        }
        if !(self.remainder_tol > 0.0) {
            return bad(format!("remainder_tol = {} must be positive", self.remainder_tol));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        RadialGrid::gauss_legendre(self.n_r, self.v_max)
    }

    /// Twice the radial nodes and every quadrature count.
    pub fn refined(&self) -> Self {
        Self { n_r: 2 * self.n_r, n_quad: self.n_quad.doubled(), ..self.clone() }
    }
}

/// Collision kernel: hard spheres, b̄ ≡ 1/2 and γ = 1, or the
/// inverse-power kernel b̄_s with γ = 1 − 4s.
#[derive(Debug, Clone)]
pub enum Kernel {
    HardSphere,
    InversePower(Arc<ImplicitMapTable>),
}

impl Kernel {
    pub fn inverse_power(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < MAX_SOFTNESS) {
            return Err(Error::Domain(format!("operator needs 0 < s < 1/8, got s = {s}")));
        }
        Ok(Kernel::InversePower(Arc::new(build_map_table(s, DEFAULT_NODES, crate::kernel::DEFAULT_QUAD_TOL)?)))
    }

    /// Softness; 0 for hard spheres.
    pub fn s(&self) -> f64 {
        match self {
            Kernel::HardSphere => 0.0,
            Kernel::InversePower(t) => t.s(),
        }
    }

    pub fn gamma(&self) -> f64 {
        1.0 - 4.0 * self.s()
    }

    pub fn label(&self) -> String {
        match self {
            Kernel::HardSphere => "hard-sphere".into(),
            Kernel::InversePower(t) => format!("inverse-power(s={})", t.s()),
        }
    }
}

/// θ nodes on [θ_cut, π/2] (hard spheres: [0, π/2]) with weights
/// b̄(θ) sin θ dθ.
#[derive(Debug, Clone)]
struct AngularRule {
    c2: Vec<f64>,
    s2: Vec<f64>,
    sin: Vec<f64>,
    weight: Vec<f64>,
}

impl AngularRule {
    fn new(kernel: &Kernel, cfg: &SolverConfig) -> Result<Self> {
        let n = cfg.n_quad.n_theta;
        let (theta, weight): (Vec<f64>, Vec<f64>) = match kernel {
            Kernel::HardSphere => {
                let (t, w) = GaussLegendre::new(n).mapped(0.0, 0.5 * PI);
                let w = t.iter().zip(w).map(|(t, w)| 0.5 * t.sin() * w).collect();
                (t, w)
            }
            Kernel::InversePower(table) => {
                let rule = log_graded(cfg.theta_cut, 0.5 * PI, n, THETA_PANELS);
                let mut w = Vec::with_capacity(rule.len());
                for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
                    w.push(b_bar_s(table, t)? * t.sin() * wt);
                }
                (rule.nodes, w)
            }
        };
        Ok(Self {
            c2: theta.iter().map(|t| (0.5 * t).cos().powi(2)).collect(),
            s2: theta.iter().map(|t| (0.5 * t).sin().powi(2)).collect(),
            sin: theta.iter().map(|t| t.sin()).collect(),
            weight,
        })
    }

    /// ∫ b̄ dσ over the resolved range.
    fn total(&self) -> f64 {
        2.0 * PI * self.weight.iter().sum::<f64>()
    }
}

/// Midpoint φ nodes folded onto cos φ ≥ 0; each entry stands for the pair
/// ±cos φ with its multiplicity times 2π/n.
fn phi_pairs(n: usize) -> Vec<(f64, f64)> {
    let step = 2.0 * PI / n as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for j in 0..n {
        let c = ((j as f64 + 0.5) * step).cos();
        if c < 0.0 {
            continue;
        }
        match out.iter_mut().find(|(c0, _)| (c0 - c).abs() < 1e-13) {
            Some(e) => e.1 += step,
            None => out.push((c, step)),
        }
    }
    out
}

/// Output of one operator evaluation.
#[derive(Debug, Clone)]
pub struct QEvaluation {
    /// Q(f, f) at the grid nodes.
    pub q: RadialDistribution,
    pub gain: Vec<f64>,
    pub loss: Vec<f64>,
    /// ∫ Q dv and the loss-flux scale ∫ loss dv.
    pub mass_defect: f64,
    pub mass_scale: f64,
    /// ∫ Q |v|² dv and ∫ loss |v|² dv.
    pub energy_defect: f64,
    pub energy_scale: f64,
    /// L¹ bound on the part of Q discarded below θ_cut.
    pub cutoff_remainder: f64,
}

impl QEvaluation {
    pub fn relative_mass_defect(&self) -> f64 {
        relative(self.mass_defect, self.mass_scale)
    }

    pub fn relative_energy_defect(&self) -> f64 {
        relative(self.energy_defect, self.energy_scale)
    }
}

fn relative(defect: f64, scale: f64) -> f64 {
    if defect == 0.0 {
        0.0
    } else {
        defect.abs() / scale.abs()
    }
}

/// Q(·,·) for a fixed kernel and discretization.
#[derive(Debug, Clone)]
pub struct CollisionOperator {
    kernel: Kernel,
    cfg: SolverConfig,
    angular: AngularRule,
    phi: Vec<(f64, f64)>,
    rstar_gl: GaussLegendre,
    rho_gl: GaussLegendre,
    /// 2π ∫_0^{θ_cut} b̄ θ sin θ dθ, bounded via b̄ ≤ C_s θ^{−2−2s} + 1/2.
    remainder_weight: f64,
}

impl CollisionOperator {
    pub fn new(kernel: Kernel, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let remainder_weight = match &kernel {
            Kernel::HardSphere => 0.0,
            Kernel::InversePower(t) => {
                let (s, eps) = (t.s(), cfg.theta_cut);
                2.0 * PI * (c_s(s) * eps.powf(1.0 - 2.0 * s) / (1.0 - 2.0 * s) + eps.powi(3) / 6.0)
            }
        };
        if remainder_weight > cfg.remainder_tol {
            return Err(Error::Config(format!(
                "theta_cut = {} leaves a cutoff remainder weight {remainder_weight:.3e} above remainder_tol = {}",
                cfg.theta_cut, cfg.remainder_tol
            )));
        }
        Ok(Self {
            angular: AngularRule::new(&kernel, cfg)?,
            phi: phi_pairs(cfg.n_quad.n_phi),
            rstar_gl: GaussLegendre::new(cfg.n_quad.n_rstar.div_ceil(2)),
            rho_gl: GaussLegendre::new(cfg.n_quad.n_beta),
            kernel,
            cfg: cfg.clone(),
            remainder_weight,
        })
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// Angular weight of the discarded grazing region.
    pub fn remainder_weight(&self) -> f64 {
        self.remainder_weight
    }

    /// Q(f, f) at every node of f's grid.
    pub fn eval(&self, f: &RadialDistribution) -> Result<QEvaluation> {
        let interp = f.interpolant();
        let table = interp.square_table(TABLE_INTERVALS);
        let v_max = f.v_max();
        let gamma = self.kernel.gamma();
        let ang_total = self.angular.total();

        let terms: Vec<(f64, f64)> = f
            .grid
            .nodes
            .par_iter()
            .zip(&f.values)
            .map(|(&r, &fr)| self.node_terms(r, fr, v_max, gamma, ang_total, &table))
            .collect();
        let gain: Vec<f64> = terms.iter().map(|t| t.0).collect();
        let loss: Vec<f64> = terms.iter().map(|t| t.1).collect();
        let q = f.with_values(terms.iter().map(|(g, l)| g - l).collect());

        let grid = &f.grid;
        let r2 = |i: usize| grid.nodes[i] * grid.nodes[i];
        let mass_defect = q.mass();
        let energy_defect = q.energy();
        let mass_scale = grid.integrate_3d(loss.iter().copied());
        let energy_scale = grid.integrate_3d(loss.iter().enumerate().map(|(i, l)| l * r2(i)));

        let cutoff_remainder = if self.remainder_weight > 0.0 {
            let nu = loss_frequency(f, gamma + 1.0);
            grid.integrate_3d(grid.nodes.iter().map(|&r| nu.at(r) * interp.derivative(r).abs()))
                * self.remainder_weight
        } else {
            0.0
        };

        Ok(QEvaluation { q, gain, loss, mass_defect, mass_scale, energy_defect, energy_scale, cutoff_remainder })
    }

    fn node_terms(&self, r: f64, fr: f64, v_max: f64, gamma: f64, ang_total: f64, table: &SquareTable) -> (f64, f64) {
        let ang = &self.angular;
        let r2 = r * r;
        let mut gain = 0.0;
        let mut loss = 0.0;
        for (a, b) in [(0.0, r.min(v_max)), (r.min(v_max), v_max)] {
            if b <= a {
                continue;
            }
            let (rs_nodes, rs_weights) = self.rstar_gl.mapped(a, b);
            for (&rs, &wrs) in rs_nodes.iter().zip(&rs_weights) {
                let rs2 = rs * rs;
                let fs = table.eval(rs2);
                let e = r2 + rs2;
                let lo = (r - rs).abs();
                let hi = r + rs;
                let (lo2, hi2) = (lo * lo, hi * hi);
                let (rho_nodes, rho_weights) = self.rho_gl.mapped(lo, hi);
                for (&rho, &wrho) in rho_nodes.iter().zip(&rho_weights) {
                    let rho2 = rho * rho;
                    // r r_* sin β
                    let x = 0.5 * ((rho2 - lo2) * (hi2 - rho2)).max(0.0).sqrt();
                    let jac = wrs * wrho * 2.0 * PI * rs * rho / r * rho.powf(gamma);
                    let mut g = 0.0;
                    for k in 0..ang.weight.len() {
                        let a = ang.c2[k] * r2 + ang.s2[k] * rs2;
                        let bx = ang.sin[k] * x;
                        let mut h = 0.0;
                        for &(c, m) in &self.phi {
                            let d = c * bx;
                            h += m * (table.eval(a + d) * table.eval(e - a - d)
                                + table.eval(a - d) * table.eval(e - a + d));
                        }
                        g += ang.weight[k] * h;
                    }
                    gain += jac * g;
                    loss += jac * fr * fs * ang_total;
                }
            }
        }
        (gain, loss)
    }
}

/// Q(f, f) for a one-off kernel and configuration.
pub fn eval_q(f: &RadialDistribution, kernel: Kernel, cfg: &SolverConfig) -> Result<QEvaluation> {
    CollisionOperator::new(kernel, cfg)?.eval(f)
}

/// ∫_0^π |v − v_*|^γ sin β dβ for speeds r, r_*:
/// [(r + r_*)^{γ+2} − |r − r_*|^{γ+2}] / ((γ+2) r r_*).
fn relative_speed_moment(r: f64, rs: f64, gamma: f64) -> f64 {
    let p = gamma + 2.0;
    let big = r.max(rs);
    let x = r.min(rs) / big;
    if big == 0.0 {
        return 0.0;
    }
    if x < 1e-300 {
        return 2.0 * big.powf(gamma);
    }
    // big^p [(1+x)^p − (1−x)^p] without cancellation for small x
    let lo = p * (-x).ln_1p();
    let diff = lo.exp() * (p * (x.ln_1p() - (-x).ln_1p())).exp_m1();
    big.powf(p) * diff / (p * r * rs)
}

/// r ↦ ν(r) = ∫ |v − v_*|^γ f(v_*) dv_*, evaluated by Gauss–Legendre in r_*
/// split at r_* = r with the β integral done in closed form.
#[derive(Debug, Clone)]
pub struct LossFrequency {
    table: SquareTable,
    v_max: f64,
    gamma: f64,
    gl: GaussLegendre,
}

impl LossFrequency {
    pub fn at(&self, r: f64) -> f64 {
        let r = r.abs();
        let mut total = 0.0;
        let split = r.min(self.v_max);
        for (a, b) in [(0.0, split), (split, self.v_max)] {
            if b <= a {
                continue;
            }
            total += self.gl.integrate(a, b, |rs| {
                rs * rs * self.table.eval(rs * rs) * relative_speed_moment(r, rs, self.gamma)
            });
        }
        2.0 * PI * total
    }
}

/// Gauss–Legendre nodes per r_* panel: at least 64, and twice the grid
/// size so narrow profiles are resolved as well as the grid resolves them.
fn loss_frequency_nodes(grid_len: usize) -> usize {
    (2 * grid_len).max(64)
}

pub fn loss_frequency(f: &RadialDistribution, gamma: f64) -> LossFrequency {
    LossFrequency {
        table: f.interpolant().square_table(TABLE_INTERVALS),
        v_max: f.v_max(),
        gamma,
        gl: GaussLegendre::new(loss_frequency_nodes(f.grid.len())),
    }
}

/// max over the grid nodes of ν(r).
pub fn max_loss_frequency(f: &RadialDistribution, gamma: f64) -> f64 {
    let nu = loss_frequency(f, gamma);
    f.grid.nodes.iter().map(|&r| nu.at(r)).fold(0.0, f64::max)
}
