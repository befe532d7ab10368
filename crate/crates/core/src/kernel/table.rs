use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{phi_pair, PotentialParam};
use crate::error::{Error, Result};

/// Default node count of a map table.
pub const DEFAULT_NODES: usize = 256;
/// Absolute stopping tolerance on y for the inversion.
pub const DEFAULT_INVERSION_TOL: f64 = 1e-12;
const MAX_INVERSION_ITERATIONS: usize = 80;
const GRADING_RATIO: f64 = 0.85;
/// Graded nodes used by the default table; larger tables grade more gently
/// so that 1 − y never drops below the default table's smallest gap.
const GRADED_AT_DEFAULT: i32 = (DEFAULT_NODES - DEFAULT_NODES / 2 - 2) as i32;

/// One sample (y, φ_s(y), φ_s′(y)) of the impact-angle map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapNode {
    pub y: f64,
    pub phi: f64,
    pub dphi: f64,
}

/// Monotone sampled graph of φ_s on [0, 1], used to bracket the inversion
/// y_s(φ). Immutable once built and safe to share across threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImplicitMapTable {
    param: PotentialParam,
    nodes: Vec<MapNode>,
    tol: f64,
}

/// Result of inverting φ_s at a target angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Inversion {
    pub y: f64,
    pub dphi: f64,
    /// |φ_s(y) − φ| at the last evaluation, plus its quadrature error.
    pub residual: f64,
    pub dphi_rel_err: f64,
}

/// Node abscissae: half uniform on [0, ½), half geometric toward y = 1 with
/// 1 − y shrinking by the grading ratio, then y = 1.
fn node_abscissae(n: usize) -> Vec<f64> {
    let n_uniform = n / 2;
    let n_geometric = n - n_uniform - 1;
    let min_gap = GRADING_RATIO.powi(GRADED_AT_DEFAULT);
    let ratio = if n_geometric > 1 {
        GRADING_RATIO.max(min_gap.powf(1.0 / (n_geometric - 1) as f64))
    } else {
        GRADING_RATIO
    };
    let mut ys = Vec::with_capacity(n);
    ys.extend((0..n_uniform).map(|i| 0.5 * i as f64 / n_uniform as f64));
    ys.extend((0..n_geometric).map(|j| 1.0 - 0.5 * ratio.powi(j as i32)));
    ys.push(1.0);
    ys
}

/// Sample φ_s and φ_s′ on `n_nodes` points graded toward y = 1.
pub fn build_map_table(s: f64, n_nodes: usize, tol: f64) -> Result<ImplicitMapTable> {
    let param = PotentialParam::new(s)?;
    if n_nodes < 16 {
        return Err(Error::Domain(format!("map table needs at least 16 nodes, got {n_nodes}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let nodes = node_abscissae(n_nodes)
        .into_par_iter()
        .map(|y| {
            let e = phi_pair(param, y, tol)?;
            let phi = if y == 0.0 {
                0.0
            } else if y == 1.0 {
                FRAC_PI_2
            } else {
                e.phi
            };
            Ok(MapNode { y, phi, dphi: e.dphi })
        })
        .collect::<Result<Vec<_>>>()?;

    for w in nodes.windows(2) {
        if !(w[1].phi > w[0].phi) {
            return Err(Error::QuadratureNonConvergence { estimate: (w[1].phi - w[0].phi).abs(), tol });
        }
    }
    Ok(ImplicitMapTable { param, nodes, tol })
}

impl ImplicitMapTable {
    pub fn param(&self) -> PotentialParam {
        self.param
    }

    pub fn s(&self) -> f64 {
        self.param.s()
    }

    pub fn nodes(&self) -> &[MapNode] {
        &self.nodes
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// φ_s′(0), stored at the first node.
    pub fn dphi_at_zero(&self) -> f64 {
        self.nodes[0].dphi
    }

    /// φ_s′(1), stored at the last node.
    pub fn dphi_at_one(&self) -> f64 {
        self.nodes[self.nodes.len() - 1].dphi
    }

    /// Bracketed Newton inversion of φ_s: bisection on the table bracket,
    /// Newton steps using φ_s′ whenever they stay inside the bracket.
    pub(crate) fn invert(&self, phi: f64) -> Result<Inversion> {
        if !(0.0..=FRAC_PI_2).contains(&phi) {
            return Err(Error::Domain(format!("φ = {phi} outside [0, π/2]")));
        }
        let first = self.nodes[0];
        let last = self.nodes[self.nodes.len() - 1];
        if phi == 0.0 {
            return Ok(Inversion { y: 0.0, dphi: first.dphi, residual: 0.0, dphi_rel_err: self.tol });
        }
        if phi == FRAC_PI_2 {
            return Ok(Inversion { y: 1.0, dphi: last.dphi, residual: 0.0, dphi_rel_err: self.tol });
        }

        // nodes[i].phi <= phi < nodes[i+1].phi
        let i = self.nodes.partition_point(|n| n.phi <= phi).saturating_sub(1);
        let (a, b) = (self.nodes[i], self.nodes[(i + 1).min(self.nodes.len() - 1)]);
        if a.phi == phi {
            return Ok(Inversion { y: a.y, dphi: a.dphi, residual: 0.0, dphi_rel_err: self.tol });
        }
        let (mut lo, mut hi) = (a.y, b.y);
        let mut y = a.y + (phi - a.phi) * (b.y - a.y) / (b.phi - a.phi);

        for _ in 0..MAX_INVERSION_ITERATIONS {
            let e = phi_pair(self.param, y, self.tol)?;
            let r = e.phi - phi;
            let residual = r.abs() + e.phi * e.phi_rel_err;
            if r == 0.0 {
                return Ok(Inversion { y, dphi: e.dphi, residual, dphi_rel_err: e.dphi_rel_err });
            }
            if r > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let newton = y - r / e.dphi;
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            // absolute tolerance, tightened near y = 1 where 1 − y carries the kernel
            let step_tol = (DEFAULT_INVERSION_TOL * (1.0 - y).min(1.0)).max(4.0 * f64::EPSILON);
            if (next - y).abs() <= step_tol {
                return Ok(Inversion { y: next, dphi: e.dphi, residual, dphi_rel_err: e.dphi_rel_err });
            }
            y = next;
        }
        Err(Error::InversionNonConvergence { iterations: MAX_INVERSION_ITERATIONS, width: hi - lo })
    }

    /// y_s(φ), the inverse of φ_s.
    pub fn y_s(&self, phi: f64) -> Result<f64> {
        Ok(self.invert(phi)?.y)
    }

    /// y_s′(φ) = 1 / φ_s′(y_s(φ)).
    pub fn y_s_prime(&self, phi: f64) -> Result<f64> {
        Ok(1.0 / self.invert(phi)?.dphi)
    }
}
