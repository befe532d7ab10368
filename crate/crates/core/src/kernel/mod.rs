//! The inverse-power-law angular kernel b_s(θ).
//!
//! The kernel is built from the impact-angle map
//!
//! ```text
//! φ_s(y) = y ∫_0^1 g(s,y,z)^{-1/2} dz,   g = 1 − z^{1/s} − y²(z² − z^{1/s})
//! ```
//!
//! its inverse y_s(φ), and the closed functions β_s(y) = y(1−y²)^{−s} and
//! β_s′. With 2φ + θ = π,
//!
//! ```text
//! b_s(θ) = (2^{4s}/2) · β_s(y) β_s′(y) y_s′(φ) / sin θ,   y = y_s(φ).
//! ```
//!
//! The integrals are evaluated after z = 1 − u², which turns the square-root
//! endpoint singularity at z = 1 into a smooth integrand; the boundary layer
//! of z^{1/s} (width √s in u) is resolved with geometric panel breakpoints.

mod angular;
mod table;
mod wallis;

pub use angular::{b_bar_s, b_s, KernelValue};
pub use table::{build_map_table, ImplicitMapTable, MapNode, DEFAULT_INVERSION_TOL, DEFAULT_NODES};
pub use wallis::{c_s, wallis};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;

/// Default relative tolerance for the φ_s and φ_s′ integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Softness s ∈ (0, 1) of the potential U(r) = r^{−1/s}, with the derived
/// velocity exponent γ = 1 − 4s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PotentialParam {
    s: f64,
    gamma: f64,
}

impl PotentialParam {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Domain(format!("softness s = {s} must lie in (0, 1)")));
        }
        Ok(Self { s, gamma: 1.0 - 4.0 * s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The exponent 1/s appearing in z^{1/s}.
    pub fn inverse(&self) -> f64 {
        1.0 / self.s
    }
}

impl TryFrom<f64> for PotentialParam {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<PotentialParam> for f64 {
    fn from(p: PotentialParam) -> f64 {
        p.s
    }
}

/// z^{1/s} in log space; 0 at z = 0.
fn pow_inv_s(z: f64, inv_s: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        (inv_s * z.ln()).exp()
    }
}

/// g(s, y, z) = 1 − z^{1/s} − y²(z² − z^{1/s}).
pub fn eval_g(s: f64, y: f64, z: f64) -> Result<f64> {
    let p = PotentialParam::new(s)?;
    check_unit("y", y)?;
    check_unit("z", z)?;
    let zp = pow_inv_s(z, p.inverse());
    // (1−y²)(1−z^{1/s}) + y²(1−z²): both terms nonnegative, no cancellation
    Ok((1.0 - y * y) * (1.0 - zp) + y * y * (1.0 - z * z))
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} outside [0, 1]")))
    }
}

/// φ_s(y), φ_s′(y) and their estimated relative errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEval {
    pub phi: f64,
    pub dphi: f64,
    pub phi_rel_err: f64,
    pub dphi_rel_err: f64,
}

/// Panel breakpoints in u for the substituted integrals: 0, 4^{−J}, …, 1/4, 1
/// with 4^{−J} ≤ √s / 4.
fn breakpoints(s: f64) -> Vec<f64> {
    let target = 0.25 * s.sqrt();
    let mut pts = vec![1.0];
    let mut u = 1.0;
    loop {
        u *= 0.25;
        pts.push(u);
        if u <= target {
            break;
        }
    }
    pts.push(0.0);
    pts.reverse();
    pts
}

/// Evaluate φ_s(y) and φ_s′(y) together.
///
/// With z = 1 − u², A(u) = (1 − z^{1/s})/u² and
/// G(u) = (1 − y²)A(u) + y²(2 − u²), so that g = u²G:
///
/// ```text
/// φ_s(y)  = y ∫_0^1 2 G^{−1/2} du
/// φ_s′(y) =   ∫_0^1 2 A G^{−3/2} du
/// ```
pub fn phi_pair(param: PotentialParam, y: f64, tol: f64) -> Result<PhiEval> {
    check_unit("y", y)?;
    let inv_s = param.inverse();
    let y2 = y * y;
    let omy2 = (1.0 - y) * (1.0 + y);
    let integrand = |u: f64| -> [f64; 2] {
        let u2 = u * u;
        let a = if u2 == 0.0 {
            inv_s
        } else {
            let ln_z = (-u2).ln_1p();
            -(inv_s * ln_z).exp_m1() / u2
        };
        let g = omy2 * a + y2 * (2.0 - u2);
        let rg = g.sqrt();
        [2.0 / rg, 2.0 * a / (g * rg)]
    };

    let mut value = [0.0; 2];
    let mut err = [0.0; 2];
    for w in breakpoints(param.s()).windows(2) {
        let q = tanh_sinh(w[0], w[1], tol * 0.1, 0.0, integrand)?;
        for c in 0..2 {
            value[c] += q.value[c];
            err[c] += q.abs_err[c];
        }
    }
    Ok(PhiEval {
        phi: y * value[0],
        dphi: value[1],
        phi_rel_err: err[0] / value[0],
        dphi_rel_err: err[1] / value[1],
    })
}

/// φ_s(y) at the default tolerance.
pub fn phi_s(s: f64, y: f64) -> Result<f64> {
    let p = PotentialParam::new(s)?;
    if y == 1.0 {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    Ok(phi_pair(p, y, DEFAULT_QUAD_TOL)?.phi)
}

/// φ_s′(y) at the default tolerance.
pub fn phi_s_prime(s: f64, y: f64) -> Result<f64> {
    let p = PotentialParam::new(s)?;
    Ok(phi_pair(p, y, DEFAULT_QUAD_TOL)?.dphi)
}

/// β_s(y) = y (1 − y²)^{−s}, for y ∈ [0, 1).
pub fn beta_s(s: f64, y: f64) -> Result<f64> {
    let omy2 = beta_domain(s, y)?;
    Ok(y * omy2.powf(-s))
}

/// β_s′(y) = 2s (1 − y²)^{−1−s} + (1 − 2s)(1 − y²)^{−s}, for y ∈ [0, 1).
pub fn beta_s_prime(s: f64, y: f64) -> Result<f64> {
    let omy2 = beta_domain(s, y)?;
    let base = omy2.powf(-s);
    Ok(2.0 * s * base / omy2 + (1.0 - 2.0 * s) * base)
}

fn beta_domain(s: f64, y: f64) -> Result<f64> {
    // s = 0 is allowed here: β_0(y) = y is the hard-sphere limit.
    if !(0.0..1.0).contains(&s) {
        return Err(Error::Domain(format!("softness s = {s} outside [0, 1)")));
    }
    if !(0.0..1.0).contains(&y) {
        return Err(Error::Domain(format!("β_s needs y ∈ [0, 1), got {y}")));
    }
    Ok((1.0 - y) * (1.0 + y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn g_endpoint_values() {
        assert_eq!(eval_g(0.3, 0.5, 0.0).unwrap(), 1.0);
        assert!(eval_g(0.3, 0.5, 1.0).unwrap().abs() < 1e-15);
        assert!((eval_g(0.5, 0.7, 0.5).unwrap() - 0.75).abs() < 1e-15);
        assert!(eval_g(0.3, 1.5, 0.5).is_err());
        assert!(eval_g(1.3, 0.5, 0.5).is_err());
    }

    #[test]
    fn phi_half_is_linear() {
        let v = phi_s(0.5, 0.6).unwrap();
        assert!((v - 0.6 * FRAC_PI_2).abs() < 1e-12, "{v}");
        assert_eq!(phi_s(0.3, 0.0).unwrap(), 0.0);
        assert!((phi_s_prime(0.5, 0.3).unwrap() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn phi_prime_at_one_matches_wallis() {
        // s = 1/4: φ′(1) = 4·W_4 = 3π/4
        let d = phi_s_prime(0.25, 1.0).unwrap();
        assert!((d - 0.75 * PI).abs() < 1e-11, "{d}");
    }

    #[test]
    fn phi_reaches_half_pi_at_one() {
        let p = PotentialParam::new(0.01).unwrap();
        let e = phi_pair(p, 1.0, 1e-12).unwrap();
        assert!((e.phi - FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn beta_closed_values() {
        assert_eq!(beta_s(0.3, 0.0).unwrap(), 0.0);
        assert!((beta_s_prime(0.3, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((beta_s(0.5, 0.5).unwrap() - 0.577_350_269_2).abs() < 1e-10);
        assert!((beta_s_prime(0.5, 0.5).unwrap() - 1.539_600_717_8).abs() < 1e-10);
        assert!((beta_s(1e-12, 0.5).unwrap() - 0.5).abs() < 1e-11);
        assert!((beta_s_prime(1e-12, 0.5).unwrap() - 1.0).abs() < 1e-11);
        assert!(beta_s(0.3, 1.0).is_err());
        assert!(beta_s_prime(0.3, 1.0).is_err());
    }

    #[test]
    fn potential_param_validates() {
        assert!(PotentialParam::new(0.0).is_err());
        assert!(PotentialParam::new(1.0).is_err());
        let p = PotentialParam::new(0.1).unwrap();
        assert_eq!(p.gamma(), 1.0 - 4.0 * 0.1);
    }
}
