use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::ImplicitMapTable;
use crate::error::{Error, Result};

/// One evaluation of b_s at deviation angle θ, with the intermediate
/// impact angle φ = (π − θ)/2 and impact parameter y = y_s(φ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub theta: f64,
    pub phi: f64,
    pub y: f64,
    /// y_s′(φ), kept because the bound checks need it.
    pub y_prime: f64,
    pub b: f64,
    /// Estimated relative error of `b`.
    pub quad_err: f64,
}

/// b_s(θ) for θ ∈ (0, π].
///
/// At θ = π the formula is 0/0; the limit y ≈ y_s′(0)φ, sin θ ≈ 2φ gives
/// b_s(π) = 2^{4s−2} y_s′(0)².
pub fn b_s(table: &ImplicitMapTable, theta: f64) -> Result<KernelValue> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::Domain(format!("deviation angle θ = {theta} outside (0, π]")));
    }
    let s = table.s();
    let prefactor = 0.5 * (4.0 * s).exp2();
    let phi = 0.5 * (PI - theta);

    if theta == PI {
        let y_prime = 1.0 / table.dphi_at_zero();
        return Ok(KernelValue {
            theta,
            phi: 0.0,
            y: 0.0,
            y_prime,
            b: 0.5 * prefactor * y_prime * y_prime,
            quad_err: 2.0 * table.tol(),
        });
    }

    let inv = table.invert(phi)?;
    let y = inv.y;
    let y_prime = 1.0 / inv.dphi;
    // sin θ = sin 2φ keeps relative accuracy near θ = π
    let sin_theta = if theta > FRAC_PI_2 { (2.0 * phi).sin() } else { theta.sin() };
    let b = if y >= 1.0 {
        f64::INFINITY
    } else {
        let omy2 = (1.0 - y) * (1.0 + y);
        let base = omy2.powf(-s);
        let beta = y * base;
        let beta_prime = 2.0 * s * base / omy2 + (1.0 - 2.0 * s) * base;
        prefactor * beta * beta_prime * y_prime / sin_theta
    };

    // y-sensitivity of ln(β β′): 1/y + 2(1+2s) y/(1−y²)
    let dy = inv.residual / inv.dphi;
    let omy2 = ((1.0 - y) * (1.0 + y)).max(f64::MIN_POSITIVE);
    let sensitivity = 1.0 / y.max(f64::MIN_POSITIVE) + 2.0 * (1.0 + 2.0 * s) * y / omy2;
    let quad_err = inv.dphi_rel_err + dy * sensitivity;
    Ok(KernelValue { theta, phi, y, y_prime, b, quad_err })
}

/// Symmetrized kernel b̄_s(θ) = [b_s(θ) + b_s(π − θ)]·1{θ ≤ π/2}.
pub fn b_bar_s(table: &ImplicitMapTable, theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= PI) {
        return Err(Error::Domain(format!("deviation angle θ = {theta} outside (0, π]")));
    }
    if theta > FRAC_PI_2 {
        return Ok(0.0);
    }
    Ok(b_s(table, theta)?.b + b_s(table, PI - theta)?.b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_map_table;

    fn half_closed_form(theta: f64) -> f64 {
        let y = 1.0 - theta / PI;
        4.0 / PI * y / (theta.sin() * (1.0 - y * y).powi(2))
    }

    #[test]
    fn half_kernel_at_right_angle() {
        let t = build_map_table(0.5, 64, 1e-10).unwrap();
        let v = b_s(&t, FRAC_PI_2).unwrap();
        assert!((v.b - 32.0 / (9.0 * PI)).abs() < 1e-9, "{}", v.b);
        assert!((2.0 * v.phi + v.theta - PI).abs() < 1e-15);
        let bb = b_bar_s(&t, FRAC_PI_2).unwrap();
        assert!((bb - 64.0 / (9.0 * PI)).abs() < 1e-9);
        assert!((b_s(&t, 1.0).unwrap().b - half_closed_form(1.0)).abs() < 1e-9);
    }

    #[test]
    fn endpoint_limit_matches_near_pi() {
        let t = build_map_table(0.3, 128, 1e-10).unwrap();
        let at_pi = b_s(&t, PI).unwrap().b;
        let near = b_s(&t, PI - 1e-4).unwrap().b;
        assert!((at_pi / near - 1.0).abs() < 1e-6, "{at_pi} {near}");
        let half = build_map_table(0.5, 64, 1e-10).unwrap();
        assert!((b_s(&half, PI).unwrap().b - 4.0 / (PI * PI)).abs() < 1e-10);
    }

    #[test]
    fn domain_errors() {
        let t = build_map_table(0.3, 16, 1e-8).unwrap();
        assert!(b_s(&t, 0.0).is_err());
        assert!(b_s(&t, 3.2).is_err());
        assert!(b_bar_s(&t, 0.0).is_err());
        assert_eq!(b_bar_s(&t, 3.0 * PI / 4.0).unwrap(), 0.0);
    }
}
