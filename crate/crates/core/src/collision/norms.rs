//! Weighted norms and entropy of isotropic distributions.

use super::grid::RadialDistribution;

fn bracket_pow(r: f64, k: f64) -> f64 {
    (1.0 + r * r).powf(0.5 * k)
}

/// |f|_{L¹_k} = 4π ∫ |f(r)| ⟨r⟩^k r² dr.
pub fn l1k_norm(f: &RadialDistribution, k: f64) -> f64 {
    let g = &f.grid;
    g.integrate_3d(f.values.iter().zip(&g.nodes).map(|(v, &r)| v.abs() * bracket_pow(r, k)))
}

/// |f|_{L¹_k} + 4π ∫ |∂_r f| ⟨r⟩^k r² dr, the derivative taken by centered
/// differences of the interpolant. For radial f the gradient is ∂_r f
/// away from the origin; the node set never contains r = 0.
pub fn w11k_seminorm(f: &RadialDistribution, k: f64) -> f64 {
    let p = f.interpolant();
    let g = &f.grid;
    let grad = g.integrate_3d(g.nodes.iter().map(|&r| p.derivative(r).abs() * bracket_pow(r, k)));
    l1k_norm(f, k) + grad
}

fn f_log_f(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

/// H(f) = ∫ f log f with 0·log 0 = 0; nonpositive values contribute 0.
pub fn entropy(f: &RadialDistribution) -> f64 {
    f.grid.integrate_3d(f.values.iter().map(|&v| f_log_f(v)))
}

/// ∫ |f log f|.
pub fn llogl(f: &RadialDistribution) -> f64 {
    f.grid.integrate_3d(f.values.iter().map(|&v| f_log_f(v).abs()))
}
