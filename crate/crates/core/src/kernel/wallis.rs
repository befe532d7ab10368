use std::f64::consts::{FRAC_PI_2, PI};

/// Wallis integral W_n = ∫_0^{π/2} sinⁿ t dt = ½ B((n+1)/2, ½), n > 0.
///
/// Small integer orders use the recurrence W_n = (n−1)/n · W_{n−2};
/// everything else goes through log-gamma.
pub fn wallis(n: f64) -> f64 {
    assert!(n > 0.0, "Wallis integral needs n > 0");
    if n.fract() == 0.0 && n <= 64.0 {
        let k = n as u32;
        let (mut w, mut m) = if k.is_multiple_of(2) { (FRAC_PI_2, 0) } else { (1.0, 1) };
        while m < k {
            m += 2;
            w *= (m - 1) as f64 / m as f64;
        }
        return w;
    }
    0.5 * PI.sqrt() * (libm::lgamma(0.5 * (n + 1.0)) - libm::lgamma(0.5 * n + 1.0)).exp()
}

/// Small-angle constant C_s = 2^{4s} s (W_{1/s}/s)^{2s} = lim θ^{2+2s} b_s(θ).
pub fn c_s(s: f64) -> f64 {
    assert!(s > 0.0 && s < 1.0);
    let phi_prime_one = wallis(1.0 / s) / s;
    (4.0 * s).exp2() * s * phi_prime_one.powf(2.0 * s)
}
