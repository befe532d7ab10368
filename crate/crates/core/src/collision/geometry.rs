//! Single-collision geometry and the sampled Povzner-type moment check.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::InequalityCheck;
use crate::error::{Error, Result};

/// Speeds of v and v_*, angle β between them, deviation angle θ and the
/// azimuth φ of σ about (v − v_*)/|v − v_*|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionGeometry {
    pub v_speed: f64,
    pub vstar_speed: f64,
    pub beta: f64,
    pub theta: f64,
    pub phi_az: f64,
}

/// Post-collision speeds (|v′|, |v′_*|):
///
/// ```text
/// |v′|²   = cos²(θ/2)|v|² + sin²(θ/2)|v_*|² + sinθ sinβ cosφ |v||v_*|
/// |v′_*|² = sin²(θ/2)|v|² + cos²(θ/2)|v_*|² − sinθ sinβ cosφ |v||v_*|
/// ```
pub fn post_collision_speeds(g: &CollisionGeometry) -> Result<(f64, f64)> {
    let (sq, sq_star) = post_collision_squares(g)?;
    Ok((sq.sqrt(), sq_star.sqrt()))
}

/// Squared post-collision speeds; the second is taken as the complement of
/// the first so the energy sum is exact up to one rounding.
pub fn post_collision_squares(g: &CollisionGeometry) -> Result<(f64, f64)> {
    let ok = g.v_speed >= 0.0
        && g.vstar_speed >= 0.0
        && (0.0..=PI).contains(&g.beta)
        && (0.0..=PI).contains(&g.theta)
        && g.phi_az.is_finite();
    if !ok {
        return Err(Error::Domain(format!("collision geometry out of range: {g:?}")));
    }
    let (v, w) = (g.v_speed, g.vstar_speed);
    let c2 = (0.5 * g.theta).cos().powi(2);
    let s2 = (0.5 * g.theta).sin().powi(2);
    let cross = g.theta.sin() * g.beta.sin() * g.phi_az.cos() * v * w;
    let total = v * v + w * w;
    let a = c2 * v * v + s2 * w * w + cross;
    let b = total - a;
    let tol = 1e-12 * total.max(1.0);
    if a < -tol || b < -tol {
        return Err(Error::Domain(format!("negative post-collision square {a} / {b} for {g:?}")));
    }
    Ok((a.max(0.0), b.max(0.0)))
}

fn bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

/// The two Povzner-type comparisons at one geometry, as (LHS, RHS) pairs,
/// where RHS omits the constant C_k.
pub fn povzner_terms(g: &CollisionGeometry, k: f64) -> Result<[(f64, f64); 2]> {
    let (sq, sq_star) = post_collision_squares(g)?;
    let (c, s) = ((0.5 * g.theta).cos(), (0.5 * g.theta).sin());
    let (bv, bw) = (bracket(g.v_speed), bracket(g.vstar_speed));
    let (bp, bps) = ((1.0 + sq).sqrt(), (1.0 + sq_star).sqrt());
    let lhs1 = bp.powf(k) - (c * bv).powf(k) - (s * bw).powf(k);
    let rhs1 = (c * bv).powf(k - 1.0) * s * bw + c * bv * (s * bw).powf(k - 1.0);
    let lhs2 = bps.powf(k) - (s * bv).powf(k) - (c * bw).powf(k);
    let rhs2 = (c * bw).powf(k - 1.0) * s * bv + c * bw * (s * bv).powf(k - 1.0);
    Ok([(lhs1, rhs1), (lhs2, rhs2)])
}

/// Uniform draw: speeds in [0, max_speed], β, θ ∈ [0, π], φ ∈ [0, 2π).
pub fn sample_geometry<R: Rng>(rng: &mut R, max_speed: f64) -> CollisionGeometry {
    CollisionGeometry {
        v_speed: rng.gen_range(0.0..=max_speed),
        vstar_speed: rng.gen_range(0.0..=max_speed),
        beta: rng.gen_range(0.0..=PI),
        theta: rng.gen_range(0.0..=PI),
        phi_az: rng.gen_range(0.0..2.0 * PI),
    }
}

const POVZNER_MAX_SPEED: f64 = 10.0;
const POVZNER_CHUNK: usize = 1 << 14;

/// Monte Carlo estimate of the constant C_k in both Povzner-type
/// inequalities: the sup over sampled geometries of LHS/RHS.
///
/// Each chunk of samples has its own stream derived from `seed`, so the
/// result does not depend on the thread count. A point counts as a failure
/// only if it produces a non-finite ratio with positive LHS.
pub fn povzner_sample_check(k: f64, n_samples: usize, seed: u64) -> Result<InequalityCheck> {
    if !(k >= 2.0) {
        return Err(Error::Domain(format!("moment order k = {k} must be at least 2")));
    }
    let chunks = n_samples.div_ceil(POVZNER_CHUNK);
    let (worst, point, bad) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let n = POVZNER_CHUNK.min(n_samples - c * POVZNER_CHUNK);
            let mut worst = f64::NEG_INFINITY;
            let mut point = None;
            let mut bad = 0usize;
            for _ in 0..n {
                let g = sample_geometry(&mut rng, POVZNER_MAX_SPEED);
                let Ok(terms) = povzner_terms(&g, k) else {
                    bad += 1;
                    continue;
                };
                for (lhs, rhs) in terms {
                    let ratio = if lhs <= 0.0 { lhs.min(0.0) / rhs.max(f64::MIN_POSITIVE) } else { lhs / rhs };
                    if !ratio.is_finite() && lhs > 0.0 {
                        bad += 1;
                    } else if ratio > worst {
                        worst = ratio;
                        point = Some(g);
                    }
                }
            }
            (worst, point, bad)
        })
        .reduce(
            || (f64::NEG_INFINITY, None, 0),
            |a, b| {
                let bad = a.2 + b.2;
                if b.0 > a.0 {
                    (b.0, b.1, bad)
                } else {
                    (a.0, a.1, bad)
                }
            },
        );
    let worst_point = point
        .map(|g| {
            [("v", g.v_speed), ("v_star", g.vstar_speed), ("beta", g.beta), ("theta", g.theta), ("phi", g.phi_az)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect()
        })
        .unwrap_or_default();
    let mut failures = Vec::new();
    if bad > 0 {
        failures.push(format!("{bad} samples gave a non-finite ratio"));
    }
    let passed = worst.is_finite() && bad == 0;
    Ok(InequalityCheck {
        name: format!("povzner_k{k}"),
        param_grid: format!(
            "{n_samples} uniform geometries, speeds in [0, {POVZNER_MAX_SPEED}], seed {seed}"
        ),
        points: n_samples,
        worst_ratio: worst,
        worst_point,
        slack: 0.0,
        threshold: None,
        passed,
        empirical: Some(worst),
        failures,
    })
}
