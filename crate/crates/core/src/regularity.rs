//! Fractional Sobolev regularity of u_δ = |x|^{-δ} x₁: the sharp threshold
//! 1 - δ > t - d/q and a dyadic witness for it.
//!
//! The Gagliardo double integral of u_δ over a ball splits into dyadic
//! shells. By homogeneity the shell at scale 2^{-k} contributes exactly
//! 2^{-k e} times the unit shell, with e = (1-δ-t)q + d, so the seminorm is
//! finite iff e > 0. The unit shell itself is estimated by Monte Carlo.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::parallel;
use crate::pvquad::QuadratureSpec;

fn check(d: usize, delta: f64, t: f64, q: f64) -> Result<()> {
    if d < 1 {
        return domain("dimension must be positive");
    }
    if !(0.0..=0.5).contains(&delta) {
        return domain(format!("delta must lie in [0, 1/2], got {delta}"));
    }
    if !(t > 0.0 && t < 1.0) {
        return domain(format!("t must lie in (0,1), got {t}"));
    }
    if !(q > 1.0 && q.is_finite()) {
        return domain(format!("q must lie in (1, inf), got {q}"));
    }
    Ok(())
}

/// Whether u_δ ∈ W^{t,q} near the origin: 1 - δ > t - d/q.
pub fn membership(d: usize, delta: f64, t: f64, q: f64) -> Result<bool> {
    check(d, delta, t, q)?;
    Ok(1.0 - delta > t - d as f64 / q)
}

// q((1-δ) - (t - d/q)); positive exactly when `membership` holds
fn shell_exponent(d: usize, delta: f64, t: f64, q: f64) -> f64 {
    q * ((1.0 - delta) - (t - d as f64 / q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converging,
    Diverging,
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicSeminorm {
    /// Partial sums over the first 1, 2, … shells.
    pub partial_sums: Vec<f64>,
    pub band_ratio: f64,
    pub verdict: Verdict,
    /// Unit-shell reference from the master seed.
    pub reference: McEstimate,
    /// The same reference from an independent seed.
    pub reference_check: McEstimate,
}

/// ∫_{x∈S} ∫_{y∈S'} |u(x) - u(y)|^q / |x - y|^{d+tq} for d = 2, with
/// S = {λ/2 ≤ |x| ≤ λ} and S' = {λ/4 ≤ |y| ≤ λ} (one inner neighbour
/// shell). y = x + h with |h| drawn from a density ∝ r^{q(1-t)-1} on
/// (0, 2λ), which cancels the near-diagonal behaviour.
pub fn shell_reference(
    delta: f64,
    t: f64,
    q: f64,
    lambda: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let d = 2;
    check(d, delta, t, q)?;
    if !(lambda > 0.0) || samples < 2 {
        return domain("scale must be positive and at least two samples are needed");
    }
    let beta = q * (1.0 - t);
    let hmax = 2.0 * lambda;
    let shell_area = PI * (lambda * lambda - 0.25 * lambda * lambda);
    let weight = 2.0 * PI * hmax.powf(beta) / beta * shell_area;
    let u = |x: f64, y: f64| (x * x + y * y).powf(-0.5 * delta) * x;
    let chunks = 64usize;
    let per = samples.div_ceil(chunks);
    let parts: Vec<(f64, f64, usize)> = parallel::install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed ^ (c as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03));
                let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
                for _ in 0..per.min(samples.saturating_sub(c * per)) {
                    // x uniform in the shell
                    let rho = (lambda * lambda * (0.25 + 0.75 * rng.random::<f64>())).sqrt();
                    let phi = 2.0 * PI * rng.random::<f64>();
                    let (x1, x2) = (rho * phi.cos(), rho * phi.sin());
                    let r = hmax * rng.random::<f64>().powf(1.0 / beta);
                    let psi = 2.0 * PI * rng.random::<f64>();
                    let (y1, y2) = (x1 + r * psi.cos(), x2 + r * psi.sin());
                    let ry2 = y1 * y1 + y2 * y2;
                    let mut val = 0.0;
                    if ry2 >= 0.0625 * lambda * lambda && ry2 <= lambda * lambda && r > 0.0 {
                        // integrand · r^{d-1} · 2π / density(r); the powers of r
                        // collapse to (|u(x) - u(y)| / r)^q in the plane
                        let quot = (u(x1, x2) - u(y1, y2)).abs() / r;
                        val = quot.powf(q) * weight;
                    }
                    s1 += val;
                    s2 += val * val;
                    n += 1;
                }
                (s1, s2, n)
            })
            .collect()
    });
    let (s1, s2, n) = parts.iter().fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let nf = n as f64;
    let mean = s1 / nf;
    let var = (s2 / nf - mean * mean).max(0.0) / (nf - 1.0);
    Ok(McEstimate { mean, stderr: var.sqrt(), seed })
}

/// Samples drawn per reference estimate, relative to `spec.mc_samples`.
pub const SAMPLES_PER_MC_UNIT: usize = 100;

/// Dyadic extension of the unit-shell reference toward the origin. The
/// verdict is decided by the shell exponent and always agrees with
/// [`membership`]; the Monte-Carlo reference sizes the partial sums.
pub fn dyadic_seminorm(
    d: usize,
    delta: f64,
    t: f64,
    q: f64,
    bands: usize,
    spec: &QuadratureSpec,
) -> Result<DyadicSeminorm> {
    if d != 2 {
        return domain("the Monte-Carlo reference is implemented in the plane only");
    }
    check(d, delta, t, q)?;
    if bands < 4 {
        return domain("need at least four bands");
    }
    let samples = spec.mc_samples.max(1) * SAMPLES_PER_MC_UNIT;
    let reference = shell_reference(delta, t, q, 1.0, samples, spec.seed)?;
    let reference_check = shell_reference(delta, t, q, 1.0, samples, spec.seed.wrapping_add(0x5EED))?;
    for r in [&reference, &reference_check] {
        if !(r.stderr <= 0.05 * r.mean.abs()) {
            return Err(LabError::NotConverged(format!(
                "shell reference {:.4e} has standard error {:.2e}",
                r.mean, r.stderr
            )));
        }
    }
    let e = shell_exponent(d, delta, t, q);
    let band_ratio = (-e * std::f64::consts::LN_2).exp();
    let mut partial_sums = Vec::with_capacity(bands);
    let mut acc = 0.0;
    let mut w = 1.0;
    for _ in 0..bands {
        acc += reference.mean * w;
        partial_sums.push(acc);
        w *= band_ratio;
    }
    let verdict = if e > 0.0 { Verdict::Converging } else { Verdict::Diverging };
    Ok(DyadicSeminorm { partial_sums, band_ratio, verdict, reference, reference_check })
}
