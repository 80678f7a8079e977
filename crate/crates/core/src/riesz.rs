//! The model built from Riesz fractional derivatives ∇^s = ∇ ∘ I_{1-s}.
//!
//! For u_{s,δ}(x) = |x|^{s-δ-1} x₁ the chain is explicit:
//! I_{1-s} * u = c* |x|^{-δ} x₁, the flux M_ε² ∇^s u, its divergence, and
//! the Riesz potential of that divergence, which equals c** times the same
//! bracket times |x|^{-s-δ} x̂₁.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::norm;
use crate::pvquad::{homogeneous_convolution_num, PVResult, QuadratureSpec};
use crate::specfun::{gamma_ratio, kappa_ext};

fn check(d: usize, s: f64, delta: f64) -> Result<()> {
    if d < 2 {
        return domain("dimension must be at least 2");
    }
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s must lie in (0,1), got {s}"));
    }
    if !(delta > 0.0 && delta < d as f64 / 2.0) {
        return domain(format!("delta must lie in (0, d/2), got {delta}"));
    }
    Ok(())
}

fn check_point(x: &[f64], d: usize) -> Result<f64> {
    let r = norm(x);
    if x.len() != d || !(r > 0.0) {
        return domain("expected a nonzero point of R^d");
    }
    Ok(r)
}

/// Normalizing constant of I_α = 2 κ_{d,-α/2} |x|^{-(d-α)}, here α = 1 - s.
pub fn riesz_potential_constant(d: usize, s: f64) -> Result<f64> {
    Ok(2.0 * kappa_ext(d, (s - 1.0) / 2.0)?)
}

/// (c*, c**).
pub fn riesz_constants(d: usize, s: f64, delta: f64) -> Result<(f64, f64)> {
    check(d, s, delta)?;
    let df = d as f64;
    let c1 = 2f64.powf(-1.0 + s)
        * gamma_ratio(
            &[(df + s - delta + 1.0) / 2.0, delta / 2.0],
            &[(df - delta + 2.0) / 2.0, (-s + delta + 1.0) / 2.0],
        )?;
    let c2 = c1
        * 2f64.powf(-1.0 + s)
        * gamma_ratio(
            &[(df - delta) / 2.0, (s + delta + 1.0) / 2.0],
            &[(df - s - delta + 1.0) / 2.0, (delta + 2.0) / 2.0],
        )?;
    Ok((c1, c2))
}

/// ∇^s u_{s,δ}(x) = c* |x|^{-δ} (e₁ - δ x̂ x̂₁).
pub fn frac_gradient(d: usize, s: f64, delta: f64, x: &[f64]) -> Result<Vec<f64>> {
    check(d, s, delta)?;
    let r = check_point(x, d)?;
    let (cs, _) = riesz_constants(d, s, delta)?;
    let amp = cs * r.powf(-delta);
    let x1 = x[0] / r;
    Ok(x.iter()
        .enumerate()
        .map(|(i, xi)| amp * (if i == 0 { 1.0 } else { 0.0 } - delta * (xi / r) * x1))
        .collect())
}

/// -δ(1-δ) + (1 - δ - (1-ε)²)(d-1).
pub fn riesz_bracket(d: usize, delta: f64, epsilon: f64) -> f64 {
    let m = (1.0 - epsilon) * (1.0 - epsilon);
    -delta * (1.0 - delta) + (1.0 - delta - m) * (d as f64 - 1.0)
}

/// Flux, its divergence and the Riesz potential of the divergence at x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxDivergence {
    pub flux: Vec<f64>,
    pub div: f64,
    pub riesz_div: f64,
}

pub fn flux_divergence(d: usize, s: f64, delta: f64, epsilon: f64, x: &[f64]) -> Result<FluxDivergence> {
    check(d, s, delta)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return domain(format!("epsilon must lie in (0,1), got {epsilon}"));
    }
    let r = check_point(x, d)?;
    let (cs, css) = riesz_constants(d, s, delta)?;
    let m = (1.0 - epsilon) * (1.0 - epsilon);
    let x1 = x[0] / r;
    let amp = cs * r.powf(-delta);
    let flux = x
        .iter()
        .enumerate()
        .map(|(i, xi)| amp * (if i == 0 { m } else { 0.0 } + (1.0 - delta - m) * x1 * xi / r))
        .collect();
    let b = riesz_bracket(d, delta, epsilon);
    Ok(FluxDivergence {
        flux,
        div: cs * b * r.powf(-delta - 1.0) * x1,
        riesz_div: css * b * r.powf(-s - delta) * x1,
    })
}

/// The ε that makes the bracket vanish, 1 - √(1 - δ - δ(1-δ)/(d-1)).
/// In the plane the radicand is (1-δ)² and the value is δ itself.
pub fn riesz_coupling(d: usize, delta: f64) -> Result<f64> {
    if d < 2 || !(delta >= 0.0) {
        return domain("need d >= 2 and delta >= 0");
    }
    let dm = d as f64 - 1.0;
    let radicand = (1.0 - delta) * (1.0 - delta / dm);
    if radicand < 0.0 {
        return domain(format!("negative radicand {radicand} at d={d}, delta={delta}"));
    }
    if d == 2 {
        return if delta <= 1.0 { Ok(delta) } else { domain("delta must not exceed 1 in the plane") };
    }
    // 1 - √R written without cancellation for small δ
    Ok(delta * (d as f64 - delta) / (dm * (1.0 + radicand.sqrt())))
}

/// (I_{1-s} * u_{s,δ})(x) by quadrature, including the potential's constant.
pub fn riesz_potential_num(
    d: usize,
    s: f64,
    delta: f64,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<PVResult> {
    check(d, s, delta)?;
    check_point(x, d)?;
    let c = riesz_potential_constant(d, s)?;
    let r = homogeneous_convolution_num(d, s, s - delta - 1.0, x, spec)?;
    Ok(PVResult { value: c * r.value, err_estimate: c * r.err_estimate, ..r })
}

/// I_{1-s} applied to the analytic divergence field, evaluated at e₁ by
/// quadrature. Should reproduce `flux_divergence(..).riesz_div` at e₁.
pub fn riesz_div_num(d: usize, s: f64, delta: f64, epsilon: f64, spec: &QuadratureSpec) -> Result<PVResult> {
    check(d, s, delta)?;
    let (cs, _) = riesz_constants(d, s, delta)?;
    let mut e1 = vec![0.0; d];
    e1[0] = 1.0;
    let amp = riesz_potential_constant(d, s)? * cs * riesz_bracket(d, delta, epsilon);
    let r = homogeneous_convolution_num(d, s, -2.0 - delta, &e1, spec)?;
    Ok(PVResult { value: amp * r.value, err_estimate: amp.abs() * r.err_estimate, ..r })
}
