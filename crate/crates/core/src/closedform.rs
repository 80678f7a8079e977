//! Gamma-function closed forms for the fractional Meyers example: the
//! integrals f₁, f₂,₁, f₂, the strong-form value of the anisotropic
//! operator on u_δ, the coupling b(δ) and its inverse, and the d = 2
//! simplification.

use std::f64::consts::PI;

use crate::error::{domain, LabError, Result};
use crate::model::{norm, FracParams};
use crate::specfun::{gamma_ratio, kappa};

/// Denominators of b(δ) closer to zero than this are refused.
pub const B_DENOM_FLOOR: f64 = 1e-13;

fn check(d: usize, s: f64, delta: f64) -> Result<()> {
    if d < 2 {
        return domain(format!("dimension must be at least 2, got {d}"));
    }
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s must lie in (0,1), got {s}"));
    }
    if !(0.0..=0.5).contains(&delta) {
        return domain(format!("delta must lie in [0, 1/2], got {delta}"));
    }
    Ok(())
}

/// f₁(d,s,δ) = p.v.∫ (u_δ(e₁+h) - u_δ(e₁)) |h|^{-d-2s} dh.
pub fn f1_closed(d: usize, s: f64, delta: f64) -> Result<f64> {
    check(d, s, delta)?;
    if delta == 0.0 {
        return Ok(0.0);
    }
    let hd = d as f64 / 2.0;
    let ratio = gamma_ratio(
        &[1.0 - delta / 2.0 + hd, s + delta / 2.0],
        &[1.0 - delta / 2.0 + hd - s, 1.0 + delta / 2.0],
    )?;
    Ok(-(2f64.powf(2.0 * s - 1.0) / kappa(d, s)?) * ratio * delta / 2.0)
}

/// Six-term form of f₂,₁. Valid for s in (0, 1].
pub fn f21_sum_form(d: usize, s: f64, delta: f64) -> f64 {
    let (d, de) = (d as f64, delta);
    let a = 2.0 * s + de;
    let q = d - 2.0 * s + 2.0 - de;
    let terms = [
        -2.0 * (1.0 - s) * (a - 3.0) * (a - 1.0) / ((d + 2.0 * s) * q),
        (1.0 - s) * (a - 3.0) / q,
        (a - 1.0) * a / (d + 2.0 * s),
        -(d + 2.0 * s + 3.0) * (a - 1.0) / (d + 2.0 * s),
        (d + 2.0 * s - 1.0) / 2.0,
        -(d - 2.0 * s - de) * a / (2.0 * s * (d + 2.0 * s)),
    ];
    terms.iter().sum()
}

/// Rational form of f₂,₁. Valid for s in (0, 1].
pub fn f21_rational_form(d: usize, s: f64, delta: f64) -> f64 {
    let (d, de) = (d as f64, delta);
    let c = d - 2.0 * s + 2.0;
    let sq = de - c / 2.0;
    (d - de) * ((2.0 * s + 1.0) * sq * sq + 0.25 * c * (2.0 * d * s - d + 4.0 * s * s - 6.0 * s - 2.0))
        / (2.0 * s * (d + 2.0 * s) * (c - de))
}

/// f₂,₁(d,s,δ), rational form, cross-checked against the six-term form.
/// `s = 1` is accepted and gives the local limit.
pub fn f21_closed(d: usize, s: f64, delta: f64) -> Result<f64> {
    if d < 2 || !(s > 0.0 && s <= 1.0) || !(0.0..=0.5).contains(&delta) {
        return domain(format!("f21 outside its range: d={d}, s={s}, delta={delta}"));
    }
    let r = f21_rational_form(d, s, delta);
    let t = f21_sum_form(d, s, delta);
    let scale = 1.0 + (d as f64 + 3.0).powi(2);
    if (r - t).abs() > 1e-12 * scale {
        return Err(LabError::Domain(format!("f21 forms disagree: rational {r}, sum {t}")));
    }
    Ok(r)
}

/// c̃_{d,s,δ} = Γ(d/2-δ/2)Γ(δ/2+s) / (Γ(d/2-s+1-δ/2)Γ(1+δ/2)).
pub fn c_tilde(d: usize, s: f64, delta: f64) -> Result<f64> {
    let hd = d as f64 / 2.0;
    gamma_ratio(&[hd - delta / 2.0, delta / 2.0 + s], &[hd - s + 1.0 - delta / 2.0, 1.0 + delta / 2.0])
}

/// f₂(d,s,δ).
pub fn f2_closed(d: usize, s: f64, delta: f64) -> Result<f64> {
    check(d, s, delta)?;
    let hd = d as f64 / 2.0;
    let df = d as f64;
    let pre = PI.powf(hd) / 2.0 * gamma_ratio(&[1.0 - s], &[hd + s])?;
    let first = pre * c_tilde(d, s, delta)? * f21_closed(d, s, delta)?;
    let second = pre * gamma_ratio(&[hd, s], &[hd - s])? * (df - 1.0) / (df + 2.0 * s);
    Ok(first - second)
}

/// Bracket of the strong form: the operator applied to u_δ equals
/// 2^{2s} c̃/4 · bracket · |x|^{1-2s-δ} x̂₁.
pub fn operator_bracket(d: usize, s: f64, delta: f64, epsilon: f64) -> Result<f64> {
    check(d, s, delta)?;
    let df = d as f64;
    let ratio = c_tilde(d, s, 0.0)? / c_tilde(d, s, delta)?;
    let f21 = f21_closed(d, s, delta)?;
    let lin =
        (df + 2.0 * s) / 2.0 * (2.0 * s * f21 - ratio * s * (df - 1.0) * (df - 2.0 * s) / (df + 2.0 * s));
    Ok((df - delta) * delta * (1.0 - 0.5 * (1.0 + 2.0 * s) * epsilon) - lin * epsilon)
}

/// Pointwise value of the anisotropic fractional operator (normalized by
/// κ_{d,s}, symbol (2π|ξ|)^{2s} at ε = 0) applied to u_δ at x ≠ 0.
///
/// It equals κ_{d,s} times the unweighted integral returned by
/// `pvquad::frac_op_num`, and -2κ_{d,s}[(1-(1+2s)ε/2) f₁ + (d+2s)ε/2 f₂]
/// at x = e₁.
pub fn operator_value(p: &FracParams, x: &[f64]) -> Result<f64> {
    if x.len() != p.d {
        return domain("point dimension does not match d");
    }
    let r = norm(x);
    if !(r > 0.0) {
        return domain("operator value is undefined at the origin");
    }
    let amp = operator_amplitude(p.d, p.s, p.delta, p.epsilon)?;
    Ok(amp * r.powf(1.0 - 2.0 * p.s - p.delta) * x[0] / r)
}

/// Value of the operator at e₁: 2^{2s} c̃/4 · bracket.
pub fn operator_amplitude(d: usize, s: f64, delta: f64, epsilon: f64) -> Result<f64> {
    Ok(4f64.powf(s) * c_tilde(d, s, delta)? / 4.0 * operator_bracket(d, s, delta, epsilon)?)
}

/// Local limit as s → 1: [(d-δ)δ - (d-1)ε] |x|^{-1-δ} x̂₁.
pub fn local_operator_value(d: usize, delta: f64, epsilon: f64, x: &[f64]) -> Result<f64> {
    let r = norm(x);
    if !(r > 0.0) {
        return domain("operator value is undefined at the origin");
    }
    let df = d as f64;
    Ok(((df - delta) * delta - (df - 1.0) * epsilon) * r.powf(-1.0 - delta) * x[0] / r)
}

/// Denominator b₁(δ) of the coupling.
pub fn b_denominator(d: usize, s: f64, delta: f64) -> Result<f64> {
    check(d, s, delta)?;
    let (df, hd) = (d as f64, d as f64 / 2.0);
    let g = gamma_ratio(
        &[hd, s + 1.0, hd - s - delta / 2.0 + 2.0, 1.0 + delta / 2.0],
        &[hd - s, hd - delta / 2.0 + 1.0, delta / 2.0 + s],
    )?;
    Ok((df - 1.0) * s * (df - 2.0 * s + 2.0) - 2.0 * (df - 1.0) * g)
}

/// The coupling ε = b(δ) that makes u_δ a solution.
///
/// Defined wherever b₁(δ) > 0. The value may exceed 1/2 (small s,
/// moderate δ); callers that need an elliptic coefficient restrict to
/// δ ≤ δ₀.
pub fn b_of_delta(d: usize, s: f64, delta: f64) -> Result<f64> {
    check(d, s, delta)?;
    if delta == 0.0 {
        return Ok(0.0);
    }
    let b1 = b_denominator(d, s, delta)?;
    if b1 <= B_DENOM_FLOOR {
        return domain(format!("coupling denominator {b1:e} is not positive at d={d}, s={s}, delta={delta}"));
    }
    Ok(2.0 * (d as f64 - 2.0 * s + 2.0 - delta) * delta / b1)
}

/// L(δ) = Γ(2+d/2-s-δ/2)Γ(1+δ/2) / (Γ(1+d/2-δ/2)Γ(s+δ/2)).
pub fn l_of_delta(d: usize, s: f64, delta: f64) -> Result<f64> {
    let hd = d as f64 / 2.0;
    gamma_ratio(&[2.0 + hd - s - delta / 2.0, 1.0 + delta / 2.0], &[1.0 + hd - delta / 2.0, s + delta / 2.0])
}

// b(δ) >= 1/2  <=>  4(d-2s+2-δ)δ >= b₁(δ), with b₁ > 0
fn half_gap(d: usize, s: f64, delta: f64) -> Result<f64> {
    let b1 = b_denominator(d, s, delta)?;
    if b1 <= B_DENOM_FLOOR {
        return Ok(1.0);
    }
    Ok(4.0 * (d as f64 - 2.0 * s + 2.0 - delta) * delta - b1)
}

/// δ₀(d,s): the smallest δ with b(δ) = 1/2, capped at 1/2.
///
/// On [0, δ₀] the coupling is a strictly increasing bijection onto
/// [0, b(δ₀)].
pub fn delta0(d: usize, s: f64) -> Result<f64> {
    check(d, s, 0.0)?;
    const SCAN: usize = 200;
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=SCAN {
        let de = 0.5 * k as f64 / SCAN as f64;
        if half_gap(d, s, de)? >= 0.0 {
            hi = Some(de);
            break;
        }
        lo = de;
    }
    let Some(mut hi) = hi else { return Ok(0.5) };
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if half_gap(d, s, mid)? >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo)
}

/// Inverse of b on [0, δ₀] by bisection.
pub fn delta_of_epsilon(d: usize, s: f64, epsilon: f64) -> Result<f64> {
    let d0 = delta0(d, s)?;
    let emax = b_of_delta(d, s, d0)?;
    if !(0.0..=emax).contains(&epsilon) {
        return domain(format!("epsilon must lie in [0, {emax}], got {epsilon}"));
    }
    if epsilon == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, d0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if b_of_delta(d, s, mid)? < epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (blo, bhi) = (b_of_delta(d, s, lo)?, b_of_delta(d, s, hi)?);
    Ok(if (blo - epsilon).abs() <= (bhi - epsilon).abs() { lo } else { hi })
}

/// Largest b(δ)/δ over a uniform grid of (0, δ₀]. An empirical stand-in
/// for the Lipschitz constant of the coupling, not a proven bound.
pub fn coupling_slope_estimate(d: usize, s: f64, points: usize) -> Result<f64> {
    let d0 = delta0(d, s)?;
    let mut best: f64 = 0.0;
    for k in 1..=points.max(1) {
        let de = d0 * k as f64 / points.max(1) as f64;
        best = best.max(b_of_delta(d, s, de)? / de);
    }
    Ok(best)
}

/// G(s,δ) = Γ(s+1)Γ(3-s-δ/2)Γ(1+δ/2) / (Γ(3-s)Γ(3-δ/2)Γ(s+1+δ/2)).
pub fn d2_g(s: f64, delta: f64) -> Result<f64> {
    gamma_ratio(
        &[s + 1.0, 3.0 - s - delta / 2.0, 1.0 + delta / 2.0],
        &[3.0 - s, 3.0 - delta / 2.0, s + 1.0 + delta / 2.0],
    )
}

/// Coupling and its elementary bounds for d = 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D2Coupling {
    pub epsilon: f64,
    pub lower: f64,
    /// Present only when δ < 2s²/(1-s).
    pub upper: Option<f64>,
}

/// d = 2 coupling written with Gamma factors of order one, plus bounds.
pub fn d2_epsilon_and_bounds(s: f64, delta: f64) -> Result<D2Coupling> {
    check(2, s, delta)?;
    if delta == 0.0 {
        return Ok(D2Coupling { epsilon: 0.0, lower: 0.0, upper: Some(0.0) });
    }
    let num = 2.0 * (2.0 - s - delta / 2.0) * delta;
    let g = gamma_ratio(
        &[s + 1.0, 3.0 - s - delta / 2.0, 1.0 + delta / 2.0],
        &[1.0 - s, 2.0 - delta / 2.0, s + delta / 2.0],
    )?;
    let den = s * (2.0 - s) - g;
    if den <= B_DENOM_FLOOR {
        return domain(format!("d=2 coupling denominator {den:e} is not positive"));
    }
    let epsilon = num / den;
    let lower = num / (s * (2.0 - s));
    let upper = if delta < 2.0 * s * s / (1.0 - s) {
        Some(num / ((2.0 - s) * (s - (1.0 - s) * (s + delta / 2.0))))
    } else {
        None
    };
    let b = b_of_delta(2, s, delta)?;
    if (b - epsilon).abs() > 1e-12 * epsilon.abs().max(1.0) {
        return Err(LabError::Domain(format!("d=2 coupling {epsilon} disagrees with general coupling {b}")));
    }
    Ok(D2Coupling { epsilon, lower, upper })
}

/// Coupling of the local Meyers example, ε = (d-δ)δ/(d-1).
pub fn classical_epsilon(d: usize, delta: f64) -> f64 {
    let df = d as f64;
    (df - delta) * delta / (df - 1.0)
}
