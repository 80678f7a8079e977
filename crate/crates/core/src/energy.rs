//! The nonlocal energy
//! J(v) = κ_{d,s}/2 ∬ k_{s,ε}(x,y) |v(x) - v(y)|² dx dy
//! on analytic bump test functions, its parallelogram identity, the strong
//! form as its first variation, and the local limit s → 1.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::operator_value;
use crate::error::{domain, LabError, Result};
use crate::gauss::composite;
use crate::model::{coeff_parts, norm, CoeffFlavor, FracParams};
use crate::parallel;
use crate::pvquad::{frac_op_num, QuadratureSpec};
use crate::specfun::{gamma, kappa};

/// a · exp(-1/(1-|z|²)) · z₁ with z = (x - center)/radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

/// A finite sum of [`Bump`]s in R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub dim: usize,
    pub bumps: Vec<Bump>,
}

impl TestFunction {
    pub fn zero(d: usize) -> Self {
        Self { dim: d, bumps: vec![] }
    }

    /// exp(-1/(1-|x|²)) x₁ on the unit ball.
    pub fn bump_x1(d: usize) -> Self {
        Self::bump(vec![0.0; d], 1.0, 1.0).expect("valid default bump")
    }

    pub fn bump(center: Vec<f64>, radius: f64, amplitude: f64) -> Result<Self> {
        if center.is_empty() || !(radius > 0.0) || !amplitude.is_finite() {
            return domain("bump needs a centre, a positive radius and a finite amplitude");
        }
        Ok(Self { dim: center.len(), bumps: vec![Bump { center, radius, amplitude }] })
    }

    /// a·self + b·other.
    pub fn combine(&self, a: f64, other: &TestFunction, b: f64) -> Result<Self> {
        if self.dim != other.dim {
            return domain("test functions live in different dimensions");
        }
        let mut bumps = Vec::with_capacity(self.bumps.len() + other.bumps.len());
        for (f, c) in [(self, a), (other, b)] {
            bumps.extend(f.bumps.iter().map(|bp| Bump { amplitude: c * bp.amplitude, ..bp.clone() }));
        }
        Ok(Self { dim: self.dim, bumps })
    }

    /// v(x/λ).
    pub fn dilate(&self, lambda: f64) -> Self {
        Self {
            dim: self.dim,
            bumps: self
                .bumps
                .iter()
                .map(|b| Bump {
                    center: b.center.iter().map(|c| c * lambda).collect(),
                    radius: b.radius * lambda,
                    amplitude: b.amplitude,
                })
                .collect(),
        }
    }

    /// Radius of a centred ball containing the support.
    pub fn support_radius(&self) -> f64 {
        self.bumps.iter().map(|b| norm(&b.center) + b.radius).fold(0.0, f64::max)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for b in &self.bumps {
            let mut z2 = 0.0;
            for (xi, ci) in x.iter().zip(&b.center) {
                let z = (xi - ci) / b.radius;
                z2 += z * z;
            }
            if z2 < 1.0 {
                acc += b.amplitude * (-1.0 / (1.0 - z2)).exp() * (x[0] - b.center[0]) / b.radius;
            }
        }
        acc
    }

    pub fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for b in &self.bumps {
            let mut z = [0.0; 8];
            let mut z2 = 0.0;
            for (k, (xi, ci)) in x.iter().zip(&b.center).enumerate() {
                z[k] = (xi - ci) / b.radius;
                z2 += z[k] * z[k];
            }
            if z2 >= 1.0 {
                continue;
            }
            let q = 1.0 - z2;
            let phi = (-1.0 / q).exp();
            let a = b.amplitude / b.radius;
            for (k, o) in out.iter_mut().enumerate() {
                let dphi = -2.0 * z[k] / (q * q) * phi;
                let e1 = if k == 0 { phi } else { 0.0 };
                *o += a * (e1 + z[0] * dphi);
            }
        }
    }
}

fn check_dim(p: &FracParams, funcs: &[&TestFunction]) -> Result<()> {
    if !(p.d == 2 || p.d == 3) {
        return domain(format!("energy quadrature supports d = 2 and 3, got {}", p.d));
    }
    if funcs.iter().any(|f| f.dim != p.d) {
        return domain("test function dimension does not match d");
    }
    Ok(())
}

// weighted unit directions covering the whole sphere
fn sphere_rule(d: usize, spec: &QuadratureSpec) -> Vec<(Vec<f64>, f64)> {
    if d == 2 {
        let n = 2 * spec.angular_panels;
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / n as f64;
                (vec![t.cos(), t.sin()], 2.0 * PI / n as f64)
            })
            .collect()
    } else {
        let (th, wt) = composite(0.0, PI, 1, spec.angular_nodes);
        let nphi = 2 * spec.angular_nodes;
        let mut out = Vec::new();
        for (t, w) in th.iter().zip(&wt) {
            for k in 0..nphi {
                let f = 2.0 * PI * (k as f64 + 0.5) / nphi as f64;
                out.push((
                    vec![t.cos(), t.sin() * f.cos(), t.sin() * f.sin()],
                    w * t.sin() * 2.0 * PI / nphi as f64,
                ));
            }
        }
        out
    }
}

struct EnergyNodes {
    xs: Vec<(Vec<f64>, f64)>,
    dirs: Vec<(Vec<f64>, f64)>,
    band: (Vec<f64>, Vec<f64>),
    tail: (Vec<f64>, Vec<f64>),
    ball: f64,
}

fn energy_nodes(d: usize, ball: f64, spec: &QuadratureSpec) -> EnergyNodes {
    let dirs = sphere_rule(d, spec);
    let (rs, rw) = composite(0.0, ball, 4, spec.radial_nodes);
    let mut xs = Vec::new();
    for (r, w) in rs.iter().zip(&rw) {
        for (om, wo) in &dirs {
            xs.push((om.iter().map(|o| r * o).collect(), w * wo * r.powi(d as i32 - 1)));
        }
    }
    EnergyNodes {
        xs,
        dirs,
        band: composite(0.5, 1.0, 1, spec.radial_nodes),
        tail: composite(0.0, 1.0, 2, spec.radial_nodes),
        ball,
    }
}

const NEAR_DIAGONAL: f64 = 1e-7;

// inner integral over y for one x, for every function at once
fn inner(p: &FracParams, nodes: &EnergyNodes, funcs: &[&TestFunction], x: &[f64]) -> Vec<f64> {
    let d = p.d;
    let s = p.s;
    let (a, b) = coeff_parts(CoeffFlavor::Fractional, p);
    let rx = norm(x);
    let xh: Vec<f64> = x.iter().map(|v| v / rx).collect();
    let vx: Vec<f64> = funcs.iter().map(|f| f.value(x)).collect();
    let mut grads = vec![vec![0.0; d]; funcs.len()];
    for (f, g) in funcs.iter().zip(grads.iter_mut()) {
        f.gradient(x, g);
    }
    let mut acc = vec![0.0; funcs.len()];
    let mut y = vec![0.0; d];
    for (om, wo) in &nodes.dirs {
        let xo: f64 = x.iter().zip(om).map(|(u, v)| u * v).sum();
        let cx = xh.iter().zip(om).map(|(u, v)| u * v).sum::<f64>();
        let re = -xo + (xo * xo - rx * rx + nodes.ball * nodes.ball).max(0.0).sqrt();
        let mut ray = vec![0.0; funcs.len()];
        // dyadic bands [re/2^{k+1}, re/2^k] down to the near-diagonal cut
        let mut hi = re;
        while hi > NEAR_DIAGONAL {
            let lo = 0.5 * hi;
            for (t, w) in nodes.band.0.iter().zip(&nodes.band.1) {
                let r = t * hi;
                let mut ry2 = 0.0;
                let mut yo = 0.0;
                for k in 0..d {
                    y[k] = x[k] + r * om[k];
                    ry2 += y[k] * y[k];
                    yo += y[k] * om[k];
                }
                let cy2 = yo * yo / ry2;
                let kern = r.powf(-1.0 - 2.0 * s) * (a + 0.5 * b * (cx * cx + cy2));
                for (j, f) in funcs.iter().enumerate() {
                    let diff = f.value(&y) - vx[j];
                    ray[j] += w * hi * kern * diff * diff;
                }
            }
            hi = lo;
        }
        // below the cut |v(x+rω) - v(x)|² ≈ r² (∇v·ω)²
        let form0 = a + b * cx * cx;
        let c0 = hi.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s) * form0;
        for (j, g) in grads.iter().enumerate() {
            let gw: f64 = g.iter().zip(om).map(|(u, v)| u * v).sum();
            ray[j] += c0 * gw * gw;
        }
        // exterior of the ball, r = re·t^{-1/(2s)}
        let mut ext = 0.0;
        for (t, w) in nodes.tail.0.iter().zip(&nodes.tail.1) {
            let r = re * t.powf(-0.5 / s);
            let mut ry2 = 0.0;
            let mut yo = 0.0;
            for k in 0..d {
                let yk = x[k] + r * om[k];
                ry2 += yk * yk;
                yo += yk * om[k];
            }
            ext += w * (a + 0.5 * b * (cx * cx + yo * yo / ry2));
        }
        ext *= re.powf(-2.0 * s) / (2.0 * s);
        for (j, v) in vx.iter().enumerate() {
            // pairs with one point outside the ball appear twice
            acc[j] += wo * (ray[j] + 2.0 * v * v * ext);
        }
    }
    acc
}

fn energies(p: &FracParams, funcs: &[&TestFunction], spec: &QuadratureSpec) -> Result<Vec<f64>> {
    check_dim(p, funcs)?;
    let ball = funcs.iter().map(|f| f.support_radius()).fold(0.0, f64::max);
    if ball == 0.0 {
        return Ok(vec![0.0; funcs.len()]);
    }
    let k = kappa(p.d, p.s)?;
    let nodes = energy_nodes(p.d, ball, spec);
    let per_x: Vec<Vec<f64>> =
        parallel::install(|| nodes.xs.par_iter().map(|(x, _)| inner(p, &nodes, funcs, x)).collect());
    let mut out = vec![0.0; funcs.len()];
    for ((_, w), v) in nodes.xs.iter().zip(&per_x) {
        for (o, vi) in out.iter_mut().zip(v) {
            *o += w * vi;
        }
    }
    let res: Vec<f64> = out.into_iter().map(|v| 0.5 * k * v).collect();
    if res.iter().any(|v| !v.is_finite()) {
        return Err(LabError::NotConverged("energy quadrature produced a non-finite value".into()));
    }
    Ok(res)
}

/// J^s_ε(v) by quadrature in (x, y = x + rω); d ∈ {2, 3}.
pub fn energy_eval(p: &FracParams, v: &TestFunction, spec: &QuadratureSpec) -> Result<f64> {
    Ok(energies(p, &[v], spec)?[0])
}

/// Both sides of ½J(v₁) + ½J(v₂) - J((v₁+v₂)/2) = ¼ J(v₁ - v₂), on one
/// node set.
pub fn convexity_identity_check(
    p: &FracParams,
    v1: &TestFunction,
    v2: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let mid = v1.combine(0.5, v2, 0.5)?;
    let diff = v1.combine(1.0, v2, -1.0)?;
    let j = energies(p, &[v1, v2, &mid, &diff], spec)?;
    Ok((0.5 * j[0] + 0.5 * j[1] - j[2], 0.25 * j[3]))
}

/// Independent Monte-Carlo estimate of J (mean, standard error): x uniform
/// in the support ball, y = x + rω with a two-piece power density in r.
pub fn energy_mc(p: &FracParams, v: &TestFunction, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if v.dim != p.d || samples < 2 {
        return domain("dimension mismatch or too few samples");
    }
    let d = p.d;
    let s = p.s;
    let ball = v.support_radius();
    if ball == 0.0 {
        return Ok((0.0, 0.0));
    }
    let area = 2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)?;
    let vol = area / d as f64 * ball.powi(d as i32);
    // density of r: c r^{1-2s} on (0,1), c r^{-1-2s} on (1,∞)
    let m_in = 1.0 / (2.0 - 2.0 * s);
    let m_out = 1.0 / (2.0 * s);
    let total = m_in + m_out;
    let chunks = 64usize;
    let per = samples.div_ceil(chunks);
    let parts: Vec<(f64, f64, usize)> = parallel::install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed.wrapping_add((c as u64).wrapping_mul(0x2545_F491_4F6C_DD1D)),
                );
                let mut sum = 0.0;
                let mut sum2 = 0.0;
                let mut n = 0;
                let mut x = vec![0.0; d];
                let mut om = vec![0.0; d];
                let mut y = vec![0.0; d];
                for _ in 0..per.min(samples.saturating_sub(c * per)) {
                    loop {
                        for xi in x.iter_mut() {
                            *xi = ball * (2.0 * rng.random::<f64>() - 1.0);
                        }
                        if norm(&x) < ball {
                            break;
                        }
                    }
                    for o in om.iter_mut() {
                        *o = rng.sample(StandardNormal);
                    }
                    let on = norm(&om);
                    om.iter_mut().for_each(|o| *o /= on);
                    let u: f64 = rng.random();
                    let r = if u * total < m_in {
                        (u * total / m_in).powf(1.0 / (2.0 - 2.0 * s))
                    } else {
                        (1.0 - (u * total - m_in) / m_out).max(1e-300).powf(-1.0 / (2.0 * s))
                    };
                    let dens = if r < 1.0 { r.powf(1.0 - 2.0 * s) } else { r.powf(-1.0 - 2.0 * s) } / total;
                    for k in 0..d {
                        y[k] = x[k] + r * om[k];
                    }
                    let kern = crate::model::kernel_eval(p, &x, &y).unwrap_or(0.0);
                    let diff = v.value(&y) - v.value(&x);
                    let mult = if norm(&y) < ball { 1.0 } else { 2.0 };
                    let val = mult * kern * diff * diff * r.powi(d as i32 - 1) / dens * area * vol;
                    sum += val;
                    sum2 += val * val;
                    n += 1;
                }
                (sum, sum2, n)
            })
            .collect()
    });
    let (sum, sum2, n) = parts.iter().fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum2 / nf - mean * mean).max(0.0) / (nf - 1.0);
    let k = kappa(d, s)?;
    Ok((0.5 * k * mean, 0.5 * k * var.sqrt()))
}

/// ½ ∫ ⟨A_ε ∇v, ∇v⟩ with the classical coefficient (1-ε)I + ε x̂⊗x̂, by the
/// midpoint rule on a uniform grid.
pub fn local_energy(epsilon: f64, v: &TestFunction, cells_per_axis: usize) -> Result<f64> {
    let d = v.dim;
    if !(d == 2 || d == 3) || cells_per_axis == 0 {
        return domain("local energy supports d = 2 and 3");
    }
    let ball = v.support_radius();
    if ball == 0.0 {
        return Ok(0.0);
    }
    let n = cells_per_axis;
    let h = 2.0 * ball / n as f64;
    let coord = |i: usize| -ball + (i as f64 + 0.5) * h;
    let rows: Vec<f64> = parallel::install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                let mut x = vec![0.0; d];
                let mut g = vec![0.0; d];
                let inner_count = if d == 2 { n } else { n * n };
                for jk in 0..inner_count {
                    x[0] = coord(i);
                    x[1] = coord(jk % n);
                    if d == 3 {
                        x[2] = coord(jk / n);
                    }
                    v.gradient(&x, &mut g);
                    let r = norm(&x);
                    let g2: f64 = g.iter().map(|t| t * t).sum();
                    let gx: f64 =
                        if r > 0.0 { g.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() / r } else { 0.0 };
                    acc += (1.0 - epsilon) * g2 + epsilon * gx * gx;
                }
                acc
            })
            .collect()
    });
    Ok(0.5 * rows.iter().sum::<f64>() * h.powi(d as i32))
}

/// One row of the local-limit table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaLimitRow {
    pub s: f64,
    pub energy: f64,
    pub local_energy: f64,
    pub rel_err: f64,
}

/// J^s_ε(v) for each s in `s_list` next to its local limit.
pub fn gamma_limit_probe(
    epsilon: f64,
    v: &TestFunction,
    s_list: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<GammaLimitRow>> {
    let local = local_energy(epsilon, v, 600)?;
    s_list
        .iter()
        .map(|&s| {
            let p = FracParams::meyers(v.dim, s, 0.0, epsilon)?;
            let j = energy_eval(&p, v, spec)?;
            Ok(GammaLimitRow { s, energy: j, local_energy: local, rel_err: (j - local).abs() / local.abs() })
        })
        .collect()
}

/// ∫ (strong form)·η in closed form and by quadrature of the principal
/// value, both in the normalization of `closedform::operator_value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstVariation {
    pub closed: f64,
    pub quad: f64,
    pub tolerance: f64,
}

/// Pairs the strong form of u_δ with η. η must be supported inside the
/// unit ball. Fails with `NotConverged` when the two paths disagree by more
/// than the propagated quadrature error.
pub fn first_variation_residual(
    p: &FracParams,
    eta: &TestFunction,
    spec: &QuadratureSpec,
) -> Result<FirstVariation> {
    if p.d != 2 || eta.dim != 2 {
        return domain("first variation is evaluated in the plane");
    }
    let ball = eta.support_radius();
    if !(ball < 1.0) {
        return domain("eta must be supported inside the unit ball");
    }
    if ball == 0.0 {
        return Ok(FirstVariation { closed: 0.0, quad: 0.0, tolerance: 0.0 });
    }
    let k = kappa(p.d, p.s)?;
    let (rs, rw) = composite(0.0, ball, 1, 6);
    let nth = 16;
    let mut nodes = Vec::new();
    for (r, w) in rs.iter().zip(&rw) {
        for j in 0..nth {
            let t = 2.0 * PI * (j as f64 + 0.5) / nth as f64;
            let x = vec![r * t.cos(), r * t.sin()];
            let e = eta.value(&x);
            if e != 0.0 {
                nodes.push((x, w * r * 2.0 * PI / nth as f64 * e));
            }
        }
    }
    let mut closed = 0.0;
    let mut quad = 0.0;
    let mut tol = 1e-9;
    for (x, w) in &nodes {
        closed += w * operator_value(p, x)?;
        let r = frac_op_num(p, x, spec)?;
        quad += w * k * r.value;
        tol += (w * k * r.err_estimate).abs();
    }
    let tolerance = 10.0 * tol;
    if (quad - closed).abs() > tolerance {
        return Err(LabError::NotConverged(format!(
            "strong form paired with eta: quadrature {quad:.6e} vs closed form {closed:.6e}"
        )));
    }
    Ok(FirstVariation { closed, quad, tolerance })
}

/// ∫_{S^{d-1}} σ_i² dσ = Γ(1/2)^d / Γ(d/2 + 1).
pub fn sphere_moment2(d: usize) -> Result<f64> {
    Ok(PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0 + 1.0)?)
}

/// ∫_{S^{d-1}} σ_i² σ₁² dσ: one (d+2)-th of the second moment for i ≠ 1,
/// three for i = 1 (indices start at 1).
pub fn sphere_moment4(d: usize, i: usize) -> Result<f64> {
    if i == 0 || i > d {
        return domain("index out of range");
    }
    let m = sphere_moment2(d)? / (d as f64 + 2.0);
    Ok(if i == 1 { 3.0 * m } else { m })
}

/// Monte-Carlo sphere averages (moment2, moment4 with i = 2, moment4 with
/// i = 1), each as (mean, standard error), from uniform directions.
pub fn sphere_moments_mc(d: usize, samples: usize, seed: u64) -> Result<[(f64, f64); 3]> {
    if d < 2 || samples < 2 {
        return domain("need d >= 2 and at least two samples");
    }
    let area = 2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = [[0.0f64; 2]; 3];
    let mut v = vec![0.0; d];
    for _ in 0..samples {
        for x in v.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        let n2: f64 = v.iter().map(|x| x * x).sum();
        let a = v[0] * v[0] / n2;
        let b = v[1] * v[1] / n2;
        for (k, val) in [a, a * b, a * a].into_iter().enumerate() {
            acc[k][0] += val;
            acc[k][1] += val * val;
        }
    }
    let n = samples as f64;
    Ok(acc.map(|[s1, s2]| {
        let mean = s1 / n;
        let var = (s2 / n - mean * mean).max(0.0) / (n - 1.0);
        (area * mean, area * var.sqrt())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast() -> QuadratureSpec {
        QuadratureSpec { angular_panels: 16, radial_nodes: 8, ..QuadratureSpec::default() }
    }

    #[test]
    fn gradient_matches_differences() {
        let v = TestFunction::bump(vec![0.1, -0.2], 0.7, 1.3)
            .unwrap()
            .combine(1.0, &TestFunction::bump(vec![-0.3, 0.1], 0.5, -0.4).unwrap(), 1.0)
            .unwrap();
        let x = [0.05, -0.1];
        let mut g = [0.0; 2];
        v.gradient(&x, &mut g);
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += 1e-6;
            xm[k] -= 1e-6;
            let fd = (v.value(&xp) - v.value(&xm)) / 2e-6;
            assert!((fd - g[k]).abs() < 1e-8, "{fd} {}", g[k]);
        }
    }

    #[test]
    fn zero_function_has_zero_energy() {
        let p = FracParams::meyers(2, 0.5, 0.0, 0.2).unwrap();
        assert_eq!(energy_eval(&p, &TestFunction::zero(2), &fast()).unwrap(), 0.0);
    }

    #[test]
    fn matches_spectral_reference() {
        // ε = 0, s = 1/2: κ/2 ∫ (2π|ξ|)|v̂|² computed by FFT on a fine grid
        let p = FracParams::meyers(2, 0.5, 0.0, 0.0).unwrap();
        let j = energy_eval(&p, &TestFunction::bump_x1(2), &QuadratureSpec::default()).unwrap();
        assert!((j / 0.022682052278737916 - 1.0).abs() < 1e-4, "{j}");
    }

    #[test]
    fn scaling_law() {
        let p = FracParams::meyers(2, 0.4, 0.0, 0.0).unwrap();
        let v = TestFunction::bump_x1(2);
        let j1 = energy_eval(&p, &v, &fast()).unwrap();
        let j2 = energy_eval(&p, &v.dilate(2.0), &fast()).unwrap();
        assert!((j2 / j1 - 2f64.powf(2.0 - 0.8)).abs() < 1e-2 * 2f64.powf(1.2));
    }

    #[test]
    fn comparable_to_isotropic_energy() {
        let v = TestFunction::bump(vec![0.2, 0.1], 0.6, 1.0).unwrap();
        let j0 = energy_eval(&FracParams::meyers(2, 0.6, 0.0, 0.0).unwrap(), &v, &fast()).unwrap();
        let j = energy_eval(&FracParams::meyers(2, 0.6, 0.0, 0.5).unwrap(), &v, &fast()).unwrap();
        assert!(j >= 0.25 * j0 && j <= 1.25 * j0);
    }

    #[test]
    fn identity_degenerate_cases() {
        let p = FracParams::meyers(2, 0.5, 0.0, 0.3).unwrap();
        let v = TestFunction::bump(vec![0.1, 0.0], 0.5, 1.0).unwrap();
        let (l, r) = convexity_identity_check(&p, &v, &v, &fast()).unwrap();
        assert!(l.abs() < 1e-12 && r == 0.0);
        let (l, r) = convexity_identity_check(&p, &v, &TestFunction::zero(2), &fast()).unwrap();
        let j = energy_eval(&p, &v, &fast()).unwrap();
        assert!((l - r).abs() < 1e-10 * l.abs() && (r - 0.25 * j).abs() < 1e-10 * j);
    }

    #[test]
    fn sphere_moments() {
        let m2 = sphere_moment2(3).unwrap();
        assert!((m2 - 4.0 * PI / 3.0).abs() < 1e-14);
        let mc = sphere_moments_mc(3, 200_000, 7).unwrap();
        let closed = [m2, sphere_moment4(3, 2).unwrap(), sphere_moment4(3, 1).unwrap()];
        for (c, (m, se)) in closed.iter().zip(mc) {
            assert!((c - m).abs() < 4.0 * se, "{c} {m} {se}");
        }
    }
}
