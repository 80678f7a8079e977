//! Principal-value quadrature over R^d for integrands with a hypersingular
//! point at the origin and an integrable singular point c ≠ 0.
//!
//! The integrand is symmetrized, g_sym(h) = (g(h) + g(-h))/2, so the odd
//! part of the singularity at the origin cancels at each node. A smooth
//! partition of unity splits R^d into a neighbourhood of ±c, handled in
//! polar coordinates centred at c, and the rest, handled in polar
//! coordinates centred at 0 on graded bands. Truncation at |h| = r_min and
//! r_max is corrected by fitting the known power laws of the innermost and
//! outermost bands, on several nested windows; the spread between windows
//! is the error estimate.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::gauss::composite;
use crate::model::{coeff_parts, norm, CoeffFlavor, FracParams};
use crate::parallel;
use crate::specfun::gamma;

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Controls of a principal-value integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Inner truncation radius of the first window.
    pub r_min: f64,
    /// Outer truncation radius of the first window.
    pub r_max: f64,
    pub bands_per_decade: usize,
    /// Gauss nodes per radial band.
    pub radial_nodes: usize,
    /// Gauss nodes per angular panel.
    pub angular_nodes: usize,
    /// Angular panels on a half great circle.
    pub angular_panels: usize,
    /// Random directions per band when d ≥ 4 and no axial symmetry.
    pub mc_samples: usize,
    pub seed: u64,
    pub target_rel_err: f64,
    /// Number of nested windows.
    pub levels: usize,
    /// Each window is wider than the previous by this factor at both ends.
    pub level_factor: f64,
    /// Radius of the patch around the second singular point, relative to |c|.
    pub patch_radius: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            r_min: 1e-6,
            r_max: 1e6,
            bands_per_decade: 4,
            radial_nodes: 10,
            angular_nodes: 8,
            angular_panels: 32,
            mc_samples: 4096,
            seed: 42,
            target_rel_err: 1e-5,
            levels: 3,
            level_factor: 1e3,
            patch_radius: 0.3,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < 1.0 && self.r_max > 1.0) {
            return domain("window must satisfy 0 < r_min < 1 < r_max");
        }
        if self.bands_per_decade == 0 || self.radial_nodes == 0 || self.angular_nodes == 0 {
            return domain("node counts must be positive");
        }
        if self.angular_panels == 0 || self.levels < 2 || !(self.level_factor > 1.0) {
            return domain("need at least two windows and one angular panel");
        }
        if !(self.patch_radius > 0.0 && self.patch_radius < 0.5) {
            return domain("patch radius must lie in (0, 1/2)");
        }
        Ok(())
    }
}

/// Outcome of a principal-value integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PVResult {
    pub value: f64,
    pub err_estimate: f64,
    pub nodes_used: u64,
    pub converged: bool,
    pub seed: u64,
}

impl PVResult {
    /// Turns a result that missed its target into [`LabError::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(LabError::NotConverged(format!(
                "value {:.6e}, error estimate {:.3e}",
                self.value, self.err_estimate
            )))
        }
    }
}

/// A function on R^d \ {0, ±c}.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, h: &[f64]) -> f64;
    /// (g(h) + g(-h))/2. Override when a cancellation-free form exists.
    fn eval_sym(&self, h: &[f64]) -> f64 {
        let mut m = [0.0; MAX_DIM];
        for (mi, hi) in m.iter_mut().zip(h) {
            *mi = -hi;
        }
        0.5 * (self.eval(h) + self.eval(&m[..h.len()]))
    }
}

/// Adapter for closures.
pub struct FnIntegrand<F> {
    pub d: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn dim(&self) -> usize {
        self.d
    }
    fn eval(&self, h: &[f64]) -> f64 {
        (self.f)(h)
    }
}

/// A principal-value problem: integrand plus the structural facts the
/// quadrature exploits.
pub struct PvProblem<'a> {
    pub integrand: &'a dyn Integrand,
    /// Second singular point; the integrand may also be singular at -c.
    pub singular: Option<Vec<f64>>,
    /// Integrand invariant under rotations fixing the axis through c
    /// (or e₁ when there is no singular point).
    pub axisymmetric: bool,
    /// Band contributions near 0 behave like Σ a_i r^{β_i}.
    pub inner_exponents: Vec<f64>,
    /// Band contributions near ∞ behave like Σ a_i r^{-α_i}.
    pub outer_exponents: Vec<f64>,
}

/// p.v.∫ g over R^d with no second singular point and unknown tails
/// (geometric extrapolation of the end bands).
pub fn pv_integral(f: impl Fn(&[f64]) -> f64 + Sync, d: usize, spec: &QuadratureSpec) -> Result<PVResult> {
    let g = FnIntegrand { d, f };
    let prob = PvProblem {
        integrand: &g,
        singular: None,
        axisymmetric: false,
        inner_exponents: vec![],
        outer_exponents: vec![],
    };
    pv_integrate(&prob, spec)
}

fn smooth_cutoff(t: f64) -> f64 {
    // 1 on [0, 1/2], 0 on [1, ∞), C^∞ in between
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let tau = 2.0 * (t - 0.5);
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let (a, b) = (f(1.0 - tau), f(tau));
    a / (a + b)
}

fn sphere_area(n_minus_1: usize) -> f64 {
    // area of the unit sphere S^{n-1} in R^n
    let n = n_minus_1 as f64 + 1.0;
    2.0 * PI.powf(n / 2.0) / gamma(n / 2.0).expect("positive argument")
}

enum Angular {
    Fixed { dirs: Vec<f64>, weights: Vec<f64> },
    Random { hemisphere: bool, n: usize, area: f64 },
}

struct Frame {
    basis: Vec<Vec<f64>>,
}

impl Frame {
    fn new(d: usize, axis: &[f64]) -> Self {
        let mut basis: Vec<Vec<f64>> = vec![axis.to_vec()];
        for k in 0..d {
            if basis.len() == d {
                break;
            }
            let mut v = vec![0.0; d];
            v[k] = 1.0;
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= dot * bi;
                }
            }
            let n = norm(&v);
            if n > 1e-8 {
                basis.push(v.into_iter().map(|x| x / n).collect());
            }
        }
        Self { basis }
    }

    fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let d = self.basis.len();
        let mut out = vec![0.0; d];
        for (c, b) in coeffs.iter().zip(&self.basis) {
            for (o, bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }
}

fn angular_rule(
    d: usize,
    frame: &Frame,
    axisymmetric: bool,
    hemisphere: bool,
    spec: &QuadratureSpec,
) -> Angular {
    let panels = spec.angular_panels;
    let n = spec.angular_nodes;
    let mut dirs = Vec::new();
    let mut weights = Vec::new();
    if axisymmetric || d == 2 {
        let (lo, hi, pan) = match (axisymmetric, hemisphere) {
            (true, true) => (0.0, PI / 2.0, panels),
            (true, false) => (0.0, PI, 2 * panels),
            (false, true) => (-PI / 2.0, PI / 2.0, 2 * panels),
            (false, false) => (-PI, PI, 4 * panels),
        };
        let ring = if axisymmetric && d > 2 { sphere_area(d - 2) } else { 1.0 };
        let ring = if axisymmetric && d == 2 { 2.0 } else { ring };
        let (th, wt) = composite(lo, hi, pan, n);
        for (t, w) in th.iter().zip(&wt) {
            let mut c = vec![0.0; d];
            c[0] = t.cos();
            c[1] = t.sin();
            dirs.extend(frame.combine(&c));
            let jac = if axisymmetric { t.sin().abs().powi(d as i32 - 2) } else { 1.0 };
            weights.push(w * ring * jac);
        }
        return Angular::Fixed { dirs, weights };
    }
    if d == 3 {
        let (lo, hi, pan) = if hemisphere { (0.0, PI / 2.0, panels / 2) } else { (0.0, PI, panels) };
        let (th, wt) = composite(lo, hi, pan.max(1), n);
        let nphi = 2 * panels * n / 2;
        let nphi = nphi.max(8);
        for (t, w) in th.iter().zip(&wt) {
            for k in 0..nphi {
                let phi = 2.0 * PI * k as f64 / nphi as f64;
                let c = [t.cos(), t.sin() * phi.cos(), t.sin() * phi.sin()];
                dirs.extend(frame.combine(&c));
                weights.push(w * t.sin() * 2.0 * PI / nphi as f64);
            }
        }
        return Angular::Fixed { dirs, weights };
    }
    let area = sphere_area(d - 1);
    Angular::Random { hemisphere, n: spec.mc_samples, area: if hemisphere { area / 2.0 } else { area } }
}

#[derive(Clone, Copy)]
enum Job {
    Main { a: f64, b: f64 },
    Patch { a: f64, b: f64 },
}

struct BandOut {
    value: f64,
    var: f64,
    nodes: u64,
}

struct Engine<'a> {
    prob: &'a PvProblem<'a>,
    d: usize,
    center: Option<Vec<f64>>,
    patch_r: f64,
    main_rule: Angular,
    patch_rule: Angular,
    axis: Vec<f64>,
    radial_nodes: usize,
    seed: u64,
}

impl Engine<'_> {
    fn chi(&self, h: &[f64]) -> f64 {
        match &self.center {
            None => 0.0,
            Some(c) => {
                let mut s = 0.0;
                for (hi, ci) in h.iter().zip(c) {
                    s += (hi - ci) * (hi - ci);
                }
                smooth_cutoff(s.sqrt() / self.patch_r)
            }
        }
    }

    fn chi_neg(&self, h: &[f64]) -> f64 {
        match &self.center {
            None => 0.0,
            Some(c) => {
                let mut s = 0.0;
                for (hi, ci) in h.iter().zip(c) {
                    s += (hi + ci) * (hi + ci);
                }
                smooth_cutoff(s.sqrt() / self.patch_r)
            }
        }
    }

    // integral along one direction over the radial band, main region
    fn ray_main(&self, omega: &[f64], rs: &[f64], ws: &[f64], buf: &mut [f64]) -> (f64, u64) {
        let g = self.prob.integrand;
        let d = self.d;
        let mut acc = 0.0;
        let mut nodes = 0;
        for (r, w) in rs.iter().zip(ws) {
            for k in 0..d {
                buf[k] = r * omega[k];
            }
            let h = &buf[..d];
            let wt = 1.0 - self.chi(h) - self.chi_neg(h);
            if wt <= 0.0 {
                continue;
            }
            acc += w * r.powi(d as i32 - 1) * wt * g.eval_sym(h);
            nodes += 1;
        }
        (acc, nodes)
    }

    fn ray_patch(&self, omega: &[f64], rs: &[f64], ws: &[f64], buf: &mut [f64]) -> (f64, u64) {
        let g = self.prob.integrand;
        let d = self.d;
        let c = self.center.as_ref().expect("patch needs a centre");
        let mut acc = 0.0;
        let mut nodes = 0;
        for (r, w) in rs.iter().zip(ws) {
            for k in 0..d {
                buf[k] = c[k] + r * omega[k];
            }
            let h = &buf[..d];
            let wt = self.chi(h);
            if wt <= 0.0 {
                continue;
            }
            acc += w * r.powi(d as i32 - 1) * wt * g.eval_sym(h);
            nodes += 1;
        }
        (acc, nodes)
    }

    fn run(&self, idx: usize, job: Job) -> BandOut {
        let (a, b, patch) = match job {
            Job::Main { a, b } => (a, b, false),
            Job::Patch { a, b } => (a, b, true),
        };
        let (rs, ws) = composite(a, b, 1, self.radial_nodes);
        let rule = if patch { &self.patch_rule } else { &self.main_rule };
        let mut buf = [0.0; MAX_DIM];
        let ray = |om: &[f64], buf: &mut [f64]| {
            if patch {
                self.ray_patch(om, &rs, &ws, buf)
            } else {
                self.ray_main(om, &rs, &ws, buf)
            }
        };
        // both regions are integrated over one half and doubled by symmetry
        match rule {
            Angular::Fixed { dirs, weights } => {
                let mut acc = 0.0;
                let mut nodes = 0;
                for (k, w) in weights.iter().enumerate() {
                    let (v, n) = ray(&dirs[k * self.d..(k + 1) * self.d], &mut buf);
                    acc += w * v;
                    nodes += n;
                }
                BandOut { value: 2.0 * acc, var: 0.0, nodes }
            }
            Angular::Random { hemisphere, n, area } => {
                let mut rng = ChaCha8Rng::seed_from_u64(
                    self.seed ^ (idx as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                let mut sum = 0.0;
                let mut sum2 = 0.0;
                let mut nodes = 0;
                let mut om = vec![0.0; self.d];
                for _ in 0..*n {
                    for o in om.iter_mut() {
                        *o = rng.sample(StandardNormal);
                    }
                    let nn = norm(&om);
                    for o in om.iter_mut() {
                        *o /= nn;
                    }
                    if *hemisphere {
                        let dot: f64 = om.iter().zip(&self.axis).map(|(x, y)| x * y).sum();
                        if dot < 0.0 {
                            for o in om.iter_mut() {
                                *o = -*o;
                            }
                        }
                    }
                    let (v, c) = ray(&om, &mut buf);
                    sum += v;
                    sum2 += v * v;
                    nodes += c;
                }
                let nf = *n as f64;
                let mean = sum / nf;
                let var = (sum2 / nf - mean * mean).max(0.0) / (nf - 1.0).max(1.0);
                BandOut { value: 2.0 * area * mean, var: 4.0 * area * area * var, nodes }
            }
        }
    }
}

fn solve_small(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in row + 1..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

fn dedup_exponents(e: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &x in e {
        if out.iter().all(|y| (x - y).abs() > 1e-3) {
            out.push(x);
        }
    }
    out
}

fn geometric_tail(last: f64, prev: f64) -> f64 {
    if prev == 0.0 {
        return 0.0;
    }
    let q = last / prev;
    if q > 0.0 && q < 0.999 {
        last * q / (1.0 - q)
    } else {
        0.0
    }
}

// remainder beyond the outermost band, bands sorted outward
fn outer_tail(bands: &[(f64, f64, f64)], exps: &[f64]) -> f64 {
    let n = exps.len();
    if n == 0 || bands.len() < n {
        let k = bands.len();
        return if k >= 2 { geometric_tail(bands[k - 1].2, bands[k - 2].2) } else { 0.0 };
    }
    let sel = &bands[bands.len() - n..];
    let hi = sel[n - 1].1;
    let m: Vec<Vec<f64>> = sel
        .iter()
        .map(|&(a, b, _)| exps.iter().map(|&al| (a / hi).powf(-al) - (b / hi).powf(-al)).collect())
        .collect();
    let rhs: Vec<f64> = sel.iter().map(|x| x.2).collect();
    match solve_small(m, rhs) {
        Some(c) => c.iter().sum(),
        None => 0.0,
    }
}

// remainder inside the innermost band, bands sorted inward
fn inner_tail(bands: &[(f64, f64, f64)], exps: &[f64]) -> f64 {
    let n = exps.len();
    if n == 0 || bands.len() < n {
        let k = bands.len();
        return if k >= 2 { geometric_tail(bands[k - 1].2, bands[k - 2].2) } else { 0.0 };
    }
    let sel = &bands[bands.len() - n..];
    let lo = sel[n - 1].0;
    let m: Vec<Vec<f64>> = sel
        .iter()
        .map(|&(a, b, _)| exps.iter().map(|&be| (b / lo).powf(be) - (a / lo).powf(be)).collect())
        .collect();
    let rhs: Vec<f64> = sel.iter().map(|x| x.2).collect();
    match solve_small(m, rhs) {
        Some(c) => c.iter().sum(),
        None => 0.0,
    }
}

/// Evaluates a principal-value problem.
pub fn pv_integrate(prob: &PvProblem<'_>, spec: &QuadratureSpec) -> Result<PVResult> {
    spec.validate()?;
    let d = prob.integrand.dim();
    if !(2..=MAX_DIM).contains(&d) {
        return domain(format!("dimension {d} outside 2..={MAX_DIM}"));
    }
    if prob.inner_exponents.iter().chain(&prob.outer_exponents).any(|&e| !(e > 0.0)) {
        return domain("tail exponents must be positive (integral would diverge)");
    }
    let (ell, axis) = match &prob.singular {
        Some(c) => {
            if c.len() != d {
                return domain("singular point has the wrong dimension");
            }
            let l = norm(c);
            if !(l > 0.0) {
                return domain("second singular point must differ from the origin");
            }
            (l, c.iter().map(|x| x / l).collect::<Vec<_>>())
        }
        None => {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            (1.0, e)
        }
    };
    if prob.axisymmetric && prob.singular.is_some() {
        let off: f64 = axis[1..].iter().map(|x| x * x).sum();
        if off > 1e-24 {
            return domain("axisymmetric problems need the singular point on the x1 axis");
        }
    }
    let frame = Frame::new(d, &axis);
    let engine = Engine {
        prob,
        d,
        center: prob.singular.clone(),
        patch_r: spec.patch_radius * ell,
        main_rule: angular_rule(d, &frame, prob.axisymmetric, true, spec),
        patch_rule: angular_rule(d, &frame, prob.axisymmetric, false, spec),
        axis,
        radial_nodes: spec.radial_nodes,
        seed: spec.seed,
    };

    // radial structure
    let widen = spec.level_factor.powi(spec.levels as i32 - 1);
    let (lo_all, hi_all) = (spec.r_min / widen, spec.r_max * widen);
    let step = 10f64.powf(1.0 / spec.bands_per_decade as f64);
    let (mid_lo, mid_hi) = (0.6 * ell, 1.4 * ell);
    let mut inner_edges = vec![mid_lo];
    while *inner_edges.last().unwrap() > lo_all * (1.0 + 1e-12) {
        let next = inner_edges.last().unwrap() / step;
        inner_edges.push(next.max(lo_all));
    }
    let mut outer_edges = vec![mid_hi];
    while *outer_edges.last().unwrap() < hi_all * (1.0 - 1e-12) {
        let next = outer_edges.last().unwrap() * step;
        outer_edges.push(next.min(hi_all));
    }
    let mut main: Vec<(f64, f64)> = Vec::new();
    for w in inner_edges.windows(2).rev() {
        main.push((w[1], w[0]));
    }
    let mid_panels = 16;
    for k in 0..mid_panels {
        let a = mid_lo + (mid_hi - mid_lo) * k as f64 / mid_panels as f64;
        let b = mid_lo + (mid_hi - mid_lo) * (k + 1) as f64 / mid_panels as f64;
        main.push((a, b));
    }
    for w in outer_edges.windows(2) {
        main.push((w[0], w[1]));
    }
    let mut jobs: Vec<Job> = main.iter().map(|&(a, b)| Job::Main { a, b }).collect();
    if prob.singular.is_some() {
        let pr = engine.patch_r;
        let split = pr / 6.0;
        let mut e = split;
        let mut geo = Vec::new();
        while e > pr * 1e-10 {
            let next = e / 2.0;
            geo.push((next, e));
            e = next;
        }
        for &(a, b) in geo.iter().rev() {
            jobs.push(Job::Patch { a, b });
        }
        let lin = 10;
        for k in 0..lin {
            let a = split + (pr - split) * k as f64 / lin as f64;
            let b = split + (pr - split) * (k + 1) as f64 / lin as f64;
            jobs.push(Job::Patch { a, b });
        }
    }

    let outs: Vec<BandOut> =
        parallel::install(|| jobs.par_iter().enumerate().map(|(i, j)| engine.run(i, *j)).collect());

    let nodes_used: u64 = outs.iter().map(|o| o.nodes).sum();
    let var: f64 = outs.iter().map(|o| o.var).sum();
    let patch_total: f64 =
        jobs.iter().zip(&outs).filter(|(j, _)| matches!(j, Job::Patch { .. })).map(|(_, o)| o.value).sum();
    let bands: Vec<(f64, f64, f64)> = main.iter().zip(&outs).map(|(&(a, b), o)| (a, b, o.value)).collect();

    let inner_e = dedup_exponents(&prob.inner_exponents);
    let outer_e = dedup_exponents(&prob.outer_exponents);
    let mut level_values = Vec::with_capacity(spec.levels);
    for j in 0..spec.levels {
        let f = spec.level_factor.powi(j as i32);
        let (lo, hi) = (spec.r_min / f, spec.r_max * f);
        let inside: Vec<(f64, f64, f64)> = bands
            .iter()
            .copied()
            .filter(|&(a, b, _)| a >= lo * (1.0 - 1e-9) && b <= hi * (1.0 + 1e-9))
            .collect();
        let body: f64 = inside.iter().map(|x| x.2).sum();
        let outward: Vec<_> = inside.iter().copied().filter(|x| x.0 >= mid_hi * (1.0 - 1e-12)).collect();
        let inward: Vec<_> = inside.iter().rev().copied().filter(|x| x.1 <= mid_lo * (1.0 + 1e-12)).collect();
        let tail = outer_tail(&outward, &outer_e);
        let head = inner_tail(&inward, &inner_e);
        level_values.push(body + tail + head + patch_total);
    }
    let value = *level_values.last().unwrap();
    let prev = level_values[level_values.len() - 2];
    let err_estimate = (value - prev).abs() + var.sqrt() * 3.0;
    let converged = err_estimate <= spec.target_rel_err * value.abs() + 1e-10 && value.is_finite();
    Ok(PVResult { value, err_estimate, nodes_used, converged, seed: spec.seed })
}

// ---------------------------------------------------------------------
// integrands of the example

/// u(y) - u(x) for u = |y|^{-δ} y₁, y = x + h, without cancellation for
/// small h.
fn u_increment(delta: f64, x: &[f64], h: &[f64]) -> f64 {
    let mut x2 = 0.0;
    let mut xh = 0.0;
    let mut h2 = 0.0;
    let mut y2 = 0.0;
    for ((xi, hi), _) in x.iter().zip(h).zip(0..) {
        x2 += xi * xi;
        xh += xi * hi;
        h2 += hi * hi;
        y2 += (xi + hi) * (xi + hi);
    }
    let q = (2.0 * xh + h2) / x2;
    let l = if q.abs() < 0.5 { q.ln_1p() } else { (y2 / x2).ln() };
    let e = (-0.5 * delta * l).exp_m1();
    x2.powf(-0.5 * delta) * (h[0] + (x[0] + h[0]) * e)
}

/// (u(e₁+h) + u(e₁-h))/2 for u = |y|^p y₁, stable for large |h|.
fn axis_pair_mean(p: f64, h: &[f64]) -> f64 {
    let h1 = h[0];
    let rest: f64 = h[1..].iter().map(|x| x * x).sum();
    let r2 = h1 * h1 + rest;
    if r2 < 16.0 {
        let up = ((1.0 + h1) * (1.0 + h1) + rest).powf(0.5 * p) * (1.0 + h1);
        let um = ((1.0 - h1) * (1.0 - h1) + rest).powf(0.5 * p) * (1.0 - h1);
        return 0.5 * (up + um);
    }
    // |e₁±h|^p = r^p exp(P±), P± = (p/2) log(1 + (1 ± 2h₁)/r²)
    let pp = 0.5 * p * ((1.0 + 2.0 * h1) / r2).ln_1p();
    let pm = 0.5 * p * ((1.0 - 2.0 * h1) / r2).ln_1p();
    let rp = r2.powf(0.5 * p);
    let diff = rp * pm.exp() * (pp - pm).exp_m1();
    let sum = rp * (pp.exp() + pm.exp());
    0.5 * (diff * h1 + sum)
}

/// Which integral of the example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FIntegral {
    F1,
    F2,
    F3,
    F4,
}

impl std::str::FromStr for FIntegral {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(Self::F1),
            "f2" => Ok(Self::F2),
            "f3" => Ok(Self::F3),
            "f4" => Ok(Self::F4),
            other => domain(format!("unknown integral {other:?}")),
        }
    }
}

struct F1Integrand {
    d: usize,
    s: f64,
    delta: f64,
    e1: Vec<f64>,
}

impl Integrand for F1Integrand {
    fn dim(&self) -> usize {
        self.d
    }
    fn eval(&self, h: &[f64]) -> f64 {
        let r2: f64 = h.iter().map(|x| x * x).sum();
        u_increment(self.delta, &self.e1, h) * r2.powf(-0.5 * (self.d as f64 + 2.0 * self.s))
    }
}

struct F2Integrand {
    d: usize,
    s: f64,
    delta: f64,
    e1: Vec<f64>,
}

impl Integrand for F2Integrand {
    fn dim(&self) -> usize {
        self.d
    }
    fn eval(&self, h: &[f64]) -> f64 {
        let r2: f64 = h.iter().map(|x| x * x).sum();
        let h1 = h[0];
        let num = -2.0 * h1 * h1 * h1 + r2 * h1 * h1 + 2.0 * h1 * h1 - 2.0 * r2 * h1 + r2 * r2;
        let dist2 = (1.0 - h1) * (1.0 - h1) + (r2 - h1 * h1);
        let mut mh = [0.0; MAX_DIM];
        for (m, x) in mh.iter_mut().zip(h) {
            *m = -x;
        }
        let incr = u_increment(self.delta, &self.e1, &mh[..self.d]);
        num / (2.0 * r2.powf(0.5 * (self.d as f64 + 2.0 * self.s + 2.0)) * dist2) * incr
    }
}

/// pv∫ |h|^{-(d-1+s)} u(x - h) dh for u = |y|^p y₁.
struct HomConv {
    d: usize,
    s: f64,
    p: f64,
    x: Vec<f64>,
    on_unit_axis: bool,
}

impl Integrand for HomConv {
    fn dim(&self) -> usize {
        self.d
    }
    fn eval(&self, h: &[f64]) -> f64 {
        let r2: f64 = h.iter().map(|x| x * x).sum();
        let mut y2 = 0.0;
        for (xi, hi) in self.x.iter().zip(h) {
            y2 += (xi - hi) * (xi - hi);
        }
        y2.powf(0.5 * self.p) * (self.x[0] - h[0]) * r2.powf(-0.5 * (self.d as f64 - 1.0 + self.s))
    }
    fn eval_sym(&self, h: &[f64]) -> f64 {
        let r2: f64 = h.iter().map(|x| x * x).sum();
        let k = r2.powf(-0.5 * (self.d as f64 - 1.0 + self.s));
        if self.on_unit_axis {
            return axis_pair_mean(self.p, h) * k;
        }
        let mut y2p = 0.0;
        let mut y2m = 0.0;
        for (xi, hi) in self.x.iter().zip(h) {
            y2p += (xi - hi) * (xi - hi);
            y2m += (xi + hi) * (xi + hi);
        }
        let a = y2p.powf(0.5 * self.p) * (self.x[0] - h[0]);
        let b = y2m.powf(0.5 * self.p) * (self.x[0] + h[0]);
        0.5 * (a + b) * k
    }
}

fn check_meyers(d: usize, s: f64, delta: f64) -> Result<()> {
    if d < 2 || !(s > 0.0 && s < 1.0) || !(0.0..=0.5).contains(&delta) {
        return domain(format!("need d >= 2, s in (0,1), delta in [0,1/2]; got {d}, {s}, {delta}"));
    }
    Ok(())
}

fn unit_e1(d: usize) -> Vec<f64> {
    let mut e = vec![0.0; d];
    e[0] = 1.0;
    e
}

/// The convolution pv∫ |h|^{-(d-1+s)} |x-h|^p (x-h)₁ dh, i.e. the Riesz
/// potential I_{1-s} of |y|^p y₁ at x without its constant 2κ_{d,(s-1)/2}.
/// Needs -d < p + 1 and p + 1 < s (local integrability and decay).
pub fn homogeneous_convolution_num(
    d: usize,
    s: f64,
    p: f64,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<PVResult> {
    if x.len() != d || !(norm(x) > 0.0) {
        return domain("convolution point must be a nonzero point of R^d");
    }
    if !(s > 0.0 && s < 1.0) {
        return domain("s must lie in (0,1)");
    }
    let alpha = s - p - 1.0;
    if !(alpha > 0.0) || !(p + 1.0 > -(d as f64)) {
        return domain(format!("convolution with exponent p = {p} does not converge"));
    }
    let off_axis: f64 = x[1..].iter().map(|v| v * v).sum();
    let on_axis = off_axis == 0.0;
    let on_unit_axis = on_axis && x[0] == 1.0;
    let g = HomConv { d, s, p, x: x.to_vec(), on_unit_axis };
    let prob = PvProblem {
        integrand: &g,
        singular: Some(x.to_vec()),
        axisymmetric: on_axis,
        inner_exponents: vec![1.0 - s, 3.0 - s],
        outer_exponents: vec![alpha, alpha + 2.0],
    };
    pv_integrate(&prob, spec)
}

/// The integrals f₁ … f₄ from their defining principal values. f₂ uses
/// its rational-integrand form.
pub fn f_integral_num(
    which: FIntegral,
    d: usize,
    s: f64,
    delta: f64,
    spec: &QuadratureSpec,
) -> Result<PVResult> {
    let e1 = unit_e1(d);
    match which {
        FIntegral::F1 | FIntegral::F2 => {
            check_meyers(d, s, delta)?;
            let inner = vec![2.0 - 2.0 * s, 4.0 - 2.0 * s];
            let outer = vec![2.0 * s, 2.0 * s + delta];
            if which == FIntegral::F1 {
                let g = F1Integrand { d, s, delta, e1: e1.clone() };
                let prob = PvProblem {
                    integrand: &g,
                    singular: Some(e1),
                    axisymmetric: true,
                    inner_exponents: inner,
                    outer_exponents: outer,
                };
                pv_integrate(&prob, spec)
            } else {
                let g = F2Integrand { d, s, delta, e1: e1.clone() };
                let prob = PvProblem {
                    integrand: &g,
                    singular: Some(e1),
                    axisymmetric: true,
                    inner_exponents: inner,
                    outer_exponents: outer,
                };
                pv_integrate(&prob, spec)
            }
        }
        FIntegral::F3 | FIntegral::F4 => {
            if !(delta > 0.0 && delta < d as f64 / 2.0) {
                return domain(format!("delta must lie in (0, d/2), got {delta}"));
            }
            let p = if which == FIntegral::F3 { s - delta - 1.0 } else { -2.0 - delta };
            homogeneous_convolution_num(d, s, p, &e1, spec)
        }
    }
}

struct FracOpIntegrand {
    d: usize,
    s: f64,
    delta: f64,
    a: f64,
    b: f64,
    x: Vec<f64>,
    xhat: Vec<f64>,
}

impl Integrand for FracOpIntegrand {
    fn dim(&self) -> usize {
        self.d
    }
    fn eval(&self, h: &[f64]) -> f64 {
        let mut h2 = 0.0;
        let mut xh = 0.0;
        let mut yh = 0.0;
        let mut y2 = 0.0;
        for ((xi, xhi), hi) in self.x.iter().zip(&self.xhat).zip(h) {
            h2 += hi * hi;
            xh += xhi * hi;
            yh += (xi + hi) * hi;
            y2 += (xi + hi) * (xi + hi);
        }
        let cx2 = xh * xh / h2;
        let cy2 = yh * yh / (h2 * y2);
        let form = self.a + 0.5 * self.b * (cx2 + cy2);
        let k = h2.powf(-0.5 * (self.d as f64 + 2.0 * self.s)) * form;
        -2.0 * k * u_increment(self.delta, &self.x, h)
    }
}

/// 2 p.v.∫ k_{s,ε}(x, x+h) (u_δ(x) - u_δ(x+h)) dh, without the factor
/// κ_{d,s}: multiply by `specfun::kappa(d, s)` to compare with
/// `closedform::operator_value`.
pub fn frac_op_num(p: &FracParams, x: &[f64], spec: &QuadratureSpec) -> Result<PVResult> {
    check_meyers(p.d, p.s, p.delta)?;
    if x.len() != p.d {
        return domain("point dimension does not match d");
    }
    let r = norm(x);
    if !(r > 0.0) {
        return domain("operator is evaluated away from the origin");
    }
    let (a, b) = coeff_parts(CoeffFlavor::Fractional, p);
    let g = FracOpIntegrand {
        d: p.d,
        s: p.s,
        delta: p.delta,
        a,
        b,
        x: x.to_vec(),
        xhat: x.iter().map(|v| v / r).collect(),
    };
    let off_axis: f64 = x[1..].iter().map(|v| v * v).sum();
    let s = p.s;
    let prob = PvProblem {
        integrand: &g,
        singular: Some(x.iter().map(|v| -v).collect()),
        axisymmetric: off_axis == 0.0,
        inner_exponents: vec![2.0 - 2.0 * s, 4.0 - 2.0 * s],
        outer_exponents: vec![2.0 * s, 2.0 * s + p.delta],
    };
    pv_integrate(&prob, spec)
}
