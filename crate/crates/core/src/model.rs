//! Parameter sets, the homogeneous solution fields, the coefficient fields
//! and the anisotropic jump kernel.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Which model family a parameter set belongs to. The admissible ranges of
/// `delta` and `epsilon` differ between the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Fractional Laplacian model: δ, ε in [0, 1/2].
    Meyers,
    /// Riesz fractional gradient model: δ in (0, d/2), ε in (0, 1).
    Riesz,
}

/// The tuple (d, s, δ, ε).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    pub d: usize,
    pub s: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub flavor: Flavor,
}

fn check_ds(d: usize, s: f64) -> Result<()> {
    if d < 2 {
        return domain(format!("dimension must be at least 2, got {d}"));
    }
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s must lie in (0,1), got {s}"));
    }
    Ok(())
}

impl FracParams {
    /// Meyers flavor with δ, ε in [0, 1/2].
    pub fn meyers(d: usize, s: f64, delta: f64, epsilon: f64) -> Result<Self> {
        check_ds(d, s)?;
        if !(0.0..=0.5).contains(&delta) {
            return domain(format!("delta must lie in [0, 1/2], got {delta}"));
        }
        if !(0.0..=0.5).contains(&epsilon) {
            return domain(format!("epsilon must lie in [0, 1/2], got {epsilon}"));
        }
        Ok(Self { d, s, delta, epsilon, flavor: Flavor::Meyers })
    }

    /// Meyers flavor with an arbitrary finite ε.
    ///
    /// The strong form is affine in ε, and the coupling b(δ) leaves
    /// [0, 1/2] for moderate δ when s is small. Ellipticity is not
    /// guaranteed for such parameter sets.
    pub fn meyers_free_epsilon(d: usize, s: f64, delta: f64, epsilon: f64) -> Result<Self> {
        check_ds(d, s)?;
        if !(0.0..=0.5).contains(&delta) {
            return domain(format!("delta must lie in [0, 1/2], got {delta}"));
        }
        if !epsilon.is_finite() {
            return domain("epsilon must be finite");
        }
        Ok(Self { d, s, delta, epsilon, flavor: Flavor::Meyers })
    }

    /// Riesz flavor with δ in (0, d/2) and ε in (0, 1).
    pub fn riesz(d: usize, s: f64, delta: f64, epsilon: f64) -> Result<Self> {
        check_ds(d, s)?;
        if !(delta > 0.0 && delta < d as f64 / 2.0) {
            return domain(format!("delta must lie in (0, d/2), got {delta}"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return domain(format!("epsilon must lie in (0,1), got {epsilon}"));
        }
        Ok(Self { d, s, delta, epsilon, flavor: Flavor::Riesz })
    }
}

/// Dense symmetric d×d matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    d: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Builds the matrix from its upper triangle; the lower triangle is
    /// mirrored so symmetry is exact.
    pub fn from_fn(d: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = f(i, j);
                entries[i * d + j] = v;
                entries[j * d + i] = v;
            }
        }
        Self { d, entries }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.d + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// ⟨M v, v⟩.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        let d = self.d;
        let mut acc = 0.0;
        for i in 0..d {
            let mut row = 0.0;
            for j in 0..d {
                row += self.entries[i * d + j] * v[j];
            }
            acc += row * v[i];
        }
        acc
    }

    /// M v.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d = self.d;
        (0..d).map(|i| (0..d).map(|j| self.entries[i * d + j] * v[j]).sum()).collect()
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Unit vector x/|x|; refuses |x| < 1e-300.
pub fn unit(x: &[f64]) -> Result<Vec<f64>> {
    let r = norm(x);
    if !(r >= 1e-300) {
        return domain("direction of the origin is undefined");
    }
    Ok(x.iter().map(|v| v / r).collect())
}

/// |x|^{p-1} x₁, i.e. |x|^p x̂₁.
///
/// `homogeneous_field(1 - δ, x)` is u_δ and `homogeneous_field(s - δ, x)`
/// is the Riesz-model solution.
pub fn homogeneous_field(p: f64, x: &[f64]) -> Result<f64> {
    let r = norm(x);
    if r == 0.0 {
        if p < 1.0 {
            return domain("homogeneous field with p < 1 is singular at the origin");
        }
        return Ok(0.0);
    }
    Ok(r.powf(p - 1.0) * x[0])
}

/// Coefficient field family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffFlavor {
    /// (1-ε) I + ε x̂⊗x̂
    Classical,
    /// (1-(1+2s)ε/2) I + (d+2s)ε/2 x̂⊗x̂
    Fractional,
}

/// Isotropic part `a` and rank-one weight `b` of `A = a I + b x̂⊗x̂`.
pub fn coeff_parts(flavor: CoeffFlavor, p: &FracParams) -> (f64, f64) {
    let (d, s, e) = (p.d as f64, p.s, p.epsilon);
    match flavor {
        CoeffFlavor::Classical => (1.0 - e, e),
        CoeffFlavor::Fractional => (1.0 - 0.5 * (1.0 + 2.0 * s) * e, 0.5 * (d + 2.0 * s) * e),
    }
}

/// The coefficient matrix at x ≠ 0.
pub fn coeff_matrix(flavor: CoeffFlavor, p: &FracParams, x: &[f64]) -> Result<SymMatrix> {
    if x.len() != p.d {
        return domain("point dimension does not match d");
    }
    let xh = unit(x)?;
    let (a, b) = coeff_parts(flavor, p);
    Ok(SymMatrix::from_fn(p.d, |i, j| {
        let id = if i == j { a } else { 0.0 };
        id + b * xh[i] * xh[j]
    }))
}

/// (radial, tangential) eigenvalues: x̂ is the radial eigenvector, its
/// orthogonal complement the tangential eigenspace.
pub fn coeff_eigen(flavor: CoeffFlavor, p: &FracParams, x: &[f64]) -> Result<(f64, f64)> {
    unit(x)?;
    let (a, b) = coeff_parts(flavor, p);
    Ok((a + b, a))
}

/// k_{s,ε}(x,y) = |x-y|^{-d-2s} ⟨(A(x)+A(y))/2 ŵ, ŵ⟩ with w = x - y.
pub fn kernel_eval(p: &FracParams, x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != p.d || y.len() != p.d {
        return domain("point dimension does not match d");
    }
    let w: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let r = norm(&w);
    if !(r > 0.0) {
        return domain("kernel evaluated on the diagonal");
    }
    let xh = unit(x)?;
    let yh = unit(y)?;
    let (a, b) = coeff_parts(CoeffFlavor::Fractional, p);
    let cx: f64 = xh.iter().zip(&w).map(|(u, v)| u * v).sum::<f64>() / r;
    let cy: f64 = yh.iter().zip(&w).map(|(u, v)| u * v).sum::<f64>() / r;
    let form = a + 0.5 * b * (cx * cx + cy * cy);
    Ok(r.powf(-(p.d as f64) - 2.0 * p.s) * form)
}

/// Spectral norm of log A_{s,ε}(x), which does not depend on x.
///
/// log A = ln(λ_t) I + ln(λ_r/λ_t) x̂⊗x̂ with
/// λ_t/λ_r = 1 - (d+2s)ε/(2+(d-1)ε).
pub fn log_coeff_norm(p: &FracParams) -> Result<f64> {
    let (d, s, e) = (p.d as f64, p.s, p.epsilon);
    if !(0.0..=0.5).contains(&e) {
        return domain(format!("log-norm needs epsilon in [0, 1/2], got {e}"));
    }
    let log_t = (-0.5 * (1.0 + 2.0 * s) * e).ln_1p();
    let log_ratio = (-(d + 2.0 * s) * e / (2.0 + (d - 1.0) * e)).ln_1p();
    let log_r = log_t - log_ratio;
    Ok(log_t.abs().max(log_r.abs()))
}
