//! Calculus of homogeneous terms c·|x|^p·x₁^m·(log|x|)^l on R^d.
//!
//! Sums of such terms are closed under ∂₁, pointwise products and the
//! Fourier transform F[u](ξ) = ∫ u(x) e^{-2πi x·ξ} dx (in the sense of
//! homogeneous distributions). Convolutions of two homogeneous functions
//! are then evaluated as F∘F[F[g]·F[h]](-x), the reflection identity
//! F∘F u = u(-·).

use std::f64::consts::{LN_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::specfun::{digamma, gamma, rgamma, EULER_GAMMA};

const POLE_TOL: f64 = 1e-9;
const KEY_TOL: f64 = 1e-12;

/// c·|x|^p·x₁^m·(log|x|)^logp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomTerm {
    pub coeff: Complex64,
    pub p: f64,
    pub m: u32,
    pub logp: u8,
}

impl HomTerm {
    pub fn new(coeff: impl Into<Complex64>, p: f64, m: u32, logp: u8) -> Self {
        Self { coeff: coeff.into(), p, m, logp }
    }

    fn same_key(&self, other: &HomTerm) -> bool {
        self.m == other.m && self.logp == other.logp && (self.p - other.p).abs() <= KEY_TOL
    }
}

/// A finite sum of [`HomTerm`]s with distinct (p, m, logp).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TermSum {
    terms: Vec<HomTerm>,
}

impl TermSum {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The constant function 1.
    pub fn one() -> Self {
        Self::from_terms([HomTerm::new(1.0, 0.0, 0, 0)])
    }

    pub fn term(coeff: impl Into<Complex64>, p: f64, m: u32, logp: u8) -> Self {
        Self::from_terms([HomTerm::new(coeff, p, m, logp)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = HomTerm>) -> Self {
        let mut out = Self::zero();
        for t in terms {
            out.push(t);
        }
        out
    }

    pub fn terms(&self) -> &[HomTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn push(&mut self, t: HomTerm) {
        if t.coeff == Complex64::new(0.0, 0.0) {
            return;
        }
        if let Some(i) = self.terms.iter().position(|u| u.same_key(&t)) {
            self.terms[i].coeff += t.coeff;
            if self.terms[i].coeff == Complex64::new(0.0, 0.0) {
                self.terms.remove(i);
            }
        } else {
            self.terms.push(t);
        }
    }

    pub fn add(&self, other: &TermSum) -> TermSum {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(*t);
        }
        out
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> TermSum {
        let c = c.into();
        TermSum::from_terms(self.terms.iter().map(|t| HomTerm { coeff: t.coeff * c, ..*t }))
    }

    /// Terms sorted by (p, m, logp).
    pub fn sorted(&self) -> Vec<HomTerm> {
        let mut v = self.terms.clone();
        v.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.m.cmp(&b.m)).then(a.logp.cmp(&b.logp)));
        v
    }
}

impl fmt::Display for TermSum {
    /// One line per term: `coeff * |x|^p * x1^m * log^l`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.sorted() {
            writeln!(
                f,
                "({:+.12e}{:+.12e}i) * |x|^{} * x1^{} * log^{}",
                t.coeff.re, t.coeff.im, t.p, t.m, t.logp
            )?;
        }
        Ok(())
    }
}

/// ∂/∂x₁ termwise.
pub fn d1(ts: &TermSum) -> TermSum {
    let mut out = TermSum::zero();
    for t in &ts.terms {
        let c = t.coeff;
        out.push(HomTerm::new(c * t.p, t.p - 2.0, t.m + 1, t.logp));
        if t.m > 0 {
            out.push(HomTerm::new(c * t.m as f64, t.p, t.m - 1, t.logp));
        }
        if t.logp > 0 {
            out.push(HomTerm::new(c * t.logp as f64, t.p - 2.0, t.m + 1, t.logp - 1));
        }
    }
    out
}

/// Pointwise product. Products carrying log² are refused.
pub fn mul(a: &TermSum, b: &TermSum) -> Result<TermSum> {
    let mut out = TermSum::zero();
    for x in &a.terms {
        for y in &b.terms {
            let l = x.logp + y.logp;
            if l > 1 {
                return Err(LabError::Unsupported("product would contain log^2".into()));
            }
            out.push(HomTerm::new(x.coeff * y.coeff, x.p + y.p, x.m + y.m, l));
        }
    }
    Ok(out)
}

/// Value at a point x ≠ 0.
pub fn eval(ts: &TermSum, x: &[f64]) -> Result<Complex64> {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(r > 0.0) || x.is_empty() {
        return domain("terms are evaluated away from the origin");
    }
    let lr = r.ln();
    let mut acc = Complex64::new(0.0, 0.0);
    for t in &ts.terms {
        acc += t.coeff * r.powf(t.p) * x[0].powi(t.m as i32) * lr.powi(t.logp as i32);
    }
    Ok(acc)
}

fn near_nonpositive_int(x: f64) -> bool {
    x < POLE_TOL && (x - x.round()).abs() < POLE_TOL
}

// F[|ξ|^t] = C(t) |x|^{-d-t}
fn power_constant(d: usize, t: f64) -> Result<f64> {
    let half_d = d as f64 / 2.0;
    if near_nonpositive_int(-t / 2.0) {
        return Err(LabError::PoleEncountered(format!(
            "|x|^{t} is a polynomial; its transform is supported at the origin"
        )));
    }
    if near_nonpositive_int((d as f64 + t) / 2.0) {
        return Err(LabError::PoleEncountered(format!("|x|^{t} is not locally integrable in dimension {d}")));
    }
    Ok(PI.powf(-t - half_d) * gamma((d as f64 + t) / 2.0)? * rgamma(-t / 2.0))
}

fn d1_pow(ts: TermSum, k: u32) -> TermSum {
    (0..k).fold(ts, |acc, _| d1(&acc))
}

fn is_polynomial_power(t: f64) -> bool {
    near_nonpositive_int(-t / 2.0)
}

// d/dt [C(t)] at t = 2n, where C vanishes
fn power_constant_slope_at_polynomial(d: usize, t: f64) -> Result<f64> {
    let n = (t / 2.0).round();
    let sign = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
    let fact = gamma(n + 1.0)?;
    Ok(PI.powf(-t - d as f64 / 2.0) * gamma((d as f64 + t) / 2.0)? * (-0.5 * sign * fact))
}

fn fourier_term(t: &HomTerm, d: usize, off_origin: bool) -> Result<TermSum> {
    let k = t.m;
    let deriv = Complex64::new(0.0, 1.0 / (2.0 * PI)).powi(k as i32) * t.coeff;
    if d == 2 && (t.p + 2.0).abs() < POLE_TOL {
        if t.logp > 0 {
            return Err(LabError::Unsupported("log|x|/|x|^2 in the plane".into()));
        }
        let base = TermSum::from_terms([
            HomTerm::new(-2.0 * PI, 0.0, 0, 1),
            HomTerm::new(2.0 * PI * (LN_2 - EULER_GAMMA), 0.0, 0, 0),
        ]);
        return Ok(d1_pow(base, k).scale(deriv));
    }
    if (t.p + d as f64).abs() < POLE_TOL && k > 0 && t.logp == 0 {
        // ξ₁^k |ξ|^{-d} is locally integrable; the regularization constant
        // of |ξ|^{-d} is killed by the derivatives
        let area = 2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)?;
        return Ok(d1_pow(TermSum::term(-area, 0.0, 0, 1), k).scale(deriv));
    }
    let q = -(d as f64) - t.p;
    if is_polynomial_power(t.p) && !near_nonpositive_int((d as f64 + t.p) / 2.0) {
        match t.logp {
            // derivatives of the Dirac mass vanish away from the origin
            0 if off_origin => return Ok(TermSum::zero()),
            1 => {
                let slope = power_constant_slope_at_polynomial(d, t.p)?;
                return Ok(d1_pow(TermSum::term(slope, q, 0, 0), k).scale(deriv));
            }
            _ => {}
        }
    }
    let c = power_constant(d, t.p)?;
    match t.logp {
        0 => Ok(d1_pow(TermSum::term(c, q, 0, 0), k).scale(deriv)),
        1 => {
            let dlog = -PI.ln() + 0.5 * (digamma((d as f64 + t.p) / 2.0)? + digamma(-t.p / 2.0)?);
            let base = TermSum::from_terms([HomTerm::new(c * dlog, q, 0, 0), HomTerm::new(-c, q, 0, 1)]);
            Ok(d1_pow(base, k).scale(deriv))
        }
        _ => Err(LabError::Unsupported("log powers above one".into())),
    }
}

/// Fourier transform in R^d, term by term, using
/// F[|ξ|^t ξ₁^k] = C(t) (i/2π)^k ∂₁^k |x|^{-d-t} with
/// C(t) = π^{-t-d/2} Γ((d+t)/2)/Γ(-t/2), its t-derivative for log terms,
/// F[|x|^{-2}] = -2π log|ξ| + 2π(log 2 - γ) in the plane, and
/// F[|ξ|^{-d} ξ₁^k] = -|S^{d-1}| (i/2π)^k ∂₁^k log|x| for k ≥ 1. A pure
/// polynomial term raises [`LabError::PoleEncountered`]; with a log factor
/// it is the t-derivative of C(t)|x|^{-d-t} and stays finite.
pub fn fourier(ts: &TermSum, d: usize) -> Result<TermSum> {
    transform(ts, d, false)
}

/// [`fourier`] modulo distributions supported at the origin: a polynomial
/// term transforms to derivatives of the Dirac mass and is dropped. The
/// result is valid pointwise on R^d \ {0}.
pub fn fourier_off_origin(ts: &TermSum, d: usize) -> Result<TermSum> {
    transform(ts, d, true)
}

fn transform(ts: &TermSum, d: usize, off_origin: bool) -> Result<TermSum> {
    if d < 1 {
        return domain("dimension must be positive");
    }
    let mut out = TermSum::zero();
    for t in &ts.terms {
        out = out.add(&fourier_term(t, d, off_origin)?);
    }
    Ok(out)
}

/// The scalar quantities the calculus reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    F1,
    F2,
    RieszF3,
    RieszF4,
}

impl std::str::FromStr for Pipeline {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(Self::F1),
            "f2" => Ok(Self::F2),
            "riesz_f3" | "f3" => Ok(Self::RieszF3),
            "riesz_f4" | "f4" => Ok(Self::RieszF4),
            other => domain(format!("unknown pipeline {other:?}")),
        }
    }
}

/// The pair (g, h) whose convolution at e₁ is the requested integral.
pub fn pipeline_pair(which: Pipeline, d: usize, s: f64, delta: f64) -> (TermSum, TermSum) {
    let df = d as f64;
    match which {
        Pipeline::F1 => (TermSum::term(1.0, -delta, 1, 0), TermSum::term(1.0, -df - 2.0 * s, 0, 0)),
        Pipeline::F2 => {
            let g3 =
                TermSum::from_terms([HomTerm::new(1.0, -delta - 2.0, 1, 0), HomTerm::new(-1.0, -2.0, 0, 0)]);
            let q = -df - 2.0 * s;
            let g4 = TermSum::from_terms([
                HomTerm::new(-1.0, q - 2.0, 3, 0),
                HomTerm::new(0.5, q, 2, 0),
                HomTerm::new(1.0, q - 2.0, 2, 0),
                HomTerm::new(-1.0, q, 1, 0),
                HomTerm::new(0.5, q + 2.0, 0, 0),
            ]);
            (g3, g4)
        }
        Pipeline::RieszF3 => {
            (TermSum::term(1.0, s - delta - 1.0, 1, 0), TermSum::term(1.0, -df + 1.0 - s, 0, 0))
        }
        Pipeline::RieszF4 => {
            (TermSum::term(1.0, -2.0 - delta, 1, 0), TermSum::term(1.0, -df + 1.0 - s, 0, 0))
        }
    }
}

/// Evaluates (g * h)(e₁) as F[F[g]·F[h]](-e₁) for the pair of `which`:
/// f₁, f₂ (rational-integrand form), or the unnormalized Riesz
/// convolutions f₃, f₄.
pub fn pipeline(which: Pipeline, d: usize, s: f64, delta: f64) -> Result<f64> {
    if d < 2 || !(s > 0.0 && s < 1.0) {
        return domain(format!("need d >= 2 and s in (0,1), got {d}, {s}"));
    }
    let dmax = match which {
        Pipeline::F1 | Pipeline::F2 => 0.5,
        Pipeline::RieszF3 | Pipeline::RieszF4 => d as f64 / 2.0,
    };
    if !(delta >= 0.0 && delta <= dmax) {
        return domain(format!("delta = {delta} outside the admissible range"));
    }
    let (g, h) = pipeline_pair(which, d, s, delta);
    let prod = mul(&fourier(&g, d)?, &fourier(&h, d)?)?;
    let back = fourier_off_origin(&prod, d)?;
    let mut x = vec![0.0; d];
    x[0] = -1.0;
    let v = eval(&back, &x)?;
    if v.im.abs() > 1e-10 * v.re.abs().max(1e-300) {
        return Err(LabError::NotConverged(format!(
            "imaginary part {:.3e} does not cancel against {:.3e}",
            v.im, v.re
        )));
    }
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::{f1_closed, f2_closed};
    use crate::specfun::kappa_ext;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn third_derivative_in_the_plane() {
        let s = 0.3;
        let got = d1_pow(TermSum::term(1.0, -2.0 * s + 2.0, 0, 0), 3);
        let want = TermSum::from_terms([
            HomTerm::new(-8.0 * (s - 1.0) * s * (s + 1.0), -2.0 * s - 4.0, 3, 0),
            HomTerm::new(12.0 * (s - 1.0) * s, -2.0 * s - 2.0, 1, 0),
        ]);
        for x in [[0.3, 0.9], [-1.2, 0.4]] {
            let a = eval(&got, &x).unwrap();
            let b = eval(&want, &x).unwrap();
            assert!((a - b).norm() < 1e-12 * b.norm());
        }
    }

    #[test]
    fn x1_differentiates_to_one() {
        assert_eq!(d1(&TermSum::term(1.0, 0.0, 1, 0)), TermSum::one());
    }

    #[test]
    fn transform_of_kernel() {
        let (d, s) = (3, 0.4);
        let f = fourier(&TermSum::term(1.0, -(d as f64) - 2.0 * s, 0, 0), d).unwrap();
        let c = PI.powf(2.0 * s + 1.5) * gamma(-s).unwrap() / gamma(1.5 + s).unwrap();
        assert_eq!(f.len(), 1);
        let t = f.terms()[0];
        assert!((t.p - 2.0 * s).abs() < 1e-15);
        assert!(close(t.coeff.re, c, 1e-13));
    }

    #[test]
    fn planar_log_branch() {
        let f = fourier(&TermSum::term(1.0, -2.0, 0, 0), 2).unwrap();
        let v = eval(&f, &[0.0, 3.0]).unwrap();
        let want = -2.0 * PI * 3f64.ln() + 2.0 * PI * (LN_2 - EULER_GAMMA);
        assert!((v.re - want).abs() < 1e-13);
    }

    #[test]
    fn transform_of_odd_field() {
        let (d, delta) = (3usize, 0.3);
        let f = fourier(&TermSum::term(1.0, -delta - 2.0, 1, 0), d).unwrap();
        let df = d as f64;
        let c = PI.powf(delta + 1.0 - df / 2.0) * gamma((df - delta) / 2.0).unwrap()
            / gamma((delta + 2.0) / 2.0).unwrap();
        let x = [0.4, -0.2, 0.7];
        let r = (0.16f64 + 0.04 + 0.49).sqrt();
        let want = Complex64::new(0.0, -c) * r.powf(-df + delta) * 0.4;
        let got = eval(&f, &x).unwrap();
        assert!((got - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn polynomial_transform_is_a_pole() {
        let e = fourier(&TermSum::term(1.0, 2.0, 0, 0), 3).unwrap_err();
        assert!(matches!(e, LabError::PoleEncountered(_)));
        let e = fourier(&TermSum::term(1.0, -3.0, 0, 0), 3).unwrap_err();
        assert!(matches!(e, LabError::PoleEncountered(_)));
    }

    #[test]
    fn critical_power_with_axis_factor() {
        // s + δ = 1 makes the product land on |ξ|^{-d} ξ₁; compare with the
        // Gamma-function value of the convolution
        let (d, s, delta) = (3usize, 0.9, 0.1);
        let v = pipeline(Pipeline::RieszF4, d, s, delta).unwrap();
        assert!(close(v, 40.0 * PI, 1e-12), "{v}");
    }

    #[test]
    fn f1_pipeline_at_delta_zero_is_refused() {
        assert!(pipeline(Pipeline::F1, 3, 0.4, 0.0).is_err());
    }

    #[test]
    fn log_squared_is_unsupported() {
        let a = TermSum::term(1.0, 1.0, 0, 1);
        assert!(matches!(mul(&a, &a), Err(LabError::Unsupported(_))));
    }

    #[test]
    fn unit_is_neutral() {
        let a = TermSum::from_terms([HomTerm::new(2.0, -1.5, 2, 0), HomTerm::new(-1.0, 0.5, 1, 1)]);
        assert_eq!(mul(&a, &TermSum::one()).unwrap(), a);
    }

    #[test]
    fn simple_evaluations() {
        let t = TermSum::term(1.0, -2.0, 1, 0);
        assert_eq!(eval(&t, &[1.0, 0.0]).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(eval(&t, &[-1.0, 0.0]).unwrap(), Complex64::new(-1.0, 0.0));
        assert!(eval(&t, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn pipelines_match_closed_forms() {
        let v = pipeline(Pipeline::F1, 3, 0.4, 0.2).unwrap();
        assert!(close(v, f1_closed(3, 0.4, 0.2).unwrap(), 1e-10), "{v}");
        let v = pipeline(Pipeline::F2, 2, 0.6, 0.3).unwrap();
        assert!(close(v, f2_closed(2, 0.6, 0.3).unwrap(), 1e-10), "{v}");
        let (d, s, delta) = (2, 0.5, 0.3);
        let v = pipeline(Pipeline::RieszF3, d, s, delta).unwrap();
        let cs = 2f64.powf(-1.0 + s)
            * gamma((d as f64 + s - delta + 1.0) / 2.0).unwrap()
            * gamma(delta / 2.0).unwrap()
            / (gamma((d as f64 - delta + 2.0) / 2.0).unwrap() * gamma((-s + delta + 1.0) / 2.0).unwrap());
        let k = kappa_ext(d, (s - 1.0) / 2.0).unwrap();
        assert!(close(2.0 * k * v, cs, 1e-10), "{} vs {cs}", 2.0 * k * v);
    }

    #[test]
    fn planar_digamma_identity() {
        for s in [0.2, 0.45, 0.8] {
            let l = digamma(s - 1.0).unwrap() + digamma(2.0 - s).unwrap();
            let r = digamma(s).unwrap() + digamma(1.0 - s).unwrap() + 2.0 / (1.0 - s);
            assert!((l - r).abs() < 1e-10);
        }
    }

    #[test]
    fn debug_dump_is_sorted() {
        let a = TermSum::from_terms([HomTerm::new(1.0, 0.5, 0, 0), HomTerm::new(2.0, -1.0, 3, 1)]);
        let text = a.to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].ends_with("* |x|^-1 * x1^3 * log^1"));
        assert!(lines[1].ends_with("* |x|^0.5 * x1^0 * log^0"));
    }

    fn random_sum() -> impl Strategy<Value = TermSum> {
        prop::collection::vec((-2.0f64..2.0, -3.7f64..-0.3, 0u32..3), 1..4).prop_map(|v| {
            TermSum::from_terms(v.into_iter().map(|(c, p, m)| HomTerm::new(c, p + 0.0123, m, 0)))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn double_transform_reflects(ts in random_sum(), x1 in 0.2f64..2.0, x2 in -1.0f64..1.0) {
            let d = 3;
            let ff = fourier(&fourier(&ts, d).unwrap(), d).unwrap();
            let x = [x1, x2, 0.3];
            let mx = [-x1, -x2, -0.3];
            let a = eval(&ff, &x).unwrap();
            let b = eval(&ts, &mx).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0));
        }

        #[test]
        fn derivative_becomes_multiplication(ts in random_sum(), x1 in 0.2f64..2.0) {
            let d = 3;
            let lhs = fourier(&d1(&ts), d).unwrap();
            let xi1 = TermSum::term(Complex64::new(0.0, 2.0 * PI), 0.0, 1, 0);
            let rhs = mul(&xi1, &fourier(&ts, d).unwrap()).unwrap();
            let x = [x1, 0.5, -0.7];
            let a = eval(&lhs, &x).unwrap();
            let b = eval(&rhs, &x).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * b.norm().max(1.0));
        }

        #[test]
        fn transform_is_linear(a in random_sum(), b in random_sum()) {
            let d = 3;
            let lhs = fourier(&a.add(&b), d).unwrap();
            let rhs = fourier(&a, d).unwrap().add(&fourier(&b, d).unwrap());
            let x = [0.7, 0.1, 0.2];
            let u = eval(&lhs, &x).unwrap();
            let v = eval(&rhs, &x).unwrap();
            prop_assert!((u - v).norm() <= 1e-12 * v.norm().max(1.0));
        }
    }
}
