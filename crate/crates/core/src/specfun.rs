//! Real-argument Gamma, log-Gamma, digamma and the fractional Laplacian
//! normalization constant.
//!
//! Gamma uses a Lanczos sum (g = 7, nine coefficients) with reflection
//! below 1/2, so only `exp`, `ln`, `sin` and `powf` from the platform are
//! involved.

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, LabError, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

fn lanczos_sum(z: f64) -> f64 {
    // z is the shifted argument x - 1
    let mut a = LANCZOS[0];
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + k as f64);
    }
    a
}

/// Gamma function.
pub fn gamma(x: f64) -> Result<f64> {
    if is_pole(x) {
        return Err(LabError::Pole(x));
    }
    if x < 0.5 {
        // reflection
        let s = (PI * x).sin();
        return Ok(PI / (s * gamma(1.0 - x)?));
    }
    if x == x.floor() && x <= 21.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    if x > 171.7 {
        return Ok(f64::INFINITY);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

/// `ln |Γ(x)|` together with the sign of `Γ(x)`.
pub fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if is_pole(x) {
        return Err(LabError::Pole(x));
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        let (lg, sg) = ln_gamma_signed(1.0 - x)?;
        return Ok(((PI / s.abs()).ln() - lg, s.signum() * sg));
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln(), 1.0))
}

/// `ln |Γ(x)|`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    ln_gamma_signed(x).map(|(v, _)| v)
}

/// `1/Γ(x)`, which is entire: zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if is_pole(x) {
        return 0.0;
    }
    match ln_gamma_signed(x) {
        Ok((lg, sg)) => sg * (-lg).exp(),
        Err(_) => 0.0,
    }
}

/// Digamma ψ = Γ'/Γ.
pub fn digamma(x: f64) -> Result<f64> {
    if is_pole(x) {
        return Err(LabError::Pole(x));
    }
    if x < 0.5 {
        return Ok(digamma(1.0 - x)? - PI / (PI * x).tan());
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 8.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let r = 1.0 / (y * y);
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    Ok(acc + y.ln() - 0.5 / y - series)
}

/// Product of Gamma ratios `Π Γ(num_i) / Π Γ(den_j)`, accumulated in log
/// space with explicit sign tracking.
pub fn gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    let mut lg = 0.0;
    let mut sign = 1.0;
    for &a in num {
        let (l, s) = ln_gamma_signed(a)?;
        lg += l;
        sign *= s;
    }
    for &b in den {
        if is_pole(b) {
            return Ok(0.0);
        }
        let (l, s) = ln_gamma_signed(b)?;
        lg -= l;
        sign *= s;
    }
    Ok(sign * lg.exp())
}

/// Normalization constant κ_{d,s} = 2^{2s-1} Γ(d/2+s) / (π^{d/2} |Γ(-s)|)
/// of the fractional Laplacian, for `s` in (0,1).
pub fn kappa(d: usize, s: f64) -> Result<f64> {
    if d < 1 {
        return domain("dimension must be positive");
    }
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("kappa needs s in (0,1), got {s}"));
    }
    kappa_ext(d, s)
}

/// The same expression as [`kappa`] for any real `s` where both Gamma
/// factors are finite. With `s = -α/2` it gives the Riesz potential
/// `I_α = 2 κ_{d,-α/2} |x|^{-(d-α)}`.
pub fn kappa_ext(d: usize, s: f64) -> Result<f64> {
    let half_d = d as f64 / 2.0;
    let (lg_num, sg_num) = ln_gamma_signed(half_d + s)?;
    let (lg_den, _) = ln_gamma_signed(-s)?;
    let lv = (2.0 * s - 1.0) * LN_2 + lg_num - half_d * PI.ln() - lg_den;
    Ok(sg_num * lv.exp())
}
