//! Sweep records and their CSV / JSON serialization.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::closedform::{b_of_delta, operator_value};
use crate::error::{domain, LabError, Result};
use crate::model::FracParams;
use crate::pvquad::{frac_op_num, QuadratureSpec};
use crate::specfun::kappa;

pub const CSV_HEADER: &str =
    "d,s,delta,epsilon,closed_value,quad_value,abs_residual,rel_residual,nodes,seed,wall_ms";

/// One closed-form versus quadrature comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub d: usize,
    pub s: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub closed_value: f64,
    pub quad_value: f64,
    pub abs_residual: f64,
    pub rel_residual: f64,
    pub nodes: u64,
    pub seed: u64,
    pub wall_ms: u64,
}

impl SweepRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        s: f64,
        delta: f64,
        epsilon: f64,
        closed_value: f64,
        quad_value: f64,
        nodes: u64,
        seed: u64,
        wall_ms: u64,
    ) -> Self {
        let abs_residual = (closed_value - quad_value).abs();
        Self {
            d,
            s,
            delta,
            epsilon,
            closed_value,
            quad_value,
            abs_residual,
            rel_residual: abs_residual / closed_value.abs().max(1e-12),
            nodes,
            seed,
            wall_ms,
        }
    }
}

/// How ε is chosen for each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsilonChoice {
    Fixed(f64),
    /// ε = b(δ), where the strong form vanishes.
    Coupled,
}

/// Strong form at e₁: `operator_value` against κ_{d,s} · `frac_op_num`,
/// for every (s, δ) pair in row-major order.
pub fn sweep(
    d: usize,
    s_values: &[f64],
    delta_values: &[f64],
    eps: EpsilonChoice,
    spec: &QuadratureSpec,
    timing: bool,
) -> Result<Vec<SweepRecord>> {
    let mut out = Vec::with_capacity(s_values.len() * delta_values.len());
    let mut x = vec![0.0; d];
    if d > 0 {
        x[0] = 1.0;
    }
    for &s in s_values {
        for &delta in delta_values {
            let start = Instant::now();
            let epsilon = match eps {
                EpsilonChoice::Fixed(e) => e,
                EpsilonChoice::Coupled => b_of_delta(d, s, delta)?,
            };
            let p = FracParams::meyers_free_epsilon(d, s, delta, epsilon)?;
            let closed = operator_value(&p, &x)?;
            let q = frac_op_num(&p, &x, spec)?;
            let quad = kappa(d, s)? * q.value;
            let ms = if timing { start.elapsed().as_millis() as u64 } else { 0 };
            out.push(SweepRecord::new(d, s, delta, epsilon, closed, quad, q.nodes_used, spec.seed, ms));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => domain(format!("unknown format {other:?}")),
        }
    }
}

// 17 significant digits, which round-trips every f64
fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".into()
    } else if x > 0.0 {
        "Infinity".into()
    } else {
        "-Infinity".into()
    }
}

fn fields(r: &SweepRecord) -> [String; 11] {
    [
        r.d.to_string(),
        real(r.s),
        real(r.delta),
        real(r.epsilon),
        real(r.closed_value),
        real(r.quad_value),
        real(r.abs_residual),
        real(r.rel_residual),
        r.nodes.to_string(),
        r.seed.to_string(),
        r.wall_ms.to_string(),
    ]
}

pub fn to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&fields(r).join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(records: &[SweepRecord]) -> String {
    let keys: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut out = String::from("[\n");
    for (i, r) in records.iter().enumerate() {
        let body: Vec<String> = keys.iter().zip(fields(r)).map(|(k, v)| format!("\"{k}\": {v}")).collect();
        out.push_str("  {");
        out.push_str(&body.join(", "));
        out.push('}');
        if i + 1 < records.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

/// Writes the records to `path` through a temporary sibling file, so a
/// failure never leaves a partial file behind.
pub fn emit(records: &[SweepRecord], format: Format, path: &Path) -> Result<()> {
    if records.is_empty() {
        return domain("nothing to write");
    }
    let text = match format {
        Format::Csv => to_csv(records),
        Format::Json => to_json(records),
    };
    let io = |e: std::io::Error| LabError::Io(format!("{}: {e}", path.display()));
    let name =
        path.file_name().ok_or_else(|| LabError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let res = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = res {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepRecord {
        SweepRecord::new(2, 0.5, 0.1, 0.0, 0.1 + 0.2, 0.3, 123, 42, 0)
    }

    #[test]
    fn relative_residual_floor() {
        let r = SweepRecord::new(2, 0.5, 0.1, 0.0, 0.0, 1e-15, 1, 1, 0);
        assert_eq!(r.rel_residual, 1e-15 / 1e-12);
    }

    #[test]
    fn one_record_csv() {
        let text = to_csv(&[sample()]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(text.ends_with('\n'));
        let v: f64 = lines[1].split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(v, 0.1 + 0.2);
    }

    #[test]
    fn json_round_trip() {
        let recs = vec![sample(), SweepRecord::new(3, 0.25, 0.5, 0.4, -1.5e-7, 2.0 / 3.0, 9, 7, 15)];
        let back: Vec<SweepRecord> = serde_json::from_str(&to_json(&recs)).unwrap();
        assert_eq!(back, recs);
    }

    #[test]
    fn empty_is_refused() {
        let dir = std::env::temp_dir().join("nonlocal-report-empty.csv");
        assert!(emit(&[], Format::Csv, &dir).is_err());
        assert!(!dir.exists());
    }
}
