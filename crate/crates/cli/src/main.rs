#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use nonlocal_core::closedform::{
    b_of_delta, classical_epsilon, d2_epsilon_and_bounds, delta0, delta_of_epsilon, f1_closed, f2_closed,
    operator_value,
};
use nonlocal_core::energy::{convexity_identity_check, energy_eval, gamma_limit_probe, TestFunction};
use nonlocal_core::pvquad::{f_integral_num, frac_op_num, FIntegral};
use nonlocal_core::regularity::{dyadic_seminorm, membership, Verdict};
use nonlocal_core::report::{emit, sweep, EpsilonChoice, Format};
use nonlocal_core::riesz::{
    flux_divergence, riesz_bracket, riesz_constants, riesz_coupling, riesz_div_num, riesz_potential_constant,
};
use nonlocal_core::specfun::kappa;
use nonlocal_core::symcalc::{fourier, fourier_off_origin, mul, pipeline, pipeline_pair, Pipeline};
use nonlocal_core::{FracParams, LabError, QuadratureSpec};

use output::Report;

#[derive(Parser)]
#[command(
    name = "nonlocal-lab",
    version,
    about = "Closed forms and quadrature for the nonlocal Meyers example"
)]
struct Cli {
    /// key = value manifest; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Print one JSON object instead of key=value lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Coupling b(δ), or its inverse, with the classical value and planar bounds.
    Couple(CoupleArgs),
    /// Strong form at ε = b(δ): closed form against quadrature.
    Verify(VerifyArgs),
    /// Sweep (s, δ) and write one record per point.
    Sweep(SweepArgs),
    /// Symbol-calculus pipeline against the closed form.
    Fourier(FourierArgs),
    /// Sobolev membership predicate and dyadic witness.
    Regularity(RegularityArgs),
    /// Local-limit table and convexity identity of the energy.
    Energy(EnergyArgs),
    /// Riesz-gradient constants, coupling and residual chain.
    Riesz(RieszArgs),
    /// Raw principal-value integral.
    Quadrature(QuadratureArgs),
}

#[derive(Args)]
struct QuadOpts {
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    bands_per_decade: Option<usize>,
    #[arg(long)]
    radial_nodes: Option<usize>,
    #[arg(long)]
    angular_nodes: Option<usize>,
    #[arg(long)]
    angular_panels: Option<usize>,
    #[arg(long)]
    mc_samples: Option<usize>,
    #[arg(long)]
    target_rel_err: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    level_factor: Option<f64>,
    #[arg(long)]
    patch_radius: Option<f64>,
}

impl QuadOpts {
    fn spec(&self, seed: u64) -> QuadratureSpec {
        let mut q = QuadratureSpec { seed, ..QuadratureSpec::default() };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { q.$f = v; })* };
        }
        set!(
            r_min,
            r_max,
            bands_per_decade,
            radial_nodes,
            angular_nodes,
            angular_panels,
            mc_samples,
            target_rel_err,
            levels,
            level_factor,
            patch_radius
        );
        q
    }
}

#[derive(Args)]
struct CoupleArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    s: f64,
    #[arg(long, required_unless_present = "inverse")]
    delta: Option<f64>,
    /// Solve b(δ) = ε for δ instead.
    #[arg(long, requires = "epsilon")]
    inverse: bool,
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    delta: f64,
    /// Evaluation point "x1,...,xd"; defaults to e₁.
    #[arg(long, value_parser = parse_list)]
    x: Option<Reals>,
    /// Allowed residual, relative to the operator's size over ε ∈ [0, 1/2].
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[command(flatten)]
    quad: QuadOpts,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    d: usize,
    /// "a:b:n" (n evenly spaced values) or "v1,v2,...".
    #[arg(long, value_parser = parse_range)]
    s_range: Reals,
    #[arg(long, value_parser = parse_range)]
    delta_range: Reals,
    /// Output file; records go to standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Fixed ε for every point.
    #[arg(long, default_value_t = 0.0, conflicts_with = "coupled")]
    epsilon: f64,
    /// Use ε = b(δ) at every point.
    #[arg(long)]
    coupled: bool,
    /// Record wall-clock time per point (breaks byte-identical output).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    quad: QuadOpts,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    F1,
    F2,
    F3,
    F4,
}

#[derive(Args)]
struct FourierArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    delta: f64,
    /// Also print the intermediate term sums.
    #[arg(long)]
    terms: bool,
}

#[derive(Args)]
struct RegularityArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    q: f64,
    #[arg(long, default_value_t = 12)]
    bands: usize,
    #[command(flatten)]
    quad: QuadOpts,
}

#[derive(Args)]
struct EnergyArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_parser = parse_list, default_value = "0.9,0.95,0.99")]
    probe_s: Reals,
    #[command(flatten)]
    quad: QuadOpts,
}

#[derive(Args)]
struct RieszArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    #[arg(long)]
    delta: f64,
    /// Defaults to the coupling.
    #[arg(long)]
    epsilon: Option<f64>,
    #[command(flatten)]
    quad: QuadOpts,
}

#[derive(Args)]
struct QuadratureArgs {
    #[arg(long, value_enum)]
    which: Which,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    delta: f64,
    #[command(flatten)]
    quad: QuadOpts,
}

/// A comma list or range given as a single argument.
#[derive(Clone, Debug)]
struct Reals(Vec<f64>);

fn parse_list(s: &str) -> Result<Reals, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(Reals)
}

fn parse_range(s: &str) -> Result<Reals, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [_] => parse_list(s),
        [a, b, n] => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
            let n: usize = n.trim().parse().map_err(|e| format!("{n:?}: {e}"))?;
            match n {
                0 => Err("a range needs at least one point".into()),
                1 => Ok(Reals(vec![a])),
                _ => Ok(Reals((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())),
            }
        }
        _ => Err(format!("expected a:b:n or a comma list, got {s:?}")),
    }
}

/// Tolerance or convergence failure detected by the front end itself.
struct Failed(String);

enum Fail {
    Lab(LabError),
    Check(Failed),
}

impl From<LabError> for Fail {
    fn from(e: LabError) -> Self {
        Fail::Lab(e)
    }
}

type Out = Result<Report, Fail>;

fn e1(d: usize) -> Vec<f64> {
    let mut x = vec![0.0; d];
    if d > 0 {
        x[0] = 1.0;
    }
    x
}

fn couple(a: &CoupleArgs) -> Out {
    let mut r = Report::default();
    let d0 = delta0(a.d, a.s)?;
    if a.inverse {
        let eps = a.epsilon.expect("clap enforces --epsilon");
        r.real("epsilon", eps).real("delta", delta_of_epsilon(a.d, a.s, eps)?);
    } else {
        let delta = a.delta.expect("clap enforces --delta");
        r.real("delta", delta).real("epsilon", b_of_delta(a.d, a.s, delta)?);
        r.real("classical_epsilon", classical_epsilon(a.d, delta));
        if a.d == 2 {
            let c = d2_epsilon_and_bounds(a.s, delta)?;
            r.real("lower_bound", c.lower);
            match c.upper {
                Some(u) => r.real("upper_bound", u),
                None => r.text("upper_bound", "none"),
            };
        }
    }
    r.real("delta0", d0);
    Ok(r)
}

fn verify(a: &VerifyArgs, seed: u64) -> Out {
    let spec = a.quad.spec(seed);
    let x = a.x.clone().map_or_else(|| e1(a.d), |r| r.0);
    let eps = b_of_delta(a.d, a.s, a.delta)?;
    let p = FracParams::meyers_free_epsilon(a.d, a.s, a.delta, eps)?;
    let closed = operator_value(&p, &x)?;
    let q = frac_op_num(&p, &x, &spec)?;
    let k = kappa(a.d, a.s)?;
    let quad = k * q.value;
    let mut scale: f64 = 0.0;
    for e in [0.0, 0.5] {
        scale = scale.max(operator_value(&FracParams::meyers(a.d, a.s, a.delta, e)?, &x)?.abs());
    }
    let residual = (quad - closed).abs() / scale.max(1e-300);
    let mut r = Report::default();
    r.real("epsilon", eps)
        .real("closed_value", closed)
        .real("quad_value", quad)
        .real("err_estimate", k * q.err_estimate)
        .int("nodes", q.nodes_used)
        .flag("converged", q.converged)
        .real("residual", residual)
        .real("tolerance", a.tol);
    if !q.converged {
        return Err(Fail::Check(Failed(format!("quadrature did not converge\n{}", r.render(false)))));
    }
    if !(residual <= a.tol) {
        return Err(Fail::Check(Failed(format!("residual above tolerance\n{}", r.render(false)))));
    }
    Ok(r)
}

fn run_sweep(a: &SweepArgs, seed: u64) -> Out {
    let spec = a.quad.spec(seed);
    let eps = if a.coupled { EpsilonChoice::Coupled } else { EpsilonChoice::Fixed(a.epsilon) };
    let recs = sweep(a.d, &a.s_range.0, &a.delta_range.0, eps, &spec, a.timing)?;
    let format = match a.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    let mut r = Report::default();
    match &a.out {
        Some(path) => {
            emit(&recs, format, path)?;
            r.int("records", recs.len() as u64).text("out", path.display().to_string());
        }
        None => {
            let text = match format {
                Format::Csv => nonlocal_core::report::to_csv(&recs),
                Format::Json => nonlocal_core::report::to_json(&recs),
            };
            print!("{text}");
        }
    }
    Ok(r)
}

fn pipeline_of(w: Which) -> Pipeline {
    match w {
        Which::F1 => Pipeline::F1,
        Which::F2 => Pipeline::F2,
        Which::F3 => Pipeline::RieszF3,
        Which::F4 => Pipeline::RieszF4,
    }
}

fn closed_of(w: Which, d: usize, s: f64, delta: f64) -> Result<f64, LabError> {
    match w {
        Which::F1 => f1_closed(d, s, delta),
        Which::F2 => f2_closed(d, s, delta),
        Which::F3 => Ok(riesz_constants(d, s, delta)?.0 / riesz_potential_constant(d, s)?),
        Which::F4 => {
            let (c1, c2) = riesz_constants(d, s, delta)?;
            Ok(c2 / c1 / riesz_potential_constant(d, s)?)
        }
    }
}

fn one_line(t: &nonlocal_core::symcalc::TermSum) -> String {
    t.to_string().trim_end().replace('\n', "; ")
}

fn run_fourier(a: &FourierArgs) -> Out {
    let which = pipeline_of(a.which);
    let v = pipeline(which, a.d, a.s, a.delta)?;
    let closed = closed_of(a.which, a.d, a.s, a.delta)?;
    let mut r = Report::default();
    r.real("pipeline", v)
        .real("closed", closed)
        .real("rel_err", (v - closed).abs() / closed.abs().max(1e-300));
    if a.terms {
        let (g, h) = pipeline_pair(which, a.d, a.s, a.delta);
        let (fg, fh) = (fourier(&g, a.d)?, fourier(&h, a.d)?);
        let back = fourier_off_origin(&mul(&fg, &fh)?, a.d)?;
        r.text("g", one_line(&g))
            .text("h", one_line(&h))
            .text("fourier_g", one_line(&fg))
            .text("fourier_h", one_line(&fh))
            .text("back", one_line(&back));
    }
    Ok(r)
}

fn regularity(a: &RegularityArgs, seed: u64) -> Out {
    let mut r = Report::default();
    r.flag("member", membership(a.d, a.delta, a.t, a.q)?);
    if a.d != 2 {
        r.text("witness", "unavailable outside the plane");
        return Ok(r);
    }
    let w = dyadic_seminorm(a.d, a.delta, a.t, a.q, a.bands, &a.quad.spec(seed))?;
    let (m, c) = (w.reference, w.reference_check);
    let gap = (m.mean - c.mean).abs() / (m.stderr.powi(2) + c.stderr.powi(2)).sqrt();
    r.text("verdict", if w.verdict == Verdict::Converging { "converging" } else { "diverging" })
        .real("band_ratio", w.band_ratio)
        .reals("partial_sums", w.partial_sums)
        .real("reference_mean", m.mean)
        .real("reference_stderr", m.stderr)
        .int("reference_seed", m.seed)
        .real("check_mean", c.mean)
        .real("check_stderr", c.stderr)
        .int("check_seed", c.seed)
        .real("seed_gap_stderr", gap);
    Ok(r)
}

fn energy(a: &EnergyArgs, seed: u64) -> Out {
    let spec = a.quad.spec(seed);
    let v = TestFunction::bump_x1(a.d);
    let p = FracParams::meyers(a.d, a.s, 0.0, a.eps)?;
    let mut r = Report::default();
    r.real("energy", energy_eval(&p, &v, &spec)?);
    let rows = gamma_limit_probe(a.eps, &v, &a.probe_s.0, &spec)?;
    if let Some(first) = rows.first() {
        r.real("local_energy", first.local_energy);
    }
    r.reals("probe_s", rows.iter().map(|x| x.s).collect())
        .reals("probe_energy", rows.iter().map(|x| x.energy).collect())
        .reals("probe_rel_err", rows.iter().map(|x| x.rel_err).collect());
    let mut c = vec![0.0; a.d];
    c[0] = 0.2;
    c[1] = -0.1;
    let other = TestFunction::bump(c, 0.5, 0.7)?;
    let (lhs, rhs) = convexity_identity_check(&p, &v, &other, &spec)?;
    r.real("convexity_lhs", lhs)
        .real("convexity_rhs", rhs)
        .real("convexity_rel_gap", (lhs - rhs).abs() / rhs.abs().max(1e-300));
    Ok(r)
}

fn riesz(a: &RieszArgs, seed: u64) -> Out {
    let spec = a.quad.spec(seed);
    let (c1, c2) = riesz_constants(a.d, a.s, a.delta)?;
    let coupling = riesz_coupling(a.d, a.delta)?;
    let eps = a.epsilon.unwrap_or(coupling);
    let x = e1(a.d);
    let fd = flux_divergence(a.d, a.s, a.delta, eps, &x)?;
    let pot = riesz_potential_constant(a.d, a.s)?;
    let f3 = f_integral_num(FIntegral::F3, a.d, a.s, a.delta, &spec)?;
    let f3_rel = (pot * f3.value - c1).abs() / c1.abs();
    let div_num = riesz_div_num(a.d, a.s, a.delta, eps, &spec)?;
    let mut r = Report::default();
    r.real("c_star", c1)
        .real("c_star_star", c2)
        .real("potential_constant", pot)
        .real("coupling", coupling)
        .real("epsilon", eps)
        .real("bracket", riesz_bracket(a.d, a.delta, eps))
        .real("div_at_e1", fd.div)
        .real("riesz_div_at_e1", fd.riesz_div)
        .real("riesz_div_quad", div_num.value)
        .real("riesz_div_abs_residual", (div_num.value - fd.riesz_div).abs())
        .real("f3_rel_residual", f3_rel);
    if !(f3_rel <= 1e-3) {
        return Err(Fail::Check(Failed(format!("Riesz potential residual above 1e-3\n{}", r.render(false)))));
    }
    Ok(r)
}

fn quadrature(a: &QuadratureArgs, seed: u64) -> Out {
    let which = match a.which {
        Which::F1 => FIntegral::F1,
        Which::F2 => FIntegral::F2,
        Which::F3 => FIntegral::F3,
        Which::F4 => FIntegral::F4,
    };
    let q = f_integral_num(which, a.d, a.s, a.delta, &a.quad.spec(seed))?;
    let mut r = Report::default();
    r.real("value", q.value)
        .real("err_estimate", q.err_estimate)
        .int("nodes_used", q.nodes_used)
        .flag("converged", q.converged)
        .int("seed", q.seed);
    if let Ok(c) = closed_of(a.which, a.d, a.s, a.delta) {
        r.real("closed", c);
    }
    if !q.converged {
        return Err(Fail::Check(Failed(format!("quadrature did not converge\n{}", r.render(false)))));
    }
    Ok(r)
}

fn exit_code(e: &LabError) -> u8 {
    match e {
        LabError::NotConverged(_) | LabError::Io(_) => 1,
        LabError::Pole(_) | LabError::Domain(_) | LabError::PoleEncountered(_) | LabError::Unsupported(_) => {
            2
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<_> = std::env::args_os().collect();
    let args = match config::merge(&Cli::command(), args) {
        Ok(a) => a,
        Err(config::ConfigError::Io(m)) => {
            eprintln!("error: cannot read config {m}");
            return ExitCode::from(1);
        }
        Err(config::ConfigError::Syntax(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let seed = cli.seed;
    let res = match &cli.cmd {
        Cmd::Couple(a) => couple(a),
        Cmd::Verify(a) => verify(a, seed),
        Cmd::Sweep(a) => run_sweep(a, seed),
        Cmd::Fourier(a) => run_fourier(a),
        Cmd::Regularity(a) => regularity(a, seed),
        Cmd::Energy(a) => energy(a, seed),
        Cmd::Riesz(a) => riesz(a, seed),
        Cmd::Quadrature(a) => quadrature(a, seed),
    };
    match res {
        Ok(r) => {
            print!("{}", r.render(cli.json));
            ExitCode::SUCCESS
        }
        Err(Fail::Lab(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Fail::Check(Failed(m))) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
