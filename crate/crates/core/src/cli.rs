//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::error::QError;
use crate::funceq::{solve_gamma_type, solve_reciprocal_type, FESolution};
use crate::qcore::{q_bracket, qpoch_finite, qpoch_inf, Precision, QParam};
use crate::qdigamma::{digamma_q, digamma_q_deriv};
use crate::qgamma::gamma_q;
use crate::qquotients::{g_q_func, log_beta_q, QuotientSpec};
use crate::qstirling::{debye_integral, g_q_decrement, log_gamma_q_asymptotic, m_q_constant, mu_q};
use crate::reflection::{gosper_sin_q, pi_approx, sin_approx, SinVariant};
use crate::verify::{run_suite, Suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] QError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => EXIT_VALIDATION,
            CliError::Numeric(e) => match e {
                QError::TruncationCapExceeded { .. }
                | QError::QuadratureFailure { .. }
                | QError::ThresholdNotFound { .. } => EXIT_NUMERICAL,
                _ => EXIT_VALIDATION,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "qeuler",
    version,
    about = "Numerical q-gamma, q-digamma, q-beta and related functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one function at one point
    Eval(EvalArgs),
    /// Evaluate a function over a grid of x values
    Table(TableArgs),
    /// Run a named invariant suite
    Verify(VerifyArgs),
    /// The Askey approximation of π
    Pi(PiArgs),
    /// q-approximation of sin(πx)
    Sin(SinArgs),
    /// Solve a functional equation from a JSON spec
    Solve(SolveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Func {
    Gamma,
    LogGamma,
    Digamma,
    DigammaDeriv,
    Beta,
    G,
    Bracket,
    Qpoch,
    Mu,
    GDecrement,
    MConst,
    LogGammaAsymptotic,
    Debye,
    GosperSin,
}

impl Func {
    fn name(self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Variant {
    HalfShift,
    PiForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FeKind {
    GammaType,
    ReciprocalType,
}

#[derive(Debug, Clone, Copy, Default, Args)]
struct PointArgs {
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    z: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long = "fn", value_enum)]
    func: Func,
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    #[command(flatten)]
    point: PointArgs,
    /// Relative tolerance for series and products
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long = "fn", value_enum)]
    func: Func,
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    /// start:stop:count
    #[arg(long)]
    grid: String,
    #[command(flatten)]
    point: PointArgs,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    /// Overrides every check's tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
}

#[derive(Debug, Args)]
struct PiArgs {
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    /// Apply the exact correction factor
    #[arg(long)]
    exact: bool,
    /// Fail (exit 2) when |value - π| exceeds this
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
}

#[derive(Debug, Args)]
struct SinArgs {
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    #[arg(long, value_enum, default_value_t = Variant::HalfShift)]
    variant: Variant,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    #[arg(long = "fn", value_enum, default_value_t = FeKind::GammaType)]
    kind: FeKind,
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// start:stop:count points at which the equation residual is checked
    #[arg(long)]
    grid: Option<String>,
    /// Residual tolerance (exit 2 when exceeded)
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Plain)]
    format: Format,
}

/// Formats a number for json/csv: 17 significant digits, `null`/`nan` for non-finite values.
fn fixed(v: f64, format: Format) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if format == Format::Json {
        "null".to_string()
    } else {
        v.to_string()
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

fn parse_q(q: f64) -> CliResult<QParam> {
    Ok(QParam::new(q)?)
}

fn precision(tol: Option<f64>) -> CliResult<Precision> {
    let prec = Precision::default();
    Ok(match tol {
        Some(t) => prec.with_rel_tol(t)?,
        None => prec,
    })
}

pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Usage(format!("--grid expects start:stop:count, got '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                stop
            } else {
                start + (stop - start) * i as f64 / (count - 1) as f64
            }
        })
        .collect())
}

fn need(v: Option<f64>, flag: &str, func: Func) -> CliResult<f64> {
    v.ok_or_else(|| CliError::Usage(format!("--fn {} requires --{flag}", func.name())))
}

/// Returns `(value, relative error estimate)`.
fn evaluate(func: Func, q: &QParam, p: &PointArgs, prec: &Precision) -> CliResult<(f64, f64)> {
    let x = || need(p.x, "x", func);
    let target = prec.rel_tol();
    Ok(match func {
        Func::Gamma => {
            let g = gamma_q(x()?, q, prec)?;
            (g.value, g.achieved_rel_err)
        }
        Func::LogGamma => {
            let g = gamma_q(x()?, q, prec)?;
            (
                g.log_value,
                g.achieved_rel_err / g.log_value.abs().max(f64::MIN_POSITIVE),
            )
        }
        Func::Digamma => {
            let d = digamma_q(x()?, q, prec)?;
            (d.value, d.achieved_rel_err)
        }
        Func::DigammaDeriv => {
            let n =
                p.n.ok_or_else(|| CliError::Usage("--fn digamma-deriv requires --n".into()))?;
            let d = digamma_q_deriv(x()?, n, q, prec)?;
            (d.value, d.achieved_rel_err)
        }
        Func::Beta => {
            let y = need(p.y, "y", func)?;
            let xv = x()?;
            let errs = [xv, y, xv + y]
                .iter()
                .map(|a| gamma_q(*a, q, prec).map(|g| g.achieved_rel_err))
                .sum::<crate::Result<f64>>()?;
            (log_beta_q(xv, y, q, prec)?.exp(), errs)
        }
        Func::G => (g_q_func(x()?, q, prec)?, target),
        Func::Bracket => (q_bracket(x()?, q), f64::EPSILON),
        Func::Qpoch => {
            let a = x()?;
            match p.n {
                Some(n) => (qpoch_finite(a, q, n), f64::EPSILON * n.max(1) as f64),
                None => (qpoch_inf(a, q, prec)?, target),
            }
        }
        Func::Mu => (mu_q(x()?, q, prec)?.mu, target),
        Func::GDecrement => (g_q_decrement(x()?, q, prec)?, target),
        Func::MConst => (m_q_constant(q, prec)?, target),
        Func::LogGammaAsymptotic => (log_gamma_q_asymptotic(x()?, q, prec)?, target),
        Func::Debye => (debye_integral(x()?, prec)?, prec.quad_tol()),
        Func::GosperSin => {
            let z =
                p.z.or(p.x)
                    .ok_or_else(|| CliError::Usage("--fn gosper-sin requires --z".into()))?;
            (gosper_sin_q(z, q, prec)?, target)
        }
    })
}

fn args_json(p: &PointArgs) -> String {
    let mut parts = Vec::new();
    for (k, v) in [("x", p.x), ("y", p.y), ("z", p.z)] {
        if let Some(v) = v {
            parts.push(format!("{}:{}", json_str(k), fixed(v, Format::Json)));
        }
    }
    for (k, v) in [("m", p.m), ("n", p.n)] {
        if let Some(v) = v {
            parts.push(format!("{}:{v}", json_str(k)));
        }
    }
    format!("{{{}}}", parts.join(","))
}

fn cmd_eval(a: &EvalArgs, out: &mut String) -> CliResult<i32> {
    let q = parse_q(a.q)?;
    let prec = precision(a.tol)?;
    let (value, err) = evaluate(a.func, &q, &a.point, &prec)?;
    match a.format {
        Format::Plain => writeln!(out, "{value}").unwrap(),
        Format::Json => writeln!(
            out,
            "{{\"fn\":{},\"q\":{},\"args\":{},\"value\":{},\"rel_err\":{}}}",
            json_str(&a.func.name()),
            fixed(a.q, Format::Json),
            args_json(&a.point),
            fixed(value, Format::Json),
            fixed(err, Format::Json)
        )
        .unwrap(),
        Format::Csv => {
            writeln!(out, "value,rel_err").unwrap();
            writeln!(
                out,
                "{},{}",
                fixed(value, Format::Csv),
                fixed(err, Format::Csv)
            )
            .unwrap();
        }
    }
    Ok(EXIT_OK)
}

fn cmd_table(a: &TableArgs, out: &mut String) -> CliResult<i32> {
    let q = parse_q(a.q)?;
    let prec = precision(a.tol)?;
    let grid = parse_grid(&a.grid)?;
    let mut rows = Vec::with_capacity(grid.len());
    for x in grid {
        let point = PointArgs {
            x: Some(x),
            z: if a.func == Func::GosperSin {
                Some(x)
            } else {
                a.point.z
            },
            ..a.point
        };
        let (v, e) = evaluate(a.func, &q, &point, &prec)?;
        rows.push((x, v, e));
    }
    match a.format {
        Format::Csv => {
            out.push_str("x,value,rel_err\n");
            for (x, v, e) in rows {
                writeln!(
                    out,
                    "{},{},{}",
                    fixed(x, Format::Csv),
                    fixed(v, Format::Csv),
                    fixed(e, Format::Csv)
                )
                .unwrap();
            }
        }
        Format::Json => {
            let body: Vec<String> = rows
                .iter()
                .map(|(x, v, e)| {
                    format!(
                        "{{\"x\":{},\"value\":{},\"rel_err\":{}}}",
                        fixed(*x, Format::Json),
                        fixed(*v, Format::Json),
                        fixed(*e, Format::Json)
                    )
                })
                .collect();
            writeln!(out, "[{}]", body.join(",")).unwrap();
        }
        Format::Plain => {
            for (x, v, e) in rows {
                writeln!(out, "{x} {v} {e:e}").unwrap();
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs, out: &mut String) -> CliResult<i32> {
    let suite: Suite = a.suite.parse().map_err(|_| {
        let names: Vec<&str> = Suite::EACH.iter().map(|s| s.name()).collect();
        CliError::Usage(format!(
            "unknown suite '{}'; expected one of {} or all",
            a.suite,
            names.join(", ")
        ))
    })?;
    let q = a.q.map(parse_q).transpose()?;
    if let Some(t) = a.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::Usage(format!(
                "--tol must be a finite non-negative number, got {t}"
            )));
        }
    }
    let opts = VerifyOptions {
        q,
        tol: a.tol,
        prec: Precision::default(),
    };
    let reports = run_suite(suite, &opts)?;
    let ok = reports.iter().all(|r| r.passed());
    match a.format {
        Format::Json => {
            let mut items = Vec::new();
            for r in &reports {
                for c in &r.checks {
                    items.push(format!(
                        "{{\"suite\":{},\"check\":{},\"passed\":{},\"max_residual\":{},\"tol\":{},\"samples\":{}}}",
                        json_str(r.suite.name()),
                        json_str(c.name),
                        c.passed(),
                        fixed(c.max_residual, Format::Json),
                        fixed(c.tol, Format::Json),
                        c.samples
                    ));
                }
            }
            writeln!(out, "{{\"passed\":{ok},\"checks\":[{}]}}", items.join(",")).unwrap();
        }
        Format::Csv => {
            out.push_str("suite,check,passed,max_residual,tol,samples\n");
            for r in &reports {
                for c in &r.checks {
                    writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        r.suite.name(),
                        c.name,
                        c.passed(),
                        fixed(c.max_residual, Format::Csv),
                        fixed(c.tol, Format::Csv),
                        c.samples
                    )
                    .unwrap();
                }
            }
        }
        Format::Plain => {
            for r in &reports {
                for c in &r.checks {
                    writeln!(
                        out,
                        "{} {}: {} max_residual={:.3e} tol={:.1e} samples={}",
                        if c.passed() { "PASS" } else { "FAIL" },
                        r.suite.name(),
                        c.name,
                        c.max_residual,
                        c.tol,
                        c.samples
                    )
                    .unwrap();
                }
            }
            writeln!(
                out,
                "{}",
                if ok {
                    "all checks passed"
                } else {
                    "verification failed"
                }
            )
            .unwrap();
        }
    }
    Ok(if ok { EXIT_OK } else { EXIT_VERIFICATION })
}

fn scalar_output(out: &mut String, format: Format, fields: &[(&str, f64)], value: f64) {
    match format {
        Format::Plain => writeln!(out, "{value}").unwrap(),
        Format::Json => {
            let body: Vec<String> = fields
                .iter()
                .map(|(k, v)| format!("{}:{}", json_str(k), fixed(*v, Format::Json)))
                .collect();
            writeln!(out, "{{{}}}", body.join(",")).unwrap();
        }
        Format::Csv => {
            let head: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let row: Vec<String> = fields.iter().map(|(_, v)| fixed(*v, Format::Csv)).collect();
            writeln!(out, "{}\n{}", head.join(","), row.join(",")).unwrap();
        }
    }
}

fn cmd_pi(a: &PiArgs, out: &mut String) -> CliResult<i32> {
    let q = parse_q(a.q)?;
    let value = pi_approx(&q, &Precision::default(), a.exact)?;
    let err = (value - std::f64::consts::PI).abs();
    scalar_output(
        out,
        a.format,
        &[("q", a.q), ("value", value), ("abs_err", err)],
        value,
    );
    Ok(match a.tol {
        Some(t) if !(err <= t) => EXIT_VERIFICATION,
        _ => EXIT_OK,
    })
}

fn cmd_sin(a: &SinArgs, out: &mut String) -> CliResult<i32> {
    let q = parse_q(a.q)?;
    let variant = match a.variant {
        Variant::HalfShift => SinVariant::HalfShift,
        Variant::PiForm => SinVariant::PiForm,
    };
    let value = sin_approx(a.x, &q, variant, &Precision::default())?;
    let err = (value - (std::f64::consts::PI * a.x).sin()).abs();
    scalar_output(
        out,
        a.format,
        &[("q", a.q), ("x", a.x), ("value", value), ("abs_err", err)],
        value,
    );
    Ok(EXIT_OK)
}

fn cmd_solve(a: &SolveArgs, out: &mut String) -> CliResult<i32> {
    let text = std::fs::read_to_string(&a.spec).map_err(|source| CliError::Io {
        path: a.spec.clone(),
        source,
    })?;
    let spec = QuotientSpec::from_json(&text)?;
    let q = parse_q(a.q)?;
    let sol: FESolution = match a.kind {
        FeKind::GammaType => solve_gamma_type(&spec, &q)?,
        FeKind::ReciprocalType => solve_reciprocal_type(&spec, &q)?,
    };
    let prec = Precision::default();
    let tol = a.tol.unwrap_or(1e-11);
    let checks = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => parse_grid("0.25:5:20")?,
    };
    let mut max_res = 0.0f64;
    for x in &checks {
        max_res = max_res.max(sol.residual(*x, &prec)?);
    }
    let value = a.x.map(|x| sol.eval(x, &prec)).transpose()?;
    let passed = max_res <= tol;
    match a.format {
        Format::Plain => {
            if let (Some(x), Some(v)) = (a.x, value) {
                writeln!(out, "f({x}) = {v}").unwrap();
            }
            writeln!(
                out,
                "max_residual = {max_res:e} over {} points ({})",
                checks.len(),
                if passed { "pass" } else { "fail" }
            )
            .unwrap();
        }
        Format::Json => {
            let v = match (a.x, value) {
                (Some(x), Some(v)) => format!(
                    ",\"x\":{},\"value\":{}",
                    fixed(x, Format::Json),
                    fixed(v, Format::Json)
                ),
                _ => String::new(),
            };
            writeln!(
                out,
                "{{\"q\":{}{v},\"max_residual\":{},\"tol\":{},\"passed\":{passed}}}",
                fixed(a.q, Format::Json),
                fixed(max_res, Format::Json),
                fixed(tol, Format::Json)
            )
            .unwrap();
        }
        Format::Csv => {
            out.push_str("x,value,rel_err\n");
            for x in &checks {
                writeln!(
                    out,
                    "{},{},{}",
                    fixed(*x, Format::Csv),
                    fixed(sol.eval(*x, &prec)?, Format::Csv),
                    fixed(sol.residual(*x, &prec)?, Format::Csv)
                )
                .unwrap();
            }
        }
    }
    Ok(if passed { EXIT_OK } else { EXIT_VERIFICATION })
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut out = String::new();
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a, &mut out),
        Command::Table(a) => cmd_table(a, &mut out),
        Command::Verify(a) => cmd_verify(a, &mut out),
        Command::Pi(a) => cmd_pi(a, &mut out),
        Command::Sin(a) => cmd_sin(a, &mut out),
        Command::Solve(a) => cmd_solve(a, &mut out),
    };
    match result {
        Ok(code) => {
            let _ = stdout.write_all(out.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
