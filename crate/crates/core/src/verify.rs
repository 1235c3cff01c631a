//! Named invariant suites, shared by the CLI and the acceptance tests.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QError, Result};
use crate::qcore::{ln_q_bracket, Precision, QParam, Regime};
use crate::qgamma::log_gamma_q;
use crate::qgamma::{
    gamma_q_reciprocal_identity_residual, multiplication_residual, recurrence_residual,
};
use crate::qquotients::{
    g_q_func, g_q_func_gamma_path, log_beta_q, log_deriv_sign, log_g_q_func, QuotientSpec, Sign,
};
use crate::qstirling::{debye_integral, debye_series, g_q_decrement, log_gamma_q_asymptotic, mu_q};
use crate::reflection::{
    askey_reflection_residual, gosper_sin_q, gosper_sin_q_product, pi_approx, pi_leading_error,
    reflection_sine_residual, sin_approx, tight_ratio_defect, ReflectionContext, SinVariant,
};

pub const SIGN_SPEC_SEED: u64 = 0x5151_2024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    GammaRecurrence,
    Reciprocal,
    Multiplication,
    QuotientSigns,
    Beta,
    GFunc,
    Reflection,
    Pi,
    Stirling,
    All,
}

impl Suite {
    pub const EACH: [Suite; 9] = [
        Suite::GammaRecurrence,
        Suite::Reciprocal,
        Suite::Multiplication,
        Suite::QuotientSigns,
        Suite::Beta,
        Suite::GFunc,
        Suite::Reflection,
        Suite::Pi,
        Suite::Stirling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::GammaRecurrence => "gamma-recurrence",
            Suite::Reciprocal => "reciprocal",
            Suite::Multiplication => "multiplication",
            Suite::QuotientSigns => "quotient-signs",
            Suite::Beta => "beta",
            Suite::GFunc => "g-func",
            Suite::Reflection => "reflection",
            Suite::Pi => "pi",
            Suite::Stirling => "stirling",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = QError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|v| v.name() == s)
            .copied()
            .ok_or_else(|| QError::Domain(format!("unknown suite '{s}'")))
    }
}

/// One invariant: the largest residual over its samples against a tolerance.
/// Counting checks use the number of violations as the residual and tolerance 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_residual: f64,
    pub tol: f64,
    pub samples: usize,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_residual <= self.tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct VerifyOptions {
    /// Replaces the suite's default q values.
    pub q: Option<QParam>,
    /// Replaces every check's default tolerance.
    pub tol: Option<f64>,
    pub prec: Precision,
}

struct Builder<'a> {
    opts: &'a VerifyOptions,
    checks: Vec<Check>,
}

impl<'a> Builder<'a> {
    fn qs(&self, defaults: &[f64], keep: impl Fn(&QParam) -> bool) -> Result<Vec<QParam>> {
        let all = match self.opts.q {
            Some(q) => vec![q],
            None => defaults
                .iter()
                .map(|&q| QParam::new(q))
                .collect::<Result<_>>()?,
        };
        Ok(all.into_iter().filter(|q| keep(q)).collect())
    }

    fn residual(&mut self, name: &'static str, tol: f64, values: Vec<f64>) {
        if values.is_empty() {
            return;
        }
        let max = values.iter().fold(0.0f64, |m, v| {
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(*v)
            }
        });
        self.checks.push(Check {
            name,
            max_residual: max,
            tol: self.opts.tol.unwrap_or(tol),
            samples: values.len(),
        });
    }

    fn count(&mut self, name: &'static str, outcomes: Vec<bool>) {
        if outcomes.is_empty() {
            return;
        }
        self.checks.push(Check {
            name,
            max_residual: outcomes.iter().filter(|ok| !**ok).count() as f64,
            tol: 0.0,
            samples: outcomes.len(),
        });
    }
}

fn sub_unit(q: &QParam) -> bool {
    matches!(q.regime(), Regime::SubUnit)
}

fn not_boundary(q: &QParam) -> bool {
    !q.is_boundary()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn lin_grid(lo: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// `n` points log-spaced over `[0.01, 50]`.
pub fn gamma_grid(n: usize) -> Vec<f64> {
    log_grid(0.01, 50.0, n)
}

/// Random specs with `r = s <= 4`, `k = w = 1` and offsets in `[0, 3]`.
pub fn random_balanced_specs(count: usize, seed: u64) -> Vec<QuotientSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = rng.gen_range(1..=4usize);
            let a = (0..r)
                .map(|_| rng.gen_range(0.0..=3.0))
                .collect::<Vec<f64>>();
            let b = (0..r)
                .map(|_| rng.gen_range(0.0..=3.0))
                .collect::<Vec<f64>>();
            QuotientSpec::simple(&a, &b).expect("balanced spec is valid")
        })
        .collect()
}

fn collect<T>(items: impl IntoIterator<Item = Result<T>>) -> Result<Vec<T>> {
    items.into_iter().collect()
}

fn gamma_recurrence(b: &mut Builder) -> Result<()> {
    let prec = b.opts.prec;
    let qs = b.qs(&[0.1, 0.5, 0.9, 0.99, 2.0, 10.0], |_| true)?;
    let mut v = Vec::new();
    for q in &qs {
        for x in gamma_grid(40) {
            v.push(recurrence_residual(x, q, &prec)?);
        }
    }
    b.residual("recurrence", 1e-12, v);
    Ok(())
}

fn reciprocal(b: &mut Builder) -> Result<()> {
    let prec = b.opts.prec;
    let qs = b.qs(&[0.1, 0.5, 0.9, 0.99, 2.0, 10.0], not_boundary)?;
    let mut v = Vec::new();
    for q in &qs {
        for x in gamma_grid(40) {
            v.push(gamma_q_reciprocal_identity_residual(x, q, &prec)?);
        }
    }
    b.residual("inversion identity", 1e-12, v);
    Ok(())
}

fn multiplication(b: &mut Builder) -> Result<()> {
    let prec = b.opts.prec;
    let qs = b.qs(&[0.3, 0.8, 1.5], |_| true)?;
    let mut v = Vec::new();
    for q in &qs {
        for m in [2, 3, 5] {
            for x in lin_grid(0.15, 0.55, 10) {
                v.push(multiplication_residual(x, m, q, &prec)?);
            }
        }
    }
    b.residual("multiplication formula", 1e-11, v);
    Ok(())
}

fn quotient_signs(b: &mut Builder) -> Result<()> {
    let prec = b.opts.prec;
    let qs = b.qs(&[0.3, 0.7], sub_unit)?;
    let mut outcomes = Vec::new();
    for spec in random_balanced_specs(50, SIGN_SPEC_SEED) {
        for q in &qs {
            for n in [2, 3, 4] {
                outcomes.push(match log_deriv_sign(&spec, n, q, &prec) {
                    Ok(rep) => rep.predicted_sign == Sign::Zero || rep.threshold_m < 1e4,
                    Err(QError::ThresholdNotFound { .. }) => false,
                    Err(e) => return Err(e),
                });
            }
        }
    }
    b.count("sign law mismatches", outcomes);
    Ok(())
}

fn second_differences(v: &[f64]) -> impl Iterator<Item = f64> + '_ {
    v.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2])
}

fn beta(b: &mut Builder) -> Result<()> {
    let prec = b.opts.prec;
    let qs = b.qs(&[0.3, 0.5, 0.8, 2.0], not_boundary)?;
    let pairs: Vec<(f64, f64)> = [0.3, 1.2, 2.5, 4.1]
        .iter()
        .flat_map(|&x| [0.4, 1.7, 3.3].map(|y| (x, y)))
        .collect();
    let (mut sym, mut inv, mut rec, mut two) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let (mut dec, mut convex) = (Vec::new(), Vec::new());
    for q in &qs {
        let p = q.reciprocal()?;
        let lb = |x: f64, y: f64, q: &QParam| log_beta_q(x, y, q, &prec);
        for &(x, y) in &pairs {
            sym.push((lb(x, y, q)? - lb(y, x, q)?).exp_m1().abs());
            inv.push(
                (lb(x, y, q)? - (1.0 - x * y) * q.log_q() - lb(x, y, &p)?)
                    .exp_m1()
                    .abs(),
            );
            let r = ln_q_bracket(x, q) - ln_q_bracket(x + y, q);
            rec.push((lb(x + 1.0, y, q)? - r - lb(x, y, q)?).exp_m1().abs());
            let r2 = ln_q_bracket(x, q) + ln_q_bracket(y, q)
                - ln_q_bracket(x + y, q)
                - ln_q_bracket(x + y + 1.0, q);
            two.push(
                (lb(x + 1.0, y + 1.0, q)? - r2 - lb(x, y, q)?)
                    .exp_m1()
                    .abs(),
            );
        }
        for y in [0.5, 2.5] {
            let logs = collect(lin_grid(0.2, 0.2, 30).into_iter().map(|x| lb(x, y, q)))?;
            dec.extend(logs.windows(2).map(|w| w[1] < w[0]));
            convex.extend(second_differences(&logs).map(|d| d > 0.0));
        }
    }
    b.residual("symmetry", 1e-12, sym);
    b.residual("inversion", 1e-12, inv);
    b.residual("recurrence in x", 1e-12, rec);
    b.residual("two-variable recurrence", 1e-12, two);
    b.count("decreasing violations", dec);
    b.count("log-convexity violations", convex);
    Ok(())
}

fn g_func(b: &mut Builder) -> Result<()> {
    let prec = b.opts.prec;
    let qs = b.qs(&[0.3, 0.6, 0.9], not_boundary)?;
    let (mut eqn, mut paths, mut bracket, mut dec, mut convex) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for q in &qs {
        for x in lin_grid(0.25, 0.5, 20) {
            let lg = log_g_q_func(x, q, &prec)?;
            let next = log_g_q_func(x + 1.0, q, &prec)?;
            eqn.push((-next - ln_q_bracket(x, q) - lg).exp_m1().abs());
            let g = g_q_func(x, q, &prec)?;
            paths.push((g - g_q_func_gamma_path(x, q, &prec)?).abs() / g);
            // 1/[x] > G(x+1)^2 > 1/[x+1]
            let sq = 2.0 * next;
            bracket.push(-ln_q_bracket(x, q) > sq && sq > -ln_q_bracket(x + 1.0, q));
        }
        let logs = collect(
            lin_grid(0.2, 0.2, 30)
                .into_iter()
                .map(|x| log_g_q_func(x, q, &prec)),
        )?;
        dec.extend(logs.windows(2).map(|w| w[1] < w[0]));
        convex.extend(second_differences(&logs).map(|d| d > 0.0));
    }
    b.residual("reciprocal equation", 1e-12, eqn);
    b.residual("product vs gamma path", 1e-13, paths);
    b.count("bracket violations", bracket);
    b.count("decreasing violations", dec);
    b.count("log-convexity violations", convex);
    Ok(())
}

fn reflection(b: &mut Builder) -> Result<()> {
    let prec = b.opts.prec;
    let xs = lin_grid(0.1, 0.1, 9);
    let qs = b.qs(&[0.5, 0.9], |q| {
        matches!(q.regime(), Regime::SubUnit | Regime::SuperUnit)
    })?;
    let (mut askey, mut sine) = (Vec::new(), Vec::new());
    for q in &qs {
        for &x in &xs {
            askey.push(askey_reflection_residual(x - 0.5, q, &prec)?);
            sine.push(reflection_sine_residual(x, q, &prec)?);
        }
    }
    b.residual("askey reflection", 1e-10, askey);
    b.residual("sine form", 1e-10, sine);

    let qs = b.qs(&[0.9], |q| {
        ReflectionContext::new(q, &prec)
            .map(|c| c.is_sin_safe())
            .unwrap_or(false)
    })?;
    let mut excess = Vec::new();
    for q in &qs {
        let bound = 10.0 * (-PI * PI / q.log_q().abs()).exp() + 1e-12;
        for &x in &xs {
            for variant in [SinVariant::HalfShift, SinVariant::PiForm] {
                let err = (sin_approx(x, q, variant, &prec)? - (PI * x).sin()).abs();
                excess.push(err / bound);
            }
        }
    }
    b.residual("sin approximation / bound", 1.0, excess);

    let qs = b.qs(&[0.3, 0.5, 0.9], sub_unit)?;
    let (mut paths, mut half, mut sym) = (Vec::new(), Vec::new(), Vec::new());
    for q in &qs {
        half.push((gosper_sin_q(0.5, q, &prec)? - 1.0).abs());
        for &z in &xs {
            let s = gosper_sin_q(z, q, &prec)?;
            paths.push((s - gosper_sin_q_product(z, q, &prec)?).abs());
            sym.push((s - gosper_sin_q(1.0 - z, q, &prec)?).abs());
        }
    }
    b.residual("gosper paths", 1e-12, paths);
    b.residual("gosper sin_q(1/2) = 1", 1e-13, half);
    b.residual("gosper symmetry", 1e-13, sym);
    Ok(())
}

fn pi(b: &mut Builder) -> Result<()> {
    let prec = b.opts.prec;
    let qs = b.qs(&[0.5, 0.7, 0.9], |q| {
        matches!(q.regime(), Regime::SubUnit | Regime::SuperUnit)
    })?;
    let mut exact = Vec::new();
    let mut lead_excess = Vec::new();
    let mut analytic = Vec::new();
    let mut tight = Vec::new();
    for q in &qs {
        let ctx = ReflectionContext::new(q, &prec)?;
        exact.push((pi_approx(q, &prec, true)? - PI).abs());
        let err = pi_leading_error(&ctx);
        analytic.push(err);
        lead_excess.push(((pi_approx(q, &prec, false)? - PI).abs() - err).max(0.0));
        let n2 = ctx.nome_squared();
        let d = tight_ratio_defect(&ctx);
        tight.push(d >= n2 - n2 * n2 && d <= 2.0 * n2 - n2 * n2);
    }
    b.residual("exact identity", 1e-11, exact);
    b.residual("leading term beyond analytic error", 1e-13, lead_excess);
    b.count("tight ratio bracket violations", tight);
    if b.opts.q.is_none() {
        // q = 0.5, 0.7, 0.9 in order
        b.count(
            "leading error monotone violations",
            analytic.windows(2).map(|w| w[1] < w[0]).collect(),
        );
        let ctx = ReflectionContext::new(&QParam::new(0.5)?, &prec)?;
        b.residual(
            "leading error at q=0.5 / bracket width",
            1.0,
            vec![analytic[0] / (PI * ctx.r_squared())],
        );
    }
    Ok(())
}

fn stirling(b: &mut Builder) -> Result<()> {
    let prec = b.opts.prec;
    let qs = b.qs(&[0.3, 0.5, 0.8], sub_unit)?;
    let mut dec = Vec::new();
    let mut tail = Vec::new();
    let mut g_pos = Vec::new();
    for q in &qs {
        let mus = collect((0..=6).map(|j| mu_q(0.25 * 2f64.powi(j), q, &prec).map(|p| p.mu)))?;
        dec.extend(mus.windows(2).map(|w| w[1] < w[0]));
        g_pos.extend(
            collect((0..=8).map(|j| g_q_decrement(0.25 * 2f64.powi(j), q, &prec)))?
                .into_iter()
                .map(|g| g > 0.0),
        );
        for x in [0.1, 0.25, 0.5, 0.75, 1.0] {
            let mut sum = 0.0;
            for n in 0..=200 {
                sum += g_q_decrement(x + n as f64, q, &prec)?;
            }
            tail.push((sum - mu_q(x, q, &prec)?.mu).abs());
        }
    }
    b.count("mu decreasing violations", dec);
    b.count("g_q positivity violations", g_pos);
    b.residual("tail sum", 1e-9, tail);
    let q = QParam::new(0.5)?;
    if b.opts.q.is_none() || b.opts.q == Some(q) {
        b.residual(
            "|mu(50)| at q=0.5",
            1e-10,
            vec![mu_q(50.0, &q, &prec)?.mu.abs()],
        );
    }
    let debye = collect(
        [1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 60.0]
            .into_iter()
            .map(|x| Ok((debye_integral(x, &prec)? - debye_series(x)?).abs())),
    )?;
    b.residual("debye quadrature vs series", 1e-12, debye);
    let qs = b.qs(&[2.0], |q| q.regime() == Regime::SuperUnit)?;
    let mut sup = Vec::new();
    for q in &qs {
        sup.push((log_gamma_q_asymptotic(50.0, q, &prec)? - log_gamma_q(50.0, q, &prec)?).abs());
    }
    b.residual("q>1 expansion at x=50", 1e-8, sup);
    Ok(())
}

/// Runs `suite` (every suite for `All`). Numerical failures abort with the error;
/// failed invariants are reported in the returned checks.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<SuiteReport>> {
    if suite == Suite::All {
        let mut out = Vec::new();
        for s in Suite::EACH {
            out.extend(run_suite(s, opts)?);
        }
        return Ok(out);
    }
    let mut b = Builder {
        opts,
        checks: Vec::new(),
    };
    match suite {
        Suite::GammaRecurrence => gamma_recurrence(&mut b)?,
        Suite::Reciprocal => reciprocal(&mut b)?,
        Suite::Multiplication => multiplication(&mut b)?,
        Suite::QuotientSigns => quotient_signs(&mut b)?,
        Suite::Beta => beta(&mut b)?,
        Suite::GFunc => g_func(&mut b)?,
        Suite::Reflection => reflection(&mut b)?,
        Suite::Pi => pi(&mut b)?,
        Suite::Stirling => stirling(&mut b)?,
        Suite::All => unreachable!(),
    }
    if b.checks.is_empty() && opts.q.is_some() {
        return Err(QError::UnsupportedRegime {
            regime: opts.q.map(|q| q.regime().name()).unwrap_or("none"),
            operation: suite.name(),
        });
    }
    Ok(vec![SuiteReport {
        suite,
        checks: b.checks,
    }])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn random_specs_are_deterministic() {
        let a = random_balanced_specs(5, 7);
        assert_eq!(a, random_balanced_specs(5, 7));
        assert!(a.iter().all(|s| s.r() == s.s() && s.r() <= 4));
        assert!(a
            .iter()
            .flat_map(|s| s.a.iter().chain(&s.b))
            .all(|o| (0.0..=3.0).contains(o)));
    }

    #[test]
    fn single_q_suites() {
        let opts = VerifyOptions {
            q: Some(QParam::new(0.5).unwrap()),
            tol: Some(1e-12),
            prec: Precision::default(),
        };
        let rep = run_suite(Suite::GammaRecurrence, &opts).unwrap();
        assert!(rep[0].passed());
        assert_eq!(rep[0].checks[0].samples, 40);
        let opts = VerifyOptions {
            q: Some(QParam::new(2.0).unwrap()),
            ..opts
        };
        assert!(run_suite(Suite::QuotientSigns, &opts).is_err());
    }

    #[test]
    fn tolerance_override_can_fail() {
        let opts = VerifyOptions {
            q: Some(QParam::new(0.5).unwrap()),
            tol: Some(0.0),
            prec: Precision::default(),
        };
        let rep = run_suite(Suite::Multiplication, &opts).unwrap();
        assert!(!rep[0].passed());
    }
}
