//! Quotients of q-gamma values, the sign functional Υ, eventual signs of
//! log-derivatives, the q-beta function and the reciprocal-equation function G_q.

use serde::{Deserialize, Serialize};

use crate::classical;
use crate::error::{QError, Result};
use crate::qcore::{ln_one_minus_exp, ln_q_bracket, CompensatedSum, Precision, QParam, Regime};
use crate::qdigamma::{eulerian, EULERIAN_CAP};
use crate::qgamma::log_gamma_q;

/// Exponent `k`, shift `w` and offsets `a`, `b` of a q-gamma quotient or of a
/// functional equation. JSON form: `{"k": 1, "w": 1, "a": [0], "b": [0.5]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientSpec {
    pub k: f64,
    pub w: f64,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

impl QuotientSpec {
    pub fn new(k: f64, w: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let spec = QuotientSpec { k, w, a, b };
        spec.validate()?;
        Ok(spec)
    }

    /// `k = 1`, `w = 1`.
    pub fn simple(a: &[f64], b: &[f64]) -> Result<Self> {
        QuotientSpec::new(1.0, 1.0, a.to_vec(), b.to_vec())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() {
            return Err(QError::InvalidSpec(format!("k = {} is not finite", self.k)));
        }
        if !(self.w.is_finite() && self.w > 0.0) {
            return Err(QError::InvalidSpec(format!(
                "w = {} must be positive",
                self.w
            )));
        }
        if let Some(v) = self
            .a
            .iter()
            .chain(&self.b)
            .find(|v| !(v.is_finite() && **v >= 0.0))
        {
            return Err(QError::InvalidSpec(format!(
                "offset {v} must be a non-negative number"
            )));
        }
        if self.a.is_empty() && self.b.is_empty() {
            return Err(QError::InvalidSpec(
                "at least one offset is required".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: QuotientSpec =
            serde_json::from_str(text).map_err(|e| QError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn r(&self) -> usize {
        self.a.len()
    }

    pub fn s(&self) -> usize {
        self.b.len()
    }

    fn offset_sums(&self) -> (f64, f64) {
        (self.a.iter().sum(), self.b.iter().sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
    Zero,
}

impl Sign {
    pub fn of(v: f64) -> Sign {
        if v > 0.0 {
            Sign::Pos
        } else if v < 0.0 {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    fn flip_if(self, cond: bool) -> Sign {
        match (self, cond) {
            (Sign::Pos, true) => Sign::Neg,
            (Sign::Neg, true) => Sign::Pos,
            (s, _) => s,
        }
    }

    fn times(self, other: Sign) -> Sign {
        match (self, other) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Pos,
            _ => Sign::Neg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignReport {
    /// Υ for `0 < q < 1`, Υ* for `q > 1`.
    pub upsilon: f64,
    pub predicted_sign: Sign,
    pub threshold_m: f64,
    pub verified_to: f64,
}

/// `Υ = sum q^{a_i} - sum q^{b_j}`.
pub fn upsilon(spec: &QuotientSpec, q: &QParam) -> f64 {
    spec.a.iter().map(|a| q.powf(*a)).sum::<f64>() - spec.b.iter().map(|b| q.powf(*b)).sum::<f64>()
}

/// `Υ* = sum q^{-b_j} - sum q^{-a_i}`.
pub fn upsilon_star(spec: &QuotientSpec, q: &QParam) -> f64 {
    spec.b.iter().map(|b| q.powf(-b)).sum::<f64>() - spec.a.iter().map(|a| q.powf(-a)).sum::<f64>()
}

fn upsilon_sign(spec: &QuotientSpec, q: &QParam) -> Sign {
    let v = upsilon(spec, q);
    let mass: f64 = spec.a.iter().chain(&spec.b).map(|o| q.powf(*o)).sum();
    if v.abs() <= 1e-12 * mass {
        Sign::Zero
    } else {
        Sign::of(v)
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(QError::Domain(format!("quotient needs x > 0, got {x}")));
    }
    Ok(())
}

/// `k (sum ln Γ_q(x + a_i) - sum ln Γ_q(x + b_j))`.
pub fn quotient_log(spec: &QuotientSpec, x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    check_x(x)?;
    let mut acc = CompensatedSum::new();
    for a in &spec.a {
        acc.add(log_gamma_q(x + a, q, prec)?);
    }
    for b in &spec.b {
        acc.add(-log_gamma_q(x + b, q, prec)?);
    }
    Ok(spec.k * acc.value())
}

/// `(prod Γ_q(x + a_i) / prod Γ_q(x + b_j))^k`.
pub fn quotient_eval(spec: &QuotientSpec, x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    Ok(quotient_log(spec, x, q, prec)?.exp())
}

/// `F_n(x) = k d^n/dx^n ln f` split as `constant + sign * exp(log_scale) * series`
/// so that signs survive after `q^x` underflows.
#[derive(Debug, Clone, Copy)]
struct ScaledDeriv {
    constant: f64,
    log_scale: f64,
    scale_sign: f64,
    series: f64,
    series_mass: f64,
}

impl ScaledDeriv {
    fn value(&self) -> f64 {
        self.constant + self.scale_sign * self.log_scale.exp() * self.series
    }

    fn sign(&self) -> Sign {
        if self.constant == 0.0 {
            if self.series.abs() <= 1e-12 * self.series_mass {
                return Sign::Zero;
            }
            Sign::of(self.scale_sign * self.series)
        } else {
            Sign::of(self.value())
        }
    }
}

/// `sum_m p^{c+m} P_{n-1}(p^{x+c+m}) / (1 - p^{x+c+m})^n` for one offset `c`.
fn offset_series(
    x: f64,
    c: f64,
    n: usize,
    coeffs: &[f64],
    p: &QParam,
    prec: &Precision,
) -> Result<f64> {
    let lp = p.log_q();
    let omp = -lp.exp_m1();
    let c_n = coeffs.iter().sum::<f64>() - 1.0;
    let ni = n as i32;
    let mut sum = CompensatedSum::new();
    let mut m = 0usize;
    loop {
        let e = (x + c + m as f64) * lp;
        let t = e.exp();
        let omt = -e.exp_m1();
        let lead = ((c + m as f64) * lp).exp();
        let tail = lead * (1.0 + c_n * t) / (omp * omt.powi(ni));
        if tail <= 0.1 * prec.rel_tol() * sum.value() || lead == 0.0 {
            return Ok(sum.value());
        }
        if m >= prec.max_terms() {
            return Err(QError::TruncationCapExceeded {
                max_terms: prec.max_terms(),
                achieved_bound: tail / sum.value().max(prec.abs_tol()),
            });
        }
        let pn = coeffs.iter().rev().fold(0.0, |acc, k| acc * t + k);
        sum.add(lead * pn / omt.powi(ni));
        m += 1;
    }
}

fn scaled_deriv(
    spec: &QuotientSpec,
    x: f64,
    n: usize,
    q: &QParam,
    prec: &Precision,
) -> Result<ScaledDeriv> {
    check_x(x)?;
    if n == 0 {
        return Err(QError::Domain("derivative order must be at least 1".into()));
    }
    if n - 1 > EULERIAN_CAP {
        return Err(QError::CapExceeded {
            n,
            cap: EULERIAN_CAP + 1,
        });
    }
    let (p, poly) = match q.regime() {
        Regime::SubUnit | Regime::ZeroLimit => (*q, 0.0),
        Regime::SuperUnit => {
            let lq = q.log_q();
            let rs = spec.r() as f64 - spec.s() as f64;
            let (sa, sb) = spec.offset_sums();
            let poly = match n {
                1 => rs * (x - 1.5) * lq + (sa - sb) * lq,
                2 => rs * lq,
                _ => 0.0,
            };
            (q.reciprocal()?, poly)
        }
        Regime::ClassicalLimit => {
            return Err(QError::UnsupportedRegime {
                regime: "classical-limit",
                operation: "log_deriv",
            })
        }
    };
    let lp = p.log_q();
    let coeffs = eulerian(n - 1)?.coeffs_f64();
    let mut series = CompensatedSum::new();
    let mut mass = 0.0;
    for a in &spec.a {
        let v = offset_series(x, *a, n, &coeffs, &p, prec)?;
        series.add(v);
        mass += v.abs();
    }
    for b in &spec.b {
        let v = offset_series(x, *b, n, &coeffs, &p, prec)?;
        series.add(-v);
        mass += v.abs();
    }
    let constant = if n == 1 {
        (spec.s() as f64 - spec.r() as f64) * ln_one_minus_exp(lp)
    } else {
        0.0
    };
    let k = spec.k;
    let lp_n_sign = if n % 2 == 1 { -1.0 } else { 1.0 };
    Ok(ScaledDeriv {
        constant: k * (constant + poly),
        log_scale: x * lp + n as f64 * lp.abs().ln() + k.abs().ln(),
        scale_sign: lp_n_sign * k.signum(),
        series: series.value(),
        series_mass: mass,
    })
}

/// `F_n(x) = k d^n/dx^n ln(prod Γ_q(x + a_i) / prod Γ_q(x + b_j))`.
pub fn log_deriv(
    spec: &QuotientSpec,
    x: f64,
    n: usize,
    q: &QParam,
    prec: &Precision,
) -> Result<f64> {
    Ok(scaled_deriv(spec, x, n, q, prec)?.value())
}

/// Sign of `F_n(x)`, robust to underflow of `q^x`.
pub fn log_deriv_sign_at(
    spec: &QuotientSpec,
    x: f64,
    n: usize,
    q: &QParam,
    prec: &Precision,
) -> Result<Sign> {
    Ok(scaled_deriv(spec, x, n, q, prec)?.sign())
}

/// Eventual sign of `F_n` predicted from `r - s`, Υ and the offsets.
pub fn predicted_sign(spec: &QuotientSpec, n: usize, q: &QParam) -> Result<Sign> {
    if n == 0 {
        return Err(QError::Domain("derivative order must be at least 1".into()));
    }
    let rs = Sign::of(spec.r() as f64 - spec.s() as f64);
    let odd = n % 2 == 1;
    let base = match q.regime() {
        Regime::SubUnit | Regime::ZeroLimit => {
            let ups = upsilon_sign(spec, q);
            match n {
                1 if rs != Sign::Zero => rs,
                _ => ups.flip_if(odd),
            }
        }
        Regime::SuperUnit => {
            let ups_p = upsilon_sign(spec, &q.reciprocal()?);
            let (sa, sb) = spec.offset_sums();
            match n {
                1 | 2 if rs != Sign::Zero => rs,
                1 if (sa - sb).abs() > 1e-12 * (sa + sb).max(1.0) => Sign::of(sa - sb),
                _ => ups_p.flip_if(odd),
            }
        }
        Regime::ClassicalLimit => {
            return Err(QError::UnsupportedRegime {
                regime: "classical-limit",
                operation: "log_deriv_sign",
            })
        }
    };
    Ok(base.times(Sign::of(spec.k)))
}

const GRID_START: f64 = 0.25;
const GRID_STEPS: i32 = 16;
const THRESHOLD_LIMIT: f64 = 1e4;
const VERIFY_SPAN: f64 = 50.0;
const VERIFY_STEP: f64 = 0.05;

/// Locates `M` beyond which `sign(F_n)` matches the predicted sign and verifies
/// it on `[M, M + 50]`.
pub fn log_deriv_sign(
    spec: &QuotientSpec,
    n: usize,
    q: &QParam,
    prec: &Precision,
) -> Result<SignReport> {
    spec.validate()?;
    let predicted = predicted_sign(spec, n, q)?;
    let ups = if q.regime() == Regime::SuperUnit {
        upsilon_star(spec, q)
    } else {
        upsilon(spec, q)
    };
    if predicted == Sign::Zero {
        return Ok(SignReport {
            upsilon: ups,
            predicted_sign: Sign::Zero,
            threshold_m: 0.0,
            verified_to: 0.0,
        });
    }
    let matches =
        |x: f64| -> Result<bool> { Ok(log_deriv_sign_at(spec, x, n, q, prec)? == predicted) };
    let grid: Vec<f64> = (0..=GRID_STEPS)
        .map(|j| GRID_START * 2f64.powi(j))
        .collect();
    let mut first_good = None;
    for (j, x) in grid.iter().enumerate().rev() {
        if matches(*x)? {
            first_good = Some(j);
        } else {
            break;
        }
    }
    let j = first_good.ok_or(QError::ThresholdNotFound {
        limit: THRESHOLD_LIMIT,
    })?;
    let mut m = grid[j];
    if j > 0 {
        let (mut lo, mut hi) = (grid[j - 1], grid[j]);
        while hi - lo > 1e-2 {
            let mid = 0.5 * (lo + hi);
            if matches(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        m = hi;
    }
    let mut i = 0usize;
    loop {
        if m > THRESHOLD_LIMIT {
            return Err(QError::ThresholdNotFound {
                limit: THRESHOLD_LIMIT,
            });
        }
        let x = m + i as f64 * VERIFY_STEP;
        if x > m + VERIFY_SPAN {
            break;
        }
        if !matches(x)? {
            m = x + 1e-2;
            i = 0;
            continue;
        }
        i += 1;
    }
    Ok(SignReport {
        upsilon: ups,
        predicted_sign: predicted,
        threshold_m: m,
        verified_to: m + VERIFY_SPAN,
    })
}

/// `ln B_q(x, y)`.
pub fn log_beta_q(x: f64, y: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    if !(y.is_finite() && y > 0.0) {
        return Err(QError::Domain(format!("q-beta needs y > 0, got {y}")));
    }
    check_x(x)?;
    Ok(log_gamma_q(x, q, prec)? + log_gamma_q(y, q, prec)? - log_gamma_q(x + y, q, prec)?)
}

/// `B_q(x, y) = Γ_q(x) Γ_q(y) / Γ_q(x + y)`.
pub fn beta_q(x: f64, y: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    Ok(log_beta_q(x, y, q, prec)?.exp())
}

/// `ln G_q(x)` from the product form: for `0 < p < 1`,
/// `G_p(x) = sqrt(1-p) (p^{x+1}; p^2)_inf / (p^x; p^2)_inf`, and for `q > 1`,
/// `G_q(x) = q^{3/4 - x/2} G_{1/q}(x)`.
pub fn log_g_q_func(x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    check_x(x)?;
    if q.regime() == Regime::ClassicalLimit {
        return Ok(classical::ln_gamma(0.5 * x)
            - classical::ln_gamma(0.5 * (x + 1.0))
            - 0.5 * std::f64::consts::LN_2);
    }
    let (p, shift) = if q.log_q() > 0.0 {
        (q.reciprocal()?, (0.75 - 0.5 * x) * q.log_q())
    } else {
        (*q, 0.0)
    };
    let lp = p.log_q();
    let omp2 = -(2.0 * lp).exp_m1();
    let tail = |t: f64| {
        if t >= 1.0 {
            f64::INFINITY
        } else {
            t / (omp2 * (1.0 - t))
        }
    };
    let mut sum = CompensatedSum::new();
    let mut k = 0usize;
    loop {
        let y = x + 2.0 * k as f64;
        let bound = tail(((y + 1.0) * lp).exp()) + tail((y * lp).exp());
        if bound <= prec.rel_tol() {
            break;
        }
        if k >= prec.max_terms() {
            return Err(QError::TruncationCapExceeded {
                max_terms: prec.max_terms(),
                achieved_bound: bound,
            });
        }
        sum.add(ln_one_minus_exp((y + 1.0) * lp));
        sum.add(-ln_one_minus_exp(y * lp));
        k += 1;
    }
    Ok(shift + 0.5 * ln_one_minus_exp(lp) + sum.value())
}

/// `G_q(x)`, the solution of `1/f(x+1) = [x]_q f(x)` built from `Γ_{q^2}`.
pub fn g_q_func(x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    Ok(log_g_q_func(x, q, prec)?.exp())
}

/// `G_q(x) = Γ_{q^2}(x/2) / (sqrt([2]_q) Γ_{q^2}((x+1)/2))`, evaluated through `gamma_q`.
pub fn g_q_func_gamma_path(x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    check_x(x)?;
    let q2 = q.pow(2.0)?;
    let log = log_gamma_q(0.5 * x, &q2, prec)?
        - log_gamma_q(0.5 * (x + 1.0), &q2, prec)?
        - 0.5 * ln_q_bracket(2.0, q);
    Ok(log.exp())
}
