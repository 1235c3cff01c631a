//! Validated bases, precision policy, q-brackets and q-Pochhammer symbols.
//!
//! Every infinite product in the crate goes through [`LogProduct`]: factors
//! are accumulated as compensated sums of logarithms, and truncation stops
//! once the tail bound
//!
//! ```text
//! |sum_{k>=N} log(1 - a q^k)| <= |a| q^N / ((1 - q)(1 - |a| q^N))
//! ```
//!
//! drops below the requested relative tolerance.

use crate::error::{QError, Result};

/// Bases with `q <= ZERO_LIMIT_EPS` are tagged [`Regime::ZeroLimit`].
pub const ZERO_LIMIT_EPS: f64 = 1e-12;
/// Bases with `|q - 1| <= CLASSICAL_LIMIT_EPS` are tagged [`Regime::ClassicalLimit`].
pub const CLASSICAL_LIMIT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `0 < q < 1`
    SubUnit,
    /// `q > 1`
    SuperUnit,
    /// `|q - 1| <= 1e-9`; evaluated through classical kernels.
    ClassicalLimit,
    /// `q <= 1e-12`
    ZeroLimit,
}

impl Regime {
    pub fn classify(q: f64) -> Regime {
        if q <= ZERO_LIMIT_EPS {
            Regime::ZeroLimit
        } else if (q - 1.0).abs() <= CLASSICAL_LIMIT_EPS {
            Regime::ClassicalLimit
        } else if q < 1.0 {
            Regime::SubUnit
        } else {
            Regime::SuperUnit
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::SubUnit => "sub-unit",
            Regime::SuperUnit => "super-unit",
            Regime::ClassicalLimit => "classical-limit",
            Regime::ZeroLimit => "zero-limit",
        }
    }
}

/// A validated base `q > 0` with its regime and cached natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParam {
    q: f64,
    regime: Regime,
    log_q: f64,
}

impl QParam {
    pub fn new(q: f64) -> Result<Self> {
        if !(q.is_finite() && q > 0.0) {
            return Err(QError::InvalidQ(q));
        }
        Ok(QParam {
            q,
            regime: Regime::classify(q),
            log_q: q.ln(),
        })
    }

    /// Builds `q = exp(log_q)` keeping `log_q` exact. Used for derived bases
    /// such as `q^w` and `1/q`, where recomputing the logarithm would lose bits.
    pub fn from_log(log_q: f64) -> Result<Self> {
        let q = log_q.exp();
        if !(q.is_finite() && q > 0.0) {
            return Err(QError::InvalidQ(q));
        }
        Ok(QParam {
            q,
            regime: Regime::classify(q),
            log_q,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn log_q(&self) -> f64 {
        self.log_q
    }

    /// The base `1/q`.
    pub fn reciprocal(&self) -> Result<QParam> {
        let mut p = QParam::from_log(-self.log_q)?;
        // 1/q is exact for dyadic bases; prefer it so brackets stay exact.
        let inv = 1.0 / self.q;
        if inv.is_finite()
            && inv > 0.0
            && (inv.ln() - p.log_q).abs() <= 4.0 * f64::EPSILON * p.log_q.abs().max(1.0)
        {
            p.q = inv;
            p.regime = Regime::classify(inv);
        }
        Ok(p)
    }

    /// The base `q^w`.
    pub fn pow(&self, w: f64) -> Result<QParam> {
        let mut p = QParam::from_log(w * self.log_q)?;
        if w.fract() == 0.0 && w.abs() <= 64.0 {
            let exact = self.q.powi(w as i32);
            if exact.is_finite() && exact > 0.0 {
                p.q = exact;
                p.regime = Regime::classify(exact);
            }
        }
        Ok(p)
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self.regime, Regime::ClassicalLimit | Regime::ZeroLimit)
    }

    /// `q^x`
    pub fn powf(&self, x: f64) -> f64 {
        (x * self.log_q).exp()
    }
}

/// Truncation and quadrature tolerances shared by every series, product and integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    rel_tol: f64,
    abs_tol: f64,
    max_terms: usize,
    quad_tol: f64,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            rel_tol: 1e-14,
            abs_tol: 1e-300,
            max_terms: 1_000_000,
            quad_tol: 1e-12,
        }
    }
}

impl Precision {
    pub fn new(rel_tol: f64, abs_tol: f64, max_terms: usize, quad_tol: f64) -> Result<Self> {
        for (name, v) in [
            ("rel_tol", rel_tol),
            ("abs_tol", abs_tol),
            ("quad_tol", quad_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(QError::InvalidPrecision(format!(
                    "{name} = {v} must lie in (0, 1)"
                )));
            }
        }
        if max_terms < 16 {
            return Err(QError::InvalidPrecision(format!(
                "max_terms = {max_terms} must be at least 16"
            )));
        }
        Ok(Precision {
            rel_tol,
            abs_tol,
            max_terms,
            quad_tol,
        })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Result<Self> {
        Precision::new(rel_tol, self.abs_tol, self.max_terms, self.quad_tol)
    }

    pub fn with_max_terms(self, max_terms: usize) -> Result<Self> {
        Precision::new(self.rel_tol, self.abs_tol, max_terms, self.quad_tol)
    }

    pub fn with_quad_tol(self, quad_tol: f64) -> Result<Self> {
        Precision::new(self.rel_tol, self.abs_tol, self.max_terms, quad_tol)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `1 - e^t`, accurate for small `|t|`.
pub(crate) fn one_minus_exp(t: f64) -> f64 {
    -t.exp_m1()
}

/// `ln(1 - e^t)` for `t < 0`.
pub(crate) fn ln_one_minus_exp(t: f64) -> f64 {
    if t > -std::f64::consts::LN_2 {
        (-t.exp_m1()).ln()
    } else {
        (-t.exp()).ln_1p()
    }
}

/// `1 - q` computed without cancellation for bases near one.
pub(crate) fn one_minus_q(q: &QParam) -> f64 {
    if (0.5..=2.0).contains(&q.q()) {
        1.0 - q.q()
    } else {
        one_minus_exp(q.log_q())
    }
}

/// The q-number `[x]_q = (1 - q^x)/(1 - q)`.
///
/// Near `q = 1` both numerator and denominator go through `expm1`, so the
/// classical limit `[x]_1 = x` is reached continuously rather than substituted.
pub fn q_bracket(x: f64, q: &QParam) -> f64 {
    if x == 1.0 {
        return 1.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    if q.log_q() == 0.0 {
        return x;
    }
    let t = x * q.log_q();
    let num = if t.abs() < 0.5 {
        one_minus_exp(t)
    } else {
        1.0 - q.q().powf(x)
    };
    let den = if q.log_q().abs() < 0.5 {
        one_minus_exp(q.log_q())
    } else {
        1.0 - q.q()
    };
    num / den
}

/// `ln [x]_q` for `x > 0`, stable when `q^x` overflows.
pub fn ln_q_bracket(x: f64, q: &QParam) -> f64 {
    let lq = q.log_q();
    if lq == 0.0 {
        return x.ln();
    }
    if lq < 0.0 {
        ln_one_minus_exp(x * lq) - ln_one_minus_exp(lq)
    } else {
        // [x]_q = q^{x-1} [x]_{1/q}
        (x - 1.0) * lq + ln_one_minus_exp(-x * lq) - ln_one_minus_exp(-lq)
    }
}

/// Finite q-shifted factorial `(a; q)_n = prod_{k<n} (1 - a q^k)`.
pub fn qpoch_finite(a: f64, q: &QParam, n: usize) -> f64 {
    let mut acc = 1.0;
    for k in 0..n {
        acc *= 1.0 - a * q_power(q, k);
    }
    acc
}

fn q_power(q: &QParam, k: usize) -> f64 {
    if k <= i32::MAX as usize {
        q.q().powi(k as i32)
    } else {
        q.powf(k as f64)
    }
}

/// Result of a truncated infinite product held in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogProduct {
    /// `ln |prod|`; `-inf` when a factor vanishes.
    pub log_abs: f64,
    /// `+1`, `-1`, or `0` for a vanishing product.
    pub sign: f64,
    /// Number of factors included.
    pub terms: usize,
    /// Certified bound on `|ln(true) - ln(truncated)|`.
    pub tail_bound: f64,
}

impl LogProduct {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

fn require_convergent(q: &QParam) -> Result<f64> {
    if q.log_q() >= 0.0 {
        return Err(QError::NonConvergent { q: q.q() });
    }
    Ok(one_minus_q(q))
}

/// Tail bound after `n` factors, given `|a| q^n`.
fn log_tail_bound(aqn: f64, one_minus_q: f64) -> f64 {
    if aqn >= 1.0 {
        f64::INFINITY
    } else {
        aqn / (one_minus_q * (1.0 - aqn))
    }
}

/// `(a; q)_inf` for `0 < q < 1` in log form.
pub fn log_qpoch_inf(a: f64, q: &QParam, prec: &Precision) -> Result<LogProduct> {
    let omq = require_convergent(q)?;
    let mut sum = CompensatedSum::new();
    let mut sign = 1.0;
    let abs_a = a.abs();
    let mut n = 0usize;
    loop {
        let aqn = abs_a * q.powf(n as f64);
        let bound = log_tail_bound(aqn, omq);
        if bound <= prec.rel_tol() {
            return Ok(LogProduct {
                log_abs: sum.value(),
                sign,
                terms: n,
                tail_bound: bound,
            });
        }
        if n >= prec.max_terms() {
            return Err(QError::TruncationCapExceeded {
                max_terms: prec.max_terms(),
                achieved_bound: bound,
            });
        }
        let term = a * q.powf(n as f64);
        let factor = 1.0 - term;
        if factor == 0.0 {
            return Ok(LogProduct {
                log_abs: f64::NEG_INFINITY,
                sign: 0.0,
                terms: n + 1,
                tail_bound: 0.0,
            });
        }
        if factor < 0.0 {
            sign = -sign;
        }
        if term.abs() < 0.5 {
            sum.add((-term).ln_1p());
        } else {
            sum.add(factor.abs().ln());
        }
        n += 1;
    }
}

/// `(q^y; q)_inf` for `0 < q < 1`, `y > 0`, in log form. Each factor is
/// `1 - exp((y + k) ln q)`, so `y` near zero keeps full relative accuracy.
pub fn log_qpoch_inf_pow(y: f64, q: &QParam, prec: &Precision) -> Result<LogProduct> {
    let omq = require_convergent(q)?;
    if y <= 0.0 {
        return Err(QError::Domain(format!("(q^y; q)_inf needs y > 0, got {y}")));
    }
    let lq = q.log_q();
    let mut sum = CompensatedSum::new();
    let mut n = 0usize;
    loop {
        let bound = log_tail_bound(((y + n as f64) * lq).exp(), omq);
        if bound <= prec.rel_tol() {
            return Ok(LogProduct {
                log_abs: sum.value(),
                sign: 1.0,
                terms: n,
                tail_bound: bound,
            });
        }
        if n >= prec.max_terms() {
            return Err(QError::TruncationCapExceeded {
                max_terms: prec.max_terms(),
                achieved_bound: bound,
            });
        }
        sum.add(ln_one_minus_exp((y + n as f64) * lq));
        n += 1;
    }
}

/// `(a; q)_inf = prod_{k>=0} (1 - a q^k)` for `0 < q < 1`.
pub fn qpoch_inf(a: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    Ok(log_qpoch_inf(a, q, prec)?.value())
}
