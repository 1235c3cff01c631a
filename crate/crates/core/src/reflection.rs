//! Askey's reflection formula, the π formula, q-approximations of sin(πx),
//! and Gosper's sin_q.
//!
//! The theta-like series are evaluated in the nome `R = exp(2π² / log q)`,
//! which is `r^4` for `r = exp(π² / (2 log q))`; only `log r` is stored.

use std::f64::consts::{LN_2, PI};

use crate::error::{QError, Result};
use crate::qcore::{log_qpoch_inf_pow, Precision, QParam, Regime};
use crate::qgamma::log_gamma_q;

const MAX_H_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HVariant {
    H,
    Hc,
    Hs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinVariant {
    HalfShift,
    PiForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionContext {
    q: QParam,
    base: QParam,
    log_r: f64,
    n_terms: usize,
}

impl ReflectionContext {
    /// For `q > 1` every series is taken over the base `1/q`.
    pub fn new(q: &QParam, prec: &Precision) -> Result<Self> {
        let base = match q.regime() {
            Regime::SubUnit => *q,
            Regime::SuperUnit => q.reciprocal()?,
            r => {
                return Err(QError::UnsupportedRegime {
                    regime: r.name(),
                    operation: "ReflectionContext",
                })
            }
        };
        let log_r = PI * PI / (2.0 * base.log_q());
        let log_nome = 4.0 * log_r;
        let floor = prec.abs_tol().ln();
        let mut n_terms = 1;
        while (n_terms * (n_terms + 1)) as f64 * log_nome >= floor && n_terms < MAX_H_TERMS {
            n_terms += 1;
        }
        Ok(ReflectionContext {
            q: *q,
            base,
            log_r,
            n_terms,
        })
    }

    pub fn q(&self) -> QParam {
        self.q
    }

    /// The sub-unit base the series are built on.
    pub fn base(&self) -> QParam {
        self.base
    }

    /// `log r = π² / (2 log q)` of the sub-unit base.
    pub fn log_r(&self) -> f64 {
        self.log_r
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// `r^2` of the sub-unit base.
    pub fn r_squared(&self) -> f64 {
        (2.0 * self.log_r).exp()
    }

    /// `R^{n(n+1)}` with `R = r^4`.
    fn weight(&self, n: usize) -> f64 {
        ((n * (n + 1)) as f64 * 4.0 * self.log_r).exp()
    }

    /// `R^2`, the leading size of every series.
    pub fn nome_squared(&self) -> f64 {
        self.weight(1)
    }

    /// `r < 1/sqrt(2)`.
    pub fn is_sin_safe(&self) -> bool {
        self.log_r < -0.5 * LN_2
    }
}

/// `h = sum R^{n(n+1)} cos((2n+1)πx)`, `h_c = sum (-1)^n R^{n(n+1)} cos(2πnx)`,
/// `h_s = sum (-1)^n R^{n(n+1)} sin(2πnx)`, all over `n >= 1`.
pub fn h_series(ctx: &ReflectionContext, x: f64, variant: HVariant) -> f64 {
    (1..=ctx.n_terms)
        .rev()
        .map(|n| {
            let wgt = ctx.weight(n);
            let alt = if n % 2 == 1 { -1.0 } else { 1.0 };
            let nf = n as f64;
            match variant {
                HVariant::H => wgt * ((2.0 * nf + 1.0) * PI * x).cos(),
                HVariant::Hc => alt * wgt * (2.0 * PI * nf * x).cos(),
                HVariant::Hs => alt * wgt * (2.0 * PI * nf * x).sin(),
            }
        })
        .sum()
}

/// `h_s'(0)/π = sum (-1)^n 2n R^{n(n+1)}`.
pub fn h_sine_slope(ctx: &ReflectionContext) -> f64 {
    (1..=ctx.n_terms)
        .rev()
        .map(|n| {
            let alt = if n % 2 == 1 { -1.0 } else { 1.0 };
            alt * 2.0 * n as f64 * ctx.weight(n)
        })
        .sum()
}

fn log_gamma_half(q: &QParam, prec: &Precision) -> Result<f64> {
    log_gamma_q(0.5, q, prec)
}

/// Relative difference between `Γ_q(½)² / (Γ_q(½+x) Γ_q(½-x))` and
/// `q^{-x²/2} (cos πx + h(x)) / (1 + h(0))`.
pub fn askey_reflection_residual(x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    if !(x.abs() < 0.5) {
        return Err(QError::Domain(format!(
            "reflection needs |x| < 1/2, got {x}"
        )));
    }
    let ctx = ReflectionContext::new(q, prec)?;
    let lhs = 2.0 * log_gamma_half(q, prec)?
        - log_gamma_q(0.5 + x, q, prec)?
        - log_gamma_q(0.5 - x, q, prec)?;
    let rhs = -0.5 * x * x * q.log_q() + ((PI * x).cos() + h_series(&ctx, x, HVariant::H)).ln()
        - h_series(&ctx, 0.0, HVariant::H).ln_1p();
    Ok((lhs - rhs).exp_m1().abs())
}

/// Relative difference between `Γ_q(½)² / (Γ_q(x) Γ_q(1-x))` and
/// `q^{-(x-½)²/2} (sin πx (1 + h_c(x)) + cos πx h_s(x)) / (1 + h(0))`.
pub fn reflection_sine_residual(x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    check_unit_interval(x)?;
    let ctx = ReflectionContext::new(q, prec)?;
    let lhs =
        2.0 * log_gamma_half(q, prec)? - log_gamma_q(x, q, prec)? - log_gamma_q(1.0 - x, q, prec)?;
    let (s, c) = (PI * x).sin_cos();
    let num = s * (1.0 + h_series(&ctx, x, HVariant::Hc)) + c * h_series(&ctx, x, HVariant::Hs);
    let d = x - 0.5;
    let rhs = -0.5 * d * d * q.log_q() + num.ln() - h_series(&ctx, 0.0, HVariant::H).ln_1p();
    Ok((lhs - rhs).exp_m1().abs())
}

/// `ln(q^{1/8} Γ_q(½)² log q / (q - 1))`.
fn log_pi_leading(q: &QParam, prec: &Precision) -> Result<f64> {
    let lq = q.log_q();
    Ok(lq / 8.0 + 2.0 * log_gamma_half(q, prec)? + (lq / lq.exp_m1()).ln())
}

/// `q^{1/8} Γ_q(½)² log q/(q-1)`, times `(1 + h(0)) / (1 + sum (-1)^n (2n+1) R^{n(n+1)})`
/// when `exact_correction` is set, which makes the expression equal to π.
pub fn pi_approx(q: &QParam, prec: &Precision, exact_correction: bool) -> Result<f64> {
    let ctx = ReflectionContext::new(q, prec)?;
    let lead = log_pi_leading(q, prec)?;
    if !exact_correction {
        return Ok(lead.exp());
    }
    let h0 = h_series(&ctx, 0.0, HVariant::H);
    let s = h_series(&ctx, 0.0, HVariant::Hc) + h_sine_slope(&ctx);
    Ok((lead + h0.ln_1p() - s.ln_1p()).exp())
}

/// `π |1 - (1 + S)/(1 + h(0))|`, the exact error of the leading π term, from the series alone.
pub fn pi_leading_error(ctx: &ReflectionContext) -> f64 {
    // h(0) - S = sum R^{n(n+1)} (1 - (-1)^n (2n+1))
    let diff: f64 = (1..=ctx.n_terms)
        .rev()
        .map(|n| {
            let alt = if n % 2 == 1 { -1.0 } else { 1.0 };
            ctx.weight(n) * (1.0 - alt * (2.0 * n as f64 + 1.0))
        })
        .sum();
    PI * diff / (1.0 + h_series(ctx, 0.0, HVariant::H))
}

/// `1 - (1 + h_c(0))/(1 + h(0))`.
pub fn tight_ratio_defect(ctx: &ReflectionContext) -> f64 {
    let h = h_series(ctx, 0.0, HVariant::H);
    (h - h_series(ctx, 0.0, HVariant::Hc)) / (1.0 + h)
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(QError::Domain(format!(
            "argument must lie in (0, 1), got {x}"
        )));
    }
    Ok(())
}

/// Main term of the q-approximation of `sin(πx)`; the `O(e^{π²/log q})`
/// remainder is not added.
pub fn sin_approx(x: f64, q: &QParam, variant: SinVariant, prec: &Precision) -> Result<f64> {
    check_unit_interval(x)?;
    if q.regime() == Regime::ZeroLimit {
        return Err(QError::UnsafeQ { q: q.q() });
    }
    let ctx = ReflectionContext::new(q, prec)?;
    if !ctx.is_sin_safe() {
        return Err(QError::UnsafeQ { q: q.q() });
    }
    match variant {
        SinVariant::HalfShift => {
            let d = x - 0.5;
            let log = 0.5 * d * d * q.log_q() + 2.0 * log_gamma_half(q, prec)?
                - log_gamma_q(x, q, prec)?
                - log_gamma_q(1.0 - x, q, prec)?;
            Ok(log.exp())
        }
        SinVariant::PiForm => {
            let p = ctx.base();
            let lp = p.log_q();
            let log = 0.5 * x * (x - 1.0) * lp + (lp.exp_m1() / lp).ln()
                - log_gamma_q(x, &p, prec)?
                - log_gamma_q(1.0 - x, &p, prec)?;
            Ok(PI * log.exp())
        }
    }
}

fn gosper_checks(z: f64, q: &QParam) -> Result<()> {
    check_unit_interval(z)?;
    if q.regime() != Regime::SubUnit {
        return Err(QError::UnsupportedRegime {
            regime: q.regime().name(),
            operation: "gosper_sin_q",
        });
    }
    Ok(())
}

/// `sin_q(πz) = q^{1/4} Γ_{q²}(½)² q^{z(z-1)} / (Γ_{q²}(z) Γ_{q²}(1-z))`.
pub fn gosper_sin_q(z: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    gosper_checks(z, q)?;
    let q2 = q.pow(2.0)?;
    let lq = q.log_q();
    let log = 0.25 * lq + 2.0 * log_gamma_half(&q2, prec)? + z * (z - 1.0) * lq
        - log_gamma_q(z, &q2, prec)?
        - log_gamma_q(1.0 - z, &q2, prec)?;
    Ok(log.exp())
}

/// `sin_q(πz) = q^{(z-½)²} (q^{2z}; q²)_inf (q^{2-2z}; q²)_inf / (q; q²)_inf²`.
pub fn gosper_sin_q_product(z: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    gosper_checks(z, q)?;
    let q2 = q.pow(2.0)?;
    let d = z - 0.5;
    let log = d * d * q.log_q()
        + log_qpoch_inf_pow(z, &q2, prec)?.log_abs
        + log_qpoch_inf_pow(1.0 - z, &q2, prec)?.log_abs
        - 2.0 * log_qpoch_inf_pow(0.5, &q2, prec)?.log_abs;
    Ok(log.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(q: f64) -> QParam {
        QParam::new(q).unwrap()
    }

    fn ctx(q: f64) -> ReflectionContext {
        ReflectionContext::new(&qp(q), &Precision::default()).unwrap()
    }

    #[test]
    fn context_invariants() {
        let c = ctx(0.5);
        assert!((c.log_r() - PI * PI / (2.0 * 0.5f64.ln())).abs() < 1e-15);
        let n = c.n_terms() as f64;
        assert!((n * (n + 1.0) * 4.0 * c.log_r()).exp() < 1e-300);
        assert_eq!(ctx(2.0).log_r(), c.log_r());
        assert!(ReflectionContext::new(&qp(1.0), &Precision::default()).is_err());
        assert!((ctx(0.81).log_r() + 23.42).abs() < 0.01);
    }

    #[test]
    fn h_series_examples() {
        let c = ctx(0.5);
        assert_eq!(h_series(&c, 0.0, HVariant::Hs), 0.0);
        let r2 = c.r_squared();
        assert!(h_series(&c, 0.0, HVariant::H) < r2 / (1.0 - r2));
        let h0 = h_series(&c, 0.0, HVariant::H);
        for v in [HVariant::H, HVariant::Hc, HVariant::Hs] {
            assert!(h_series(&c, 0.3, v).abs() <= h0);
        }
    }

    #[test]
    fn askey_examples() {
        let prec = Precision::default();
        assert!(askey_reflection_residual(0.0, &qp(0.5), &prec).unwrap() <= 1e-12);
        assert!(askey_reflection_residual(0.25, &qp(0.5), &prec).unwrap() <= 1e-11);
        assert!(askey_reflection_residual(0.4, &qp(0.9), &prec).unwrap() <= 1e-10);
        // small q resolves the series terms
        assert!(askey_reflection_residual(0.3, &qp(0.05), &prec).unwrap() <= 1e-12);
        assert!(askey_reflection_residual(0.3, &qp(4.0), &prec).unwrap() <= 1e-12);
        assert!(askey_reflection_residual(0.5, &qp(0.5), &prec).is_err());
    }

    #[test]
    fn sine_form_residual() {
        let prec = Precision::default();
        for q in [0.05, 0.5, 0.9, 3.0] {
            for x in [0.1, 0.35, 0.5, 0.9] {
                assert!(
                    reflection_sine_residual(x, &qp(q), &prec).unwrap() <= 1e-11,
                    "q={q} x={x}"
                );
            }
        }
    }

    #[test]
    fn pi_examples() {
        let prec = Precision::default();
        for q in [0.9, 0.5, 0.05, 2.0, 1.0 / 0.7] {
            assert!(
                (pi_approx(&qp(q), &prec, true).unwrap() - PI).abs() < 1e-12,
                "q={q}"
            );
        }
        let lead = pi_approx(&qp(0.5), &prec, false).unwrap();
        assert!((lead - PI).abs() < ctx(0.5).r_squared());
        assert!(pi_leading_error(&ctx(0.99)) < pi_leading_error(&ctx(0.9)));
        // the leading term is visibly off for small q and the correction repairs it
        let c = ctx(0.05);
        let lead = pi_approx(&qp(0.05), &prec, false).unwrap();
        assert!(((lead - PI).abs() - pi_leading_error(&c)).abs() < 1e-12);
        assert!((lead - PI).abs() > 1e-6);
    }

    #[test]
    fn tight_bracket() {
        for q in [0.3, 0.5, 0.7] {
            let c = ctx(q);
            let n2 = c.nome_squared();
            let d = tight_ratio_defect(&c);
            assert!(d >= n2 - n2 * n2 && d <= 2.0 * n2 - n2 * n2, "q={q}");
        }
    }

    #[test]
    fn sin_examples() {
        let prec = Precision::default();
        let q = qp(0.9);
        assert!((sin_approx(0.5, &q, SinVariant::HalfShift, &prec).unwrap() - 1.0).abs() < 1e-12);
        let bound = 10.0 * (PI * PI / 0.9f64.ln()).exp() + 1e-12;
        let s = (0.3 * PI).sin();
        assert!((sin_approx(0.3, &q, SinVariant::HalfShift, &prec).unwrap() - s).abs() < bound);
        assert!((sin_approx(0.3, &q, SinVariant::PiForm, &prec).unwrap() - s).abs() < bound);
        assert!(
            (sin_approx(0.3, &qp(1.0 / 0.9), SinVariant::PiForm, &prec).unwrap() - s).abs() < bound
        );
        assert!(matches!(
            sin_approx(0.3, &qp(1e-7), SinVariant::HalfShift, &prec),
            Err(QError::UnsafeQ { .. })
        ));
        assert!(sin_approx(0.3, &qp(1e-5), SinVariant::HalfShift, &prec).is_ok());
        assert!(matches!(
            sin_approx(1.0, &q, SinVariant::HalfShift, &prec),
            Err(QError::Domain(_))
        ));
    }

    #[test]
    fn half_shift_is_invariant_under_inversion() {
        let prec = Precision::default();
        for x in [0.2, 0.45, 0.8] {
            let a = sin_approx(x, &qp(0.6), SinVariant::HalfShift, &prec).unwrap();
            let b = sin_approx(x, &qp(1.0 / 0.6), SinVariant::HalfShift, &prec).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn gosper_examples() {
        let prec = Precision::default();
        let q = qp(0.5);
        assert!((gosper_sin_q(0.5, &q, &prec).unwrap() - 1.0).abs() < 1e-13);
        let (a, b) = (
            gosper_sin_q(0.3, &q, &prec).unwrap(),
            gosper_sin_q(0.7, &q, &prec).unwrap(),
        );
        assert!((a - b).abs() < 1e-13);
        let p = gosper_sin_q_product(0.3, &q, &prec).unwrap();
        assert!((a - p).abs() < 1e-12);
        assert!(gosper_sin_q(0.3, &qp(2.0), &prec).is_err());
    }
}
