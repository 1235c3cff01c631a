//! Jackson's q-gamma function, the `q <-> 1/q` identity and the
//! q-Gauss multiplication formula.

use crate::classical;
use crate::error::{QError, Result};
use crate::qcore::{
    ln_one_minus_exp, ln_q_bracket, q_bracket, CompensatedSum, Precision, QParam, Regime,
};

/// `Γ_q(x)` together with its logarithm.
///
/// `value` overflows to infinity long before `log_value` does (e.g. `q = 10`,
/// `x = 50`), so comparisons should be made on `log_value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaValue {
    pub value: f64,
    pub log_value: f64,
    /// Certified bound on the relative error from product truncation.
    pub achieved_rel_err: f64,
}

const INTEGER_FAST_PATH_MAX: f64 = 171.0;

/// `a * b * l / 2` with the product `a * b` carried in double-double so the
/// quadratic exponents of the `q > 1` path keep full precision for large `x`.
pub(crate) fn half_product_times(a: f64, b: f64, l: f64) -> f64 {
    let p = a * b;
    let pe = a.mul_add(b, -p);
    let r = p * l;
    let re = p.mul_add(l, -r);
    0.5 * (r + (re + pe * l))
}

fn check_x(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(QError::Domain(format!("q-gamma needs x > 0, got {x}")));
    }
    Ok(())
}

/// `ln((p; p)_inf / (p^x; p)_inf)` for `0 < p < 1`, summed pairwise, with its
/// truncation bound.
pub(crate) fn log_poch_ratio(x: f64, p: &QParam, prec: &Precision) -> Result<(f64, f64)> {
    let lp = p.log_q();
    if lp >= 0.0 {
        return Err(QError::NonConvergent { q: p.q() });
    }
    let omp = -lp.exp_m1();
    let tail = |t: f64| {
        if t >= 1.0 {
            f64::INFINITY
        } else {
            t / (omp * (1.0 - t))
        }
    };
    let mut sum = CompensatedSum::new();
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        let bound = tail(((1.0 + nf) * lp).exp()) + tail(((x + nf) * lp).exp());
        if bound <= prec.rel_tol() {
            return Ok((sum.value(), bound));
        }
        if n >= prec.max_terms() {
            return Err(QError::TruncationCapExceeded {
                max_terms: prec.max_terms(),
                achieved_bound: bound,
            });
        }
        sum.add(ln_one_minus_exp((1.0 + nf) * lp));
        sum.add(-ln_one_minus_exp((x + nf) * lp));
        n += 1;
    }
}

fn log_gamma_sub(x: f64, p: &QParam, prec: &Precision) -> Result<(f64, f64)> {
    let (ratio, bound) = log_poch_ratio(x, p, prec)?;
    Ok(((1.0 - x) * ln_one_minus_exp(p.log_q()) + ratio, bound))
}

fn classical_limit(x: f64, q: &QParam) -> GammaValue {
    let lq = q.log_q();
    let log_value = classical::ln_gamma(x) + 0.5 * half_product_times(x - 1.0, x - 2.0, lq);
    GammaValue {
        value: log_value.exp(),
        log_value,
        achieved_rel_err: 1e-15 + lq * lq * x.powi(3) / 12.0,
    }
}

/// `Γ_q(x)` for `x > 0` and every regime of `q`.
pub fn gamma_q(x: f64, q: &QParam, prec: &Precision) -> Result<GammaValue> {
    check_x(x)?;
    if q.regime() == Regime::ClassicalLimit {
        return Ok(classical_limit(x, q));
    }
    if x.fract() == 0.0 && x <= INTEGER_FAST_PATH_MAX {
        let n = x as usize;
        let value = q_factorial(n - 1, q);
        let mut log = CompensatedSum::new();
        for k in 2..n {
            log.add(ln_q_bracket(k as f64, q));
        }
        return Ok(GammaValue {
            value,
            log_value: log.value(),
            achieved_rel_err: f64::EPSILON,
        });
    }
    let (log_value, bound) = match q.regime() {
        Regime::SuperUnit => {
            let p = q.reciprocal()?;
            let (l, b) = log_gamma_sub(x, &p, prec)?;
            (half_product_times(x - 1.0, x - 2.0, q.log_q()) + l, b)
        }
        _ => log_gamma_sub(x, q, prec)?,
    };
    Ok(GammaValue {
        value: log_value.exp(),
        log_value,
        achieved_rel_err: bound.max(f64::MIN_POSITIVE),
    })
}

/// `ln Γ_q(x)`.
pub fn log_gamma_q(x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    Ok(gamma_q(x, q, prec)?.log_value)
}

/// Relative residual of `Γ_q(x+1) = [x]_q Γ_q(x)`.
pub fn recurrence_residual(x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    check_x(x)?;
    let d = log_gamma_q(x + 1.0, q, prec)? - ln_q_bracket(x, q) - log_gamma_q(x, q, prec)?;
    Ok(d.exp_m1().abs())
}

/// Relative residual of `Γ_q(x) = q^{(x-1)(x-2)/2} Γ_{1/q}(x)`.
///
/// The super-unit side is evaluated from its own product definition with
/// prefactor `(q-1)^{1-x} q^{x(x-1)/2}` over base `1/q`; the sub-unit side from
/// the `(1-q)^{1-x}` definition.
pub fn gamma_q_reciprocal_identity_residual(x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    check_x(x)?;
    if q.is_boundary() {
        return Err(QError::UnsupportedRegime {
            regime: q.regime().name(),
            operation: "gamma_q_reciprocal_identity_residual",
        });
    }
    let lq = q.log_q();
    let sub = if lq < 0.0 { *q } else { q.reciprocal()? };
    let (ratio, _) = log_poch_ratio(x, &sub, prec)?;
    // Γ over a base p < 1 from its own definition, and Γ over 1/p > 1 from its own.
    let lp = sub.log_q();
    let sub_side = ratio + (1.0 - x) * ln_one_minus_exp(lp);
    let super_side = ratio + (1.0 - x) * (-lp).exp_m1().ln() + half_product_times(x, x - 1.0, -lp);
    let (lhs, rhs) = if lq < 0.0 {
        (
            sub_side,
            half_product_times(x - 1.0, x - 2.0, lq) + super_side,
        )
    } else {
        (
            super_side,
            half_product_times(x - 1.0, x - 2.0, lq) + sub_side,
        )
    };
    Ok((lhs - rhs).exp_m1().abs())
}

fn check_m(m: usize) -> Result<()> {
    if m < 2 {
        return Err(QError::Domain(format!(
            "multiplication formula needs m >= 2, got {m}"
        )));
    }
    Ok(())
}

/// Both sides of the multiplication formula in log form.
pub fn multiplication_log_lhs_rhs(
    x: f64,
    m: usize,
    q: &QParam,
    prec: &Precision,
) -> Result<(f64, f64)> {
    check_x(x)?;
    check_m(m)?;
    let mf = m as f64;
    let qm = q.pow(mf)?;
    let mut lhs = CompensatedSum::new();
    for i in 0..m {
        lhs.add(log_gamma_q(x + i as f64 / mf, &qm, prec)?);
    }
    let mut rhs = CompensatedSum::new();
    rhs.add((1.0 - mf * x) * ln_q_bracket(mf, q));
    for i in 1..m {
        rhs.add(log_gamma_q(i as f64 / mf, &qm, prec)?);
    }
    rhs.add(log_gamma_q(mf * x, q, prec)?);
    Ok((lhs.value(), rhs.value()))
}

/// `(prod_{i<m} Γ_{q^m}(x + i/m), [m]_q^{1-mx} prod_{0<i<m} Γ_{q^m}(i/m) Γ_q(mx))`.
pub fn multiplication_lhs_rhs(
    x: f64,
    m: usize,
    q: &QParam,
    prec: &Precision,
) -> Result<(f64, f64)> {
    let (l, r) = multiplication_log_lhs_rhs(x, m, q, prec)?;
    Ok((l.exp(), r.exp()))
}

pub fn multiplication_residual(x: f64, m: usize, q: &QParam, prec: &Precision) -> Result<f64> {
    let (l, r) = multiplication_log_lhs_rhs(x, m, q, prec)?;
    Ok((l - r).exp_m1().abs())
}

/// `[n]_q! = prod_{k=1}^n [k]_q = Γ_q(n + 1)`.
pub fn q_factorial(n: usize, q: &QParam) -> f64 {
    (1..=n).map(|k| q_bracket(k as f64, q)).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp(q: f64) -> QParam {
        QParam::new(q).unwrap()
    }

    fn g(x: f64, q: f64) -> GammaValue {
        gamma_q(x, &qp(q), &Precision::default()).unwrap()
    }

    #[test]
    fn small_integer_values() {
        assert_eq!(g(1.0, 0.3).value, 1.0);
        assert_eq!(g(3.0, 0.5).value, 1.5);
        assert_eq!(g(3.0, 2.0).value, 3.0);
        assert_eq!(q_factorial(0, &qp(0.5)), 1.0);
        assert_eq!(q_factorial(3, &qp(0.5)), 2.625);
        assert_eq!(q_factorial(4, &qp(1.0)), 24.0);
    }

    #[test]
    fn rejects_non_positive_x() {
        let prec = Precision::default();
        for x in [0.0, -1.5, f64::NAN] {
            assert!(matches!(
                gamma_q(x, &qp(0.5), &prec),
                Err(QError::Domain(_))
            ));
        }
    }

    #[test]
    fn reference_values() {
        // ln Γ_2(50) from a 40-digit evaluation
        assert!((g(50.0, 2.0).log_value - 847.863_234_091_120_6).abs() < 1e-10);
        assert!(
            (g(49.5, 2.0).log_value - g(50.5, 2.0).log_value + ln_q_bracket(49.5, &qp(2.0))).abs()
                < 1e-11
        );
        // Γ_{0.5}(0.5) = (0.5;0.5)_inf / (0.5^{0.5};0.5)_inf * 0.5^{0.5}
        let direct = crate::qcore::qpoch_finite(0.5, &qp(0.5), 80)
            / crate::qcore::qpoch_finite(0.5f64.sqrt(), &qp(0.5), 80)
            * 0.5f64.sqrt();
        assert!((g(0.5, 0.5).value - direct).abs() < 1e-14 * direct);
    }

    #[test]
    fn non_integer_matches_integer_path() {
        let prec = Precision::default();
        let q = qp(0.7);
        let (l, _) = log_gamma_sub(4.0, &q, &prec).unwrap();
        assert!((l - g(4.0, 0.7).log_value).abs() < 1e-14);
    }

    #[test]
    fn zero_limit_is_evaluated() {
        assert!((g(2.5, 1e-13).value - 1.0).abs() < 1e-12);
        // Γ_q(x) ~ 1 + q^x for small q, not identically 1
        let v = g(0.01, 1e-13).value;
        assert!(v > 3.0, "{v}");
    }

    #[test]
    fn classical_limit_matches_gamma() {
        let v = g(4.5, 1.0).value;
        assert!((v - 11.631_728_396_567_448).abs() < 1e-12);
        let near = g(4.5, 1.0 + 5e-10).value;
        assert!((near - v).abs() / v < 1e-8);
    }

    #[test]
    fn reciprocal_identity_examples() {
        let prec = Precision::default();
        assert!(gamma_q_reciprocal_identity_residual(3.0, &qp(2.0), &prec).unwrap() <= 1e-13);
        for q in [0.2, 0.9, 4.0] {
            assert!(gamma_q_reciprocal_identity_residual(1.0, &qp(q), &prec).unwrap() <= 1e-14);
        }
        assert!(gamma_q_reciprocal_identity_residual(2.5, &qp(0.7), &prec).unwrap() <= 1e-12);
        assert!(gamma_q_reciprocal_identity_residual(2.5, &qp(1.0), &prec).is_err());
    }

    #[test]
    fn multiplication_examples() {
        let prec = Precision::default();
        let (l, r) = multiplication_lhs_rhs(1.0, 2, &qp(0.5), &prec).unwrap();
        let expect = gamma_q(1.5, &qp(0.25), &prec).unwrap().value;
        assert!((l - expect).abs() < 1e-13 * expect);
        assert!((r - expect).abs() < 1e-13 * expect);
        assert!(multiplication_residual(0.75, 3, &qp(0.6), &prec).unwrap() <= 1e-12);
        assert!(multiplication_residual(1.2, 2, &qp(2.0), &prec).unwrap() <= 1e-12);
        assert!(multiplication_residual(1.0, 1, &qp(0.5), &prec).is_err());
    }

    #[test]
    fn super_unit_large_x_overflows_value_not_log() {
        let v = g(50.3, 10.0);
        assert!(v.value.is_infinite());
        assert!(v.log_value.is_finite() && v.log_value > 2000.0);
    }
}
