//! The q-digamma function, its derivatives through Eulerian polynomials, and
//! the Plana integral representation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::classical;
use crate::error::{QError, Result};
use crate::qcore::{ln_one_minus_exp, CompensatedSum, Precision, QParam, Regime};
use crate::quadrature;

pub const EULERIAN_CAP: usize = 64;

/// Eulerian polynomial `P_n` with exact coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerianPoly {
    pub n: usize,
    pub coeffs: Vec<BigUint>,
}

impl EulerianPoly {
    /// `P_n(1)`, which equals `n!`.
    pub fn value_at_one(&self) -> BigUint {
        self.coeffs.iter().sum()
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::INFINITY))
            .collect()
    }

    /// Horner evaluation in floating point.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs_f64()
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + c)
    }

    /// `P_{n+1}` from `P_{n+1} = (n t + 1) P_n + t (1 - t) P_n'`, coefficientwise
    /// `d_j = (j + 1) c_j + (n - j + 1) c_{j-1}`.
    pub fn next(&self) -> EulerianPoly {
        let n = self.n;
        let len = if n == 0 { 1 } else { self.coeffs.len() + 1 };
        let coeffs = (0..len)
            .map(|j| {
                let cj = self.coeffs.get(j).cloned().unwrap_or_else(BigUint::zero);
                let mut d = cj * BigUint::from(j + 1);
                if j >= 1 && n + 1 > j {
                    d += &self.coeffs[j - 1] * BigUint::from(n + 1 - j);
                }
                d
            })
            .collect();
        EulerianPoly { n: n + 1, coeffs }
    }
}

fn eulerian_table() -> &'static [EulerianPoly] {
    static TABLE: OnceLock<Vec<EulerianPoly>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(EULERIAN_CAP + 1);
        table.push(EulerianPoly {
            n: 0,
            coeffs: vec![BigUint::one()],
        });
        for n in 0..EULERIAN_CAP {
            let next = table[n].next();
            table.push(next);
        }
        table
    })
}

/// The Eulerian polynomial `P_n`, `n <= 64`.
pub fn eulerian(n: usize) -> Result<EulerianPoly> {
    if n > EULERIAN_CAP {
        return Err(QError::CapExceeded {
            n,
            cap: EULERIAN_CAP,
        });
    }
    Ok(eulerian_table()[n].clone())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigammaValue {
    pub value: f64,
    pub order: usize,
    pub achieved_rel_err: f64,
}

fn check_x(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(QError::Domain(format!("q-digamma needs x > 0, got {x}")));
    }
    Ok(())
}

/// `sum_{k>=0} q^{x+k}/(1 - q^{x+k})` for `0 < q < 1`, with the tail bound
/// `q^{x+N}/((1-q)(1-q^{x+N}))` after `N` terms.
fn digamma_sum(
    x: f64,
    p: &QParam,
    prec: &Precision,
    scale: f64,
    offset: f64,
) -> Result<(f64, f64)> {
    let lp = p.log_q();
    let omp = -lp.exp_m1();
    let mut sum = CompensatedSum::new();
    let mut n = 0usize;
    loop {
        let t = ((x + n as f64) * lp).exp();
        let tail = t / (omp * (1.0 - t));
        let magnitude = offset.abs() + scale * sum.value().abs();
        if scale * tail <= prec.rel_tol() * magnitude.max(prec.abs_tol()) || tail == 0.0 {
            return Ok((sum.value(), scale * tail));
        }
        if n >= prec.max_terms() {
            return Err(QError::TruncationCapExceeded {
                max_terms: prec.max_terms(),
                achieved_bound: scale * tail,
            });
        }
        sum.add(1.0 / (-(x + n as f64) * lp).exp_m1());
        n += 1;
    }
}

fn digamma_sub(x: f64, p: &QParam, prec: &Precision) -> Result<(f64, f64)> {
    let lp = p.log_q();
    let c = -ln_one_minus_exp(lp);
    let (s, err) = digamma_sum(x, p, prec, lp.abs(), c)?;
    Ok((c + lp * s, err))
}

fn rel(err: f64, value: f64, prec: &Precision) -> f64 {
    (err / value.abs().max(prec.abs_tol())).max(f64::MIN_POSITIVE)
}

/// `ψ_q(x) = d/dx ln Γ_q(x)`.
pub fn digamma_q(x: f64, q: &QParam, prec: &Precision) -> Result<DigammaValue> {
    check_x(x)?;
    let lq = q.log_q();
    let (value, err) = match q.regime() {
        Regime::ClassicalLimit => (
            classical::digamma(x) + (2.0 * x - 3.0) / 4.0 * lq,
            1e-15 + lq * lq * x * x,
        ),
        Regime::SuperUnit => {
            let (v, e) = digamma_sub(x, &q.reciprocal()?, prec)?;
            (v + (x - 1.5) * lq, e)
        }
        _ => digamma_sub(x, q, prec)?,
    };
    Ok(DigammaValue {
        value,
        order: 0,
        achieved_rel_err: rel(err, value, prec),
    })
}

/// `log^{n+1} p sum_i t_i P_n(t_i)/(1 - t_i)^{n+1}`, `t_i = p^{x+i}`, for `0 < p < 1`.
fn deriv_sub(x: f64, n: usize, p: &QParam, prec: &Precision) -> Result<(f64, f64)> {
    let poly = eulerian(n)?;
    let coeffs = poly.coeffs_f64();
    let c_n = coeffs.iter().sum::<f64>() - 1.0;
    let lp = p.log_q();
    let omp = -lp.exp_m1();
    let np1 = (n + 1) as i32;
    let mut sum = CompensatedSum::new();
    let mut i = 0usize;
    loop {
        let e = (x + i as f64) * lp;
        let t = e.exp();
        let omt = -e.exp_m1();
        // every later term is below (1 + c_n t) t p^j / (1 - t)^{n+1}
        let tail = (1.0 + c_n * t) * t / (omp * omt.powi(np1));
        if tail <= prec.rel_tol() * sum.value() || t == 0.0 {
            break;
        }
        if i >= prec.max_terms() {
            return Err(QError::TruncationCapExceeded {
                max_terms: prec.max_terms(),
                achieved_bound: tail / sum.value().max(prec.abs_tol()),
            });
        }
        let pn = coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
        sum.add(t * pn / omt.powi(np1));
        i += 1;
    }
    let s = sum.value();
    let e = (x + i as f64) * lp;
    let t = e.exp();
    let tail = (1.0 + c_n * t) * t / (omp * (-e.exp_m1()).powi(np1));
    Ok((
        lp.powi(np1) * s,
        (tail / s.max(prec.abs_tol())).max(f64::MIN_POSITIVE),
    ))
}

/// `d^n/dx^n ψ_q(x)` for `n >= 1`.
pub fn digamma_q_deriv(x: f64, n: usize, q: &QParam, prec: &Precision) -> Result<DigammaValue> {
    check_x(x)?;
    if n == 0 {
        return digamma_q(x, q, prec);
    }
    if n > EULERIAN_CAP {
        return Err(QError::CapExceeded {
            n,
            cap: EULERIAN_CAP,
        });
    }
    let lq = q.log_q();
    let shift = if n == 1 { lq } else { 0.0 };
    let (value, rel_err) = match q.regime() {
        Regime::ClassicalLimit => {
            let v = classical::polygamma(n, x) + 0.5 * shift;
            (v, 1e-14 + lq * lq)
        }
        Regime::SuperUnit => {
            let (v, e) = deriv_sub(x, n, &q.reciprocal()?, prec)?;
            (v + shift, e)
        }
        _ => deriv_sub(x, n, q, prec)?,
    };
    Ok(DigammaValue {
        value,
        order: n,
        achieved_rel_err: rel_err,
    })
}

/// `∫_0^∞ sin(t log p) / ((e^{2πt} - 1)(1 - 2 p^x cos(t log p) + p^{2x})) dt` for `0 < p < 1`.
fn plana_integral(x: f64, p: &QParam, prec: &Precision) -> Result<f64> {
    let lp = p.log_q();
    let px = (x * lp).exp();
    let gap = -(x * lp).exp_m1(); // 1 - p^x
    let integrand = |t: f64| {
        let s = (0.5 * t * lp).sin();
        let denom = gap * gap + 4.0 * px * s * s;
        (t * lp).sin() / ((2.0 * PI * t).exp_m1() * denom)
    };
    // e^{-2πT} < quad_tol * 1e-3
    let cut = -(prec.quad_tol() * 1e-3).ln() / (2.0 * PI);
    let periods = (cut * lp.abs() / (2.0 * PI)).ceil() as usize;
    let panels = (2 * periods).clamp(4, 256);
    let q = quadrature::integrate(integrand, 0.0, cut, panels, prec.quad_tol(), prec.abs_tol())?;
    Ok(q.value)
}

/// `ψ_q(x)` from the Plana integral representation.
pub fn digamma_q_plana(x: f64, q: &QParam, prec: &Precision) -> Result<DigammaValue> {
    check_x(x)?;
    let lq = q.log_q();
    let value = match q.regime() {
        Regime::SubUnit => {
            let qx = (x * lq).exp();
            let integral = plana_integral(x, q, prec)?;
            -ln_one_minus_exp(lq) + 0.5 * lq * qx / (-(x * lq).exp_m1()) + ln_one_minus_exp(x * lq)
                - 2.0 * qx * lq * integral
        }
        Regime::SuperUnit => {
            // -½ log q - log(q-1) - (log q/2)/(q^x-1) + log(q^x-1) - 2 p^x log p ∫(...)_p
            let p = q.reciprocal()?;
            let lp = p.log_q();
            let px = (x * lp).exp();
            let integral = plana_integral(x, &p, prec)?;
            let ln_qx_m1 = x * lq + ln_one_minus_exp(-x * lq);
            -0.5 * lq - lq.exp_m1().ln() - 0.5 * lq / (x * lq).exp_m1() + ln_qx_m1
                - 2.0 * px * lp * integral
        }
        r => {
            return Err(QError::UnsupportedRegime {
                regime: r.name(),
                operation: "digamma_q_plana",
            })
        }
    };
    Ok(DigammaValue {
        value,
        order: 0,
        achieved_rel_err: prec.quad_tol(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn qp(q: f64) -> QParam {
        QParam::new(q).unwrap()
    }

    fn ints(p: &EulerianPoly) -> Vec<u64> {
        p.coeffs.iter().map(|c| c.to_u64().unwrap()).collect()
    }

    #[test]
    fn eulerian_table_values() {
        assert_eq!(ints(&eulerian(0).unwrap()), vec![1]);
        assert_eq!(ints(&eulerian(1).unwrap()), vec![1]);
        assert_eq!(ints(&eulerian(2).unwrap()), vec![1, 1]);
        assert_eq!(ints(&eulerian(3).unwrap()), vec![1, 4, 1]);
        assert_eq!(ints(&eulerian(4).unwrap()), vec![1, 11, 11, 1]);
        assert_eq!(ints(&eulerian(5).unwrap()), vec![1, 26, 66, 26, 1]);
        assert!(matches!(
            eulerian(65),
            Err(QError::CapExceeded { n: 65, cap: 64 })
        ));
    }

    #[test]
    fn eulerian_sum_is_factorial() {
        let mut fact = BigUint::one();
        for n in 1..=64usize {
            fact *= BigUint::from(n);
            let p = eulerian(n).unwrap();
            assert_eq!(p.value_at_one(), fact);
            assert_eq!(p.coeffs.len(), n.max(1));
            assert!(p.coeffs.iter().all(|c| !c.is_zero()));
            assert!(p.coeffs[0].is_one() && p.coeffs.last().unwrap().is_one());
        }
    }

    // (n t + 1) P + t (1 - t) P' with signed polynomial arithmetic
    fn symbolic_step(n: usize, p: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); p.len() + 2];
        for (j, c) in p.iter().enumerate() {
            out[j] += c;
            out[j + 1] += c * BigInt::from(n);
            if j >= 1 {
                let d = c * BigInt::from(j);
                out[j] += &d;
                out[j + 1] -= &d;
            }
        }
        while out.len() > 1 && out.last().unwrap().is_zero() {
            out.pop();
        }
        out
    }

    #[test]
    fn recursion_closure_and_palindromes() {
        for n in 0..=20 {
            let p = eulerian(n).unwrap();
            let signed: Vec<BigInt> = p.coeffs.iter().map(|c| BigInt::from(c.clone())).collect();
            let expect: Vec<BigInt> = eulerian(n + 1)
                .unwrap()
                .coeffs
                .into_iter()
                .map(BigInt::from)
                .collect();
            assert_eq!(symbolic_step(n, &signed), expect, "n={n}");
            let rev: Vec<_> = p.coeffs.iter().rev().cloned().collect();
            assert_eq!(rev, p.coeffs);
        }
    }

    #[test]
    fn concurrent_table_access() {
        let handles: Vec<_> = (0..8)
            .map(|i| std::thread::spawn(move || eulerian(10 + i).unwrap()))
            .collect();
        for (i, h) in handles.into_iter().enumerate() {
            assert_eq!(h.join().unwrap(), eulerian(10 + i).unwrap());
        }
    }

    #[test]
    fn digamma_reference_values() {
        let prec = Precision::default();
        let v = digamma_q(1.0, &qp(0.5), &prec).unwrap().value;
        assert!((v + 0.420_529_034_356_045_8).abs() < 1e-14);
        let v = digamma_q(1.5, &qp(0.5), &prec).unwrap().value;
        assert!((v - 0.034_858_966_328_876_19).abs() < 1e-14);
        let v = digamma_q(2.0, &qp(3.0), &prec).unwrap().value;
        assert!((v - 0.754_655_176_056_166_2).abs() < 1e-13);
        let a = digamma_q(2.0, &qp(2.0), &prec).unwrap().value;
        let b = digamma_q(2.0, &qp(0.5), &prec).unwrap().value + 0.5 * 2f64.ln();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn digamma_large_x_asymptotics() {
        let prec = Precision::default();
        let q = qp(0.5);
        let x = 80.0;
        let lq = q.log_q();
        let qx = (x * lq).exp();
        let expect = crate::qcore::ln_q_bracket(x, &q) + qx * lq / 2.0 / (1.0 - qx);
        assert!((digamma_q(x, &q, &prec).unwrap().value - expect).abs() < 1e-12);
    }

    #[test]
    fn derivative_signs_and_finite_differences() {
        let prec = Precision::default();
        assert!(digamma_q_deriv(2.0, 1, &qp(0.5), &prec).unwrap().value > 0.0);
        assert!(digamma_q_deriv(3.0, 2, &qp(0.5), &prec).unwrap().value < 0.0);
        let q = qp(0.7);
        let h = 1e-4;
        let fd = (digamma_q(1.5 + h, &q, &prec).unwrap().value
            - digamma_q(1.5 - h, &q, &prec).unwrap().value)
            / (2.0 * h);
        assert!((fd - digamma_q_deriv(1.5, 1, &q, &prec).unwrap().value).abs() < 1e-6);
    }

    #[test]
    fn super_unit_derivatives_transport() {
        let prec = Precision::default();
        let q = qp(2.5);
        let p = qp(0.4);
        let d1 = digamma_q_deriv(1.3, 1, &q, &prec).unwrap().value;
        assert!((d1 - digamma_q_deriv(1.3, 1, &p, &prec).unwrap().value - q.log_q()).abs() < 1e-14);
        let d3 = digamma_q_deriv(1.3, 3, &q, &prec).unwrap().value;
        let e3 = digamma_q_deriv(1.3, 3, &p, &prec).unwrap().value;
        assert!((d3 - e3).abs() < 1e-14 * e3.abs());
    }

    #[test]
    fn plana_matches_series() {
        let prec = Precision::default();
        for (x, q) in [(1.5, 0.5), (1.0, 0.3), (2.0, 3.0), (0.2, 0.9)] {
            let s = digamma_q(x, &qp(q), &prec).unwrap().value;
            let p = digamma_q_plana(x, &qp(q), &prec).unwrap().value;
            assert!((s - p).abs() < 1e-10, "x={x} q={q}: {s} vs {p}");
        }
        assert!(digamma_q_plana(1.0, &qp(1.0), &prec).is_err());
    }

    #[test]
    fn classical_limit_digamma() {
        let prec = Precision::default();
        let v = digamma_q(1.0, &qp(1.0), &prec).unwrap().value;
        assert!((v + 0.577_215_664_901_532_9).abs() < 1e-13);
    }
}
