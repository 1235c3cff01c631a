//! Closed-form solutions of the two functional-equation families
//!
//! ```text
//! f(x + w) = R(x)^k f(x),      f(w) = 1          (gamma type)
//! f(x + w) = R(x)^k / f(x)                       (reciprocal type)
//! R(x) = prod [x + a_i]_q / prod [x + b_j]_q
//! ```
//!
//! and truncated-product oracles for both that never touch `gamma_q`.

use crate::error::{QError, Result};
use crate::qcore::{ln_one_minus_exp, ln_q_bracket, CompensatedSum, Precision, QParam, Regime};
use crate::qgamma::log_gamma_q;
use crate::qquotients::{log_g_q_func, QuotientSpec};

pub const ORACLE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FEKind {
    GammaType,
    ReciprocalType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FESolution {
    pub spec: QuotientSpec,
    pub q: QParam,
    pub kind: FEKind,
}

fn require_regular(q: &QParam, operation: &'static str) -> Result<()> {
    match q.regime() {
        Regime::SubUnit | Regime::SuperUnit => Ok(()),
        r => Err(QError::UnsupportedRegime {
            regime: r.name(),
            operation,
        }),
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(QError::Domain(format!("solution needs x > 0, got {x}")));
    }
    Ok(())
}

pub fn solve_gamma_type(spec: &QuotientSpec, q: &QParam) -> Result<FESolution> {
    spec.validate()?;
    require_regular(q, "solve_gamma_type")?;
    Ok(FESolution {
        spec: spec.clone(),
        q: *q,
        kind: FEKind::GammaType,
    })
}

/// `a` plays the role of `u` offsets and `b` of `v` offsets.
pub fn solve_reciprocal_type(spec: &QuotientSpec, q: &QParam) -> Result<FESolution> {
    spec.validate()?;
    require_regular(q, "solve_reciprocal_type")?;
    Ok(FESolution {
        spec: spec.clone(),
        q: *q,
        kind: FEKind::ReciprocalType,
    })
}

impl FESolution {
    /// `ln R(x)^k`.
    pub fn log_rhs_factor(&self, x: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for a in &self.spec.a {
            acc.add(ln_q_bracket(x + a, &self.q));
        }
        for b in &self.spec.b {
            acc.add(-ln_q_bracket(x + b, &self.q));
        }
        self.spec.k * acc.value()
    }

    pub fn log_eval(&self, x: f64, prec: &Precision) -> Result<f64> {
        check_x(x)?;
        let QuotientSpec { k, w, a, b } = &self.spec;
        let qw = self.q.pow(*w)?;
        let ln_w = ln_q_bracket(*w, &self.q);
        let mut acc = CompensatedSum::new();
        match self.kind {
            FEKind::GammaType => {
                for ai in a {
                    acc.add(log_gamma_q((x + ai) / w, &qw, prec)?);
                    acc.add(-log_gamma_q((w + ai) / w, &qw, prec)?);
                }
                for bj in b {
                    acc.add(log_gamma_q((w + bj) / w, &qw, prec)?);
                    acc.add(-log_gamma_q((x + bj) / w, &qw, prec)?);
                }
                acc.add((a.len() as f64 - b.len() as f64) * (x / w - 1.0) * ln_w);
            }
            FEKind::ReciprocalType => {
                acc.add(0.5 * (a.len() as f64 - b.len() as f64) * ln_w);
                for bj in b {
                    acc.add(log_g_q_func((x + bj) / w, &qw, prec)?);
                }
                for ai in a {
                    acc.add(-log_g_q_func((x + ai) / w, &qw, prec)?);
                }
            }
        }
        Ok(k * acc.value())
    }

    pub fn eval(&self, x: f64, prec: &Precision) -> Result<f64> {
        Ok(self.log_eval(x, prec)?.exp())
    }

    /// Relative residual of the defining equation at `x`.
    pub fn residual(&self, x: f64, prec: &Precision) -> Result<f64> {
        let w = self.spec.w;
        let next = self.log_eval(x + w, prec)?;
        let here = self.log_eval(x, prec)?;
        let d = match self.kind {
            FEKind::GammaType => next - here - self.log_rhs_factor(x),
            FEKind::ReciprocalType => next + here - self.log_rhs_factor(x),
        };
        Ok(d.exp_m1().abs())
    }

    /// Residual of the rescaled equation satisfied by
    /// `g(y) = [w]_q^{k(r-s)(1-y)} F(w y)` with base `q^w` and offsets `a/w`, `b/w`.
    pub fn w_reduction_residual(&self, y: f64, prec: &Precision) -> Result<f64> {
        self.require_gamma_type("w_reduction_residual")?;
        check_x(y)?;
        let QuotientSpec { k, w, a, b } = &self.spec;
        let rs = a.len() as f64 - b.len() as f64;
        let ln_w = ln_q_bracket(*w, &self.q);
        let log_g =
            |y: f64| -> Result<f64> { Ok(k * rs * (1.0 - y) * ln_w + self.log_eval(w * y, prec)?) };
        let qw = self.q.pow(*w)?;
        let mut rhs = CompensatedSum::new();
        for ai in a {
            rhs.add(ln_q_bracket(y + ai / w, &qw));
        }
        for bj in b {
            rhs.add(-ln_q_bracket(y + bj / w, &qw));
        }
        let d = log_g(y + 1.0)? - log_g(y)? - k * rhs.value();
        Ok(d.exp_m1().abs())
    }

    /// Compares `q^{k(w-x)((r-s)(x-2) + 2(A-B))/(2w)} F_q(x)` with the closed form over `1/q`.
    pub fn transport_residual(&self, x: f64, prec: &Precision) -> Result<f64> {
        self.require_gamma_type("transport_residual")?;
        check_x(x)?;
        let QuotientSpec { k, w, a, b } = &self.spec;
        let rs = a.len() as f64 - b.len() as f64;
        let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
        let exponent = k * (w - x) / (2.0 * w) * (rs * (x - 2.0) + 2.0 * (sa - sb));
        let h = exponent * self.q.log_q() + self.log_eval(x, prec)?;
        let other = solve_gamma_type(&self.spec, &self.q.reciprocal()?)?;
        Ok((h - other.log_eval(x, prec)?).exp_m1().abs())
    }

    fn require_gamma_type(&self, operation: &'static str) -> Result<()> {
        if self.kind != FEKind::GammaType {
            return Err(QError::UnsupportedRegime {
                regime: "reciprocal-type",
                operation,
            });
        }
        Ok(())
    }
}

fn oracle_checks(q: &QParam, x: f64, n_max: usize, operation: &'static str) -> Result<()> {
    if !matches!(q.regime(), Regime::SubUnit | Regime::ZeroLimit) {
        return Err(QError::UnsupportedRegime {
            regime: q.regime().name(),
            operation,
        });
    }
    check_x(x)?;
    if n_max == 0 || n_max > ORACLE_CAP {
        return Err(QError::CapExceeded {
            n: n_max,
            cap: ORACLE_CAP,
        });
    }
    Ok(())
}

/// `ln (q^y; q^w)_n`.
fn log_poch_step(y: f64, w: f64, lq: f64, n: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for m in 0..n {
        acc.add(ln_one_minus_exp((y + m as f64 * w) * lq));
    }
    acc.value()
}

/// Gamma-type solution at `0 < x <= w` from the `n_max`-truncated limit
///
/// ```text
/// [ (1-q)^{(s-r)(x/w-1)} prod_i (q^{w+a_i}; q^w)_n / (q^{x+a_i}; q^w)_n
///                        prod_j (q^{x+b_j}; q^w)_n / (q^{w+b_j}; q^w)_n ]^k
/// ```
pub fn sandwich_oracle_gamma(spec: &QuotientSpec, q: &QParam, x: f64, n_max: usize) -> Result<f64> {
    spec.validate()?;
    oracle_checks(q, x, n_max, "sandwich_oracle_gamma")?;
    let w = spec.w;
    if x > w {
        return Err(QError::Domain(format!(
            "oracle needs 0 < x <= w = {w}, got {x}"
        )));
    }
    let lq = q.log_q();
    let mut acc = CompensatedSum::new();
    acc.add((spec.s() as f64 - spec.r() as f64) * (x / w - 1.0) * ln_one_minus_exp(lq));
    for a in &spec.a {
        acc.add(log_poch_step(w + a, w, lq, n_max));
        acc.add(-log_poch_step(x + a, w, lq, n_max));
    }
    for b in &spec.b {
        acc.add(log_poch_step(x + b, w, lq, n_max));
        acc.add(-log_poch_step(w + b, w, lq, n_max));
    }
    Ok((spec.k * acc.value()).exp())
}

/// Reciprocal-type solution from `(1-q)^{k(v-u)/2} prod_{m=0}^{n_max} P(x+(2m+1)w)/P(x+2mw)`
/// with `P(y) = (prod [y + b_j]_q / prod [y + a_i]_q)^k`.
pub fn sandwich_oracle_reciprocal(
    spec: &QuotientSpec,
    q: &QParam,
    x: f64,
    n_max: usize,
) -> Result<f64> {
    spec.validate()?;
    oracle_checks(q, x, n_max, "sandwich_oracle_reciprocal")?;
    let w = spec.w;
    let lq = q.log_q();
    // [y]_q = (1 - q^y)/(1 - q); the (1 - q) factors cancel inside each ratio
    let ln_p = |y: f64| -> f64 {
        let mut acc = CompensatedSum::new();
        for b in &spec.b {
            acc.add(ln_one_minus_exp((y + b) * lq));
        }
        for a in &spec.a {
            acc.add(-ln_one_minus_exp((y + a) * lq));
        }
        acc.value()
    };
    let mut acc = CompensatedSum::new();
    for m in 0..=n_max {
        let y = x + 2.0 * m as f64 * w;
        acc.add(ln_p(y + w) - ln_p(y));
    }
    let pref = 0.5 * (spec.s() as f64 - spec.r() as f64) * ln_one_minus_exp(lq);
    Ok((spec.k * (pref + acc.value())).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qgamma::gamma_q;
    use crate::qquotients::{beta_q, g_q_func};

    fn qp(q: f64) -> QParam {
        QParam::new(q).unwrap()
    }

    fn spec(k: f64, w: f64, a: &[f64], b: &[f64]) -> QuotientSpec {
        QuotientSpec::new(k, w, a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn gamma_type_collapses_to_gamma() {
        let prec = Precision::default();
        for q in [0.4, 3.0] {
            let sol = solve_gamma_type(&spec(1.0, 1.0, &[0.0], &[]), &qp(q)).unwrap();
            for x in [0.3, 2.2, 7.0] {
                let g = gamma_q(x, &qp(q), &prec).unwrap().value;
                assert!((sol.eval(x, &prec).unwrap() - g).abs() < 1e-13 * g);
            }
        }
    }

    #[test]
    fn gamma_type_scaled_beta() {
        let prec = Precision::default();
        let q = qp(0.6);
        let y = 1.4;
        let sol = solve_gamma_type(&spec(1.0, 1.0, &[0.0], &[y]), &q).unwrap();
        let x = 2.3;
        let lhs = sol.eval(x, &prec).unwrap() * beta_q(1.0, y, &q, &prec).unwrap();
        let rhs = beta_q(x, y, &q, &prec).unwrap();
        assert!((lhs - rhs).abs() < 1e-13 * rhs);
    }

    #[test]
    fn gamma_type_general() {
        let prec = Precision::default();
        let sol = solve_gamma_type(&spec(2.0, 2.0, &[0.5], &[1.5]), &qp(0.5)).unwrap();
        assert_eq!(sol.eval(2.0, &prec).unwrap(), 1.0);
        for x in [0.5, 1.0, 3.7] {
            assert!(sol.residual(x, &prec).unwrap() <= 1e-12);
            assert!(sol.w_reduction_residual(x, &prec).unwrap() <= 1e-11);
            assert!(sol.transport_residual(x, &prec).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn reciprocal_type_examples() {
        let prec = Precision::default();
        let q = qp(0.5);
        let inv = solve_reciprocal_type(&spec(1.0, 1.0, &[0.0], &[]), &q).unwrap();
        let direct = solve_reciprocal_type(&spec(1.0, 1.0, &[], &[0.0]), &q).unwrap();
        for x in [0.4, 1.0, 2.5] {
            let g = g_q_func(x, &q, &prec).unwrap();
            assert!((inv.eval(x, &prec).unwrap() * g - 1.0).abs() < 1e-14);
            assert!((direct.eval(x, &prec).unwrap() - g).abs() < 1e-14 * g);
        }
        let sol = solve_reciprocal_type(&spec(2.0, 1.0, &[0.0], &[1.0]), &q).unwrap();
        for x in [0.3, 1.0, 2.6] {
            assert!(sol.residual(x, &prec).unwrap() <= 1e-12);
        }
        // w != 1 and q > 1
        let sol = solve_reciprocal_type(&spec(1.5, 2.5, &[0.2, 1.0], &[0.7]), &qp(1.7)).unwrap();
        assert!(sol.residual(0.9, &prec).unwrap() <= 1e-12);
    }

    #[test]
    fn gamma_oracle_matches_closed_form() {
        let prec = Precision::default();
        let s = spec(1.0, 1.0, &[0.0], &[]);
        let closed = solve_gamma_type(&s, &qp(0.5))
            .unwrap()
            .eval(0.5, &prec)
            .unwrap();
        let oracle = sandwich_oracle_gamma(&s, &qp(0.5), 0.5, 200).unwrap();
        assert!((closed - oracle).abs() < 1e-10);
        let s = spec(1.0, 1.0, &[0.0], &[1.0]);
        let closed = solve_gamma_type(&s, &qp(0.3))
            .unwrap()
            .eval(0.5, &prec)
            .unwrap();
        let oracle = sandwich_oracle_gamma(&s, &qp(0.3), 0.5, 100).unwrap();
        assert!((closed - oracle).abs() < 1e-10);
        for n in [1, 5, 50] {
            assert_eq!(
                sandwich_oracle_gamma(&spec(1.3, 1.5, &[0.2], &[0.9]), &qp(0.6), 1.5, n).unwrap(),
                1.0
            );
        }
        assert!(sandwich_oracle_gamma(&s, &qp(0.3), 1.5, 10).is_err());
        assert!(sandwich_oracle_gamma(&s, &qp(2.0), 0.5, 10).is_err());
        assert!(matches!(
            sandwich_oracle_gamma(&s, &qp(0.3), 0.5, 0),
            Err(QError::CapExceeded { .. })
        ));
    }

    #[test]
    fn reciprocal_oracle_matches_closed_form() {
        let prec = Precision::default();
        let q = qp(0.5);
        let s = spec(1.0, 1.0, &[0.0], &[]);
        for x in [1.0, 2.5] {
            let o = sandwich_oracle_reciprocal(&s, &q, x, 100).unwrap();
            assert!((o - 1.0 / g_q_func(x, &q, &prec).unwrap()).abs() < 1e-9);
        }
        let s = spec(2.0, 1.0, &[0.0], &[0.5]);
        let q4 = qp(0.4);
        let closed = solve_reciprocal_type(&s, &q4)
            .unwrap()
            .eval(0.7, &prec)
            .unwrap();
        let o = sandwich_oracle_reciprocal(&s, &q4, 0.7, 150).unwrap();
        assert!((o - closed).abs() < 1e-9);
        let s = spec(0.7, 1.8, &[0.3, 1.1], &[2.0]);
        let closed = solve_reciprocal_type(&s, &q4)
            .unwrap()
            .eval(1.2, &prec)
            .unwrap();
        let o = sandwich_oracle_reciprocal(&s, &q4, 1.2, 200).unwrap();
        assert!((o - closed).abs() < 1e-9 * closed);
    }

    #[test]
    fn boundary_regimes_rejected() {
        let s = spec(1.0, 1.0, &[0.0], &[]);
        assert!(solve_gamma_type(&s, &qp(1.0)).is_err());
        assert!(solve_reciprocal_type(&s, &qp(1e-13)).is_err());
    }
}
