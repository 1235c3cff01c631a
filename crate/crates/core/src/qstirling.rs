//! Moak's q-Stirling expansion of `log Γ_q`.

use std::f64::consts::PI;

use crate::error::{QError, Result};
use crate::qcore::{ln_one_minus_exp, log_qpoch_inf_pow, Precision, QParam, Regime};
use crate::qgamma::{half_product_times, log_gamma_q};
use crate::quadrature::integrate;

const ZETA2: f64 = PI * PI / 6.0;
const SERIES_SWITCH: f64 = 0.5;
// B_{2k} / (2k)! for k = 1..10
const BERNOULLI_OVER_FACT: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
];

/// The pieces of `log Γ_q(x) = main_term + integral_term + constant + mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirlingParts {
    pub main_term: f64,
    pub integral_term: f64,
    pub constant: f64,
    pub mu: f64,
}

fn debye_integrand(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        u / u.exp_m1()
    }
}

fn quad_rel_tol(prec: &Precision) -> f64 {
    (prec.quad_tol() * 1e-2).max(1e-15)
}

fn integrate_debye(lo: f64, hi: f64, prec: &Precision) -> Result<f64> {
    let panels = ((hi - lo).min(200.0) / 2.0).ceil().max(1.0) as usize;
    Ok(integrate(debye_integrand, lo, hi, panels, quad_rel_tol(prec), 1e-300)?.value)
}

fn check_debye_arg(x: f64) -> Result<()> {
    if !(x >= 0.0) || x.is_infinite() {
        return Err(QError::Domain(format!(
            "Debye integral needs a finite X >= 0, got {x}"
        )));
    }
    Ok(())
}

/// `∫_0^X u/(e^u - 1) du` by adaptive quadrature.
pub fn debye_integral(x: f64, prec: &Precision) -> Result<f64> {
    check_debye_arg(x)?;
    integrate_debye(0.0, x, prec)
}

/// Quadrature-free evaluation of the same integral:
/// `π²/6 - sum_{k>=1} e^{-kX}(X/k + 1/k²)` for `X >= 1/2`, and the Bernoulli
/// expansion `X - X²/4 + sum B_{2k} X^{2k+1}/((2k+1)(2k)!)` below.
pub fn debye_series(x: f64) -> Result<f64> {
    check_debye_arg(x)?;
    if x < SERIES_SWITCH {
        let x2 = x * x;
        let mut pow = x * x2;
        let mut acc = 0.0;
        for (k, c) in BERNOULLI_OVER_FACT.iter().enumerate() {
            acc += c * pow / (2 * k + 3) as f64;
            pow *= x2;
        }
        return Ok(x - 0.25 * x2 + acc);
    }
    let mut tail = 0.0;
    let mut k = 1.0;
    loop {
        let term = (-k * x).exp() * (x / k + 1.0 / (k * k));
        tail += term;
        if term < 1e-18 * ZETA2 {
            break;
        }
        k += 1.0;
    }
    Ok(ZETA2 - tail)
}

fn sub_unit(q: &QParam, operation: &'static str) -> Result<()> {
    match q.regime() {
        Regime::SubUnit | Regime::ZeroLimit => Ok(()),
        r => Err(QError::UnsupportedRegime {
            regime: r.name(),
            operation,
        }),
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(QError::Domain(format!(
            "x must be positive and finite, got {x}"
        )));
    }
    Ok(())
}

/// `M_q = log sqrt(1-q) + log (q;q)_inf - π²/(6 log q)`.
pub fn m_q_constant(q: &QParam, prec: &Precision) -> Result<f64> {
    sub_unit(q, "m_q_constant")?;
    let lq = q.log_q();
    Ok(0.5 * ln_one_minus_exp(lq) + log_qpoch_inf_pow(1.0, q, prec)?.log_abs - ZETA2 / lq)
}

fn parts_without_mu(x: f64, q: &QParam, prec: &Precision) -> Result<(f64, f64, f64)> {
    let lq = q.log_q();
    let main = (x - 0.5) * (ln_one_minus_exp(x * lq) - ln_one_minus_exp(lq));
    let integral = debye_integral(-x * lq, prec)? / lq;
    Ok((main, integral, m_q_constant(q, prec)?))
}

/// Splits `log Γ_q(x)` into the Stirling terms and the remainder `mu`.
pub fn mu_q(x: f64, q: &QParam, prec: &Precision) -> Result<StirlingParts> {
    check_x(x)?;
    sub_unit(q, "mu_q")?;
    let (main_term, integral_term, constant) = parts_without_mu(x, q, prec)?;
    let mu = log_gamma_q(x, q, prec)? - main_term - integral_term - constant;
    Ok(StirlingParts {
        main_term,
        integral_term,
        constant,
        mu,
    })
}

/// `mu_q(x) - mu_q(x+1)` in closed form:
/// `(x+½) log((1-q^{x+1})/(1-q^x)) + (1/log q) ∫_{-x log q}^{-(x+1) log q} u/(e^u-1) du`.
pub fn g_q_decrement(x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    check_x(x)?;
    sub_unit(q, "g_q_decrement")?;
    let lq = q.log_q();
    let log_ratio = ln_one_minus_exp((x + 1.0) * lq) - ln_one_minus_exp(x * lq);
    let segment = integrate_debye(-x * lq, -(x + 1.0) * lq, prec)?;
    Ok((x + 0.5) * log_ratio + segment / lq)
}

/// `log Γ_q(x)` without the remainder. For `q > 1` the sub-unit expansion at
/// `1/q` is combined with `Γ_q(x) = q^{(x-1)(x-2)/2} Γ_{1/q}(x)`.
pub fn log_gamma_q_asymptotic(x: f64, q: &QParam, prec: &Precision) -> Result<f64> {
    check_x(x)?;
    match q.regime() {
        Regime::SuperUnit => {
            let p = q.reciprocal()?;
            let (m, i, c) = parts_without_mu(x, &p, prec)?;
            Ok(half_product_times(x - 1.0, x - 2.0, q.log_q()) + m + i + c)
        }
        _ => {
            sub_unit(q, "log_gamma_q_asymptotic")?;
            let (m, i, c) = parts_without_mu(x, q, prec)?;
            Ok(m + i + c)
        }
    }
}
