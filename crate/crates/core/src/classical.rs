//! Classical Γ, ψ and polygamma kernels backing the `q -> 1` regime.

use statrs::function::gamma;

pub fn ln_gamma(x: f64) -> f64 {
    gamma::ln_gamma(x)
}

pub fn digamma(x: f64) -> f64 {
    gamma::digamma(x)
}

// B_2, B_4, ..., B_24
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// `psi^(n)(x)` for `n >= 1`, `x > 0`.
///
/// Upward recurrence to `y >= max(20, 2n)` followed by the Euler-Maclaurin
/// asymptotic series.
pub fn polygamma(n: usize, x: f64) -> f64 {
    assert!(n >= 1, "polygamma order must be positive");
    let nf = n as f64;
    let factorial_n: f64 = (1..=n).map(|k| k as f64).product();
    let target = 20f64.max(2.0 * nf);
    let mut y = x;
    let mut acc = 0.0;
    while y < target {
        acc += factorial_n / y.powf(nf + 1.0);
        y += 1.0;
    }
    // (n-1)!/y^n + n!/(2 y^{n+1}) + sum B_{2k} (2k+n-1)!/((2k)! y^{2k+n})
    let mut asym = factorial_n / nf / y.powf(nf) + factorial_n / (2.0 * y.powf(nf + 1.0));
    // ratio (2k+n-1)!/(2k)! built incrementally
    let mut ratio = factorial_n / nf; // (n-1)!/0! for k = 0
    for (i, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = (i + 1) as f64;
        ratio *= (2.0 * k + nf - 2.0) * (2.0 * k + nf - 1.0) / ((2.0 * k - 1.0) * (2.0 * k));
        let term = b * ratio / y.powf(2.0 * k + nf);
        asym += term;
        if term.abs() < 1e-18 * asym.abs() {
            break;
        }
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    sign * (acc + asym)
}
