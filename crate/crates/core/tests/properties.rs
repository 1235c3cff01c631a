use proptest::prelude::*;

use qeuler::funceq::{solve_gamma_type, solve_reciprocal_type};
use qeuler::qcore::{log_qpoch_inf, qpoch_finite, qpoch_inf};
use qeuler::qdigamma::eulerian;
use qeuler::qgamma::{gamma_q_reciprocal_identity_residual, recurrence_residual};
use qeuler::qquotients::{log_beta_q, log_g_q_func, QuotientSpec};
use qeuler::qstirling::{debye_integral, debye_series};
use qeuler::reflection::{gosper_sin_q, pi_approx, sin_approx, SinVariant};
use qeuler::{Precision, QParam};

fn prec() -> Precision {
    Precision::default()
}

fn sub_unit_q() -> impl Strategy<Value = f64> {
    0.02f64..0.98
}

fn any_q() -> impl Strategy<Value = f64> {
    prop_oneof![0.02f64..0.98, 1.02f64..8.0]
}

fn qp(q: f64) -> QParam {
    QParam::new(q).unwrap()
}

fn offsets() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..3.0, 0..3)
}

fn spec() -> impl Strategy<Value = QuotientSpec> {
    (offsets(), offsets(), 0.5f64..2.0, 0.5f64..2.0)
        .prop_filter("needs at least one offset", |(a, b, _, _)| {
            !a.is_empty() || !b.is_empty()
        })
        .prop_map(|(a, b, k, w)| QuotientSpec::new(k, w, a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_product_recurrence(a in -2.0f64..2.0, q in any_q(), n in 0usize..40) {
        let q = qp(q);
        let next = qpoch_finite(a, &q, n + 1);
        let step = qpoch_finite(a, &q, n) * (1.0 - a * q.q().powi(n as i32));
        prop_assume!(next.is_finite());
        prop_assert!((next - step).abs() <= 2.0 * f64::EPSILON * next.abs());
    }

    #[test]
    fn infinite_product_splits(a in -0.9f64..0.9, q in sub_unit_q(), n in prop::sample::select(vec![1usize, 5, 20])) {
        let q = qp(q);
        let whole = qpoch_inf(a, &q, &prec()).unwrap();
        let split = qpoch_finite(a, &q, n) * qpoch_inf(a * q.q().powi(n as i32), &q, &prec()).unwrap();
        prop_assert!((whole - split).abs() <= 1e-12 * whole.abs());
    }

    #[test]
    fn truncation_stays_within_partial_products(a in 0.01f64..0.99, q in sub_unit_q()) {
        let q = qp(q);
        let full = log_qpoch_inf(a, &q, &prec()).unwrap();
        prop_assert!(full.tail_bound <= prec().rel_tol());
        // partial products decrease and the limit sits below each of them
        let partial: Vec<f64> = (0..6).map(|n| qpoch_finite(a, &q, n)).collect();
        prop_assert!(partial.windows(2).all(|w| w[1] <= w[0]));
        let v = full.value();
        prop_assert!(v <= partial[5] * (1.0 + 1e-14));
    }

    #[test]
    fn gamma_recurrence_holds(x in 0.01f64..40.0, q in any_q()) {
        prop_assert!(recurrence_residual(x, &qp(q), &prec()).unwrap() <= 1e-12);
    }

    #[test]
    fn gamma_inversion_identity(x in 0.01f64..40.0, q in any_q()) {
        prop_assert!(gamma_q_reciprocal_identity_residual(x, &qp(q), &prec()).unwrap() <= 1e-12);
    }

    #[test]
    fn beta_is_symmetric(x in 0.05f64..8.0, y in 0.05f64..8.0, q in any_q()) {
        let q = qp(q);
        let d = log_beta_q(x, y, &q, &prec()).unwrap() - log_beta_q(y, x, &q, &prec()).unwrap();
        prop_assert!(d.abs() <= 1e-13);
    }

    #[test]
    fn g_solves_reciprocal_equation(x in 0.05f64..20.0, q in any_q()) {
        let q = qp(q);
        let lhs = -log_g_q_func(x + 1.0, &q, &prec()).unwrap();
        let rhs = qeuler::qcore::q_bracket(x, &q).ln() + log_g_q_func(x, &q, &prec()).unwrap();
        prop_assert!((lhs - rhs).exp_m1().abs() <= 1e-12);
    }

    #[test]
    fn eulerian_sums_to_factorial(n in 1usize..=30) {
        let p = eulerian(n).unwrap();
        let fact = (1..=n as u64).fold(num_bigint::BigUint::from(1u8), |acc, k| acc * k);
        prop_assert_eq!(p.value_at_one(), fact);
    }

    #[test]
    fn debye_paths_agree(x in 0.0f64..80.0) {
        prop_assert!((debye_integral(x, &prec()).unwrap() - debye_series(x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn pi_identity_is_exact(q in prop_oneof![0.05f64..0.95, 1.05f64..10.0]) {
        prop_assert!((pi_approx(&qp(q), &prec(), true).unwrap() - std::f64::consts::PI).abs() <= 1e-11);
    }

    #[test]
    fn half_shift_sine_is_inversion_invariant(x in 0.01f64..0.99, q in 0.1f64..0.95) {
        let a = sin_approx(x, &qp(q), SinVariant::HalfShift, &prec()).unwrap();
        let b = sin_approx(x, &qp(1.0 / q), SinVariant::HalfShift, &prec()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn gosper_sine_is_positive(z in 0.001f64..0.999, q in sub_unit_q()) {
        prop_assert!(gosper_sin_q(z, &qp(q), &prec()).unwrap() > 0.0);
    }

    #[test]
    fn gamma_type_solutions(spec in spec(), q in any_q(), x in 0.1f64..6.0) {
        let q = qp(q);
        let sol = solve_gamma_type(&spec, &q).unwrap();
        prop_assert!(sol.residual(x, &prec()).unwrap() <= 1e-11);
        prop_assert!((sol.eval(spec.w, &prec()).unwrap() - 1.0).abs() <= 1e-13);
    }

    #[test]
    fn reciprocal_type_solutions(spec in spec(), q in any_q(), x in 0.1f64..6.0) {
        let sol = solve_reciprocal_type(&spec, &qp(q)).unwrap();
        prop_assert!(sol.residual(x, &prec()).unwrap() <= 1e-11);
    }

    #[test]
    fn json_output_round_trips(x in 0.05f64..30.0, q in any_q()) {
        let args = ["qeuler", "eval", "--fn", "log-gamma", "--q", &q.to_string(), "--x", &x.to_string(), "--format", "json"];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        prop_assert_eq!(qeuler::cli::run(args, &mut out, &mut err), 0);
        let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
        let direct = qeuler::qgamma::log_gamma_q(x, &qp(q), &prec()).unwrap();
        prop_assert_eq!(v["value"].as_f64().unwrap(), direct);
    }
}
