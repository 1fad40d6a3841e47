use kchain::qseries::{
    basic_hypergeometric, basic_hypergeometric_exact, q_number, q_pochhammer, q_pochhammer_log, vwp_pair_reduce,
    LogSign, SeriesError,
};
use num_rational::BigRational;
use num_traits::{One, Pow};
use proptest::prelude::*;

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn nonunit_q() -> impl Strategy<Value = BigRational> {
    (1i64..=9, 1i64..=9).prop_filter("q != 1", |(a, b)| a != b).prop_map(|(a, b)| rat(a, b))
}

proptest! {
    #[test]
    fn pochhammer_step(a in -20i64..20, b in 1i64..20, q in nonunit_q(), n in 0usize..12) {
        let a = rat(a, b);
        let next = q_pochhammer(&a, &q, n + 1);
        let step = q_pochhammer(&a, &q, n) * (BigRational::one() - &a * Pow::pow(&q, n as i32));
        prop_assert_eq!(next, step);
    }

    #[test]
    fn log_pochhammer_matches_exact(a in -20i64..20, b in 1i64..20, q in nonunit_q(), n in 0usize..12) {
        let a = rat(a, b);
        let exact = LogSign::from_ratio(&q_pochhammer(&a, &q, n));
        let logged = q_pochhammer_log(&a, &q, n);
        prop_assert_eq!(exact.sign(), logged.sign());
        if !exact.is_zero() {
            prop_assert!((exact.log_abs() - logged.log_abs()).abs() < 1e-10 * (1.0 + exact.log_abs().abs()));
        }
    }

    #[test]
    fn q_number_is_a_geometric_sum(n in 0i64..15, q in nonunit_q()) {
        let sum = (0..n).fold(BigRational::from_integer(0.into()), |acc, k| acc + Pow::pow(&q, k as i32));
        prop_assert_eq!(q_number(n, &q), sum);
    }

    #[test]
    fn chu_vandermonde(n in 0usize..8, c in 1i64..30, d in 1i64..7, q in nonunit_q()) {
        let c = rat(c, d);
        prop_assume!((0..=n as i32).all(|k| !(&c * Pow::pow(&q, k)).is_one()));
        let lhs = basic_hypergeometric_exact(&[Pow::pow(&q, -(n as i32)), rat(3, 7)], &[c.clone()], &q, &q);
        let lhs = match lhs {
            Ok(v) => v,
            Err(SeriesError::DenominatorZero { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let b = rat(3, 7);
        let rhs = q_pochhammer(&(&c / &b), &q, n) / q_pochhammer(&c, &q, n) * Pow::pow(&b, n as i32);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pair_reduction(a in 1i64..40, b in 1i64..40, q in nonunit_q(), n in 0usize..10) {
        let a = rat(a, b);
        prop_assume!(!a.is_one());
        let v = vwp_pair_reduce(&a, &q, n).unwrap();
        prop_assert_eq!(v * (BigRational::one() - &a), BigRational::one() - &a * Pow::pow(&q, 2 * n as i32));
    }

    #[test]
    fn logsign_products(x in -1e6f64..1e6, y in -1e6f64..1e6) {
        prop_assume!(x.abs() > 1e-6 && y.abs() > 1e-6);
        let p = (LogSign::from_f64(x) * LogSign::from_f64(y)).to_f64();
        prop_assert!((p - x * y).abs() <= 1e-12 * (x * y).abs());
        let d = (LogSign::from_f64(x) / LogSign::from_f64(y)).to_f64();
        prop_assert!((d - x / y).abs() <= 1e-12 * (x / y).abs());
    }

    #[test]
    fn float_series_tracks_exact(n in 0usize..6, q in nonunit_q()) {
        let qf = q.numer().to_string().parse::<f64>().unwrap() / q.denom().to_string().parse::<f64>().unwrap();
        prop_assume!((0.3..3.0).contains(&qf));
        let numer = [Pow::pow(&q, -(n as i32)), rat(1, 2)];
        let denom = [rat(7, 11)];
        let exact = basic_hypergeometric_exact(&numer, &denom, &q, &q).unwrap();
        let float = basic_hypergeometric(&[qf.powi(-(n as i32)), 0.5], &[7.0 / 11.0], qf, qf).unwrap();
        let e = LogSign::from_ratio(&exact).to_f64();
        prop_assert!((e - float).abs() < 1e-8 * (1.0 + e.abs()), "{} vs {}", e, float);
    }
}

#[test]
fn non_terminating_series_is_rejected() {
    let q = rat(1, 2);
    let err = basic_hypergeometric_exact(&[rat(3, 7)], &[rat(5, 3)], &q, &q).unwrap_err();
    assert_eq!(err, SeriesError::NonTerminating);
}
