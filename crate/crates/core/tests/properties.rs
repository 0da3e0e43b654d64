use klsc::asymptotics::series::{int, rat};
use klsc::asymptotics::LogTaylorSeries;
use klsc::{parse, Expr};
use num_rational::BigRational;
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::z()),
        (-9i64..10).prop_map(Expr::int),
        (-9i64..10, 1i64..8).prop_map(|(p, q)| Expr::rational(p, q)),
    ]
}

fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.sub(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.mul(&b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.div(&Expr::int(2).add(&b.powi(2)))),
            (inner.clone(), 0i64..4).prop_map(|(a, k)| a.powi(k)),
            inner.clone().prop_map(|a| a.neg()),
            inner.clone().prop_map(|a| Expr::int(1).add(&a.powi(2)).ln()),
            inner.clone().prop_map(|a| a.atan()),
            inner.clone().prop_map(|a| a.atan().exp()),
            inner.clone().prop_map(|a| Expr::int(1).add(&a.powi(2)).powr(1, 2)),
        ]
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(e in expr(), z in 0.1f64..4.0) {
        let printed = e.print();
        let back = parse(&printed).unwrap();
        prop_assert_eq!(back.print(), printed.clone());
        if let (Ok(a), Ok(b)) = (e.eval(z), back.eval(z)) {
            prop_assert!(close(a, b, 1e-12), "{} -> {} vs {}", printed, a, b);
        }
    }

    #[test]
    fn derivative_matches_finite_difference(e in expr(), z in 0.3f64..3.0) {
        let h = 1e-4;
        let vals = [e.eval(z - 2.0 * h), e.eval(z - h), e.eval(z + h), e.eval(z + 2.0 * h)];
        if let [Ok(a), Ok(b), Ok(c), Ok(d)] = vals {
            let fd = (a - 8.0 * b + 8.0 * c - d) / (12.0 * h);
            let exact = e.derivative().eval(z).unwrap();
            let scale = [a, b, c, d].iter().fold(1.0f64, |m, v| m.max(v.abs()));
            prop_assert!((fd - exact).abs() <= 1e-6 * scale.max(exact.abs()), "{}: {} vs {}", e, exact, fd);
        }
    }

    #[test]
    fn series_ring_laws(a in series(), b in series(), c in series()) {
        prop_assert_eq!(a.add(&b), b.add(&a));
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        prop_assert_eq!(a.sub(&a), LogTaylorSeries::zero(int(12)));
        prop_assert_eq!(a.mul(&LogTaylorSeries::one()), a.clone());
    }

    #[test]
    fn series_reciprocal_and_exp_log(a in series()) {
        let unit = LogTaylorSeries::one().add(&a.shift(&int(1)).truncate(&int(12)));
        let one = unit.mul(&unit.reciprocal().unwrap());
        prop_assert_eq!(one, LogTaylorSeries::one().truncate(&int(12)));
        let back = unit.log_unit().unwrap().exp().unwrap();
        prop_assert_eq!(back, unit);
    }

    #[test]
    fn series_derivative_inverts_antiderivative(a in series()) {
        prop_assert_eq!(a.antiderivative().derivative().truncate(&int(12)), a);
    }
}

fn series() -> impl Strategy<Value = LogTaylorSeries> {
    proptest::collection::vec((0i64..8, -5i64..6, 1i64..5), 0..5).prop_map(|terms| {
        let mut s = LogTaylorSeries::zero(int(12));
        for (e, p, q) in terms {
            let t: [(BigRational, BigRational); 1] = [(int(e), rat(p, q))];
            s = s.add(&LogTaylorSeries::from_plain(t, int(12)));
        }
        s
    })
}
