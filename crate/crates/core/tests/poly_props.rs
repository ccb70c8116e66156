use gradcert::poly::{Polynomial, Variables};
use num::{BigInt, BigRational, ToPrimitive, Zero};
use proptest::prelude::*;

fn arb_poly(n: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((-6i64..=6, prop::collection::vec(0u32..=3, n)), 1..8).prop_map(move |terms| {
        let terms = terms.into_iter().map(|(c, e)| (BigRational::from_integer(BigInt::from(c)), e));
        Polynomial::from_terms(n, terms.collect::<Vec<_>>()).unwrap()
    })
}

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn initial_form_splits_off_the_lowest_degree(p in arb_poly(3)) {
        prop_assume!(!p.is_zero() && p.constant_term().is_zero());
        let dec = p.initial_form().unwrap();
        prop_assert_eq!(dec.omega.homogeneous_degree(), Some(dec.d));
        prop_assert_eq!(&(&dec.omega + &dec.residual), &p);
        if let Some(m) = dec.residual.min_degree() {
            prop_assert!(m > dec.d);
        }
    }

    #[test]
    fn products_evaluate_exactly(p in arb_poly(2), q in arb_poly(2), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let pt = [rational(x), rational(y)];
        let lhs = (&p * &q).evaluate_exact(&pt).unwrap();
        let rhs = p.evaluate_exact(&pt).unwrap() * q.evaluate_exact(&pt).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn gradient_matches_central_differences(p in arb_poly(3), x in prop::collection::vec(-1.0f64..1.0, 3)) {
        let g = p.gradient();
        let h = 1e-5;
        for i in 0..3 {
            let (mut a, mut b) = (x.clone(), x.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (p.evaluate(&a).unwrap() - p.evaluate(&b).unwrap()) / (2.0 * h);
            let exact = g[i].evaluate(&x).unwrap();
            prop_assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{} vs {}", fd, exact);
        }
    }

    #[test]
    fn bounds_dominate_samples(p in arb_poly(2), r in 0.1f64..1.5, t in 0.0f64..6.3, s in 0.0f64..6.3, u in 0.0f64..1.0) {
        let a = [r * u * t.cos(), r * u * t.sin()];
        let b = [r * s.cos(), r * s.sin()];
        let (pa, pb) = (p.evaluate(&a).unwrap(), p.evaluate(&b).unwrap());
        let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        prop_assert!(pa.abs() <= p.magnitude_bound(r) * (1.0 + 1e-12));
        prop_assert!((pa - pb).abs() <= p.lipschitz_bound(r) * dist * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn display_round_trips(p in arb_poly(3)) {
        let v = Variables::parse_list("x,y,z").unwrap();
        let text = p.display(&v).to_string();
        let back = gradcert::poly::parse_polynomial(&text, &v).unwrap();
        prop_assert_eq!(back, p);
    }
}

#[test]
fn exact_evaluation_agrees_with_floating_point_on_dyadics() {
    let v = Variables::parse_list("x,y").unwrap();
    let p = gradcert::poly::parse_polynomial("x^3 - 3xy^2 + 7/8 y", &v).unwrap();
    let exact = p.evaluate_exact(&[rational(0.5), rational(-0.25)]).unwrap();
    assert_eq!(exact.to_f64().unwrap(), p.evaluate(&[0.5, -0.25]).unwrap());
}
