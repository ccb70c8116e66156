use gradcert::certifier::{analyze, AnalysisConfig, Verdict};
use gradcert::flow::{grid_census, integrate, FlowConfig, FlowOutcome, GradientFlow, SeedGrid};
use gradcert::poly::{parse_polynomial, Polynomial, Variables};
use proptest::prelude::*;

fn planar(text: &str) -> (Variables, Polynomial) {
    let v = Variables::parse_list("x,y").unwrap();
    let f = parse_polynomial(text, &v).unwrap();
    (v, f)
}

#[test]
fn certified_planar_examples_have_two_distinct_converging_trajectories() {
    for text in ["x^3 - y^2", "x^3 + 3xy^2 + x^2y^2"] {
        let (v, f) = planar(text);
        let r = analyze(&f, &v, &AnalysisConfig::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Infinite);
        let c = grid_census(&f, &SeedGrid::parse("8x8:-0.5,0.5").unwrap(), &FlowConfig::default()).unwrap();
        assert!(c.distinct_converged_pair(1e-4).is_some(), "{text}");
    }
}

#[test]
fn saddle_stable_set_has_measure_zero() {
    let (_, f) = planar("-x^2 + y^2");
    let c = grid_census(&f, &SeedGrid::parse("20x20:-0.5,0.5").unwrap(), &FlowConfig::default()).unwrap();
    assert_eq!(c.count(FlowOutcome::ConvergedToOrigin), 0);
    // seeds on the stable axis do converge
    let flow = GradientFlow::new(&f);
    let s = integrate(&flow, &[0.4, 0.0], &FlowConfig::default());
    assert_eq!(s.outcome, FlowOutcome::ConvergedToOrigin);
}

#[test]
fn halving_the_step_keeps_final_distances() {
    // local error scales as h^5, so tol / 32 halves the step
    let base = FlowConfig::default();
    let fine = FlowConfig {
        rtol: base.rtol / 32.0,
        atol: base.atol / 32.0,
        ..FlowConfig::default()
    };
    for (text, seed) in [
        ("x^3 - y^2", [-0.3, 0.2]),
        ("x^3 - y^2", [0.2, -0.4]),
        ("x^2 + y^2", [0.1, 0.3]),
        ("-(x^2+y^2)", [0.5, 0.5]),
        ("x^3 + 3xy^2 + x^2y^2", [-0.4, 0.1]),
    ] {
        let (_, f) = planar(text);
        let flow = GradientFlow::new(&f);
        let a = integrate(&flow, &seed, &base);
        let b = integrate(&flow, &seed, &fine);
        assert_eq!(a.outcome, b.outcome, "{text}");
        assert!((a.final_distance - b.final_distance).abs() < 1e-6, "{text}");
        assert!(b.steps > a.steps, "{text}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn f_increases_along_accepted_steps(x in -0.7f64..0.7, y in -0.7f64..0.7, which in 0usize..4) {
        prop_assume!(x != 0.0 || y != 0.0);
        let text = ["x^3 - y^2", "x^3 + 3xy^2 + x^2y^2", "-(x^2+y^2) + x^3", "xy - x^4"][which];
        let (_, f) = planar(text);
        let cfg = FlowConfig { max_steps: 20_000, ..FlowConfig::default() };
        let s = integrate(&GradientFlow::new(&f), &[x, y], &cfg);
        prop_assert!(s.min_increment >= -1e-8, "{} decreased by {}", text, -s.min_increment);
        for w in s.path.windows(2) {
            prop_assert!(w[1].f >= w[0].f - 1e-8);
            prop_assert!(w[1].t > w[0].t);
        }
        if s.outcome == FlowOutcome::ConvergedToOrigin {
            prop_assert!(s.final_distance < 1e-6);
        }
    }
}
