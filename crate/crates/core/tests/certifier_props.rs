use gradcert::certifier::{analyze, apply_rules, AnalysisConfig, RuleId, RuleStatus, Verdict};
use gradcert::poly::{parse_polynomial, Variables};

const EXAMPLES: [(&str, &str); 6] = [
    ("x,y", "x^3 - y^2"),
    ("x,y", "x^3 + 3xy^2 + x^2y^2"),
    ("x,y", "x^2 + y^2"),
    ("x,y", "-x^2 + y^2"),
    ("x,y,z", "xyz - z^4"),
    ("x,y,z", "z(x^2+y^2) + x^2y^2z - z^4"),
];

fn config(max_depth: u32) -> AnalysisConfig {
    AnalysisConfig {
        max_depth,
        ..AnalysisConfig::default()
    }
}

#[test]
fn reports_justify_themselves() {
    for (vars, text) in EXAMPLES {
        let v = Variables::parse_list(vars).unwrap();
        let f = parse_polynomial(text, &v).unwrap();
        let r = analyze(&f, &v, &config(9)).unwrap();
        assert!(r.is_self_consistent(), "{text}");
        assert_eq!(r.rules.len(), 7);
        assert_eq!(r.verdict == Verdict::Infinite, !r.fired_rules.is_empty(), "{text}");
        // every fired rule is re-derived from the stored numbers alone
        let s = &r.invariants.s_r;
        let om = &r.invariants.omega_region;
        for rule in r.fired() {
            let holds = match rule {
                RuleId::R1 => s.b0() < om.b0(),
                RuleId::R2 => s.euler < om.euler || r.degree.as_ref().and_then(|d| d.chi_s_r).is_some_and(|c| c < om.euler),
                RuleId::R3 => s.betti[1..].iter().any(|&b| b > 0) || !s.empty && s.euler <= 0,
                RuleId::R4 => om.betti[1..].iter().any(|&b| b > 0),
                RuleId::R5 => !om.empty && om.euler <= 0,
                RuleId::R6 => r.quadratic.is_some_and(|q| q.neg >= 2),
                RuleId::R7 => r.morse.certificate.is_some(),
            };
            assert!(holds, "{text}: {rule:?}");
        }
        let json = serde_json::to_value(&r).unwrap();
        for key in ["input", "omega", "d", "invariants", "degree", "morse", "quadratic", "fired_rules", "verdict", "diagnostics"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn unstabilized_data_is_skipped_not_fired() {
    let v = Variables::parse_list("x,y").unwrap();
    let f = parse_polynomial("x^3 - y^2", &v).unwrap();
    let r = analyze(&f, &v, &config(9)).unwrap();
    let mut s = r.invariants.s_r.clone();
    s.stabilized = false;
    let mut inp = r.rule_inputs();
    inp.s_r = &s;
    let out = apply_rules(&inp);
    for o in &out[..3] {
        assert_eq!(o.status, RuleStatus::Skipped, "{:?}", o.rule);
    }
}

#[test]
fn lower_depth_never_contradicts_a_stabilized_fired_rule() {
    for (vars, text) in EXAMPLES {
        let v = Variables::parse_list(vars).unwrap();
        let f = parse_polynomial(text, &v).unwrap();
        let full = analyze(&f, &v, &config(9)).unwrap();
        for depth in [5, 7] {
            let low = analyze(&f, &v, &config(depth)).unwrap();
            for rule in low.fired() {
                assert!(full.fired().contains(&rule), "{text}: {rule:?} at depth {depth} only");
            }
        }
    }
}

#[test]
fn quadratic_forms_use_the_signature_rule() {
    let v = Variables::parse_list("x,y,z").unwrap();
    let f = parse_polynomial("-x^2 - y^2 + z^2 + x^3", &v).unwrap();
    let r = analyze(&f, &v, &config(8)).unwrap();
    assert_eq!(r.quadratic.map(|q| (q.neg, q.pos)), Some((2, 1)));
    assert!(r.fired().contains(&RuleId::R6));
    let f = parse_polynomial("-x^2 + y^2 + z^2", &v).unwrap();
    let r = analyze(&f, &v, &config(8)).unwrap();
    assert_eq!(r.rules[5].status, RuleStatus::NotFired);
}
