//! Acceptance suite: one line per criterion, then a single assertion that
//! every criterion passed.

use std::f64::consts::PI;
use std::io::Write;

use gradcert::certifier::{analyze, AnalysisConfig, AnalysisReport, DegreeStatus, RuleId, Verdict};
use gradcert::degree::{
    map_degree, negative_gradient, quadrature_degree, simplicial_degree, DegreeConfig, DegreeMethod,
};
use gradcert::flow::{grid_census, FlowConfig, FlowOutcome, SeedGrid};
use gradcert::morse::CriticalClass;
use gradcert::poly::{parse_polynomial, Polynomial, Variables};
use gradcert::sphere::region_summary;
use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn poly(vars: &str, text: &str) -> (Variables, Polynomial) {
    let v = Variables::parse_list(vars).unwrap();
    let p = parse_polynomial(text, &v).unwrap();
    (v, p)
}

fn report(vars: &str, text: &str) -> Result<AnalysisReport, String> {
    let (v, f) = poly(vars, text);
    analyze(&f, &v, &AnalysisConfig::default()).map_err(|e| e.to_string())
}

fn fires(r: &AnalysisReport, rule: RuleId) -> Check {
    ensure!(r.verdict == Verdict::Infinite, "verdict {:?}", r.verdict);
    ensure!(r.fired().contains(&rule), "{rule:?} not in {:?}", r.fired());
    ensure!(r.is_self_consistent(), "report is not self-consistent");
    Ok(())
}

fn cusp() -> Check {
    let r = report("x,y", "x^3 - y^2")?;
    let (s, om) = (&r.invariants.s_r, &r.invariants.omega_region);
    ensure!(om.b0() == 2, "b0(Omega) = {}", om.b0());
    ensure!(s.b0() == 1 && s.stabilized, "b0(S_r) = {}, stabilized {}", s.b0(), s.stabilized);
    fires(&r, RuleId::R1)
}

fn four_discs() -> Check {
    let r = report("x,y,z", "xyz - z^4")?;
    let (s, om) = (&r.invariants.s_r, &r.invariants.omega_region);
    ensure!(om.betti[..2] == [4, 0], "Omega betti {:?}", om.betti);
    ensure!(s.b0() == 2 && s.stabilized, "S_r betti {:?}", s.betti);
    fires(&r, RuleId::R1)
}

const DEGREE_EXAMPLE: &str = "xyz + x^4y - 2y^4z + 3xz^4";

fn euler_from_degree() -> Check {
    let r = report("x,y,z", DEGREE_EXAMPLE)?;
    let deg = r.degree.as_ref().ok_or("no degree section")?;
    ensure!(deg.status == DegreeStatus::Certified, "degree {:?}: {:?}", deg.status, deg.failures);
    ensure!(deg.degree == Some(0), "degree {:?}", deg.degree);
    // both methods, rerun independently at every radius the pipeline used
    let (_, f) = poly("x,y,z", DEGREE_EXAMPLE);
    let field = negative_gradient(&f);
    let cfg = DegreeConfig::default();
    for res in &deg.results {
        let s = simplicial_degree(&field, res.radius_used, &cfg).map_err(|e| e.to_string())?;
        let q = quadrature_degree(&field, res.radius_used, &cfg).map_err(|e| e.to_string())?;
        ensure!(s.method == DegreeMethod::Simplicial && q.method == DegreeMethod::Quadrature, "methods");
        ensure!(s.degree == 0 && q.degree == 0, "r = {}: {} vs {}", res.radius_used, s.degree, q.degree);
    }
    ensure!(deg.chi_nonneg == Some(1), "chi(f >= 0) = {:?}", deg.chi_nonneg);
    ensure!(deg.chi_s_r == Some(1), "chi(S_r) = {:?}", deg.chi_s_r);
    ensure!(r.invariants.omega_region.euler == 4, "chi(Omega) = {}", r.invariants.omega_region.euler);
    ensure!(r.invariants.omega_region.stabilized, "Omega not stabilized");
    fires(&r, RuleId::R2)
}

fn euler_form() -> Check {
    let r = report("x,y,z", "x^3 + x^2z - y^2")?;
    let s = &r.invariants.s_r;
    ensure!(s.stabilized && !s.empty, "S_r stabilized {} empty {}", s.stabilized, s.empty);
    ensure!(s.euler == 0, "chi(S_r) = {}", s.euler);
    let deg = r.degree.as_ref().ok_or("no degree section")?;
    ensure!(deg.status == DegreeStatus::Disabled, "degree path not disabled");
    let r3 = &r.rules[2];
    ensure!(r3.justification.contains("chi(S_r) = 0"), "R3: {}", r3.justification);
    fires(&r, RuleId::R3)
}

fn annulus() -> Check {
    let r = report("x,y,z", "z(x^2+y^2) + x^2y^2z - z^4")?;
    let (s, om) = (&r.invariants.s_r, &r.invariants.omega_region);
    ensure!(om.betti[..2] == [1, 1], "Omega betti {:?}", om.betti);
    ensure!(s.stabilized && s.betti[1..].iter().all(|&b| b == 0), "S_r betti {:?}", s.betti);
    fires(&r, RuleId::R4)
}

fn morse() -> Check {
    let r = report("x,y", "x^3 + 3xy^2 + x^2y^2")?;
    let c = r.morse.certificate.as_ref().ok_or("no certificate")?;
    ensure!((c.x[0] + 1.0).abs() < 1e-9 && c.x[1].abs() < 1e-9, "at {:?}", c.x);
    ensure!((c.value + 1.0).abs() < 1e-9, "value {}", c.value);
    ensure!(c.classification == CriticalClass::NondegMax, "{:?}", c.classification);
    ensure!(c.residual < 1e-9, "residual {}", c.residual);
    // the angular restriction -cos^3 - 3 cos sin^2 = -cos t has a strict
    // maximum -1 at t = pi
    let (_, omega) = poly("x,y", "x^3 + 3xy^2");
    let at = |t: f64| omega.evaluate(&[t.cos(), t.sin()]).unwrap();
    ensure!((at(PI) + 1.0).abs() < 1e-12 && at(PI + 1e-3) < at(PI), "oracle disagrees");
    fires(&r, RuleId::R7)
}

fn negative_controls() -> Check {
    let r = report("x,y", "x^2 + y^2")?;
    ensure!(r.verdict == Verdict::Inconclusive, "minimum: {:?}", r.fired());
    ensure!(r.invariants.s_r.empty, "minimum: S_r not empty");
    let r = report("x,y", "-x^2 + y^2")?;
    let (s, om) = (&r.invariants.s_r, &r.invariants.omega_region);
    ensure!(r.fired().is_empty(), "saddle fired {:?}", r.fired());
    ensure!(s.b0() == 2 && om.b0() == 2, "b0 {} {}", s.b0(), om.b0());
    ensure!(s.euler == om.euler, "chi {} {}", s.euler, om.euler);
    Ok(())
}

fn int(c: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(c))
}

fn random_component(rng: &mut ChaCha8Rng, n: usize) -> Polynomial {
    let k = rng.gen_range(2..=5);
    let terms: Vec<(BigRational, Vec<u32>)> = (0..k)
        .map(|_| {
            let mut e = vec![0u32; n];
            for _ in 0..rng.gen_range(1..=3) {
                e[rng.gen_range(0..n)] += 1;
            }
            (int(rng.gen_range(-3..=3)), e)
        })
        .collect();
    Polynomial::from_terms(n, terms).unwrap()
}

/// Random map of degree at most 3: either fully random, or a planar
/// complex power `z^k` or `conj(z)^k` plus a random cubic term.
fn random_map(rng: &mut ChaCha8Rng) -> Vec<Polynomial> {
    if rng.gen_bool(0.3) {
        let k = rng.gen_range(2..=3);
        let conj = rng.gen_bool(0.5);
        let v = Variables::parse_list("x,y").unwrap();
        let (re, im) = if k == 2 { ("x^2 - y^2", "2xy") } else { ("x^3 - 3xy^2", "3x^2y - y^3") };
        let im = if conj { format!("-({im})") } else { im.to_string() };
        let noise = |rng: &mut ChaCha8Rng| {
            let a = rng.gen_range(0..=3u32);
            Polynomial::from_terms(2, [(int(rng.gen_range(-1..=1)), vec![a, 3 - a])]).unwrap()
        };
        let a = &parse_polynomial(re, &v).unwrap() + &noise(rng);
        let b = &parse_polynomial(&im, &v).unwrap() + &noise(rng);
        return vec![a, b];
    }
    let n = rng.gen_range(2..=3);
    (0..n).map(|_| random_component(rng, n)).collect()
}

/// `p(-x_0, x_1, ...)`.
fn reflect_first(p: &Polynomial) -> Polynomial {
    let terms = p.terms().map(|(m, c)| {
        let e = m.exponents().to_vec();
        let c = if e[0] % 2 == 1 { -c.clone() } else { c.clone() };
        (c, e)
    });
    Polynomial::from_terms(p.num_vars(), terms.collect::<Vec<_>>()).unwrap()
}

fn degree_suite() -> Check {
    let cfg = DegreeConfig::default();
    let (_, x) = poly("x,y,z", "x");
    let (_, y) = poly("x,y,z", "y");
    let (_, z) = poly("x,y,z", "z");
    let id = vec![x, y, z];
    let d = map_degree(&id, 0.5, &cfg).map_err(|e| e.to_string())?;
    ensure!(d.degree == 1, "identity {}", d.degree);
    let neg: Vec<Polynomial> = id.iter().map(|p| -p).collect();
    let d = map_degree(&neg, 0.5, &cfg).map_err(|e| e.to_string())?;
    ensure!(d.degree == -1, "-identity {}", d.degree);

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut certified = 0;
    let mut seen = std::collections::BTreeSet::new();
    for _ in 0..2000 {
        if certified == 20 {
            break;
        }
        let map = random_map(&mut rng);
        if map.iter().any(Polynomial::is_zero) {
            continue;
        }
        let Ok(s) = simplicial_degree(&map, 0.5, &cfg) else {
            continue;
        };
        let q = quadrature_degree(&map, 0.5, &cfg).map_err(|e| format!("quadrature failed on a certified map: {e}"))?;
        ensure!(s.certified_nonvanishing, "not certified");
        ensure!(s.degree == q.degree, "simplicial {} vs quadrature {}", s.degree, q.degree);
        // reflecting a coordinate of the domain negates the degree
        let reflected: Vec<Polynomial> = map.iter().map(reflect_first).collect();
        let r = simplicial_degree(&reflected, 0.5, &cfg).map_err(|e| e.to_string())?;
        ensure!(r.degree == -s.degree, "reflection {} vs {}", r.degree, s.degree);
        seen.insert(s.degree);
        certified += 1;
    }
    ensure!(certified == 20, "only {certified} certified maps");
    ensure!(seen.len() >= 3, "degrees seen {seen:?}");
    Ok(())
}

/// Negative arcs of a product of linear forms on the circle, from the sorted
/// zero angles.
fn arc_count(forms: &[(i64, i64)]) -> usize {
    let mut zeros: Vec<f64> = forms
        .iter()
        .flat_map(|&(a, b)| {
            let t = (-(a as f64)).atan2(b as f64).rem_euclid(2.0 * PI);
            [t, (t + PI).rem_euclid(2.0 * PI)]
        })
        .collect();
    zeros.sort_by(f64::total_cmp);
    let sign = |t: f64| {
        forms
            .iter()
            .map(|&(a, b)| a as f64 * t.cos() + b as f64 * t.sin())
            .product::<f64>()
            < 0.0
    };
    let m = zeros.len();
    let negative: Vec<bool> = (0..m)
        .map(|i| {
            let (lo, hi) = (zeros[i], if i + 1 < m { zeros[i + 1] } else { zeros[0] + 2.0 * PI });
            sign(0.5 * (lo + hi))
        })
        .collect();
    // arcs are separated by sign changes, so every negative interval is an arc
    negative.iter().filter(|&&n| n).count()
}

fn homology_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let v = Variables::parse_list("x,y").unwrap();
    for case in 0..50 {
        let k = 1 + case % 5;
        let mut forms: Vec<(i64, i64)> = Vec::new();
        while forms.len() < k {
            let f = (rng.gen_range(-9..=9), rng.gen_range(-9..=9));
            if f == (0, 0) {
                continue;
            }
            let angle = |(a, b): (i64, i64)| (b as f64).atan2(a as f64).rem_euclid(PI);
            let separated = forms.iter().all(|&g| {
                let d = (angle(f) - angle(g)).abs();
                d.min(PI - d) > 0.05
            });
            if separated {
                forms.push(f);
            }
        }
        let p = forms.iter().fold(parse_polynomial("1", &v).unwrap(), |acc, &(a, b)| {
            let l = Polynomial::from_terms(2, [(int(a), vec![1, 0]), (int(b), vec![0, 1])]).unwrap();
            &acc * &l
        });
        let mesh = region_summary(&p, 1.0, 9).map_err(|e| e.to_string())?;
        let exact = arc_count(&forms);
        ensure!(mesh.b0() == exact, "case {case} {forms:?}: mesh {} vs sweep {exact}", mesh.b0());
        ensure!(mesh.betti[1] == 0, "case {case}: b1 = {}", mesh.betti[1]);
    }
    Ok(())
}

fn flow_suite() -> Check {
    let cfg = FlowConfig::default();
    let grid = SeedGrid::parse("20x20:-0.5,0.5").unwrap();
    let (_, f) = poly("x,y", "x^3 - y^2");
    let census = grid_census(&f, &grid, &cfg).map_err(|e| e.to_string())?;
    let mismatched = census
        .samples
        .iter()
        .filter(|s| (s.outcome == FlowOutcome::ConvergedToOrigin) != (s.seed[0] < 0.0))
        .count();
    let negative = census.samples.iter().filter(|s| s.seed[0] < 0.0).count();
    ensure!(mismatched <= 1, "{mismatched} seeds disagree with the x < 0 half-grid");
    ensure!(
        census.count(FlowOutcome::ConvergedToOrigin).abs_diff(negative) <= 1,
        "{} converged, {negative} seeds with x < 0",
        census.count(FlowOutcome::ConvergedToOrigin)
    );
    let mut worst = census.min_increment();
    for (vars, text, grid) in [
        ("x,y", "-(x^2+y^2)", "10x10:-0.6,0.6"),
        ("x,y", "x^2 + y^2", "10x10:-0.6,0.6"),
        ("x,y", "-x^2 + y^2", "10x10:-0.6,0.6"),
        ("x,y", "x^3 + 3xy^2 + x^2y^2", "10x10:-0.6,0.6"),
        ("x,y,z", "xyz - z^4", "5x5x5:-0.5,0.5"),
    ] {
        let (_, f) = poly(vars, text);
        let c = grid_census(&f, &SeedGrid::parse(grid).unwrap(), &cfg).map_err(|e| e.to_string())?;
        worst = worst.min(c.min_increment());
    }
    ensure!(worst >= -1e-8, "f decreased by {} on an accepted step", -worst);
    Ok(())
}

fn determinism() -> Check {
    let a = serde_json::to_string(&report("x,y,z", DEGREE_EXAMPLE)?).unwrap();
    let b = serde_json::to_string(&report("x,y,z", DEGREE_EXAMPLE)?).unwrap();
    ensure!(a == b, "reports differ");
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("cusp regression", cusp),
        ("four discs regression", four_discs),
        ("Euler characteristic from the degree", euler_from_degree),
        ("Euler form of the homology rule", euler_form),
        ("annulus regression", annulus),
        ("Morse certificate", morse),
        ("negative controls", negative_controls),
        ("degree property suite", degree_suite),
        ("planar homology oracle", homology_oracle),
        ("flow suite", flow_suite),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    // written past the test harness capture so the lines always show
    let mut err = std::io::stderr();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        let line = match &result {
            Ok(()) => format!("criterion {:>2} PASS {name} ({secs:.1}s)", i + 1),
            Err(e) => format!("criterion {:>2} FAIL {name} ({secs:.1}s): {e}", i + 1),
        };
        writeln!(err, "{line}").unwrap();
        if result.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
