//! Computes the invariants of a critical point and applies the sufficient
//! criteria for infinitely many converging gradient trajectories.

mod rules;

use serde::Serialize;
use thiserror::Error;

use crate::degree::{chi_from_degree, map_degree, negative_gradient, DegreeConfig, DegreeResult};
use crate::morse::{
    critical_points_on_sphere, morse_certificate, quadratic_signature, CriticalPointOnSphere, MorseConfig,
    MorseError,
};
use crate::poly::{PolyError, Polynomial, Variables};
use crate::sphere::{auto_radii, region_summary, stabilized_invariants, HomologySummary, SphereError};

pub use rules::{apply_rules, RuleId, RuleInputs, RuleOutcome, RuleStatus};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error("the gradient does not vanish at the origin")]
    NotCritical,
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    /// Strictly decreasing radii for `S_r`.
    pub radii: Vec<f64>,
    pub max_depth: u32,
    pub morse: MorseConfig,
    /// Strictly decreasing radii for the degree; two consecutive agreeing
    /// results certify it.
    pub degree_radii: Vec<f64>,
    pub degree: DegreeConfig,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            radii: auto_radii(),
            max_depth: 9,
            morse: MorseConfig::default(),
            degree_radii: vec![0.25, 0.125, 0.0625],
            degree: DegreeConfig::default(),
        }
    }
}

impl AnalysisConfig {
    /// Sets the seed shared by the randomized components.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.morse.seed = seed;
        self.degree.seed = seed;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DegreeStatus {
    Certified,
    Disabled,
}

/// Degree of `-grad f` and the Euler characteristics derived from it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeSection {
    pub status: DegreeStatus,
    pub degree: Option<i64>,
    /// `chi({f >= 0} ∩ S_r)`.
    pub chi_nonneg: Option<i64>,
    pub chi_s_r: Option<i64>,
    pub results: Vec<DegreeResult>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshInvariants {
    pub s_r: HomologySummary,
    pub omega_region: HomologySummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorseSection {
    pub attempts: usize,
    pub critical_points: Vec<CriticalPointOnSphere>,
    pub certificate: Option<CriticalPointOnSphere>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadraticSignature {
    pub neg: usize,
    pub pos: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputInfo {
    pub vars: Vec<String>,
    pub poly: String,
    pub n: usize,
    /// `f - omega`.
    pub residual: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Infinite,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiredRule {
    pub rule: RuleId,
    pub justification: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub max_depth: u32,
    pub radii: Vec<f64>,
    pub s_r_radius: f64,
    pub s_r_stabilized: bool,
    pub omega_stabilized: bool,
    pub degree_radii: Vec<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub input: InputInfo,
    pub omega: String,
    pub d: u32,
    pub invariants: MeshInvariants,
    pub degree: Option<DegreeSection>,
    pub morse: MorseSection,
    pub quadratic: Option<QuadraticSignature>,
    pub rules: Vec<RuleOutcome>,
    pub fired_rules: Vec<FiredRule>,
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
}

impl AnalysisReport {
    pub fn rule_inputs(&self) -> RuleInputs<'_> {
        RuleInputs {
            s_r: &self.invariants.s_r,
            omega_region: &self.invariants.omega_region,
            degree: self.degree.as_ref(),
            morse_certificate: self.morse.certificate.as_ref(),
            quadratic: self.quadratic.map(|q| (q.neg, q.pos)),
        }
    }

    /// Re-applies the rules to the stored invariants and compares.
    pub fn is_self_consistent(&self) -> bool {
        let rules = apply_rules(&self.rule_inputs());
        let fired = fired_rules(&rules);
        rules == self.rules && fired == self.fired_rules && verdict_of(&fired) == self.verdict
    }

    pub fn fired(&self) -> Vec<RuleId> {
        self.fired_rules.iter().map(|r| r.rule).collect()
    }
}

fn fired_rules(rules: &[RuleOutcome]) -> Vec<FiredRule> {
    rules
        .iter()
        .filter(|o| o.status == RuleStatus::Fired)
        .map(|o| FiredRule {
            rule: o.rule,
            justification: o.justification.clone(),
        })
        .collect()
}

fn verdict_of(fired: &[FiredRule]) -> Verdict {
    if fired.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Infinite
    }
}

/// Degree on successive radii until two consecutive results agree. Two
/// consecutive failures disable the path.
fn degree_pipeline(f: &Polynomial, radii: &[f64], config: &DegreeConfig) -> DegreeSection {
    let field = negative_gradient(f);
    let mut results: Vec<DegreeResult> = Vec::new();
    let mut failures = Vec::new();
    let mut last_ok: Option<i64> = None;
    let mut failed_in_row = 0;
    for &r in radii {
        match map_degree(&field, r, config) {
            Ok(res) => {
                failed_in_row = 0;
                let deg = res.degree;
                let agrees = last_ok == Some(deg);
                last_ok = Some(deg);
                results.push(res);
                if agrees {
                    let (chi_nonneg, chi_s_r) = chi_from_degree(results.last().unwrap(), 3)
                        .expect("n = 3 and certified");
                    return DegreeSection {
                        status: DegreeStatus::Certified,
                        degree: Some(deg),
                        chi_nonneg: Some(chi_nonneg),
                        chi_s_r: Some(chi_s_r),
                        results,
                        failures,
                    };
                }
            }
            Err(e) => {
                failures.push(format!("r = {r}: {e}"));
                last_ok = None;
                failed_in_row += 1;
                if failed_in_row == 2 {
                    break;
                }
            }
        }
    }
    DegreeSection {
        status: DegreeStatus::Disabled,
        degree: None,
        chi_nonneg: None,
        chi_s_r: None,
        results,
        failures,
    }
}

/// Runs every invariant computation on `f` and applies the rules.
pub fn analyze(f: &Polynomial, vars: &Variables, config: &AnalysisConfig) -> Result<AnalysisReport, AnalysisError> {
    let n = f.num_vars();
    if !(2..=crate::sphere::MAX_DIM).contains(&n) {
        return Err(SphereError::UnsupportedDimension(n).into());
    }
    if vars.len() != n {
        return Err(PolyError::DimensionMismatch {
            expected: n,
            got: vars.len(),
        }
        .into());
    }
    let dec = f.initial_form()?;
    if dec.d < 2 {
        return Err(AnalysisError::NotCritical);
    }
    let omega = &dec.omega;

    let ((s_r, omega_region), (degree, morse)) = rayon::join(
        || {
            rayon::join(
                || stabilized_invariants(f, n, &config.radii, config.max_depth),
                || region_summary(omega, 1.0, config.max_depth),
            )
        },
        || {
            rayon::join(
                || (n == 3).then(|| degree_pipeline(f, &config.degree_radii, &config.degree)),
                || critical_points_on_sphere(omega, &config.morse),
            )
        },
    );
    let mut s_r = s_r?;
    let omega_region = omega_region?;
    let critical_points = morse?;
    let certificate = morse_certificate(&critical_points);
    let quadratic = if dec.d == 2 {
        let (neg, pos) = quadratic_signature(omega)?;
        Some(QuadraticSignature { neg, pos })
    } else {
        None
    };

    let mut notes = Vec::new();
    if let Some(deg) = &degree {
        match deg.status {
            DegreeStatus::Disabled => notes.push(format!(
                "degree path disabled: the critical point was not certified isolated ({})",
                deg.failures.join("; ")
            )),
            DegreeStatus::Certified => {
                let chi = deg.chi_s_r.expect("certified");
                if s_r.stabilized && s_r.euler != chi {
                    s_r.stabilized = false;
                    notes.push(format!(
                        "mesh/degree mismatch: mesh chi(S_r) = {} but degree gives {chi}; \
                         the mesh misses features below its resolution",
                        s_r.euler
                    ));
                }
            }
        }
    }
    if !s_r.stabilized {
        notes.push("S_r invariants did not stabilize".to_string());
    }
    if !omega_region.stabilized {
        notes.push("Omega invariants did not stabilize".to_string());
    }

    let mut report = AnalysisReport {
        input: InputInfo {
            vars: vars.names().to_vec(),
            poly: f.display(vars).to_string(),
            n,
            residual: dec.residual.display(vars).to_string(),
        },
        omega: omega.display(vars).to_string(),
        d: dec.d,
        diagnostics: Diagnostics {
            max_depth: config.max_depth,
            radii: config.radii.clone(),
            s_r_radius: s_r.radius,
            s_r_stabilized: s_r.stabilized,
            omega_stabilized: omega_region.stabilized,
            degree_radii: if n == 3 { config.degree_radii.clone() } else { Vec::new() },
            notes,
        },
        invariants: MeshInvariants { s_r, omega_region },
        degree,
        morse: MorseSection {
            attempts: config.morse.attempts,
            critical_points,
            certificate,
        },
        quadratic,
        rules: Vec::new(),
        fired_rules: Vec::new(),
        verdict: Verdict::Inconclusive,
    };
    report.rules = apply_rules(&report.rule_inputs());
    report.fired_rules = fired_rules(&report.rules);
    report.verdict = verdict_of(&report.fired_rules);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn run(vars: &str, text: &str) -> Result<AnalysisReport, AnalysisError> {
        let v = Variables::parse_list(vars).unwrap();
        let f = parse_polynomial(text, &v).unwrap();
        analyze(&f, &v, &AnalysisConfig::default())
    }

    #[test]
    fn preconditions() {
        assert!(matches!(run("x,y", "x^2 + 1"), Err(AnalysisError::Poly(PolyError::NonZeroConstant(_)))));
        assert_eq!(run("x,y", "x + y^2").unwrap_err(), AnalysisError::NotCritical);
        assert!(matches!(run("x,y", "0"), Err(AnalysisError::Poly(PolyError::ZeroPolynomial))));
    }

    #[test]
    fn cusp_is_infinite_by_component_count() {
        let r = run("x,y", "x^3 - y^2").unwrap();
        assert_eq!(r.verdict, Verdict::Infinite);
        assert!(r.fired().contains(&RuleId::R1));
        assert!(r.is_self_consistent());
        assert!(r.degree.is_none());
    }

    #[test]
    fn minimum_is_inconclusive() {
        let r = run("x,y", "x^2 + y^2").unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.invariants.s_r.empty);
        assert!(r.is_self_consistent());
    }
}
