use serde::Serialize;

use super::DegreeSection;
use crate::morse::CriticalPointOnSphere;
use crate::sphere::HomologySummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
}

impl RuleId {
    pub const ALL: [RuleId; 7] = [RuleId::R1, RuleId::R2, RuleId::R3, RuleId::R4, RuleId::R5, RuleId::R6, RuleId::R7];

    /// The sufficient condition the rule tests.
    pub fn statement(self) -> &'static str {
        match self {
            RuleId::R1 => "S_r has fewer components than Omega",
            RuleId::R2 => "chi(S_r) < chi(Omega)",
            RuleId::R3 => "S_r has higher homology, or S_r is non-empty with chi(S_r) <= 0",
            RuleId::R4 => "Omega has higher homology",
            RuleId::R5 => "Omega is non-empty with chi(Omega) <= 0",
            RuleId::R6 => "quadratic initial form with at least two negative squares",
            RuleId::R7 => "a non-degenerate critical point of omega on Omega that is not a minimum",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RuleStatus {
    Fired,
    NotFired,
    /// A premise relies on unstabilized data.
    Skipped,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleOutcome {
    pub rule: RuleId,
    pub status: RuleStatus,
    pub justification: String,
}

/// Everything the rules look at.
#[derive(Debug, Clone, Copy)]
pub struct RuleInputs<'a> {
    pub s_r: &'a HomologySummary,
    pub omega_region: &'a HomologySummary,
    pub degree: Option<&'a DegreeSection>,
    pub morse_certificate: Option<&'a CriticalPointOnSphere>,
    pub quadratic: Option<(usize, usize)>,
}

fn outcome(rule: RuleId, status: RuleStatus, justification: String) -> RuleOutcome {
    RuleOutcome {
        rule,
        status,
        justification,
    }
}

fn decide(rule: RuleId, holds: bool, justification: String) -> RuleOutcome {
    let status = if holds { RuleStatus::Fired } else { RuleStatus::NotFired };
    outcome(rule, status, justification)
}

fn higher(h: &HomologySummary) -> Option<(usize, usize)> {
    h.betti.iter().enumerate().skip(1).find(|(_, &b)| b != 0).map(|(i, &b)| (i, b))
}

/// Euler characteristic of `S_r`: from the mesh when stabilized, else from
/// the degree when that is certified.
fn chi_s_r(inp: &RuleInputs) -> Option<(i64, &'static str)> {
    if inp.s_r.stabilized {
        return Some((inp.s_r.euler, "mesh"));
    }
    inp.degree.and_then(|d| d.chi_s_r).map(|c| (c, "degree"))
}

/// Evaluates every rule. Pure in its inputs.
pub fn apply_rules(inp: &RuleInputs) -> Vec<RuleOutcome> {
    use RuleId::*;
    use RuleStatus::*;
    let s = inp.s_r;
    let om = inp.omega_region;
    let unstable = |what: &str| format!("{what} did not stabilize");
    let mut out = Vec::with_capacity(7);

    out.push(if s.stabilized && om.stabilized {
        decide(R1, s.b0() < om.b0(), format!("b0(S_r) = {}, b0(Omega) = {}", s.b0(), om.b0()))
    } else {
        outcome(R1, Skipped, unstable(if s.stabilized { "Omega" } else { "S_r" }))
    });

    out.push(match (chi_s_r(inp), om.stabilized) {
        (Some((c, src)), true) => decide(R2, c < om.euler, format!("chi(S_r) = {c} ({src}), chi(Omega) = {}", om.euler)),
        (None, _) => outcome(R2, Skipped, unstable("S_r")),
        (_, false) => outcome(R2, Skipped, unstable("Omega")),
    });

    out.push({
        let homology = if s.stabilized { higher(s) } else { None };
        let chi = chi_s_r(inp);
        if let Some((i, b)) = homology {
            let chi = chi.map(|(c, src)| format!(", chi(S_r) = {c} ({src})")).unwrap_or_default();
            decide(R3, true, format!("b{i}(S_r) = {b}{chi}"))
        } else if let Some((c, src)) = chi {
            let nonempty = !s.empty;
            let holds = nonempty && c <= 0;
            let why = if nonempty {
                format!("S_r non-empty, chi(S_r) = {c} ({src})")
            } else {
                "S_r has no certified point".to_string()
            };
            decide(R3, holds, why)
        } else {
            outcome(R3, Skipped, unstable("S_r"))
        }
    });

    out.push(if om.stabilized {
        match higher(om) {
            Some((i, b)) => decide(R4, true, format!("b{i}(Omega) = {b}")),
            None => decide(R4, false, "Omega has no higher homology".to_string()),
        }
    } else {
        outcome(R4, Skipped, unstable("Omega"))
    });

    out.push(if om.stabilized {
        let why = if om.empty {
            "Omega is empty".to_string()
        } else {
            format!("Omega non-empty, chi(Omega) = {}", om.euler)
        };
        decide(R5, !om.empty && om.euler <= 0, why)
    } else {
        outcome(R5, Skipped, unstable("Omega"))
    });

    out.push(match inp.quadratic {
        Some((neg, pos)) => decide(R6, neg >= 2, format!("inertia (neg, pos) = ({neg}, {pos})")),
        None => outcome(R6, NotApplicable, "initial form is not quadratic".to_string()),
    });

    out.push(match inp.morse_certificate {
        Some(p) => decide(
            R7,
            true,
            format!(
                "{:?} at {:?} with value {:.6}, residual {:.1e}",
                p.classification, p.x, p.value, p.residual
            ),
        ),
        None => decide(R7, false, "no certificate found".to_string()),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(betti: Vec<usize>, stabilized: bool) -> HomologySummary {
        let euler = betti
            .iter()
            .enumerate()
            .map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum();
        HomologySummary {
            empty: betti.iter().all(|&b| b == 0),
            betti,
            euler,
            stabilized,
            depth_used: 9,
            radius: 0.125,
            neg_cells: 10,
            mixed_cells: 0,
        }
    }

    fn fired(out: &[RuleOutcome]) -> Vec<RuleId> {
        out.iter().filter(|o| o.status == RuleStatus::Fired).map(|o| o.rule).collect()
    }

    #[test]
    fn component_drop_fires_first_rule() {
        let s = summary(vec![2, 0, 0], true);
        let om = summary(vec![4, 0, 0], true);
        let inp = RuleInputs {
            s_r: &s,
            omega_region: &om,
            degree: None,
            morse_certificate: None,
            quadratic: None,
        };
        let out = apply_rules(&inp);
        assert_eq!(out.len(), 7);
        assert_eq!(fired(&out), vec![RuleId::R1, RuleId::R2]);
        assert_eq!(out[5].status, RuleStatus::NotApplicable);
    }

    #[test]
    fn degree_substitutes_for_unstable_mesh() {
        let s = summary(vec![4, 0, 0], false);
        let om = summary(vec![4, 0, 0], true);
        let deg = DegreeSection {
            status: super::super::DegreeStatus::Certified,
            degree: Some(0),
            chi_nonneg: Some(1),
            chi_s_r: Some(1),
            results: Vec::new(),
            failures: Vec::new(),
        };
        let inp = RuleInputs {
            s_r: &s,
            omega_region: &om,
            degree: Some(&deg),
            morse_certificate: None,
            quadratic: None,
        };
        let out = apply_rules(&inp);
        assert_eq!(out[0].status, RuleStatus::Skipped);
        assert_eq!(fired(&out), vec![RuleId::R2]);
        let no_deg = RuleInputs { degree: None, ..inp };
        let out = apply_rules(&no_deg);
        assert_eq!(out[1].status, RuleStatus::Skipped);
        assert!(fired(&out).is_empty());
    }

    #[test]
    fn planar_saddle_fires_nothing() {
        let s = summary(vec![2, 0], true);
        let om = summary(vec![2, 0], true);
        let inp = RuleInputs {
            s_r: &s,
            omega_region: &om,
            degree: None,
            morse_certificate: None,
            quadratic: Some((1, 1)),
        };
        assert!(fired(&apply_rules(&inp)).is_empty());
    }

    #[test]
    fn empty_sphere_region_does_not_fire_chi_form() {
        let s = summary(vec![0, 0], true);
        let om = summary(vec![0, 0], true);
        let inp = RuleInputs {
            s_r: &s,
            omega_region: &om,
            degree: None,
            morse_certificate: None,
            quadratic: Some((0, 2)),
        };
        let out = apply_rules(&inp);
        assert!(fired(&out).is_empty());
        assert_eq!(out[2].justification, "S_r has no certified point");
    }
}
