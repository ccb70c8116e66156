use super::homology::HomologySummary;
use super::region::SignRegion;
use super::SphereError;
use crate::poly::Polynomial;

/// Default radii `2^-3, ..., 2^-8`.
pub fn auto_radii() -> Vec<f64> {
    (3..=8).map(|k| f64::powi(2.0, -k)).collect()
}

/// Homology of `{p < 0}` on the sphere of the given radius.
pub fn region_summary(p: &Polynomial, radius: f64, max_depth: u32) -> Result<HomologySummary, SphereError> {
    Ok(SignRegion::build(p, radius, max_depth)?.homology_summary())
}

/// Homology of `{p < 0}` on shrinking spheres.
///
/// Returns the first summary that agrees with the one at the previous
/// radius, both being depth-stabilized. Otherwise returns the summary at
/// the last radius with `stabilized = false`.
pub fn stabilized_invariants(
    p: &Polynomial,
    n: usize,
    radii: &[f64],
    max_depth: u32,
) -> Result<HomologySummary, SphereError> {
    if p.num_vars() != n {
        return Err(SphereError::DimensionMismatch {
            expected: n,
            got: p.num_vars(),
        });
    }
    if radii.is_empty() {
        return Err(SphereError::NoRadii);
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SphereError::RadiiNotDecreasing);
    }
    let mut prev: Option<HomologySummary> = None;
    let mut last = None;
    for &r in radii {
        let h = region_summary(p, r, max_depth)?;
        if let Some(q) = &prev {
            if q.stabilized && h.stabilized && q.betti == h.betti {
                return Ok(h);
            }
        }
        prev = Some(h.clone());
        last = Some(h);
    }
    let mut h = last.unwrap();
    h.stabilized = false;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, Variables};

    #[test]
    fn rejects_bad_radii() {
        let v = Variables::parse_list("x,y").unwrap();
        let p = parse_polynomial("x^2-y^2", &v).unwrap();
        assert_eq!(
            stabilized_invariants(&p, 2, &[0.1, 0.2], 4).unwrap_err(),
            SphereError::RadiiNotDecreasing
        );
        assert_eq!(stabilized_invariants(&p, 2, &[], 4).unwrap_err(), SphereError::NoRadii);
    }

    #[test]
    fn saddle_has_two_arcs() {
        let v = Variables::parse_list("x,y").unwrap();
        let p = parse_polynomial("x^2-y^2", &v).unwrap();
        let h = stabilized_invariants(&p, 2, &auto_radii(), 6).unwrap();
        assert!(h.stabilized);
        assert_eq!(h.betti, vec![2, 0]);
    }

    #[test]
    fn positive_definite_is_empty() {
        let v = Variables::parse_list("x,y").unwrap();
        let p = parse_polynomial("x^2+y^2", &v).unwrap();
        let h = stabilized_invariants(&p, 2, &auto_radii(), 6).unwrap();
        assert!(h.empty);
        assert!(h.stabilized);
        assert_eq!(h.euler, 0);
    }
}
