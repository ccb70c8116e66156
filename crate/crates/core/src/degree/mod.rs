//! Topological degree of a polynomial vector field on a small sphere.
//!
//! Two independent methods are provided: a simplicial count of signed
//! preimages of a generic direction, and adaptive quadrature of the
//! Kronecker integral. [`map_degree`] runs both and requires agreement.

mod quadrature;
mod simplicial;

use serde::Serialize;
use thiserror::Error;

use crate::poly::Polynomial;
use crate::sphere::SphereError;

pub use quadrature::{grundmann_moller, quadrature_degree, QuadratureRule};
pub use simplicial::simplicial_degree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum DegreeMethod {
    Simplicial,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeResult {
    pub degree: i64,
    pub radius_used: f64,
    /// The field was certified non-zero on the whole sphere.
    pub certified_nonvanishing: bool,
    pub method: DegreeMethod,
    /// Number of certified cells (simplicial) or integration cells.
    pub cells: usize,
    /// Raw value of the Kronecker integral, when quadrature was run.
    pub integral: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DegreeError {
    #[error("map has {components} components on R^{n}; a square system is required")]
    NotSquare { components: usize, n: usize },
    #[error(transparent)]
    Sphere(#[from] SphereError),
    #[error("the field may vanish on the sphere of radius {radius}; try a different radius")]
    PossibleZeroOnSphere { radius: f64 },
    #[error("refinement did not certify the sphere of radius {radius} within depth {depth}")]
    NonConvergent { radius: f64, depth: u32 },
    #[error("quadrature value {value} is not within 0.1 of an integer")]
    QuadratureResidual { value: f64 },
    #[error("quadrature exceeded its evaluation budget at radius {radius}")]
    QuadratureBudget { radius: f64 },
    #[error("methods disagree: simplicial {simplicial}, quadrature {quadrature}")]
    MethodsDisagree { simplicial: i64, quadrature: i64 },
    #[error("degree formula for the Euler characteristic is only available for n = 3, got n = {0}")]
    UnsupportedFormula(usize),
    #[error("critical point was not certified isolated")]
    NotIsolated,
}

/// Tuning knobs shared by both methods.
#[derive(Debug, Clone)]
pub struct DegreeConfig {
    /// Cells smaller than `sqrt(2) / 2^max_depth` (unit chord) abort refinement.
    pub max_depth: u32,
    /// Seed for the generic target direction.
    pub seed: u64,
    /// Absolute tolerance on the normalized integral.
    pub quadrature_tol: f64,
    pub max_quadrature_cells: usize,
}

impl Default for DegreeConfig {
    fn default() -> Self {
        DegreeConfig {
            max_depth: 26,
            seed: 0,
            quadrature_tol: 1e-3,
            max_quadrature_cells: 4_000_000,
        }
    }
}

pub(crate) fn check_square(field: &[Polynomial]) -> Result<usize, DegreeError> {
    let n = field.first().map_or(0, Polynomial::num_vars);
    if field.len() != n || field.iter().any(|p| p.num_vars() != n) {
        return Err(DegreeError::NotSquare {
            components: field.len(),
            n,
        });
    }
    if !(2..=crate::sphere::MAX_DIM).contains(&n) {
        return Err(SphereError::UnsupportedDimension(n).into());
    }
    Ok(n)
}

/// Degree of `x -> F(x)/|F(x)|` on the sphere of the given radius, by the
/// simplicial method checked against quadrature.
pub fn map_degree(field: &[Polynomial], radius: f64, config: &DegreeConfig) -> Result<DegreeResult, DegreeError> {
    let s = simplicial_degree(field, radius, config)?;
    let q = quadrature_degree(field, radius, config)?;
    if s.degree != q.degree {
        return Err(DegreeError::MethodsDisagree {
            simplicial: s.degree,
            quadrature: q.degree,
        });
    }
    Ok(DegreeResult {
        integral: q.integral,
        ..s
    })
}

/// `-grad f`.
pub fn negative_gradient(f: &Polynomial) -> Vec<Polynomial> {
    f.gradient().iter().map(|g| -g).collect()
}

/// Euler characteristics `(chi({f >= 0} ∩ S_r), chi(S_r))` from the degree
/// of `-grad f` at an isolated critical point in `R^3`.
pub fn chi_from_degree(deg: &DegreeResult, n: usize) -> Result<(i64, i64), DegreeError> {
    if n != 3 {
        return Err(DegreeError::UnsupportedFormula(n));
    }
    if !deg.certified_nonvanishing {
        return Err(DegreeError::NotIsolated);
    }
    let nonneg = 1 - deg.degree;
    Ok((nonneg, 2 - nonneg))
}
