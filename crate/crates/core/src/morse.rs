//! Critical points of a homogeneous form restricted to the unit sphere.
//!
//! Critical points are solutions of the Lagrange system
//! `grad w(x) = lambda x`, `|x| = 1`, found by Newton's method from
//! quasi-random starts. The search is best-effort: a returned point passes
//! residual gates, but missing points prove nothing.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::{CompiledMap, CompiledPoly, Polynomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorseError {
    #[error("the form is not homogeneous")]
    NotHomogeneous,
    #[error("the form has degree {0}; degree at least 2 is required")]
    DegreeTooLow(u32),
    #[error("the form has degree {0}; a quadratic form is required")]
    NotQuadratic(u32),
    #[error("at least one start point is required")]
    NoAttempts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CriticalClass {
    NondegMin,
    NondegMax,
    NondegSaddle,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPointOnSphere {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub value: f64,
    /// Eigenvalues of the Hessian of the restriction, ascending.
    pub tangent_eigenvalues: Vec<f64>,
    pub classification: CriticalClass,
    pub in_omega_region: bool,
    /// `|grad w(x) - lambda x|`.
    pub residual: f64,
}

pub const NORM_TOL: f64 = 1e-10;
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const EULER_TOL: f64 = 1e-8;
pub const EIGEN_TOL: f64 = 1e-7;
pub const DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct MorseConfig {
    pub attempts: usize,
    /// Offset into the start sequence.
    pub seed: u64,
}

impl Default for MorseConfig {
    fn default() -> Self {
        MorseConfig { attempts: 512, seed: 0 }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// Halton points in `[-1, 1]^n` projected to the unit sphere.
fn start_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    const BASES: [u64; 4] = [2, 3, 5, 7];
    let mut out = Vec::with_capacity(count);
    let mut i = 1 + seed * count as u64;
    while out.len() < count {
        let p: Vec<f64> = (0..n).map(|k| 2.0 * radical_inverse(i, BASES[k]) - 1.0).collect();
        i += 1;
        let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-3 {
            out.push(p.iter().map(|v| v / norm).collect());
        }
    }
    out
}

struct Form {
    n: usize,
    d: u32,
    value: CompiledPoly,
    gradient: CompiledMap,
    hessian: Vec<CompiledPoly>,
}

impl Form {
    fn new(omega: &Polynomial) -> Result<Self, MorseError> {
        let d = omega.homogeneous_degree().ok_or(MorseError::NotHomogeneous)?;
        if d < 2 {
            return Err(MorseError::DegreeTooLow(d));
        }
        let grad = omega.gradient();
        let hessian = grad
            .iter()
            .flat_map(|g| (0..omega.num_vars()).map(move |j| g.partial(j).compile()))
            .collect();
        Ok(Form {
            n: omega.num_vars(),
            d,
            value: omega.compile(),
            gradient: CompiledMap::new(&grad),
            hessian,
        })
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        self.gradient.eval(x, &mut g);
        g
    }

    fn hess(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.hessian[i * self.n + j].eval(x))
    }

    fn residual(&self, x: &[f64], lambda: f64) -> f64 {
        self.grad(x)
            .iter()
            .zip(x)
            .map(|(g, xi)| (g - lambda * xi).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn newton(&self, start: &[f64]) -> Option<(Vec<f64>, f64)> {
        let n = self.n;
        let mut x = DVector::from_column_slice(start);
        let mut lambda = self.d as f64 * self.value.eval(start);
        for _ in 0..100 {
            let g = self.grad(x.as_slice());
            let mut r = DVector::zeros(n + 1);
            for i in 0..n {
                r[i] = g[i] - lambda * x[i];
            }
            r[n] = 0.5 * (x.norm_squared() - 1.0);
            if r.norm() < 1e-15 {
                break;
            }
            let h = self.hess(x.as_slice());
            let mut jac = DMatrix::zeros(n + 1, n + 1);
            for i in 0..n {
                for j in 0..n {
                    jac[(i, j)] = h[(i, j)];
                }
                jac[(i, i)] -= lambda;
                jac[(i, n)] = -x[i];
                jac[(n, i)] = x[i];
            }
            let step = jac.lu().solve(&r)?;
            for i in 0..n {
                x[i] -= step[i];
            }
            lambda -= step[n];
            if !x.iter().all(|v| v.is_finite()) || !lambda.is_finite() {
                return None;
            }
            if step.norm() < 1e-15 {
                break;
            }
        }
        Some((x.as_slice().to_vec(), lambda))
    }

    fn classify(&self, x: &[f64], lambda: f64) -> (Vec<f64>, CriticalClass) {
        let n = self.n;
        let xv = DVector::from_column_slice(x);
        // orthonormal tangent basis by Gram-Schmidt against x
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
        for k in 0..n {
            let mut v = DVector::zeros(n);
            v[k] = 1.0;
            v -= &xv * xv.dot(&v);
            for b in &basis {
                v -= b * b.dot(&v);
            }
            let norm = v.norm();
            if norm > 1e-6 && basis.len() < n - 1 {
                basis.push(v / norm);
            }
        }
        let t = DMatrix::from_columns(&basis);
        let mut h = self.hess(x);
        for i in 0..n {
            h[(i, i)] -= lambda;
        }
        let m = t.transpose() * h * &t;
        let sym = (&m + m.transpose()) * 0.5;
        let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        let class = if eig.iter().any(|e| e.abs() <= EIGEN_TOL) {
            CriticalClass::Degenerate
        } else if eig.iter().all(|&e| e > 0.0) {
            CriticalClass::NondegMin
        } else if eig.iter().all(|&e| e < 0.0) {
            CriticalClass::NondegMax
        } else {
            CriticalClass::NondegSaddle
        };
        (eig, class)
    }

    fn solve_from(&self, start: &[f64]) -> Option<CriticalPointOnSphere> {
        let (x, lambda) = self.newton(start)?;
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return None;
        }
        let residual = self.residual(&x, lambda);
        let value = self.value.eval(&x);
        if residual >= RESIDUAL_TOL || (lambda - self.d as f64 * value).abs() > EULER_TOL {
            return None;
        }
        let (tangent_eigenvalues, classification) = self.classify(&x, lambda);
        Some(CriticalPointOnSphere {
            x,
            lambda,
            value,
            tangent_eigenvalues,
            classification,
            // values within rounding of zero are not certified negative
            in_omega_region: value < -RESIDUAL_TOL,
            residual,
        })
    }
}

/// Critical points of `omega` restricted to the unit sphere, deduplicated
/// and sorted by value, then coordinates.
pub fn critical_points_on_sphere(
    omega: &Polynomial,
    config: &MorseConfig,
) -> Result<Vec<CriticalPointOnSphere>, MorseError> {
    if config.attempts == 0 {
        return Err(MorseError::NoAttempts);
    }
    let form = Form::new(omega)?;
    let starts = start_points(form.n, config.attempts, config.seed);
    let found: Vec<Option<CriticalPointOnSphere>> = starts.par_iter().map(|s| form.solve_from(s)).collect();
    let mut unique: Vec<CriticalPointOnSphere> = Vec::new();
    for p in found.into_iter().flatten() {
        let dup = unique.iter().any(|q| {
            q.x.iter().zip(&p.x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() < DEDUP_TOL
        });
        if !dup {
            unique.push(p);
        }
    }
    unique.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| a.x.iter().zip(&b.x).map(|(u, v)| u.total_cmp(v)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(unique)
}

/// A non-degenerate critical point in `{omega < 0}` that is not a local
/// minimum, if the list contains one. The lowest-valued such point is
/// returned.
pub fn morse_certificate(points: &[CriticalPointOnSphere]) -> Option<CriticalPointOnSphere> {
    points
        .iter()
        .find(|p| {
            p.in_omega_region
                && p.residual < RESIDUAL_TOL
                && matches!(p.classification, CriticalClass::NondegMax | CriticalClass::NondegSaddle)
        })
        .cloned()
}

/// Inertia `(neg, pos)` of a quadratic form, from the eigenvalues of its
/// symmetric coefficient matrix with zero tolerance `1e-9`.
pub fn quadratic_signature(omega: &Polynomial) -> Result<(usize, usize), MorseError> {
    let d = omega.homogeneous_degree().ok_or(MorseError::NotHomogeneous)?;
    if d != 2 {
        return Err(MorseError::NotQuadratic(d));
    }
    let n = omega.num_vars();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (m, c) in omega.terms() {
        let c = c.to_f64().unwrap_or(f64::NAN);
        let idx: Vec<usize> = m
            .exponents()
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
            .collect();
        let (i, j) = (idx[0], idx[1]);
        if i == j {
            a[(i, i)] += c;
        } else {
            a[(i, j)] += c / 2.0;
            a[(j, i)] += c / 2.0;
        }
    }
    let eig = SymmetricEigen::new(a).eigenvalues;
    let neg = eig.iter().filter(|&&e| e < -1e-9).count();
    let pos = eig.iter().filter(|&&e| e > 1e-9).count();
    Ok((neg, pos))
}
