use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::{check_square, DegreeConfig, DegreeError, DegreeMethod, DegreeResult};
use crate::poly::{CompiledMap, Polynomial};
use crate::sphere::{det, SphereComplex};

/// Quadrature rule on the reference simplex `{t_i >= 0, sum t_i <= 1}`,
/// points given in barycentric coordinates (`d + 1` entries).
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: usize,
    pub weights: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Compositions of `total` into `parts` non-negative integers.
fn compositions(total: usize, parts: usize, out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>) {
    if cur.len() + 1 == parts {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for k in 0..=total {
        cur.push(k);
        compositions(total - k, parts, out, cur);
        cur.pop();
    }
}

/// Grundmann-Moller rule of degree `2s + 1` on the `d`-simplex.
pub fn grundmann_moller(d: usize, s: usize) -> QuadratureRule {
    let m = 2 * s + 1;
    let mut weights = Vec::new();
    let mut points = Vec::new();
    for i in 0..=s {
        let denom = (d + m - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * f64::powi(2.0, -(2 * s as i32)) * denom.powi(m as i32)
            / (factorial(i) * factorial(d + m - i));
        let mut betas = Vec::new();
        compositions(s - i, d + 1, &mut betas, &mut Vec::new());
        for beta in betas {
            weights.push(w);
            points.push(beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
        }
    }
    QuadratureRule {
        dim: d,
        weights,
        points,
    }
}

struct Integrand<'a> {
    map: &'a CompiledMap,
    n: usize,
    radius: f64,
}

impl Integrand<'_> {
    /// Image direction and integrand at the flat point `y` for the simplex
    /// spanned by `edges` (each an `n`-vector).
    fn eval(&self, y: &[f64], edges: &[Vec<f64>]) -> (Vec<f64>, f64) {
        let n = self.n;
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x: Vec<f64> = y.iter().map(|v| v / ny).collect();
        let big: Vec<f64> = x.iter().map(|v| v * self.radius).collect();
        let mut g = vec![0.0; n];
        self.map.eval(&big, &mut g);
        let mut jac = vec![0.0; n * n];
        self.map.jacobian(&big, &mut jac);
        // columns: G, DG e_1, ..., DG e_{n-1}
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n] = g[i];
        }
        for (k, e) in edges.iter().enumerate() {
            let xe: f64 = x.iter().zip(e).map(|(a, b)| a * b).sum();
            let dpi: Vec<f64> = e.iter().zip(&x).map(|(ei, xi)| (ei - xe * xi) / ny).collect();
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += jac[i * n + j] * dpi[j];
                }
                m[i * n + k + 1] = self.radius * acc;
            }
        }
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        (g, det(&m, n) / gn.powi(n as i32))
    }
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb);
    c.clamp(-1.0, 1.0).acos()
}

struct Adaptive<'a> {
    f: Integrand<'a>,
    rule: QuadratureRule,
    budget: usize,
}

impl Adaptive<'_> {
    fn rule_on(&self, verts: &[Vec<f64>]) -> f64 {
        let n = self.f.n;
        let edges: Vec<Vec<f64>> = verts[1..]
            .iter()
            .map(|v| v.iter().zip(&verts[0]).map(|(a, b)| a - b).collect())
            .collect();
        let mut sum = 0.0;
        for (w, bary) in self.rule.weights.iter().zip(&self.rule.points) {
            let mut y = vec![0.0; n];
            for (l, vert) in bary.iter().zip(verts) {
                for i in 0..n {
                    y[i] += l * vert[i];
                }
            }
            sum += w * self.f.eval(&y, &edges).1;
        }
        sum
    }

    fn split(verts: &[Vec<f64>]) -> [Vec<Vec<f64>>; 2] {
        let k = verts.len();
        let (mut bi, mut bj, mut best) = (0, 1, -1.0);
        for i in 0..k {
            for j in i + 1..k {
                let d: f64 = verts[i].iter().zip(&verts[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                if d > best {
                    (bi, bj, best) = (i, j, d);
                }
            }
        }
        let mid: Vec<f64> = verts[bi].iter().zip(&verts[bj]).map(|(a, b)| 0.5 * (a + b)).collect();
        let mut a = verts.to_vec();
        a[bj] = mid.clone();
        let mut b = verts.to_vec();
        b[bi] = mid;
        [a, b]
    }

    fn spread(&self, verts: &[Vec<f64>]) -> f64 {
        let dummy: Vec<Vec<f64>> = Vec::new();
        let imgs: Vec<Vec<f64>> = verts.iter().map(|v| self.f.eval(v, &dummy).0).collect();
        let mut worst: f64 = 0.0;
        for i in 0..imgs.len() {
            for j in i + 1..imgs.len() {
                worst = worst.max(angle(&imgs[i], &imgs[j]));
            }
        }
        worst
    }

    fn cell(&self, verts: Vec<Vec<f64>>, coarse: f64, id: u64) -> Cell {
        let kids = Self::split(&verts);
        let fine = [self.rule_on(&kids[0]), self.rule_on(&kids[1])];
        let err = (fine[0] + fine[1] - coarse).abs();
        let key = if self.spread(&verts) >= 0.5 { f64::INFINITY } else { err };
        Cell {
            key,
            err: if err.is_finite() { err } else { f64::INFINITY },
            id,
            kids,
            fine,
        }
    }

    /// Globally adaptive integral over one flat simplex: the cell with the
    /// largest error estimate is split until the summed estimate is below
    /// `tol` and every cell has a small image spread.
    fn integrate(&self, root: Vec<Vec<f64>>, tol: f64) -> Result<(f64, usize), Failure> {
        let mut next_id = 0u64;
        let mut heap = BinaryHeap::new();
        let mut seeds = vec![root];
        for _ in 0..2 {
            seeds = seeds.iter().flat_map(|v| Self::split(v)).collect();
        }
        for v in seeds {
            let coarse = self.rule_on(&v);
            heap.push(self.cell(v, coarse, next_id));
            next_id += 1;
        }
        loop {
            let top = heap.peek().expect("heap is never empty");
            if top.key.is_finite() {
                let total: f64 = heap.iter().map(|c| c.err).sum();
                if total < tol {
                    break;
                }
            }
            if heap.len() >= self.budget {
                return Err(Failure::Budget);
            }
            let top = heap.pop().unwrap();
            if !(top.fine[0].is_finite() && top.fine[1].is_finite()) {
                return Err(Failure::Singular);
            }
            for (verts, coarse) in top.kids.into_iter().zip(top.fine) {
                heap.push(self.cell(verts, coarse, next_id));
                next_id += 1;
            }
        }
        let mut cells = heap.into_vec();
        cells.sort_by_key(|c| c.id);
        let total = cells.iter().map(|c| c.fine[0] + c.fine[1]).sum();
        Ok((total, cells.len()))
    }
}

enum Failure {
    Budget,
    Singular,
}

struct Cell {
    key: f64,
    err: f64,
    id: u64,
    kids: [Vec<Vec<f64>>; 2],
    fine: [f64; 2],
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    // largest key first, older cell first on ties
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key).then_with(|| other.id.cmp(&self.id))
    }
}

/// Degree by adaptive quadrature of the Kronecker integral
/// `(1/|S^{n-1}|) ∫ det(F, dF) / |F|^n` over the sphere, parametrized by
/// the radial projection of the cross-polytope facets.
pub fn quadrature_degree(
    field: &[Polynomial],
    radius: f64,
    config: &DegreeConfig,
) -> Result<DegreeResult, DegreeError> {
    let n = check_square(field)?;
    let base = SphereComplex::build(n, radius)?;
    let map = CompiledMap::new(field);
    let facets: Vec<Vec<Vec<f64>>> = base
        .alive_cells()
        .map(|c| base.cell_verts(c).iter().map(|&v| base.unit_vertex(v).to_vec()).collect())
        .collect();
    let per_facet_budget = config.max_quadrature_cells / facets.len();
    let tol = config.quadrature_tol * area(n) / facets.len() as f64;
    let parts: Vec<Result<(f64, usize), Failure>> = facets
        .into_par_iter()
        .map(|verts| {
            let adaptive = Adaptive {
                f: Integrand {
                    map: &map,
                    n,
                    radius,
                },
                rule: grundmann_moller(n - 1, 2),
                budget: per_facet_budget,
            };
            adaptive.integrate(verts, tol)
        })
        .collect();
    let mut sum = 0.0;
    let mut cells = 0;
    for p in parts {
        let (v, c) = p.map_err(|e| match e {
            Failure::Budget => DegreeError::QuadratureBudget { radius },
            Failure::Singular => DegreeError::PossibleZeroOnSphere { radius },
        })?;
        sum += v;
        cells += c;
    }
    let value = sum / area(n);
    if !value.is_finite() {
        return Err(DegreeError::PossibleZeroOnSphere { radius });
    }
    let degree = value.round();
    if (value - degree).abs() >= 0.1 {
        return Err(DegreeError::QuadratureResidual { value });
    }
    Ok(DegreeResult {
        degree: degree as i64,
        radius_used: radius,
        certified_nonvanishing: false,
        method: DegreeMethod::Quadrature,
        cells,
        integral: Some(value),
    })
}

/// Area of the unit sphere `S^{n-1}`.
fn area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        _ => unreachable!("dimension checked"),
    }
}
