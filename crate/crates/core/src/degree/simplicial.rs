use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{check_square, DegreeConfig, DegreeError, DegreeMethod, DegreeResult};
use crate::poly::{CompiledMap, Polynomial};
use crate::sphere::{det, CellId, SphereComplex, Split};

struct FieldOnMesh {
    map: CompiledMap,
    n: usize,
    lipschitz: f64,
    jacobian_lipschitz: f64,
    slack: f64,
    jacobian_slack: f64,
    values: Vec<f64>,
    jacobian_norms: Vec<f64>,
}

impl FieldOnMesh {
    fn push_vertex(&mut self, x: &[f64]) -> f64 {
        let n = self.n;
        let start = self.values.len();
        self.values.resize(start + n, 0.0);
        self.map.eval(x, &mut self.values[start..]);
        let mut jac = vec![0.0; n * n];
        self.map.jacobian(x, &mut jac);
        self.jacobian_norms.push(jac.iter().map(|v| v * v).sum::<f64>().sqrt());
        self.norm(start / n)
    }

    fn value(&self, v: usize) -> &[f64] {
        &self.values[v * self.n..(v + 1) * self.n]
    }

    fn norm(&self, v: usize) -> f64 {
        self.value(v).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `F` stays within `|F(v)|` of `F(v)` on the ball of radius `reach`
    /// about `v`, so the image of that ball misses the origin and lies in
    /// an open half-space.
    fn anchors(&self, v: usize, reach: f64) -> bool {
        let lip = self
            .lipschitz
            .min(self.jacobian_norms[v] + self.jacobian_slack + self.jacobian_lipschitz * reach);
        self.norm(v) > lip * reach + self.slack
    }
}

/// Signed count of preimages of a generic direction under the piecewise
/// linear interpolation of `F` on a certified triangulation of the sphere.
///
/// Cells are bisected until some vertex anchors the cell: the field near
/// that vertex is bounded away from zero by more than its variation over
/// the cell. The count is invariant under the straight-line homotopy to
/// `F` on such cells.
pub fn simplicial_degree(
    field: &[Polynomial],
    radius: f64,
    config: &DegreeConfig,
) -> Result<DegreeResult, DegreeError> {
    let n = check_square(field)?;
    let mut sc = SphereComplex::build(n, radius)?;
    let map = CompiledMap::new(field);
    let mut f = FieldOnMesh {
        n,
        lipschitz: map.lipschitz_bound(radius),
        jacobian_lipschitz: field
            .iter()
            .map(|p| p.hessian_bound(radius).powi(2))
            .sum::<f64>()
            .sqrt(),
        slack: map.rounding_slack(radius),
        jacobian_slack: field
            .iter()
            .map(|p| CompiledMap::new(&p.gradient()).rounding_slack(radius).powi(2))
            .sum::<f64>()
            .sqrt(),
        map,
        values: Vec::new(),
        jacobian_norms: Vec::new(),
    };
    let zero = |radius| DegreeError::PossibleZeroOnSphere { radius };
    for v in 0..sc.num_vertices() as u32 {
        if f.push_vertex(&sc.vertex_point(v)) <= f.slack {
            return Err(zero(radius));
        }
    }
    let certify = |sc: &SphereComplex, f: &FieldOnMesh, c: CellId| {
        let reach = sc.chord_diameter(c) * radius;
        sc.cell_verts(c).iter().any(|&v| f.anchors(v as usize, reach))
    };
    let mut certified: Vec<bool> = sc.alive_cells().map(|c| certify(&sc, &f, c)).collect();
    let min_size = std::f64::consts::SQRT_2 / f64::powi(2.0, config.max_depth as i32);
    let mut splits: Vec<Split> = Vec::new();
    loop {
        let pending: Vec<CellId> = sc.alive_cells().filter(|&c| !certified[c as usize]).collect();
        if pending.is_empty() {
            break;
        }
        for c in pending {
            if !sc.is_alive(c) || certified[c as usize] {
                continue;
            }
            if sc.chord_diameter(c) < min_size {
                return Err(DegreeError::NonConvergent {
                    radius,
                    depth: config.max_depth,
                });
            }
            splits.clear();
            sc.refine_cell(c, &mut splits);
            for s in &splits {
                while f.jacobian_norms.len() <= s.vertex as usize {
                    let v = f.jacobian_norms.len() as u32;
                    if f.push_vertex(&sc.vertex_point(v)) <= f.slack {
                        return Err(zero(radius));
                    }
                }
                let inherited = certified[s.parent as usize];
                for &child in &s.children {
                    let ok = inherited || certify(&sc, &f, child);
                    if certified.len() <= child as usize {
                        certified.resize(child as usize + 1, false);
                    }
                    certified[child as usize] = ok;
                }
            }
        }
    }

    let cells: Vec<CellId> = sc.alive_cells().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..64 {
        let target = random_unit(&mut rng, n);
        let counts: Vec<Option<i64>> = cells
            .par_iter()
            .map(|&c| cell_contribution(&sc, &f, c, &target))
            .collect();
        if counts.iter().all(Option::is_some) {
            let degree = counts.into_iter().map(Option::unwrap).sum();
            return Ok(DegreeResult {
                degree,
                radius_used: radius,
                certified_nonvanishing: true,
                method: DegreeMethod::Simplicial,
                cells: cells.len(),
                integral: None,
            });
        }
    }
    Err(DegreeError::NonConvergent {
        radius,
        depth: config.max_depth,
    })
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

/// `Some(±1)` if the ray through `target` meets the cone spanned by the
/// vertex images, `Some(0)` if it misses, `None` if it passes within
/// `1e-6` of the cone boundary.
fn cell_contribution(sc: &SphereComplex, f: &FieldOnMesh, c: CellId, target: &[f64]) -> Option<i64> {
    let n = f.n;
    let verts = sc.cell_verts(c);
    // columns are the normalized images of the vertices
    let mut m = vec![0.0; n * n];
    for (j, &v) in verts.iter().enumerate() {
        let val = f.value(v as usize);
        let norm = f.norm(v as usize);
        for i in 0..n {
            m[i * n + j] = val[i] / norm;
        }
    }
    let d = det(&m, n);
    if d == 0.0 {
        return None;
    }
    // Cramer's rule for the barycentric coordinates of the target
    let mut lambda = vec![0.0; n];
    for j in 0..n {
        let mut mj = m.clone();
        for i in 0..n {
            mj[i * n + j] = target[i];
        }
        lambda[j] = det(&mj, n) / d;
    }
    let total: f64 = lambda.iter().map(|x| x.abs()).sum();
    if lambda.iter().any(|x| x.abs() < 1e-6 * total) {
        return None;
    }
    if lambda.iter().all(|&x| x > 0.0) {
        let orient = sc.orientation(c).signum() as i64;
        Some(d.signum() as i64 * orient)
    } else {
        Some(0)
    }
}
