use serde::Serialize;

use super::complex::{CellId, SphereComplex, Split};
use super::homology::{simplicial_homology, HomologySummary};
use super::SphereError;
use crate::poly::{CompiledMap, CompiledPoly, Polynomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    /// `p < 0` on the whole closed cell.
    Neg,
    /// `p > 0` on the whole closed cell.
    Pos,
    Mixed,
}

/// Labelling of the top cells of a [`SphereComplex`] by the sign of a
/// polynomial.
///
/// A cell is NEG (POS) when every vertex value is negative (positive) and
/// some vertex value exceeds, in magnitude, a Lipschitz bound for `p` near
/// that vertex times the cell size, plus rounding slack. The size is the
/// cell diameter floored at the target size of the current pass, so the
/// test depends only on the vertex within one pass and the certified set
/// is a union of vertex stars. Children of a certified cell inherit its
/// label.
#[derive(Debug, Clone)]
pub struct SignRegion {
    complex: SphereComplex,
    poly: Polynomial,
    compiled: CompiledPoly,
    gradient: CompiledMap,
    lipschitz: f64,
    hessian_bound: f64,
    slack: f64,
    gradient_slack: f64,
    values: Vec<f64>,
    /// Gradient at each vertex, `n` entries per vertex.
    gradients: Vec<f64>,
    labels: Vec<Label>,
    depth: u32,
    /// Floor on the cell size used in the certification bound.
    pass_h: f64,
    previous_betti: Option<Vec<usize>>,
}

impl SignRegion {
    /// Labels the cells of `complex` without refining.
    pub fn new(complex: SphereComplex, poly: &Polynomial) -> Result<Self, SphereError> {
        if poly.num_vars() != complex.n() {
            return Err(SphereError::DimensionMismatch {
                expected: complex.n(),
                got: poly.num_vars(),
            });
        }
        let r = complex.radius();
        let compiled = poly.compile();
        let gradient = CompiledMap::new(&poly.gradient());
        let mut region = SignRegion {
            lipschitz: poly.lipschitz_bound(r),
            hessian_bound: poly.hessian_bound(r),
            slack: compiled.rounding_slack(r),
            gradient_slack: gradient.rounding_slack(r),
            compiled,
            gradient,
            poly: poly.clone(),
            values: Vec::new(),
            gradients: Vec::new(),
            labels: Vec::new(),
            depth: 0,
            pass_h: Self::pass_size(0),
            previous_betti: None,
            complex,
        };
        for v in 0..region.complex.num_vertices() as u32 {
            region.push_vertex(v);
        }
        region.labels = (0..region.complex.cell_capacity() as CellId)
            .map(|c| region.classify(c))
            .collect();
        Ok(region)
    }

    /// Builds the base sphere and refines to `max_depth`.
    pub fn build(poly: &Polynomial, radius: f64, max_depth: u32) -> Result<Self, SphereError> {
        let complex = SphereComplex::build(poly.num_vars(), radius)?;
        let mut region = SignRegion::new(complex, poly)?;
        region.refine(max_depth);
        Ok(region)
    }

    fn push_vertex(&mut self, v: u32) {
        debug_assert_eq!(v as usize, self.values.len());
        let x = self.complex.vertex_point(v);
        self.values.push(self.compiled.eval(&x));
        let n = x.len();
        let start = self.gradients.len();
        self.gradients.resize(start + n, 0.0);
        self.gradient.eval(&x, &mut self.gradients[start..]);
    }

    /// Whether `p` keeps the sign of `p(v)` on the ball of radius `reach`
    /// about vertex `v`. The Lipschitz bound on that ball is the gradient
    /// at `v` plus the Hessian bound times `reach`, capped by the global
    /// bound.
    fn anchors(&self, v: u32, reach: f64) -> bool {
        let n = self.complex.n();
        let g = &self.gradients[v as usize * n..(v as usize + 1) * n];
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let lip = self.lipschitz.min(norm + self.gradient_slack + self.hessian_bound * reach);
        self.values[v as usize].abs() > lip * reach + self.slack
    }

    fn classify(&self, c: CellId) -> Label {
        let verts = self.complex.cell_verts(c);
        // every point of the cell lies within `reach` of each vertex
        let reach = self.complex.chord_diameter(c).max(self.pass_h) * self.complex.radius();
        if !verts.iter().any(|&v| self.anchors(v, reach)) {
            return Label::Mixed;
        }
        if verts.iter().all(|&v| self.values[v as usize] < -self.slack) {
            Label::Neg
        } else if verts.iter().all(|&v| self.values[v as usize] > self.slack) {
            Label::Pos
        } else {
            Label::Mixed
        }
    }

    pub fn complex(&self) -> &SphereComplex {
        &self.complex
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn label(&self, c: CellId) -> Label {
        self.labels[c as usize]
    }

    /// Value of the polynomial at vertex `v`.
    pub fn vertex_value(&self, v: u32) -> f64 {
        self.values[v as usize]
    }

    pub fn cells_with(&self, label: Label) -> Vec<CellId> {
        self.complex.alive_cells().filter(|&c| self.labels[c as usize] == label).collect()
    }

    /// Counts of (NEG, POS, MIXED) top cells.
    pub fn label_counts(&self) -> (usize, usize, usize) {
        let mut out = (0, 0, 0);
        for c in self.complex.alive_cells() {
            match self.labels[c as usize] {
                Label::Neg => out.0 += 1,
                Label::Pos => out.1 += 1,
                Label::Mixed => out.2 += 1,
            }
        }
        out
    }

    /// Target cell size after pass `k`.
    fn pass_size(k: u32) -> f64 {
        std::f64::consts::SQRT_2 / f64::powi(2.0, k as i32)
    }

    fn apply_splits(&mut self, splits: &[Split]) {
        for s in splits {
            while self.values.len() <= s.vertex as usize {
                self.push_vertex(self.values.len() as u32);
            }
            let parent = self.labels[s.parent as usize];
            for &child in &s.children {
                let label = if parent == Label::Mixed { self.classify(child) } else { parent };
                let idx = child as usize;
                if self.labels.len() <= idx {
                    self.labels.resize(idx + 1, Label::Mixed);
                }
                self.labels[idx] = label;
            }
        }
    }

    /// One refinement pass; returns whether the mesh changed.
    fn pass(&mut self, k: u32) -> bool {
        self.pass_h = Self::pass_size(k);
        let h = self.pass_h * (1.0 + 1e-9);
        let mut changed = false;
        let mixed: Vec<CellId> = self.cells_with(Label::Mixed);
        for c in mixed {
            self.labels[c as usize] = self.classify(c);
        }
        let mut splits = Vec::new();
        loop {
            let targets: Vec<CellId> = self
                .complex
                .alive_cells()
                .filter(|&c| self.labels[c as usize] == Label::Mixed && self.complex.chord_diameter(c) > h)
                .collect();
            if targets.is_empty() {
                break;
            }
            for c in targets {
                if !self.complex.is_alive(c) {
                    continue;
                }
                splits.clear();
                self.complex.refine_cell(c, &mut splits);
                let snapshot = std::mem::take(&mut splits);
                self.apply_splits(&snapshot);
                splits = snapshot;
                changed = true;
            }
        }
        changed
    }

    /// Runs refinement passes up to `max_depth`. Pass `k` splits MIXED cells
    /// whose longest edge exceeds `sqrt(2) / 2^k` on the unit sphere.
    pub fn refine(&mut self, max_depth: u32) {
        while self.depth < max_depth {
            let k = self.depth + 1;
            if k == max_depth {
                self.previous_betti = Some(self.betti());
            }
            self.pass(k);
            self.depth = k;
        }
    }

    pub fn neg_homology(&self) -> super::homology::SimplicialHomology {
        let tops: Vec<Vec<u32>> = self
            .cells_with(Label::Neg)
            .into_iter()
            .map(|c| self.complex.cell_verts(c).to_vec())
            .collect();
        simplicial_homology(&tops, self.complex.n() - 1)
    }

    fn betti(&self) -> Vec<usize> {
        self.neg_homology().betti
    }

    /// Homology of the NEG subcomplex. Stabilized when the Betti vector
    /// agrees with the one recorded before the last refinement pass.
    pub fn homology_summary(&self) -> HomologySummary {
        let h = self.neg_homology();
        let (neg, _, mixed) = self.label_counts();
        let stabilized = match &self.previous_betti {
            Some(prev) => *prev == h.betti,
            None => mixed == 0,
        };
        HomologySummary {
            euler: h.euler(),
            betti: h.betti,
            stabilized,
            depth_used: self.depth,
            empty: neg == 0,
            radius: self.complex.radius(),
            neg_cells: neg,
            mixed_cells: mixed,
        }
    }
}
