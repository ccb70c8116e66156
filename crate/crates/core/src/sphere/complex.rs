use std::collections::HashMap;
use std::io::{self, Write};

use super::SphereError;

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 4;

pub type CellId = u32;
pub type VertexId = u32;

/// A top-dimensional simplex of the sphere triangulation.
#[derive(Debug, Clone)]
pub struct Cell {
    verts: [VertexId; MAX_DIM],
    /// Number of bisections separating this cell from a base facet.
    pub generation: u32,
    alive: bool,
}

/// Record of one cell bisection.
#[derive(Debug, Clone, Copy)]
pub struct Split {
    pub parent: CellId,
    pub children: [CellId; 2],
    pub vertex: VertexId,
}

/// Triangulated sphere `S^{n-1}` of a given radius in `R^n`.
///
/// Starts as the boundary of the cross-polytope and is refined by
/// conforming longest-edge bisection, so the complex stays a closed
/// combinatorial manifold with coherently oriented top cells. New vertices
/// are edge midpoints pushed back onto the sphere. Vertex coordinates are
/// stored on the unit sphere and scaled by `radius` on demand.
#[derive(Debug, Clone)]
pub struct SphereComplex {
    n: usize,
    radius: f64,
    coords: Vec<f64>,
    cells: Vec<Cell>,
    edge_cells: HashMap<(VertexId, VertexId), Vec<CellId>>,
    alive: usize,
}

fn edge(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Determinant of a small row-major square matrix.
pub fn det(m: &[f64], n: usize) -> f64 {
    match n {
        1 => m[0],
        2 => m[0] * m[3] - m[1] * m[2],
        3 => {
            m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
                + m[2] * (m[3] * m[7] - m[4] * m[6])
        }
        _ => {
            let mut a = m.to_vec();
            let mut d = 1.0;
            for c in 0..n {
                let p = (c..n)
                    .max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs()))
                    .unwrap();
                if a[p * n + c] == 0.0 {
                    return 0.0;
                }
                if p != c {
                    for k in 0..n {
                        a.swap(p * n + k, c * n + k);
                    }
                    d = -d;
                }
                let piv = a[c * n + c];
                d *= piv;
                for r in c + 1..n {
                    let f = a[r * n + c] / piv;
                    for k in c..n {
                        a[r * n + k] -= f * a[c * n + k];
                    }
                }
            }
            d
        }
    }
}

impl SphereComplex {
    /// Boundary of the `n`-dimensional cross-polytope, scaled to `radius`.
    pub fn build(n: usize, radius: f64) -> Result<Self, SphereError> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(SphereError::UnsupportedDimension(n));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(SphereError::InvalidRadius(radius));
        }
        let mut coords = vec![0.0; 2 * n * n];
        // vertex 2i is +e_i, vertex 2i+1 is -e_i
        for i in 0..n {
            coords[2 * i * n + i] = 1.0;
            coords[(2 * i + 1) * n + i] = -1.0;
        }
        let mut sc = SphereComplex {
            n,
            radius,
            coords,
            cells: Vec::new(),
            edge_cells: HashMap::new(),
            alive: 0,
        };
        for signs in 0..(1u32 << n) {
            let mut verts = [0; MAX_DIM];
            let mut parity = 0;
            for (i, v) in verts.iter_mut().enumerate().take(n) {
                let neg = (signs >> i) & 1;
                parity ^= neg;
                *v = 2 * i as u32 + neg;
            }
            // det(s_0 e_0, ..., s_{n-1} e_{n-1}) = prod s_i
            if parity == 1 {
                verts.swap(0, 1);
            }
            sc.push_cell(verts, 0);
        }
        Ok(sc)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn num_vertices(&self) -> usize {
        self.coords.len() / self.n
    }

    pub fn num_cells(&self) -> usize {
        self.alive
    }

    /// Coordinates of vertex `v` on the unit sphere.
    pub fn unit_vertex(&self, v: VertexId) -> &[f64] {
        let i = v as usize * self.n;
        &self.coords[i..i + self.n]
    }

    /// Coordinates of vertex `v` on the sphere of radius `radius`.
    pub fn vertex_point(&self, v: VertexId) -> Vec<f64> {
        self.unit_vertex(v).iter().map(|c| c * self.radius).collect()
    }

    pub fn cell_verts(&self, c: CellId) -> &[VertexId] {
        &self.cells[c as usize].verts[..self.n]
    }

    pub fn cell(&self, c: CellId) -> &Cell {
        &self.cells[c as usize]
    }

    pub fn is_alive(&self, c: CellId) -> bool {
        self.cells[c as usize].alive
    }

    /// Ids of the current top cells in creation order.
    pub fn alive_cells(&self) -> impl Iterator<Item = CellId> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.alive)
            .map(|(i, _)| i as CellId)
    }

    /// Upper bound on the id of any cell, for sizing side tables.
    pub fn cell_capacity(&self) -> usize {
        self.cells.len()
    }

    fn chord2(&self, a: VertexId, b: VertexId) -> f64 {
        self.unit_vertex(a)
            .iter()
            .zip(self.unit_vertex(b))
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    }

    /// Largest vertex-to-vertex chord of a cell on the unit sphere.
    pub fn chord_diameter(&self, c: CellId) -> f64 {
        let v = self.cell_verts(c);
        let mut best: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                best = best.max(self.chord2(v[i], v[j]));
            }
        }
        best.sqrt()
    }

    /// Orientation of a cell: `det(v_0, ..., v_{n-1})` of its unit vertices.
    pub fn orientation(&self, c: CellId) -> f64 {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for (r, &v) in self.cell_verts(c).iter().enumerate() {
            m[r * n..(r + 1) * n].copy_from_slice(self.unit_vertex(v));
        }
        det(&m, n)
    }

    fn edge_key(&self, e: (VertexId, VertexId)) -> (u64, VertexId, VertexId) {
        // Length then ids gives a strict total order on edges; the bit
        // pattern of a non-negative float orders like its value.
        (self.chord2(e.0, e.1).to_bits(), e.0, e.1)
    }

    pub fn longest_edge(&self, c: CellId) -> (VertexId, VertexId) {
        let v = self.cell_verts(c);
        let mut best = edge(v[0], v[1]);
        let mut best_key = self.edge_key(best);
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                let e = edge(v[i], v[j]);
                let k = self.edge_key(e);
                if k > best_key {
                    best = e;
                    best_key = k;
                }
            }
        }
        best
    }

    fn push_cell(&mut self, verts: [VertexId; MAX_DIM], generation: u32) -> CellId {
        let id = self.cells.len() as CellId;
        for i in 0..self.n {
            for j in i + 1..self.n {
                self.edge_cells.entry(edge(verts[i], verts[j])).or_default().push(id);
            }
        }
        self.cells.push(Cell {
            verts,
            generation,
            alive: true,
        });
        self.alive += 1;
        id
    }

    fn kill_cell(&mut self, c: CellId) {
        let verts = self.cells[c as usize].verts;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let e = edge(verts[i], verts[j]);
                if let Some(list) = self.edge_cells.get_mut(&e) {
                    list.retain(|&x| x != c);
                    if list.is_empty() {
                        self.edge_cells.remove(&e);
                    }
                }
            }
        }
        self.cells[c as usize].alive = false;
        self.alive -= 1;
    }

    fn add_midpoint(&mut self, a: VertexId, b: VertexId) -> VertexId {
        let n = self.n;
        let mid: Vec<f64> = self
            .unit_vertex(a)
            .iter()
            .zip(self.unit_vertex(b))
            .map(|(x, y)| 0.5 * (x + y))
            .collect();
        let norm = mid.iter().map(|x| x * x).sum::<f64>().sqrt();
        let id = (self.coords.len() / n) as VertexId;
        self.coords.extend(mid.iter().map(|x| x / norm));
        id
    }

    /// Splits every cell containing edge `{a, b}` at the edge midpoint.
    fn bisect_edge(&mut self, e: (VertexId, VertexId), out: &mut Vec<Split>) {
        let cells = self.edge_cells.get(&e).cloned().unwrap_or_default();
        if cells.is_empty() {
            return;
        }
        let m = self.add_midpoint(e.0, e.1);
        for c in cells {
            let cell = &self.cells[c as usize];
            let (verts, generation) = (cell.verts, cell.generation);
            let ia = verts[..self.n].iter().position(|&v| v == e.0).unwrap();
            let ib = verts[..self.n].iter().position(|&v| v == e.1).unwrap();
            self.kill_cell(c);
            let mut first = verts;
            first[ib] = m;
            let mut second = verts;
            second[ia] = m;
            let c1 = self.push_cell(first, generation + 1);
            let c2 = self.push_cell(second, generation + 1);
            out.push(Split {
                parent: c,
                children: [c1, c2],
                vertex: m,
            });
        }
    }

    /// Longest-edge bisection of `c`, first refining neighbours whose own
    /// longest edge is longer so that the mesh stays conforming.
    pub fn refine_cell(&mut self, c: CellId, out: &mut Vec<Split>) {
        if !self.is_alive(c) {
            return;
        }
        let e = self.longest_edge(c);
        self.bisect_longest(e, out);
    }

    fn bisect_longest(&mut self, e: (VertexId, VertexId), out: &mut Vec<Split>) {
        loop {
            let Some(cells) = self.edge_cells.get(&e) else {
                return;
            };
            let blocker = cells.iter().copied().find(|&t| self.longest_edge(t) != e);
            match blocker {
                Some(t) => {
                    let e2 = self.longest_edge(t);
                    self.bisect_longest(e2, out);
                }
                None => break,
            }
        }
        self.bisect_edge(e, out);
    }

    /// All `k`-dimensional faces of the closure of the given top cells,
    /// as sorted vertex tuples in lexicographic order.
    pub fn faces_of(&self, cells: &[CellId], k: usize) -> Vec<Vec<VertexId>> {
        let mut out = Vec::new();
        for &c in cells {
            let mut v = self.cell_verts(c).to_vec();
            v.sort_unstable();
            for_each_subset(&v, k + 1, &mut |s| out.push(s.to_vec()));
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Face counts `(f_0, ..., f_{n-1})` of the whole complex.
    pub fn f_vector(&self) -> Vec<usize> {
        let cells: Vec<CellId> = self.alive_cells().collect();
        (0..self.n).map(|k| self.faces_of(&cells, k).len()).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(k, &f)| if k % 2 == 0 { f as i64 } else { -(f as i64) })
            .sum()
    }

    /// Checks that every codimension-one face bounds exactly two top cells
    /// and that the two induce opposite orientations on it.
    pub fn check_manifold(&self) -> Result<(), String> {
        let mut faces: HashMap<Vec<VertexId>, Vec<i8>> = HashMap::new();
        for c in self.alive_cells() {
            let v = self.cell_verts(c);
            for skip in 0..v.len() {
                let mut face: Vec<VertexId> = v
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &x)| x)
                    .collect();
                let mut sign: i8 = if skip % 2 == 0 { 1 } else { -1 };
                // bubble sort, tracking permutation parity
                for i in 0..face.len() {
                    for j in 0..face.len().saturating_sub(i + 1) {
                        if face[j] > face[j + 1] {
                            face.swap(j, j + 1);
                            sign = -sign;
                        }
                    }
                }
                faces.entry(face).or_default().push(sign);
            }
        }
        let mut keys: Vec<_> = faces.iter().collect();
        keys.sort();
        for (face, signs) in keys {
            if signs.len() != 2 {
                return Err(format!("face {face:?} has {} cofaces", signs.len()));
            }
            if signs[0] == signs[1] {
                return Err(format!("face {face:?} is not coherently oriented"));
            }
        }
        Ok(())
    }

    /// Writes the given top cells in OFF format. Ambient dimension 4 uses
    /// the `4OFF` header; dimension 2 is padded with a zero `z`.
    pub fn write_off<W: Write>(&self, cells: &[CellId], mut w: W) -> io::Result<()> {
        let mut used: Vec<VertexId> = cells.iter().flat_map(|&c| self.cell_verts(c).to_vec()).collect();
        used.sort_unstable();
        used.dedup();
        let index: HashMap<VertexId, usize> = used.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        if self.n == 4 {
            writeln!(w, "4OFF")?;
        } else {
            writeln!(w, "OFF")?;
        }
        writeln!(w, "{} {} 0", used.len(), cells.len())?;
        for &v in &used {
            let mut p = self.vertex_point(v);
            if self.n == 2 {
                p.push(0.0);
            }
            let line: Vec<String> = p.iter().map(|x| format!("{x:.12}")).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        for &c in cells {
            let ids: Vec<String> = self.cell_verts(c).iter().map(|v| index[v].to_string()).collect();
            writeln!(w, "{} {}", ids.len(), ids.join(" "))?;
        }
        Ok(())
    }
}

/// Calls `f` on every `k`-element subset of `items`, preserving order.
pub(crate) fn for_each_subset<F: FnMut(&[VertexId])>(items: &[VertexId], k: usize, f: &mut F) {
    fn rec<F: FnMut(&[VertexId])>(
        items: &[VertexId],
        k: usize,
        start: usize,
        buf: &mut Vec<VertexId>,
        f: &mut F,
    ) {
        if buf.len() == k {
            f(buf);
            return;
        }
        for i in start..items.len() {
            buf.push(items[i]);
            rec(items, k, i + 1, buf, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(k);
    rec(items, k, 0, &mut buf, f);
}
