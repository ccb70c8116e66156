use serde::Serialize;

use super::complex::{for_each_subset, VertexId};
use crate::unionfind::UnionFind;

/// Mod-2 homology of the certified negative part of a sign region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomologySummary {
    /// `b_0 .. b_{n-1}` over GF(2).
    pub betti: Vec<usize>,
    pub euler: i64,
    pub stabilized: bool,
    pub depth_used: u32,
    pub empty: bool,
    pub radius: f64,
    pub neg_cells: usize,
    pub mixed_cells: usize,
}

impl HomologySummary {
    pub fn b0(&self) -> usize {
        self.betti[0]
    }

    /// True if some `b_i` with `i >= 1` is non-zero.
    pub fn has_higher_homology(&self) -> bool {
        self.betti.iter().skip(1).any(|&b| b != 0)
    }
}

/// Betti numbers and face counts of a pure simplicial complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialHomology {
    pub betti: Vec<usize>,
    pub f_vector: Vec<usize>,
}

impl SimplicialHomology {
    pub fn euler(&self) -> i64 {
        alternating(&self.f_vector)
    }
}

pub(crate) fn alternating(v: &[usize]) -> i64 {
    v.iter()
        .enumerate()
        .map(|(k, &x)| if k % 2 == 0 { x as i64 } else { -(x as i64) })
        .sum()
}

struct Level {
    simplices: Vec<Vec<VertexId>>,
    /// Indices into the level below, for `k >= 1`.
    boundary: Vec<Vec<u32>>,
    cofaces: Vec<Vec<u32>>,
}

fn lookup(level: &[Vec<VertexId>], s: &[VertexId]) -> u32 {
    level.binary_search_by(|x| x.as_slice().cmp(s)).expect("closure contains all faces") as u32
}

/// Mod-2 Betti numbers `b_0 .. b_{dim}` of the closure of the given top
/// simplices, each of dimension `dim`.
///
/// Free faces are collapsed first; the remaining boundary matrices are
/// reduced over GF(2) with the clearing optimisation.
pub fn simplicial_homology(tops: &[Vec<VertexId>], dim: usize) -> SimplicialHomology {
    if tops.is_empty() {
        return SimplicialHomology {
            betti: vec![0; dim + 1],
            f_vector: vec![0; dim + 1],
        };
    }
    let mut levels: Vec<Level> = Vec::with_capacity(dim + 1);
    for k in 0..=dim {
        let mut simplices = Vec::new();
        for t in tops {
            let mut v = t.clone();
            v.sort_unstable();
            for_each_subset(&v, k + 1, &mut |s| simplices.push(s.to_vec()));
        }
        simplices.sort_unstable();
        simplices.dedup();
        let boundary = if k == 0 {
            vec![Vec::new(); simplices.len()]
        } else {
            let below = &levels[k - 1].simplices;
            simplices
                .iter()
                .map(|s| {
                    let mut b: Vec<u32> = (0..=k)
                        .map(|skip| {
                            let face: Vec<VertexId> = s
                                .iter()
                                .enumerate()
                                .filter(|&(i, _)| i != skip)
                                .map(|(_, &x)| x)
                                .collect();
                            lookup(below, &face)
                        })
                        .collect();
                    b.sort_unstable();
                    b
                })
                .collect()
        };
        let cofaces = vec![Vec::new(); simplices.len()];
        levels.push(Level {
            simplices,
            boundary,
            cofaces,
        });
    }
    for k in 1..=dim {
        let (lo, hi) = levels.split_at_mut(k);
        for (i, b) in hi[0].boundary.iter().enumerate() {
            for &f in b {
                lo[k - 1].cofaces[f as usize].push(i as u32);
            }
        }
    }
    let f_vector: Vec<usize> = levels.iter().map(|l| l.simplices.len()).collect();

    let mut uf = UnionFind::new(f_vector[0]);
    if dim >= 1 {
        for b in &levels[1].boundary {
            uf.union(b[0] as usize, b[1] as usize);
        }
    }
    let b0 = uf.count();

    // Elementary collapses: a face with exactly one live coface is free.
    let mut alive: Vec<Vec<bool>> = f_vector.iter().map(|&f| vec![true; f]).collect();
    let mut count: Vec<Vec<u32>> = levels
        .iter()
        .map(|l| l.cofaces.iter().map(|c| c.len() as u32).collect())
        .collect();
    let mut stack: Vec<(usize, u32)> = Vec::new();
    for k in 0..dim {
        for i in 0..f_vector[k] {
            if count[k][i] == 1 {
                stack.push((k, i as u32));
            }
        }
    }
    while let Some((k, t)) = stack.pop() {
        let ti = t as usize;
        if !alive[k][ti] || count[k][ti] != 1 {
            continue;
        }
        let s = *levels[k]
            .cofaces[ti]
            .iter()
            .find(|&&c| alive[k + 1][c as usize])
            .unwrap();
        alive[k][ti] = false;
        alive[k + 1][s as usize] = false;
        for &f in &levels[k + 1].boundary[s as usize] {
            if f != t && alive[k][f as usize] {
                count[k][f as usize] -= 1;
                if count[k][f as usize] == 1 {
                    stack.push((k, f));
                }
            }
        }
        if k >= 1 {
            for &f in &levels[k].boundary[ti] {
                if alive[k - 1][f as usize] {
                    count[k - 1][f as usize] -= 1;
                    if count[k - 1][f as usize] == 1 {
                        stack.push((k - 1, f));
                    }
                }
            }
        }
    }

    let live: Vec<usize> = alive.iter().map(|a| a.iter().filter(|&&x| x).count()).collect();
    // rank[k] = rank of the boundary map from k-chains to (k-1)-chains.
    let mut rank = vec![0usize; dim + 2];
    let mut cleared: Vec<bool> = Vec::new();
    for k in (1..=dim).rev() {
        let rows = f_vector[k - 1];
        let mut pivot_col: Vec<u32> = vec![u32::MAX; rows];
        let mut reduced: Vec<Vec<u32>> = Vec::new();
        let mut next_cleared = vec![false; rows];
        for j in 0..f_vector[k] {
            if !alive[k][j] || cleared.get(j).copied().unwrap_or(false) {
                continue;
            }
            let mut col: Vec<u32> = levels[k].boundary[j]
                .iter()
                .copied()
                .filter(|&f| alive[k - 1][f as usize])
                .collect();
            while let Some(&low) = col.last() {
                let p = pivot_col[low as usize];
                if p == u32::MAX {
                    pivot_col[low as usize] = reduced.len() as u32;
                    next_cleared[low as usize] = true;
                    break;
                }
                col = symmetric_difference(&col, &reduced[p as usize]);
            }
            if !col.is_empty() {
                reduced.push(col);
            }
        }
        rank[k] = reduced.len();
        cleared = next_cleared;
    }
    let mut betti: Vec<usize> = (0..=dim).map(|k| live[k] - rank[k] - rank[k + 1]).collect();
    debug_assert_eq!(betti[0], b0);
    betti[0] = b0;
    SimplicialHomology { betti, f_vector }
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tops(v: &[&[u32]]) -> Vec<Vec<u32>> {
        v.iter().map(|s| s.to_vec()).collect()
    }

    #[test]
    fn hollow_triangle_is_a_circle() {
        let h = simplicial_homology(&tops(&[&[0, 1], &[1, 2], &[0, 2]]), 1);
        assert_eq!(h.betti, vec![1, 1]);
        assert_eq!(h.euler(), 0);
    }

    #[test]
    fn octahedron_is_a_sphere() {
        let mut t = Vec::new();
        for a in [0, 1] {
            for b in [2, 3] {
                for c in [4, 5] {
                    t.push(vec![a, b, c]);
                }
            }
        }
        let h = simplicial_homology(&t, 2);
        assert_eq!(h.betti, vec![1, 0, 1]);
        assert_eq!(h.f_vector, vec![6, 12, 8]);
    }

    #[test]
    fn annulus_and_disjoint_pieces() {
        // triangulated annulus: outer 0..3, inner 3..6
        let annulus = tops(&[
            &[0, 1, 3],
            &[1, 3, 4],
            &[1, 2, 4],
            &[2, 4, 5],
            &[2, 0, 5],
            &[0, 5, 3],
        ]);
        let h = simplicial_homology(&annulus, 2);
        assert_eq!(h.betti, vec![1, 1, 0]);
        let mut two = annulus.clone();
        two.push(vec![10, 11, 12]);
        let h = simplicial_homology(&two, 2);
        assert_eq!(h.betti, vec![2, 1, 0]);
        assert_eq!(h.euler(), 1);
    }

    #[test]
    fn boundary_of_tetrahedron_solid_tetrahedron() {
        let h = simplicial_homology(&tops(&[&[0, 1, 2, 3]]), 3);
        assert_eq!(h.betti, vec![1, 0, 0, 0]);
        let hollow = tops(&[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]]);
        assert_eq!(simplicial_homology(&hollow, 2).betti, vec![1, 0, 1]);
    }

    #[test]
    fn empty_input() {
        let h = simplicial_homology(&[], 2);
        assert_eq!(h.betti, vec![0, 0, 0]);
        assert_eq!(h.euler(), 0);
    }
}
