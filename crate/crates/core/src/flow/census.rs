use std::fmt::Write as _;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use super::integrator::{integrate, FlowConfig, FlowOutcome, GradientFlow, TrajectorySample};
use crate::poly::Polynomial;

/// Label attached to every census output.
pub const EMPIRICAL: &str = "EMPIRICAL: numerical integration of the gradient flow; not a proof";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid `{0}` is not of the form NxN:LO,HI")]
    Syntax(String),
    #[error("grid has {got} axes but the polynomial has {expected} variables")]
    Dimension { expected: usize, got: usize },
    #[error("grid axis needs at least one point")]
    Empty,
    #[error("grid bounds must satisfy LO <= HI")]
    Bounds,
}

/// Tensor grid of seeds, `counts[i]` points on `[lo, hi]` per axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedGrid {
    pub counts: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
}

impl SeedGrid {
    /// Parses `20x20:-0.5,0.5`.
    pub fn parse(text: &str) -> Result<Self, GridError> {
        let bad = || GridError::Syntax(text.to_string());
        let (counts, bounds) = text.split_once(':').ok_or_else(bad)?;
        let counts: Vec<usize> = counts
            .split('x')
            .map(|c| c.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        let (lo, hi) = bounds.split_once(',').ok_or_else(bad)?;
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        if counts.contains(&0) {
            return Err(GridError::Empty);
        }
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(GridError::Bounds);
        }
        Ok(SeedGrid { counts, lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    fn coordinate(&self, axis: usize, i: usize) -> f64 {
        let m = self.counts[axis];
        if m == 1 {
            0.5 * (self.lo + self.hi)
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (m - 1) as f64
        }
    }

    /// Seeds in row-major order with the last axis fastest. The origin is
    /// skipped.
    pub fn seeds(&self) -> Vec<Vec<f64>> {
        let total: usize = self.counts.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0; self.dim()];
        for _ in 0..total {
            let p: Vec<f64> = idx.iter().enumerate().map(|(a, &i)| self.coordinate(a, i)).collect();
            if p.iter().any(|&v| v != 0.0) {
                out.push(p);
            }
            for a in (0..self.dim()).rev() {
                idx[a] += 1;
                if idx[a] < self.counts[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeCount {
    pub outcome: FlowOutcome,
    pub count: usize,
}

/// Extent of the converged seeds: bounding box and diameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spread {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Census {
    pub label: &'static str,
    pub samples: Vec<TrajectorySample>,
    pub counts: Vec<OutcomeCount>,
    pub spread: Option<Spread>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn seed_spread(seeds: &[&[f64]]) -> Option<Spread> {
    let first = seeds.first()?;
    let n = first.len();
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for s in seeds {
        for i in 0..n {
            min[i] = min[i].min(s[i]);
            max[i] = max[i].max(s[i]);
        }
    }
    let mut diameter: f64 = 0.0;
    for (i, a) in seeds.iter().enumerate() {
        for b in &seeds[i + 1..] {
            diameter = diameter.max(dist(a, b));
        }
    }
    Some(Spread { min, max, diameter })
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (p.iter().zip(a).zip(&ab).map(|((p, a), d)| (p - a) * d).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    let q: Vec<f64> = a.iter().zip(&ab).map(|(a, d)| a + t * d).collect();
    dist(p, &q)
}

/// Distance from `p` to the recorded polyline of `s` after its first step.
fn distance_to_path(p: &[f64], s: &TrajectorySample) -> f64 {
    let pts: Vec<&[f64]> = s.path.iter().skip(1).map(|q| q.x.as_slice()).collect();
    match pts.len() {
        0 => f64::INFINITY,
        1 => dist(p, pts[0]),
        _ => pts
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

impl Census {
    pub fn count(&self, outcome: FlowOutcome) -> usize {
        self.counts.iter().find(|c| c.outcome == outcome).map_or(0, |c| c.count)
    }

    pub fn converged(&self) -> impl Iterator<Item = &TrajectorySample> {
        self.samples.iter().filter(|s| s.outcome == FlowOutcome::ConvergedToOrigin)
    }

    /// Two converged seeds neither of which lies within `tol` of the other's
    /// path after the first step. Orbits of an autonomous flow do not meet,
    /// so such seeds lie on different trajectories.
    pub fn distinct_converged_pair(&self, tol: f64) -> Option<(usize, usize)> {
        let conv: Vec<usize> = (0..self.samples.len())
            .filter(|&i| self.samples[i].outcome == FlowOutcome::ConvergedToOrigin)
            .collect();
        for (k, &i) in conv.iter().enumerate() {
            for &j in &conv[k + 1..] {
                let (a, b) = (&self.samples[i], &self.samples[j]);
                if distance_to_path(&b.seed, a) > tol && distance_to_path(&a.seed, b) > tol {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Smallest change of `f` over any accepted step of any sample.
    pub fn min_increment(&self) -> f64 {
        self.samples.iter().map(|s| s.min_increment).fold(f64::INFINITY, f64::min)
    }

    /// One row per seed: seed components, outcome, steps, final distance and
    /// final value of `f`, preceded by a comment line naming the census
    /// empirical.
    pub fn write_csv<W: Write>(&self, names: &[String], mut w: W) -> io::Result<()> {
        writeln!(w, "# {EMPIRICAL}")?;
        let mut header: Vec<String> = names.to_vec();
        header.extend(["outcome", "steps", "final_distance", "f_final"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for s in &self.samples {
            let mut row: Vec<String> = s.seed.iter().map(|v| format!("{v:e}")).collect();
            row.push(s.outcome.as_str().to_string());
            row.push(s.steps.to_string());
            row.push(format!("{:e}", s.final_distance));
            row.push(format!("{:e}", s.f_final));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Phase portrait of a planar census, or `None` for other dimensions.
    pub fn svg(&self, lo: f64, hi: f64) -> Option<String> {
        if self.samples.first().map(|s| s.seed.len()) != Some(2) {
            return None;
        }
        let size = 600.0;
        let pad = 0.1 * (hi - lo).max(1e-12);
        let (a, b) = (lo - pad, hi + pad);
        let map = |x: f64, y: f64| ((x - a) / (b - a) * size, (b - y) / (b - a) * size);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
        );
        let _ = writeln!(out, "<title>{EMPIRICAL}</title>");
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        for s in &self.samples {
            let color = match s.outcome {
                FlowOutcome::ConvergedToOrigin => "#1b7837",
                FlowOutcome::Escaped => "#b2182b",
                FlowOutcome::Stalled => "#2166ac",
                FlowOutcome::BudgetExceeded => "#762a83",
            };
            let mut pts = String::new();
            for p in &s.path {
                let (px, py) = map(p.x[0], p.x[1]);
                let _ = write!(pts, "{px:.2},{py:.2} ");
            }
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="0.8"/>"#,
                pts.trim_end()
            );
            let (sx, sy) = map(s.seed[0], s.seed[1]);
            let _ = writeln!(out, r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="2" fill="{color}"/>"#);
        }
        let (ox, oy) = map(0.0, 0.0);
        let _ = writeln!(out, r#"<circle cx="{ox:.2}" cy="{oy:.2}" r="3" fill="black"/>"#);
        out.push_str("</svg>\n");
        Some(out)
    }
}

/// Integrates every seed in parallel; results keep the seed order.
pub fn trajectory_census(f: &Polynomial, seeds: &[Vec<f64>], cfg: &FlowConfig) -> Census {
    let flow = GradientFlow::new(f);
    let samples: Vec<TrajectorySample> = seeds.par_iter().map(|s| integrate(&flow, s, cfg)).collect();
    let counts = FlowOutcome::ALL
        .iter()
        .map(|&outcome| OutcomeCount {
            outcome,
            count: samples.iter().filter(|s| s.outcome == outcome).count(),
        })
        .collect();
    let converged: Vec<&[f64]> = samples
        .iter()
        .filter(|s| s.outcome == FlowOutcome::ConvergedToOrigin)
        .map(|s| s.seed.as_slice())
        .collect();
    Census {
        label: EMPIRICAL,
        spread: seed_spread(&converged),
        counts,
        samples,
    }
}

/// Census over a grid, checking its dimension against `f`.
pub fn grid_census(f: &Polynomial, grid: &SeedGrid, cfg: &FlowConfig) -> Result<Census, GridError> {
    if grid.dim() != f.num_vars() {
        return Err(GridError::Dimension {
            expected: f.num_vars(),
            got: grid.dim(),
        });
    }
    Ok(trajectory_census(f, &grid.seeds(), cfg))
}
