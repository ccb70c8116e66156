use serde::Serialize;

use crate::poly::{CompiledMap, CompiledPoly, Polynomial};

// Dormand-Prince 5(4) tableau; the autonomous field needs no nodes
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FlowOutcome {
    ConvergedToOrigin,
    Escaped,
    Stalled,
    BudgetExceeded,
}

impl FlowOutcome {
    pub const ALL: [FlowOutcome; 4] = [
        FlowOutcome::ConvergedToOrigin,
        FlowOutcome::Escaped,
        FlowOutcome::Stalled,
        FlowOutcome::BudgetExceeded,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FlowOutcome::ConvergedToOrigin => "CONVERGED_TO_ORIGIN",
            FlowOutcome::Escaped => "ESCAPED",
            FlowOutcome::Stalled => "STALLED",
            FlowOutcome::BudgetExceeded => "BUDGET_EXCEEDED",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub rtol: f64,
    pub atol: f64,
    pub escape_radius: f64,
    pub converge_distance: f64,
    pub converge_gradient: f64,
    /// Below the gradient gate, a state with `|grad f| < stall_ratio * |x|`
    /// is stalled: its time scale for reaching the origin exceeds
    /// `1 / stall_ratio`.
    pub stall_ratio: f64,
    pub max_steps: usize,
    pub max_step: f64,
    /// Minimum spacing between recorded path points; `None` records nothing
    /// beyond the seed and the final point.
    pub path_resolution: Option<f64>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            rtol: 1e-9,
            atol: 1e-15,
            escape_radius: 1.0,
            converge_distance: 1e-6,
            converge_gradient: 1e-8,
            stall_ratio: 1e-6,
            max_steps: 2_000_000,
            max_step: f64::INFINITY,
            path_resolution: Some(1e-4),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub seed: Vec<f64>,
    pub path: Vec<PathPoint>,
    pub outcome: FlowOutcome,
    pub final_distance: f64,
    pub f_final: f64,
    pub steps: usize,
    pub rejected: usize,
    /// Smallest change of `f` over an accepted step; negative values measure
    /// violations of monotonicity.
    pub min_increment: f64,
    pub diagnostic: Option<String>,
}

/// `x' = grad f(x)` with everything precompiled.
pub struct GradientFlow {
    f: CompiledPoly,
    grad: CompiledMap,
    n: usize,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl GradientFlow {
    pub fn new(f: &Polynomial) -> Self {
        GradientFlow {
            f: f.compile(),
            grad: CompiledMap::new(&f.gradient()),
            n: f.num_vars(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.f.eval(x)
    }

    pub fn field(&self, x: &[f64], out: &mut [f64]) {
        self.grad.eval(x, out)
    }

    /// One trial step from `x` with slope `k[0] = F(x)`. Writes the new point
    /// into `out`, its slope into `k[6]` and returns the scaled error norm.
    fn trial(&self, x: &[f64], k: &mut [Vec<f64>; 7], h: f64, cfg: &FlowConfig, out: &mut [f64]) -> f64 {
        let n = self.n;
        let mut tmp = vec![0.0; n];
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                tmp[i] = x[i] + h * acc;
            }
            self.grad.eval(&tmp, &mut k[s]);
        }
        // stage 7 is evaluated at the fifth-order solution
        out.copy_from_slice(&tmp);
        let mut err = 0.0;
        for i in 0..n {
            let e: f64 = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let scale = cfg.atol + cfg.rtol * x[i].abs().max(out[i].abs());
            err += (e / scale).powi(2);
        }
        (err / n as f64).sqrt()
    }
}

fn initial_step(x: &[f64], g: &[f64], cfg: &FlowConfig) -> f64 {
    let gn = norm(g);
    let h = if gn > 0.0 { 1e-3 * norm(x) / gn } else { 1e-3 };
    h.min(cfg.max_step).max(1e-12)
}

/// Integrates the gradient flow from `seed` until a convergence gate, the
/// escape sphere or the step budget is reached.
pub fn integrate(flow: &GradientFlow, seed: &[f64], cfg: &FlowConfig) -> TrajectorySample {
    let n = flow.dim();
    assert_eq!(seed.len(), n, "seed dimension");
    let mut x = seed.to_vec();
    let mut fx = flow.value(&x);
    let mut t = 0.0;
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    flow.field(&x, &mut k[0]);
    let mut h = initial_step(&x, &k[0], cfg);
    let mut path = vec![PathPoint { t, x: x.clone(), f: fx }];
    let mut last_recorded = x.clone();
    let mut steps = 0;
    let mut rejected = 0;
    let mut min_increment = f64::INFINITY;
    let mut next = vec![0.0; n];
    let mut diagnostic = None;

    let outcome = loop {
        let d = norm(&x);
        let g = norm(&k[0]);
        if d < cfg.converge_distance && g < cfg.converge_gradient {
            break FlowOutcome::ConvergedToOrigin;
        }
        if g < cfg.converge_gradient && g < cfg.stall_ratio * d {
            diagnostic = Some(format!("gradient {g:.3e} vanishes away from the origin"));
            break FlowOutcome::Stalled;
        }
        if steps >= cfg.max_steps {
            break FlowOutcome::BudgetExceeded;
        }
        let err = flow.trial(&x, &mut k, h, cfg, &mut next);
        if !err.is_finite() || next.iter().any(|v| !v.is_finite()) {
            if h < 1e-300 {
                diagnostic = Some("non-finite state".to_string());
                break FlowOutcome::Escaped;
            }
            h *= 0.1;
            rejected += 1;
            continue;
        }
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected += 1;
            if h <= 1e-14 * (1.0 + t) {
                diagnostic = Some(format!("step size underflow at t = {t:.6e}"));
                break FlowOutcome::Stalled;
            }
            continue;
        }
        let mut h_taken = h;
        let escaped = norm(&next) > cfg.escape_radius;
        if escaped {
            h_taken = locate_escape(flow, &x, &mut k, h, cfg, &mut next);
        }
        let fn_ = flow.value(&next);
        min_increment = min_increment.min(fn_ - fx);
        x.copy_from_slice(&next);
        fx = fn_;
        t += h_taken;
        steps += 1;
        // first-same-as-last: the last stage is the slope at the new point
        let last = k[6].clone();
        k[0].copy_from_slice(&last);
        if escaped {
            flow.field(&x, &mut k[0]);
            break FlowOutcome::Escaped;
        }
        if let Some(res) = cfg.path_resolution {
            let moved = x.iter().zip(&last_recorded).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if moved >= res {
                path.push(PathPoint { t, x: x.clone(), f: fx });
                last_recorded.copy_from_slice(&x);
            }
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(cfg.max_step);
    };

    if path.last().map(|p| p.x != x).unwrap_or(true) {
        path.push(PathPoint { t, x: x.clone(), f: fx });
    }
    TrajectorySample {
        seed: seed.to_vec(),
        path,
        outcome,
        final_distance: norm(&x),
        f_final: fx,
        steps,
        rejected,
        min_increment: if steps == 0 { 0.0 } else { min_increment },
        diagnostic,
    }
}

/// Shrinks an accepted step so that it ends on the escape sphere.
fn locate_escape(
    flow: &GradientFlow,
    x: &[f64],
    k: &mut [Vec<f64>; 7],
    h: f64,
    cfg: &FlowConfig,
    out: &mut [f64],
) -> f64 {
    let r = cfg.escape_radius;
    let (mut lo, mut hi) = (0.0, h);
    let mut trial = vec![0.0; x.len()];
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        flow.trial(x, k, mid, cfg, &mut trial);
        if norm(&trial) > r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    flow.trial(x, k, hi, cfg, out);
    hi
}
