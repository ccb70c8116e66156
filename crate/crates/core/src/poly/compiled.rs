use num::{Signed, ToPrimitive};

use super::Polynomial;

/// Floating-point evaluator for a [`Polynomial`].
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    n: usize,
    coefs: Vec<f64>,
    exps: Vec<u32>,
    max_exp: u32,
    /// `sum |c|`, used for rounding-error bounds.
    abs_coef_sum: f64,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        let n = p.num_vars();
        let mut coefs = Vec::with_capacity(p.num_terms());
        let mut exps = Vec::with_capacity(p.num_terms() * n);
        let mut abs_coef_sum = 0.0;
        for (m, c) in p.terms() {
            let cf = c.to_f64().unwrap_or(f64::NAN);
            coefs.push(cf);
            abs_coef_sum += c.abs().to_f64().unwrap_or(f64::INFINITY);
            exps.extend_from_slice(m.exponents());
        }
        let max_exp = exps.iter().copied().max().unwrap_or(0);
        CompiledPoly {
            n,
            coefs,
            exps,
            max_exp,
            abs_coef_sum,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.coefs.is_empty()
    }

    /// Value at `x`; `x.len()` must equal the number of variables.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.n);
        if self.max_exp <= 1 {
            return self.eval_simple(x);
        }
        let stride = self.max_exp as usize + 1;
        let mut pow = [0.0f64; 64];
        let table: &mut [f64] = if self.n * stride <= pow.len() {
            &mut pow[..self.n * stride]
        } else {
            return self.eval_simple(x);
        };
        for (i, &xi) in x.iter().enumerate() {
            let row = &mut table[i * stride..(i + 1) * stride];
            row[0] = 1.0;
            for k in 1..stride {
                row[k] = row[k - 1] * xi;
            }
        }
        let mut sum = 0.0;
        for (t, &c) in self.coefs.iter().enumerate() {
            let e = &self.exps[t * self.n..(t + 1) * self.n];
            let mut v = c;
            for (i, &k) in e.iter().enumerate() {
                v *= table[i * stride + k as usize];
            }
            sum += v;
        }
        sum
    }

    fn eval_simple(&self, x: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (t, &c) in self.coefs.iter().enumerate() {
            let e = &self.exps[t * self.n..(t + 1) * self.n];
            let mut v = c;
            for (&xi, &k) in x.iter().zip(e) {
                v *= xi.powi(k as i32);
            }
            sum += v;
        }
        sum
    }

    /// Bound on the absolute rounding error of [`eval`](Self::eval) for
    /// points with `|x_i| <= radius`.
    pub fn rounding_slack(&self, radius: f64) -> f64 {
        let deg = self
            .exps
            .chunks(self.n.max(1))
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
        let r = radius.max(1.0).powi(deg as i32);
        4.0 * f64::EPSILON * (deg as f64 + 2.0) * (self.coefs.len() as f64 + 1.0) * self.abs_coef_sum * r
    }
}

/// A polynomial map `R^n -> R^m` with its Jacobian.
#[derive(Debug, Clone)]
pub struct CompiledMap {
    components: Vec<CompiledPoly>,
    jacobian: Vec<Vec<CompiledPoly>>,
    sources: Vec<Polynomial>,
}

impl CompiledMap {
    pub fn new(components: &[Polynomial]) -> Self {
        CompiledMap {
            components: components.iter().map(Polynomial::compile).collect(),
            jacobian: components
                .iter()
                .map(|p| p.gradient().iter().map(Polynomial::compile).collect())
                .collect(),
            sources: components.to_vec(),
        }
    }

    pub fn dim_out(&self) -> usize {
        self.components.len()
    }

    pub fn dim_in(&self) -> usize {
        self.components.first().map_or(0, CompiledPoly::num_vars)
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.components) {
            *o = c.eval(x);
        }
    }

    /// Row-major Jacobian `J[i][j] = d F_i / d x_j`.
    pub fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim_in();
        for (i, row) in self.jacobian.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                out[i * n + j] = p.eval(x);
            }
        }
    }

    /// Lipschitz bound of the map on the ball of the given radius, the
    /// Euclidean norm of the per-component bounds.
    pub fn lipschitz_bound(&self, radius: f64) -> f64 {
        self.sources
            .iter()
            .map(|p| p.lipschitz_bound(radius).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn rounding_slack(&self, radius: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.rounding_slack(radius).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sources(&self) -> &[Polynomial] {
        &self.sources
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, Variables};

    #[test]
    fn compiled_matches_direct_evaluation() {
        let v = Variables::parse_list("x,y,z").unwrap();
        let p = parse_polynomial("xyz + x^4y - 2y^4z + 3xz^4 - 7/3", &v).unwrap();
        let c = p.compile();
        for pt in [[0.1, -0.7, 0.3], [1.5, 2.0, -1.0], [0.0, 0.0, 0.0]] {
            let a = c.eval(&pt);
            let b = p.evaluate(&pt).unwrap();
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn jacobian_of_linear_map() {
        let v = Variables::parse_list("x,y").unwrap();
        let comps = [
            parse_polynomial("2x - y", &v).unwrap(),
            parse_polynomial("x + 3y", &v).unwrap(),
        ];
        let m = CompiledMap::new(&comps);
        let mut j = [0.0; 4];
        m.jacobian(&[0.3, 0.4], &mut j);
        assert_eq!(j, [2.0, -1.0, 1.0, 3.0]);
    }
}
