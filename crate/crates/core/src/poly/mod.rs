//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`Polynomial`] is a map from exponent vectors to non-zero
//! [`BigRational`] coefficients. Exact arithmetic is used everywhere in this
//! module; numeric consumers call [`Polynomial::compile`] to obtain a
//! floating-point evaluator.

mod compiled;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use compiled::{CompiledPoly, CompiledMap};
pub use parse::{parse_polynomial, Variables};

/// Errors raised by polynomial construction, parsing and evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown variable `{name}` at offset {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("exponent at offset {offset} must be a positive integer, found `{found}`")]
    NonIntegerExponent { offset: usize, found: String },
    #[error("invalid variable list: {0}")]
    InvalidVariables(String),
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the zero polynomial has no initial form")]
    ZeroPolynomial,
    #[error("polynomial has non-zero constant term {0}; the origin is not a zero")]
    NonZeroConstant(String),
    #[error("polynomial has {0} variables but the monomial has {1} exponents")]
    ArityMismatch(usize, usize),
}

/// Exponent multi-index of a monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// A polynomial in `num_vars` variables over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    num_vars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

/// `f = omega + residual`, where `omega` collects the lowest-degree terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialFormDecomposition {
    pub omega: Polynomial,
    pub residual: Polynomial,
    pub d: u32,
}

impl Polynomial {
    pub fn zero(num_vars: usize) -> Self {
        Polynomial {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: BigRational) -> Self {
        let mut p = Polynomial::zero(num_vars);
        p.add_term(Monomial::one(num_vars), c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[i] = 1;
        let mut p = Polynomial::zero(num_vars);
        p.add_term(Monomial(e), BigRational::one());
        p
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging
    /// duplicates and dropping zeros.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (BigRational, Vec<u32>)>,
    {
        let mut p = Polynomial::zero(num_vars);
        for (c, e) in terms {
            if e.len() != num_vars {
                return Err(PolyError::ArityMismatch(num_vars, e.len()));
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    /// Convenience constructor with integer coefficients.
    pub fn from_int_terms(num_vars: usize, terms: &[(i64, &[u32])]) -> Result<Self, PolyError> {
        Self::from_terms(
            num_vars,
            terms
                .iter()
                .map(|(c, e)| (BigRational::from_integer(BigInt::from(*c)), e.to_vec())),
        )
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m);
        match slot {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> BigRational {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coefficient(&vec![0; self.num_vars])
    }

    /// Highest total degree, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Lowest total degree, `None` for the zero polynomial.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    /// Degree if every term has the same total degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let lo = self.min_degree()?;
        (self.total_degree() == Some(lo)).then_some(lo)
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        let mut p = Polynomial::zero(self.num_vars);
        for (m, a) in &self.terms {
            p.add_term(m.clone(), a * c);
        }
        p
    }

    /// Exact partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        let mut p = Polynomial::zero(self.num_vars);
        for (m, c) in &self.terms {
            let k = m.0[i];
            if k == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[i] -= 1;
            p.add_term(Monomial(e), c * BigRational::from_integer(BigInt::from(k)));
        }
        p
    }

    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.num_vars).map(|i| self.partial(i)).collect()
    }

    fn check_dim(&self, got: usize) -> Result<(), PolyError> {
        if got != self.num_vars {
            return Err(PolyError::DimensionMismatch {
                expected: self.num_vars,
                got,
            });
        }
        Ok(())
    }

    /// Floating-point value at `point`.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64, PolyError> {
        self.check_dim(point.len())?;
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                let coef = c.to_f64().unwrap_or(f64::NAN);
                m.0.iter()
                    .zip(point)
                    .fold(coef, |acc, (&e, &x)| acc * x.powi(e as i32))
            })
            .sum())
    }

    /// Exact value at a rational point.
    pub fn evaluate_exact(&self, point: &[BigRational]) -> Result<BigRational, PolyError> {
        self.check_dim(point.len())?;
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (&e, x) in m.0.iter().zip(point) {
                if e > 0 {
                    t *= num::pow(x.clone(), e as usize);
                }
            }
            total += t;
        }
        Ok(total)
    }

    /// Matrix of second partial derivatives at `point`.
    pub fn hessian_at(&self, point: &[f64]) -> Result<Vec<Vec<f64>>, PolyError> {
        self.check_dim(point.len())?;
        let n = self.num_vars;
        let grad = self.gradient();
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = grad[i].partial(j).evaluate(point)?;
                h[i][j] = v;
                h[j][i] = v;
            }
        }
        Ok(h)
    }

    /// Splits off the homogeneous part of lowest degree.
    pub fn initial_form(&self) -> Result<InitialFormDecomposition, PolyError> {
        let d = self.min_degree().ok_or(PolyError::ZeroPolynomial)?;
        if d == 0 {
            return Err(PolyError::NonZeroConstant(self.constant_term().to_string()));
        }
        let mut omega = Polynomial::zero(self.num_vars);
        let mut residual = Polynomial::zero(self.num_vars);
        for (m, c) in &self.terms {
            if m.degree() == d {
                omega.add_term(m.clone(), c.clone());
            } else {
                residual.add_term(m.clone(), c.clone());
            }
        }
        Ok(InitialFormDecomposition { omega, residual, d })
    }

    /// Lipschitz constant of the polynomial on the closed ball of the given
    /// radius: `sum |c| * deg * radius^(deg - 1)` over the terms.
    pub fn lipschitz_bound(&self, radius: f64) -> f64 {
        self.terms
            .iter()
            .filter(|(m, _)| m.degree() > 0)
            .map(|(m, c)| {
                let deg = m.degree();
                c.abs().to_f64().unwrap_or(f64::INFINITY) * deg as f64 * radius.powi(deg as i32 - 1)
            })
            .sum()
    }

    /// Bound on `|p|` on the closed ball of the given radius:
    /// `sum |c| * radius^deg` over the terms.
    pub fn magnitude_bound(&self, radius: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.abs().to_f64().unwrap_or(f64::INFINITY) * radius.powi(m.degree() as i32))
            .sum()
    }

    /// Bound on the operator norm of the Hessian on the closed ball of the
    /// given radius, via the Frobenius norm of termwise bounds.
    pub fn hessian_bound(&self, radius: f64) -> f64 {
        let mut sum = 0.0;
        for gi in self.gradient() {
            for j in 0..self.num_vars {
                sum += gi.partial(j).magnitude_bound(radius).powi(2);
            }
        }
        sum.sqrt()
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly::new(self)
    }

    /// Rescales coordinates: returns `p(t * x)`.
    pub fn dilate(&self, t: &BigRational) -> Polynomial {
        let mut p = Polynomial::zero(self.num_vars);
        for (m, c) in &self.terms {
            p.add_term(m.clone(), c * num::pow(t.clone(), m.degree() as usize));
        }
        p
    }

    /// Display with the given variable names.
    pub fn display<'a>(&'a self, vars: &'a Variables) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, vars }
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut p = self.clone();
        for (m, c) in &rhs.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.num_vars, rhs.num_vars);
        let mut p = Polynomial::zero(self.num_vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                p.add_term(m1.mul(m2), c1 * c2);
            }
        }
        p
    }
}

/// Helper returned by [`Polynomial::display`].
pub struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    vars: &'a Variables,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        // Descending total degree, then descending lexicographic exponents.
        let mut terms: Vec<_> = self.poly.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then_with(|| b.cmp(a)));
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors = Vec::new();
            if !mag.is_one() || m.degree() == 0 {
                factors.push(mag.to_string());
            }
            for (name, &e) in self.vars.names().iter().zip(m.exponents()) {
                match e {
                    0 => {}
                    1 => factors.push(name.clone()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}
