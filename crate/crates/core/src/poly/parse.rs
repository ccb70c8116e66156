use num::{BigInt, BigRational, One, Zero};

use super::{Monomial, PolyError, Polynomial};

/// Ordered, distinct variable names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variables(Vec<String>);

impl Variables {
    pub fn new(names: Vec<String>) -> Result<Self, PolyError> {
        if names.is_empty() {
            return Err(PolyError::InvalidVariables("no variables declared".into()));
        }
        for (i, name) in names.iter().enumerate() {
            let mut chars = name.chars();
            let ok = chars
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(PolyError::InvalidVariables(format!("`{name}` is not an identifier")));
            }
            if names[..i].contains(name) {
                return Err(PolyError::InvalidVariables(format!("`{name}` declared twice")));
            }
        }
        Ok(Variables(names))
    }

    /// Parses a comma separated list such as `x,y,z`.
    pub fn parse_list(list: &str) -> Result<Self, PolyError> {
        Self::new(list.split(',').map(|s| s.trim().to_string()).collect())
    }

    /// `x1, ..., xn`.
    pub fn numbered(n: usize) -> Self {
        Variables((1..=n).map(|i| format!("x{i}")).collect())
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|v| v == name)
    }

    /// Splits a juxtaposed identifier like `xyz` into declared names.
    fn split_ident(&self, ident: &str) -> Option<Vec<usize>> {
        if ident.is_empty() {
            return Some(Vec::new());
        }
        let mut candidates: Vec<(usize, &String)> = self.0.iter().enumerate().collect();
        candidates.sort_by_key(|c| std::cmp::Reverse(c.1.len()));
        for (i, name) in candidates {
            if let Some(rest) = ident.strip_prefix(name.as_str()) {
                if let Some(mut tail) = self.split_ident(rest) {
                    tail.insert(0, i);
                    return Some(tail);
                }
            }
        }
        None
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a Variables,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::Syntax {
            offset,
            message: message.into(),
        })
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    /// Unsigned decimal literal, optionally with a fractional part.
    fn number(&mut self) -> Result<BigRational, PolyError> {
        let start = self.pos;
        let int_part = self.digits();
        let mut value = BigRational::from_integer(int_part.parse::<BigInt>().unwrap_or_default());
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac = self.digits();
            if frac.is_empty() && int_part.is_empty() {
                return self.syntax(start, "expected a number");
            }
            if !frac.is_empty() {
                let num: BigInt = frac.parse().unwrap();
                let den = num::pow(BigInt::from(10), frac.len());
                value += BigRational::new(num, den);
            }
        } else if int_part.is_empty() {
            return self.syntax(start, "expected a number");
        }
        Ok(value)
    }

    fn exponent(&mut self) -> Result<u32, PolyError> {
        self.skip_ws();
        let start = self.pos;
        let mut end = self.pos;
        if matches!(self.src.get(end), Some(b'-' | b'+')) {
            end += 1;
        }
        while end < self.src.len() && matches!(self.src[end], b'0'..=b'9' | b'.') {
            end += 1;
        }
        if end == start {
            return self.syntax(start, "expected an exponent");
        }
        let text = std::str::from_utf8(&self.src[start..end]).unwrap();
        self.pos = end;
        match text.parse::<u32>() {
            Ok(k) if k > 0 && text.bytes().all(|b| b.is_ascii_digit()) => Ok(k),
            _ => Err(PolyError::NonIntegerExponent {
                offset: start,
                found: text.to_string(),
            }),
        }
    }

    /// One factor of a term: a number, a variable power, or a
    /// parenthesised sum with an optional power.
    fn factor(&mut self) -> Result<Polynomial, PolyError> {
        let n = self.vars.len();
        let start = self.pos;
        match self.src.get(self.pos).copied() {
            Some(b'0'..=b'9' | b'.') => {
                let mut value = self.number()?;
                if self.peek() == Some(b'/') {
                    let slash = self.pos;
                    self.pos += 1;
                    if !matches!(self.peek(), Some(b'0'..=b'9' | b'.')) {
                        return self.syntax(self.pos, "expected a denominator");
                    }
                    let den = self.number()?;
                    if den.is_zero() {
                        return self.syntax(slash, "division by zero");
                    }
                    value /= den;
                }
                Ok(Polynomial::constant(n, value))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let ident = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let indices = match self.vars.index_of(ident) {
                    Some(i) => vec![i],
                    None => self.vars.split_ident(ident).ok_or_else(|| PolyError::UnknownVariable {
                        name: ident.to_string(),
                        offset: start,
                    })?,
                };
                let power = self.power()?;
                let mut exps = vec![0u32; n];
                let (last, init) = indices.split_last().expect("identifier is non-empty");
                for &i in init {
                    exps[i] += 1;
                }
                exps[*last] += power;
                let mut p = Polynomial::zero(n);
                p.add_term(Monomial(exps), BigRational::one());
                Ok(p)
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum(true)?;
                if self.peek() != Some(b')') {
                    return self.syntax(self.pos, "expected `)`");
                }
                self.pos += 1;
                let power = self.power()?;
                let mut p = Polynomial::constant(n, BigRational::one());
                for _ in 0..power {
                    p = &p * &inner;
                }
                Ok(p)
            }
            Some(c) => self.syntax(start, format!("unexpected character `{}`", c as char)),
            None => self.syntax(start, "unexpected end of input"),
        }
    }

    fn power(&mut self) -> Result<u32, PolyError> {
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.exponent()
        } else {
            Ok(1)
        }
    }

    fn starts_factor(&mut self) -> bool {
        matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b'.' || c == b'(')
    }

    fn term(&mut self, negate: bool) -> Result<Polynomial, PolyError> {
        self.skip_ws();
        let mut p = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.skip_ws();
                    p = &p * &self.factor()?;
                }
                _ if self.starts_factor() => {
                    p = &p * &self.factor()?;
                }
                _ => break,
            }
        }
        Ok(if negate { -&p } else { p })
    }

    /// A signed sum of terms. Nested sums stop before a closing `)`.
    fn sum(&mut self, nested: bool) -> Result<Polynomial, PolyError> {
        let mut negate = false;
        match self.peek() {
            Some(b'-') => {
                negate = true;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            None if !nested => return self.syntax(self.pos, "empty polynomial"),
            _ => {}
        }
        let mut poly = self.term(negate)?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    poly = &poly + &self.term(false)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    poly = &poly + &self.term(true)?;
                }
                Some(b')') if nested => return Ok(poly),
                None if !nested => return Ok(poly),
                None => return self.syntax(self.pos, "expected `)`"),
                Some(c) => {
                    return self.syntax(self.pos, format!("unexpected character `{}`", c as char))
                }
            }
        }
    }
}

/// Parses `text` as a polynomial in the declared variables.
///
/// Terms are joined by `+`/`-`. A term is a product of rational numbers
/// (`3`, `7/2`, `0.25`), variable powers (`x^3`) and parenthesised sums
/// (`(x+y)^2`), juxtaposed or joined with `*`. Juxtaposed declared names
/// such as `xyz` are split greedily.
pub fn parse_polynomial(text: &str, vars: &Variables) -> Result<Polynomial, PolyError> {
    Parser {
        src: text.as_bytes(),
        pos: 0,
        vars,
    }
    .sum(false)
}
