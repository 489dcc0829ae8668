//! Sparse polynomials in `q`, `p` and a formal deformation parameter `ħ`
//! with exact Gaussian-rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{c_is_zero, creal, format_rational, rat, to_c64, CRational};

/// Exponents of `q^q p^p ħ^hbar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub q: u32,
    pub p: u32,
    pub hbar: u32,
}

impl Monomial {
    pub const fn new(q: u32, p: u32, hbar: u32) -> Self {
        Self { q, p, hbar }
    }

    fn times(self, other: Monomial) -> Monomial {
        Monomial::new(self.q + other.q, self.p + other.p, self.hbar + other.hbar)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, CRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(creal(BigRational::one()))
    }

    pub fn constant(c: CRational) -> Self {
        Self::term(Monomial::new(0, 0, 0), c)
    }

    pub fn q() -> Self {
        Self::term(Monomial::new(1, 0, 0), creal(BigRational::one()))
    }

    pub fn p() -> Self {
        Self::term(Monomial::new(0, 1, 0), creal(BigRational::one()))
    }

    pub fn hbar() -> Self {
        Self::term(Monomial::new(0, 0, 1), creal(BigRational::one()))
    }

    pub fn term(m: Monomial, c: CRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c_is_zero(&c) {
            terms.insert(m, c);
        }
        Self { terms }
    }

    /// `c q^a p^b` with an integer coefficient.
    pub fn monomial(a: u32, b: u32, c: i64) -> Self {
        Self::term(Monomial::new(a, b, 0), creal(rat(c, 1)))
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Monomial, CRational)>) -> Self {
        let mut out = Self::zero();
        for (m, c) in iter {
            out.add_term(m, c);
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &CRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: Monomial) -> CRational {
        self.terms.get(&m).cloned().unwrap_or_else(|| creal(BigRational::zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree in `q` and `p` (ignoring `ħ`); `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.q + m.p).max()
    }

    pub fn has_hbar(&self) -> bool {
        self.terms.keys().any(|m| m.hbar > 0)
    }

    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    pub fn add_term(&mut self, m: Monomial, c: CRational) {
        if c_is_zero(&c) {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(|| creal(BigRational::zero()));
        *entry = &*entry + &c;
        if c_is_zero(entry) {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: &CRational) -> Poly {
        if c_is_zero(c) {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect() }
    }

    pub fn derivative_q(&self, order: u32) -> Poly {
        self.derivative(order, 0)
    }

    pub fn derivative_p(&self, order: u32) -> Poly {
        self.derivative(0, order)
    }

    /// `∂_q^dq ∂_p^dp`.
    pub fn derivative(&self, dq: u32, dp: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if m.q < dq || m.p < dp {
                continue;
            }
            let factor = falling(m.q, dq) * falling(m.p, dp);
            let coeff = c * creal(BigRational::from_integer(factor.into()));
            out.add_term(Monomial::new(m.q - dq, m.p - dp, m.hbar), coeff);
        }
        out
    }

    /// Replaces the formal `ħ` by an exact value.
    pub fn substitute_hbar(&self, hbar: &BigRational) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let h = num_traits::pow(hbar.clone(), m.hbar as usize);
            out.add_term(Monomial::new(m.q, m.p, 0), c * creal(h));
        }
        out
    }

    /// Coefficient polynomial of `ħ^k`.
    pub fn hbar_coefficient(&self, k: u32) -> Poly {
        Poly::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.hbar == k)
                .map(|(m, c)| (Monomial::new(m.q, m.p, 0), c.clone())),
        )
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Substitutes `q -> new_q`, `p -> new_p`.
    pub fn compose(&self, new_q: &Poly, new_p: &Poly) -> Poly {
        let max_q = self.terms.keys().map(|m| m.q).max().unwrap_or(0);
        let max_p = self.terms.keys().map(|m| m.p).max().unwrap_or(0);
        let q_pows: Vec<Poly> = powers(new_q, max_q);
        let p_pows: Vec<Poly> = powers(new_p, max_p);
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let hb = Poly::term(Monomial::new(0, 0, m.hbar), c.clone());
            let t = &(&q_pows[m.q as usize] * &p_pows[m.p as usize]) * &hb;
            out = &out + &t;
        }
        out
    }

    /// Evaluates at `(q, p)`; any `ħ` powers are evaluated at `hbar`.
    pub fn eval_with_hbar(&self, q: f64, p: f64, hbar: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, c)| to_c64(c) * q.powi(m.q as i32) * p.powi(m.p as i32) * hbar.powi(m.hbar as i32))
            .sum()
    }

    pub fn eval(&self, q: f64, p: f64) -> Complex64 {
        self.eval_with_hbar(q, p, 0.0)
    }

    /// Euclidean norm of the coefficient vector (in double precision).
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.values().map(|c| to_c64(c).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Parses expressions such as `q^3`, `(q^2 + p^2)/2`, `3*q*p - 1/2`, `i*q`.
    pub fn parse(s: &str) -> Result<Poly> {
        let mut parser = Parser { chars: s.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
        let out = parser.expr()?;
        if parser.pos != parser.chars.len() {
            return Err(Error::Parse(format!("unexpected trailing input in {s:?}")));
        }
        Ok(out)
    }
}

fn falling(n: u32, k: u32) -> i64 {
    (0..k).map(|j| (n - j) as i64).product()
}

fn powers(base: &Poly, max: u32) -> Vec<Poly> {
    let mut out = vec![Poly::one()];
    for i in 0..max as usize {
        let next = &out[i] * base;
        out.push(next);
    }
    out
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.times(*mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

fn format_coefficient(c: &CRational) -> (bool, String) {
    // (negative, magnitude text)
    if c.im.is_zero() {
        return (c.re.is_negative(), format_rational(&c.re.abs()));
    }
    if c.re.is_zero() {
        let mag = format_rational(&c.im.abs());
        let text = if c.im.abs().is_one() { "i".to_string() } else { format!("{mag}i") };
        return (c.im.is_negative(), text);
    }
    let im = if c.im.is_negative() {
        format!(" - {}i", format_rational(&c.im.abs()))
    } else {
        format!(" + {}i", format_rational(&c.im))
    };
    (false, format!("({}{im})", format_rational(&c.re)))
}

impl fmt::Display for Poly {
    /// Highest total degree first, e.g. `9 q^2 p^2 - 0.06`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<&Monomial> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            (b.q + b.p, b.q, b.hbar).cmp(&(a.q + a.p, a.q, a.hbar))
        });
        for (i, m) in keys.into_iter().enumerate() {
            let (neg, mag) = format_coefficient(&self.terms[m]);
            let mut vars = Vec::new();
            for (name, e) in [("q", m.q), ("p", m.p), ("hbar", m.hbar)] {
                match e {
                    0 => {}
                    1 => vars.push(name.to_string()),
                    _ => vars.push(format!("{name}^{e}")),
                }
            }
            let body = match (mag.as_str(), vars.is_empty()) {
                (_, true) => mag.clone(),
                ("1", false) => vars.join(" "),
                _ => format!("{mag} {}", vars.join(" ")),
            };
            match (i, neg) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at position {}", self.pos))
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = match self.peek() {
            Some('-') => {
                self.pos += 1;
                -&self.term()?
            }
            Some('+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                '-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.power()?;
                }
                Some('/') => {
                    self.pos += 1;
                    let d = self.power()?;
                    if d.degree() != Some(0) || d.has_hbar() || d.len() != 1 {
                        return Err(self.err("division only by nonzero constants"));
                    }
                    let c = d.coefficient(Monomial::new(0, 0, 0));
                    let inv = creal(BigRational::one()) / c;
                    acc = acc.scale(&inv);
                }
                // implicit multiplication: `3q`, `q p`, `2(q+p)`
                Some(c) if c == '(' || c.is_ascii_alphabetic() => {
                    acc = &acc * &self.power()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let e: u32 = self.chars[start..self.pos]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| self.err("expected integer exponent"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('q') => {
                self.pos += 1;
                Ok(Poly::q())
            }
            Some('p') => {
                self.pos += 1;
                Ok(Poly::p())
            }
            Some('i') => {
                self.pos += 1;
                Ok(Poly::constant(crate::exact::crat(BigRational::zero(), BigRational::one())))
            }
            Some('h') if self.chars[self.pos..].starts_with(&['h', 'b', 'a', 'r']) => {
                self.pos += 4;
                Ok(Poly::hbar())
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                let text: String = self.chars[start..self.pos].iter().collect();
                Ok(Poly::constant(creal(crate::exact::parse_rational(&text)?)))
            }
            _ => Err(self.err("unexpected token")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let f = Poly::parse("(q^2 + p^2)/2").unwrap();
        assert_eq!(f.to_string(), "0.5 q^2 + 0.5 p^2");
        let g = Poly::parse("9q^2p^2 - 3/50").unwrap();
        assert_eq!(g.to_string(), "9 q^2 p^2 - 0.06");
        assert_eq!(Poly::parse("q*p - p*q").unwrap(), Poly::zero());
        assert!(Poly::parse("q +").is_err());
        assert!(Poly::parse("q/p").is_err());
    }

    #[test]
    fn derivatives() {
        let f = Poly::parse("q^3 p^2").unwrap();
        assert_eq!(f.derivative(2, 1), Poly::parse("12 q p").unwrap());
        assert_eq!(f.derivative_q(4), Poly::zero());
    }

    #[test]
    fn compose_with_shear() {
        let f = Poly::parse("p^2").unwrap();
        let g = f.compose(&Poly::q(), &Poly::parse("p + q^3").unwrap());
        assert_eq!(g, Poly::parse("p^2 + 2 p q^3 + q^6").unwrap());
    }

    #[test]
    fn substitute_hbar_exactly() {
        let f = Poly::parse("9 q^2 p^2 - 3/2 hbar^2").unwrap();
        let g = f.substitute_hbar(&rat(1, 5));
        assert_eq!(g.to_string(), "9 q^2 p^2 - 0.06");
    }
}
