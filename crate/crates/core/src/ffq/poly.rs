use std::fmt;

use super::{raw, FieldOrder};
use crate::{Error, Result};

/// A polynomial over F_q with coefficients stored low-to-high.
///
/// The zero polynomial has an empty coefficient vector; otherwise the last entry is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    field: FieldOrder,
    coeffs: Vec<u64>,
}

impl Poly {
    /// Builds a polynomial, reducing coefficients mod q and trimming trailing zeros.
    pub fn new(field: FieldOrder, coeffs: Vec<u64>) -> Self {
        let q = field.q();
        let mut coeffs: Vec<u64> = coeffs.into_iter().map(|c| c % q).collect();
        raw::trim(&mut coeffs);
        Poly { field, coeffs }
    }

    pub fn from_signed(field: FieldOrder, coeffs: &[i64]) -> Self {
        Poly::new(field, coeffs.iter().map(|&c| field.reduce(c)).collect())
    }

    pub(crate) fn from_raw(field: FieldOrder, coeffs: Vec<u64>) -> Self {
        debug_assert!(coeffs.last() != Some(&0));
        Poly { field, coeffs }
    }

    pub fn zero(field: FieldOrder) -> Self {
        Poly { field, coeffs: Vec::new() }
    }

    pub fn constant(field: FieldOrder, c: u64) -> Self {
        Poly::new(field, vec![c])
    }

    /// `c·x^k`.
    pub fn monomial(field: FieldOrder, c: u64, k: usize) -> Self {
        let mut v = vec![0; k + 1];
        v[k] = c;
        Poly::new(field, v)
    }

    #[inline]
    pub fn field(&self) -> FieldOrder {
        self.field
    }

    #[inline]
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Leading coefficient (0 for the zero polynomial).
    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    fn same_field(&self, other: &Poly) -> Result<FieldOrder> {
        if self.field == other.field {
            Ok(self.field)
        } else {
            Err(Error::FieldMismatch(self.field.q(), other.field.q()))
        }
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        let f = self.same_field(other)?;
        Ok(Poly::from_raw(f, raw::add(&self.coeffs, &other.coeffs, f)))
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly> {
        let f = self.same_field(other)?;
        Ok(Poly::from_raw(f, raw::sub(&self.coeffs, &other.coeffs, f)))
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        let f = self.same_field(other)?;
        Ok(Poly::from_raw(f, raw::mul(&self.coeffs, &other.coeffs, f)))
    }

    pub fn scale(&self, c: u64) -> Poly {
        let f = self.field;
        Poly::new(f, self.coeffs.iter().map(|&a| f.mul(a, c % f.q())).collect())
    }

    /// Returns `(quot, rem)` with `deg rem < deg other`.
    pub fn divmod(&self, other: &Poly) -> Result<(Poly, Poly)> {
        let f = self.same_field(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (quot, rem) = raw::divmod(&self.coeffs, &other.coeffs, f);
        Ok((Poly::from_raw(f, quot), Poly::from_raw(f, rem)))
    }

    pub fn rem(&self, other: &Poly) -> Result<Poly> {
        Ok(self.divmod(other)?.1)
    }

    /// Monic greatest common divisor; zero only when both inputs are zero.
    pub fn gcd(&self, other: &Poly) -> Result<Poly> {
        let f = self.same_field(other)?;
        Ok(Poly::from_raw(f, raw::gcd(&self.coeffs, &other.coeffs, f)))
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_raw(self.field, raw::derivative(&self.coeffs, self.field))
    }

    pub fn eval(&self, x: u64) -> u64 {
        raw::eval(&self.coeffs, x % self.field.q(), self.field)
    }

    /// Divides by the leading coefficient; `None` for the zero polynomial.
    pub fn to_monic(&self) -> Option<MonicPoly> {
        if self.is_zero() {
            return None;
        }
        let mut c = self.coeffs.clone();
        raw::make_monic(&mut c, self.field);
        Some(MonicPoly(Poly::from_raw(self.field, c)))
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, e: u64, m: &MonicPoly) -> Result<Poly> {
        let f = self.same_field(m)?;
        Ok(Poly::from_raw(f, raw::pow_mod(&self.coeffs, e, m.coeffs(), f)))
    }

    /// Parses the canonical rendering, e.g. `x^3+2x+1`, also accepting `2*x^2`, `-x` and spaces.
    pub fn parse(field: FieldOrder, s: &str) -> Result<Poly> {
        parse_poly(field, s)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, "+")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

fn parse_poly(field: FieldOrder, s: &str) -> Result<Poly> {
    let chars: Vec<(usize, char)> = s
        .char_indices()
        .filter(|(_, c)| !c.is_whitespace())
        .map(|(i, c)| (s[..i].chars().count() + 1, c))
        .collect();
    let err = |col: usize, msg: &str| Error::Parse { line: 1, col, msg: msg.to_string() };
    if chars.is_empty() {
        return Err(err(1, "empty polynomial"));
    }
    let end_col = s.chars().count() + 1;
    let mut pos = 0;
    let mut acc: Vec<i64> = Vec::new();
    let q = field.q() as i64;

    let number = |pos: &mut usize| -> Option<i64> {
        let start = *pos;
        let mut v: i64 = 0;
        while *pos < chars.len() && chars[*pos].1.is_ascii_digit() {
            v = (v * 10 + chars[*pos].1.to_digit(10).unwrap() as i64) % (1 << 40);
            *pos += 1;
        }
        (*pos > start).then_some(v)
    };

    let mut first = true;
    while pos < chars.len() {
        let mut sign = 1;
        match chars[pos].1 {
            '+' => pos += 1,
            '-' => {
                sign = -1;
                pos += 1
            }
            _ if first => {}
            _ => return Err(err(chars[pos].0, "expected '+' or '-'")),
        }
        first = false;
        let col = chars.get(pos).map_or(end_col, |c| c.0);
        let coef = number(&mut pos);
        if coef.is_some() && pos < chars.len() && chars[pos].1 == '*' {
            pos += 1;
            if pos >= chars.len() || chars[pos].1 != 'x' {
                return Err(err(chars.get(pos).map_or(end_col, |c| c.0), "expected 'x' after '*'"));
            }
        }
        let mut power = 0usize;
        if pos < chars.len() && chars[pos].1 == 'x' {
            pos += 1;
            power = 1;
            if pos < chars.len() && chars[pos].1 == '^' {
                pos += 1;
                let pcol = chars.get(pos).map_or(end_col, |c| c.0);
                power = number(&mut pos).ok_or_else(|| err(pcol, "expected exponent"))? as usize;
                if power > 4096 {
                    return Err(err(pcol, "exponent too large"));
                }
            }
        } else if coef.is_none() {
            return Err(err(col, "expected a term"));
        }
        let c = sign * coef.unwrap_or(1) % q;
        if acc.len() <= power {
            acc.resize(power + 1, 0);
        }
        acc[power] = (acc[power] + c).rem_euclid(q);
    }
    Ok(Poly::from_signed(field, &acc))
}

/// A monic polynomial over F_q (degree ≥ 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonicPoly(Poly);

impl MonicPoly {
    pub fn new(p: Poly) -> Result<Self> {
        if p.leading() == 1 {
            Ok(MonicPoly(p))
        } else {
            Err(Error::NotMonic(p.to_string()))
        }
    }

    /// Coefficients low-to-high including the leading 1.
    pub fn from_coeffs(field: FieldOrder, coeffs: Vec<u64>) -> Result<Self> {
        MonicPoly::new(Poly::new(field, coeffs))
    }

    pub fn one(field: FieldOrder) -> Self {
        MonicPoly(Poly::from_raw(field, vec![1]))
    }

    pub fn x(field: FieldOrder) -> Self {
        MonicPoly(Poly::from_raw(field, vec![0, 1]))
    }

    /// `x + a`.
    pub fn linear(field: FieldOrder, a: u64) -> Self {
        MonicPoly(Poly::from_raw(field, vec![a % field.q(), 1]))
    }

    /// The monic polynomial of the given degree whose lower coefficients are the
    /// base-q digits of `index` (constant term least significant).
    pub fn from_index(field: FieldOrder, degree: usize, mut index: u64) -> Self {
        let q = field.q();
        let mut c = Vec::with_capacity(degree + 1);
        for _ in 0..degree {
            c.push(index % q);
            index /= q;
        }
        c.push(1);
        MonicPoly(Poly::from_raw(field, c))
    }

    /// Inverse of [`MonicPoly::from_index`].
    pub fn index(&self) -> u64 {
        let q = self.field().q();
        self.coeffs()[..self.degree()].iter().rev().fold(0, |acc, &c| acc * q + c)
    }

    pub fn degree(&self) -> usize {
        self.0.coeffs.len() - 1
    }

    pub fn as_poly(&self) -> &Poly {
        &self.0
    }

    pub fn into_poly(self) -> Poly {
        self.0
    }

    pub fn mul(&self, other: &MonicPoly) -> Result<MonicPoly> {
        Ok(MonicPoly(self.0.mul(&other.0)?))
    }

    /// Exact quotient by a monic divisor.
    pub fn div_exact(&self, other: &MonicPoly) -> Result<MonicPoly> {
        let (quot, rem) = self.0.divmod(&other.0)?;
        if !rem.is_zero() {
            return Err(Error::Domain(format!("{other} does not divide {self}")));
        }
        MonicPoly::new(quot)
    }

    pub fn parse(field: FieldOrder, s: &str) -> Result<Self> {
        MonicPoly::new(Poly::parse(field, s)?)
    }
}

impl std::ops::Deref for MonicPoly {
    type Target = Poly;
    fn deref(&self) -> &Poly {
        &self.0
    }
}

impl fmt::Display for MonicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Iterates over all monic polynomials of degree `d` in index order.
pub fn monic_polys(field: FieldOrder, d: usize) -> impl Iterator<Item = MonicPoly> + Clone {
    let count = field.q().pow(d as u32);
    (0..count).map(move |i| MonicPoly::from_index(field, d, i))
}
