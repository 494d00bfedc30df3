//! L-polynomials of quadratic characters, their functional equation, and Frobenius traces.

mod roots;
mod table;
mod traces;

use std::fmt;

use crate::ffq::{is_square, is_squarefree, jacobi, monic_polys, FieldOrder, MonicPoly};
use crate::{Budget, Error, Result};

pub use roots::{eigenphases, Eigenphases};
pub use table::{l_coeffs_all, PrimeEntry, PrimeTable};
pub use traces::{scaled_traces, traces_from_star, ScaledTraces, TraceEngine};

/// χ_D(f) = (D / f).
pub fn chi(d: &MonicPoly, f: &MonicPoly) -> i8 {
    jacobi(d, f)
}

/// Coefficients A_D(β) = Σ_{deg B = β} χ_D(B) for β = 0..deg D − 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LPolynomial {
    d: MonicPoly,
    coeffs: Vec<i64>,
}

impl LPolynomial {
    /// Wraps precomputed coefficients (e.g. from [`l_coeffs_all`]); length must be deg D.
    pub fn from_parts(d: MonicPoly, coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() != d.degree() || coeffs.first() != Some(&1) {
            return Err(Error::Domain(format!("malformed L-coefficients for {d}")));
        }
        Ok(LPolynomial { d, coeffs })
    }

    pub fn d(&self) -> &MonicPoly {
        &self.d
    }

    pub fn field(&self) -> FieldOrder {
        self.d.field()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    /// A_D(β), zero for β ≥ deg D.
    pub fn coeff(&self, beta: usize) -> i64 {
        self.coeffs.get(beta).copied().unwrap_or(0)
    }
}

fn check_character_modulus(d: &MonicPoly) -> Result<()> {
    if d.degree() == 0 {
        return Err(Error::Domain("D must have degree ≥ 1".into()));
    }
    if is_square(d) {
        return Err(Error::PerfectSquare(d.to_string()));
    }
    Ok(())
}

/// A_D(β) by direct summation of χ_D(B) over all monic B of degree β < deg D.
pub fn l_coeffs(d: &MonicPoly, budget: Budget) -> Result<LPolynomial> {
    check_character_modulus(d)?;
    let f = d.field();
    let n = d.degree();
    budget.check(
        &format!("direct L-coefficients of {d}"),
        (f.q() as f64).powi(n as i32 - 1) * (n * n) as f64,
    )?;
    let coeffs = (0..n)
        .map(|beta| monic_polys(f, beta).map(|b| jacobi(d, &b) as i64).sum())
        .collect();
    Ok(LPolynomial { d: d.clone(), coeffs })
}

/// L*(u, χ_D) = L(u, χ_D) / (1 − u)^λ with its trivial-zero flag and half-degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarData {
    field: FieldOrder,
    d: MonicPoly,
    lambda: u8,
    delta: usize,
    star: Vec<i64>,
}

impl StarData {
    pub fn field(&self) -> FieldOrder {
        self.field
    }

    pub fn d(&self) -> &MonicPoly {
        &self.d
    }

    pub fn lambda(&self) -> u8 {
        self.lambda
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// A*(β) for β = 0..=2δ.
    pub fn star(&self) -> &[i64] {
        &self.star
    }

    /// Exact check of A*(β) = q^{β−δ} A*(2δ − β) for all β.
    pub fn check_functional_equation(&self) -> Result<()> {
        let q = self.field.q() as i128;
        let delta = self.delta;
        if self.star.len() != 2 * delta + 1 || self.star[0] != 1 {
            return Err(Error::FunctionalEquation { d: self.d.to_string(), beta: 0 });
        }
        for beta in delta..=2 * delta {
            let lhs = self.star[beta] as i128;
            let rhs = q.pow((beta - delta) as u32) * self.star[2 * delta - beta] as i128;
            if lhs != rhs {
                return Err(Error::FunctionalEquation { d: self.d.to_string(), beta });
            }
        }
        Ok(())
    }

    /// Text record `q,D,lambda,delta,A*(0) A*(1) ... A*(2δ)`.
    pub fn record(&self) -> String {
        let coeffs: Vec<String> = self.star.iter().map(|c| c.to_string()).collect();
        format!("{},{},{},{},{}", self.field.q(), self.d, self.lambda, self.delta, coeffs.join(" "))
    }
}

impl fmt::Display for StarData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.record())
    }
}

/// Header line matching [`StarData::record`].
pub const STAR_RECORD_HEADER: &str = "q,D,lambda,delta,A*[0..2delta]";

/// Removes the trivial zero (when deg D is even) and verifies the functional equation.
pub fn star_reduce(lp: &LPolynomial) -> Result<StarData> {
    let d = &lp.d;
    check_character_modulus(d)?;
    if !is_squarefree(d) {
        return Err(Error::NotSquarefree(d.to_string()));
    }
    let n = d.degree();
    let lambda = (n % 2 == 0) as u8;
    let delta = (n - 1 - lambda as usize) / 2;
    let star = if lambda == 1 {
        // L = (1 − u) L*  ⇔  A*(k) = Σ_{i ≤ k} A(i), with exact division iff Σ A(i) = 0.
        let mut acc = 0i64;
        let mut out: Vec<i64> = lp.coeffs.iter().map(|&a| {
            acc += a;
            acc
        }).collect();
        if out.pop() != Some(0) {
            return Err(Error::FunctionalEquation { d: d.to_string(), beta: n - 1 });
        }
        out
    } else {
        lp.coeffs.clone()
    };
    let sd = StarData { field: d.field(), d: d.clone(), lambda, delta, star };
    sd.check_functional_equation()?;
    Ok(sd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> FieldOrder {
        FieldOrder::new(q).unwrap()
    }

    fn m(q: u64, s: &str) -> MonicPoly {
        MonicPoly::parse(f(q), s).unwrap()
    }

    #[test]
    fn chi_examples() {
        let d = m(3, "x^3+x");
        assert_eq!(chi(&d, &m(3, "x")), 0);
        assert_eq!(chi(&d, &m(3, "x+1")), 1);
        assert_eq!(chi(&d, &m(3, "x+2")), -1);
    }

    #[test]
    fn l_coeffs_examples() {
        let lp = l_coeffs(&m(3, "x^3+x"), Budget::default()).unwrap();
        assert_eq!(lp.coeffs(), [1, 0, 3]);
        let sd = star_reduce(&lp).unwrap();
        assert_eq!((sd.lambda(), sd.delta(), sd.star()), (0, 1, &[1i64, 0, 3][..]));
        assert_eq!(sd.record(), "3,x^3+x,0,1,1 0 3");

        // x^2+1 is irreducible over F_3: A(1) = Σ_a χ(x+a) must be −1 for the trivial zero.
        let lp = l_coeffs(&m(3, "x^2+1"), Budget::default()).unwrap();
        let brute: i64 = (0..3).map(|a| chi(&m(3, "x^2+1"), &MonicPoly::linear(f(3), a)) as i64).sum();
        assert_eq!(lp.coeffs(), [1, brute]);
        let sd = star_reduce(&lp).unwrap();
        assert_eq!((sd.lambda(), sd.delta(), sd.star()), (1, 0, &[1i64][..]));
    }

    #[test]
    fn squares_and_non_squarefree_rejected() {
        assert!(matches!(l_coeffs(&m(3, "x^2+2x+1"), Budget::default()), Err(Error::PerfectSquare(_))));
        let lp = l_coeffs(&m(3, "x^3+2x^2+x"), Budget::default()).unwrap();
        assert!(matches!(star_reduce(&lp), Err(Error::NotSquarefree(_))));
    }

    #[test]
    fn batch_matches_direct_summation() {
        for (q, n) in [(3u64, 1usize), (3, 2), (3, 4), (3, 5), (5, 3), (5, 4), (7, 3)] {
            let fq = f(q);
            let rows = l_coeffs_all(fq, n, Budget::default()).unwrap();
            for (i, d) in monic_polys(fq, n).enumerate() {
                let direct: Vec<i64> =
                    (0..n).map(|b| monic_polys(fq, b).map(|bb| jacobi(&d, &bb) as i64).sum()).collect();
                assert_eq!(&rows[i * n..(i + 1) * n], &direct[..], "q={q} D={d}");
            }
        }
    }

    #[test]
    fn even_degree_trivial_zero() {
        let fq = f(5);
        for d in monic_polys(fq, 4).filter(is_squarefree) {
            let lp = l_coeffs(&d, Budget::default()).unwrap();
            assert_eq!(lp.coeffs().iter().sum::<i64>(), 0);
            let sd = star_reduce(&lp).unwrap();
            assert_eq!(sd.star()[2 * sd.delta()], 5i64.pow(sd.delta() as u32));
        }
    }
}
