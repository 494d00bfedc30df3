use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{monic_polys, raw, FieldOrder, MonicPoly};
use crate::{Budget, Error, Result};

/// A monic irreducible polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimePoly(MonicPoly);

impl PrimePoly {
    pub fn new(m: MonicPoly) -> Result<Self> {
        if is_irreducible(&m) {
            Ok(PrimePoly(m))
        } else {
            Err(Error::Domain(format!("{m} is not irreducible")))
        }
    }

    pub(crate) fn new_unchecked(m: MonicPoly) -> Self {
        PrimePoly(m)
    }

    pub fn as_monic(&self) -> &MonicPoly {
        &self.0
    }

    pub fn into_monic(self) -> MonicPoly {
        self.0
    }
}

impl std::ops::Deref for PrimePoly {
    type Target = MonicPoly;
    fn deref(&self) -> &MonicPoly {
        &self.0
    }
}

impl fmt::Display for PrimePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// True iff gcd(h, h') = 1. Constants count as squarefree; a vanishing derivative does not.
pub fn is_squarefree(h: &MonicPoly) -> bool {
    if h.degree() == 0 {
        return true;
    }
    let f = h.field();
    let d = raw::derivative(h.coeffs(), f);
    raw::gcd(h.coeffs(), &d, f) == [1]
}

/// x^(q^k) mod m for k = 1, 2, ... computed by repeated q-th powering.
struct FrobeniusPowers<'a> {
    m: &'a [u64],
    f: FieldOrder,
    cur: Vec<u64>,
}

impl<'a> FrobeniusPowers<'a> {
    fn new(m: &'a [u64], f: FieldOrder) -> Self {
        let mut cur = vec![0, 1];
        raw::rem_monic(&mut cur, m, f);
        FrobeniusPowers { m, f, cur }
    }

    fn next_power(&mut self) -> &[u64] {
        self.cur = raw::pow_mod(&self.cur, self.f.q(), self.m, self.f);
        &self.cur
    }
}

/// Distinct-degree irreducibility test: P of degree n is irreducible iff
/// gcd(x^(q^k) − x, P) = 1 for every 1 ≤ k ≤ n/2.
pub fn is_irreducible(p: &MonicPoly) -> bool {
    let n = p.degree();
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let f = p.field();
    let m = p.coeffs();
    if n <= 3 {
        // A reducible cubic or quadratic has a linear factor.
        return (0..f.q()).all(|a| raw::eval(m, a, f) != 0);
    }
    let mut frob = FrobeniusPowers::new(m, f);
    for _ in 1..=n / 2 {
        let xp = frob.next_power();
        let diff = raw::sub(xp, &[0, 1], f);
        if raw::gcd(&diff, m, f) != [1] {
            return false;
        }
    }
    true
}

/// Möbius function on F_q[x]: 0 unless squarefree, else (−1)^(number of prime factors).
pub fn mobius_mu(a: &MonicPoly) -> i8 {
    if a.degree() == 0 {
        return 1;
    }
    if !is_squarefree(a) {
        return 0;
    }
    if count_prime_factors_squarefree(a) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Number of irreducible factors of a squarefree monic polynomial, by distinct-degree factorization.
pub fn count_prime_factors_squarefree(a: &MonicPoly) -> usize {
    let f = a.field();
    let mut rest = a.coeffs().to_vec();
    let mut count = 0;
    let mut k = 0;
    let mut xp = vec![0u64, 1];
    while rest.len() - 1 >= 2 * (k + 1) {
        k += 1;
        raw::rem_monic(&mut xp, &rest, f);
        xp = raw::pow_mod(&xp, f.q(), &rest, f);
        let diff = raw::sub(&xp, &[0, 1], f);
        let g = raw::gcd(&diff, &rest, f);
        let dg = g.len() - 1;
        if dg > 0 {
            count += dg / k;
            rest = raw::divmod(&rest, &g, f).0;
        }
    }
    if rest.len() > 1 {
        count += 1;
    }
    count
}

/// Exact number of monic irreducibles of degree r: (1/r) Σ_{d|r} μ(d) q^{r/d}.
pub fn prime_count(r: usize, field: FieldOrder) -> BigInt {
    assert!(r >= 1, "prime_count needs r ≥ 1");
    let mut total = BigInt::zero();
    for d in 1..=r {
        if r % d == 0 {
            match integer_mobius(d) {
                0 => {}
                m => total += BigInt::from(m) * field.pow_big((r / d) as u32),
            }
        }
    }
    total / BigInt::from(r)
}

fn integer_mobius(mut n: usize) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// All monic irreducibles of degree r, in index order (lexicographic in the coefficients
/// read from x^{r−1} down to the constant term).
pub fn primes_of_degree(r: usize, field: FieldOrder, budget: Budget) -> Result<Vec<PrimePoly>> {
    if r == 0 {
        return Err(Error::Domain("prime degree must be at least 1".into()));
    }
    let candidates = (field.q() as f64).powi(r as i32);
    budget.check(&format!("listing primes of degree {r} over {field}"), candidates * r as f64)?;
    Ok(monic_polys(field, r).filter(is_irreducible).map(PrimePoly::new_unchecked).collect())
}

/// Whether the monic polynomial is a perfect square.
pub fn is_square(a: &MonicPoly) -> bool {
    let n = a.degree();
    if n % 2 == 1 {
        return false;
    }
    if n == 0 {
        return true;
    }
    // Monic square root determined by the top half of the coefficients.
    let f = a.field();
    let half = n / 2;
    let c = a.coeffs();
    let mut s = vec![0u64; half + 1];
    s[half] = 1;
    let two_inv = f.inv(2);
    for k in (0..half).rev() {
        // Coefficient of x^{half+k} in s^2 equals 2 s_k + Σ_{i+j = half+k, k < i,j ≤ half} s_i s_j.
        let mut known = 0;
        for i in (k + 1)..=half {
            let j = half + k - i;
            if j > k && j <= half {
                known = f.add(known, f.mul(s[i], s[j]));
            }
        }
        s[k] = f.mul(f.sub(c[half + k], known), two_inv);
    }
    raw::mul(&s, &s, f) == c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffq::Poly;

    fn f(q: u64) -> FieldOrder {
        FieldOrder::new(q).unwrap()
    }

    fn m(q: u64, s: &str) -> MonicPoly {
        MonicPoly::parse(f(q), s).unwrap()
    }

    #[test]
    fn squarefree_examples() {
        assert!(is_squarefree(&m(3, "x^3+x")));
        assert!(!is_squarefree(&m(3, "x^2+2x+1")));
        assert!(!is_squarefree(&m(5, "x^3")));
        // x^3 + 1 = (x+1)^3 over F_3: derivative vanishes.
        assert!(!is_squarefree(&m(3, "x^3+1")));
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius_mu(&MonicPoly::one(f(3))), 1);
        assert_eq!(mobius_mu(&m(3, "x^2+1")), -1);
        assert_eq!(mobius_mu(&m(3, "x^2+x")), 1);
        assert_eq!(mobius_mu(&m(3, "x^2")), 0);
    }

    /// Root-test oracle for degree ≤ 3: irreducible iff no root in F_q.
    fn root_free(p: &MonicPoly) -> bool {
        (0..p.field().q()).all(|a| p.eval(a) != 0)
    }

    #[test]
    fn prime_counts_by_root_test() {
        let f3 = f(3);
        let lin: Vec<String> = primes_of_degree(1, f3, Budget::default())
            .unwrap()
            .iter()
            .map(|p| p.to_string())
            .collect();
        assert_eq!(lin, ["x", "x+1", "x+2"]);
        for (r, want) in [(2usize, 3u64), (3, 8)] {
            let oracle = monic_polys(f3, r).filter(root_free).count() as u64;
            assert_eq!(oracle, want);
            assert_eq!(primes_of_degree(r, f3, Budget::default()).unwrap().len() as u64, want);
            assert_eq!(prime_count(r, f3), BigInt::from(want));
        }
    }

    #[test]
    fn distinct_degree_test_matches_factor_products() {
        // Mark every product of two lower-degree monics as reducible and compare.
        for q in [3u64, 5] {
            let fq = f(q);
            for n in 4..=5 {
                let size = q.pow(n as u32) as usize;
                let mut reducible = vec![false; size];
                for d in 1..=n / 2 {
                    for a in monic_polys(fq, d) {
                        for b in monic_polys(fq, n - d) {
                            reducible[a.mul(&b).unwrap().index() as usize] = true;
                        }
                    }
                }
                for c in monic_polys(fq, n) {
                    assert_eq!(is_irreducible(&c), !reducible[c.index() as usize], "{c}");
                }
            }
        }
    }

    #[test]
    fn necklace_sum_identity() {
        for q in [3u64, 5, 7] {
            let fq = f(q);
            for r in 1..=12usize {
                let mut s = BigInt::zero();
                for d in (1..=r).filter(|d| r % d == 0) {
                    s += BigInt::from(d) * prime_count(d, fq);
                }
                assert_eq!(s, fq.pow_big(r as u32));
            }
        }
    }

    #[test]
    fn squarefree_count_formula() {
        let f3 = f(3);
        for d in 2..=8usize {
            let count = monic_polys(f3, d).filter(is_squarefree).count() as u64;
            assert_eq!(count, 3u64.pow(d as u32) - 3u64.pow(d as u32 - 1), "d = {d}");
        }
    }

    #[test]
    fn mobius_by_factor_count_brute_force() {
        // μ agrees with a trial-division factorization over F_3 up to degree 5.
        let f3 = f(3);
        let primes: Vec<MonicPoly> =
            (1..=5).flat_map(|d| primes_of_degree(d, f3, Budget::default()).unwrap()).map(|p| p.into_monic()).collect();
        for d in 0..=5 {
            for a in monic_polys(f3, d) {
                let mut rest: Poly = a.as_poly().clone();
                let mut sign = 1i8;
                for p in &primes {
                    let mut hits = 0;
                    loop {
                        let (quot, rem) = rest.divmod(p).unwrap();
                        if !rem.is_zero() {
                            break;
                        }
                        rest = quot;
                        hits += 1;
                    }
                    if hits > 1 {
                        sign = 0;
                    } else if hits == 1 {
                        sign = -sign;
                    }
                }
                assert_eq!(mobius_mu(&a), sign, "{a}");
            }
        }
    }

    #[test]
    fn perfect_squares() {
        let f5 = f(5);
        let mut squares = std::collections::HashSet::new();
        for s in monic_polys(f5, 2) {
            squares.insert(s.mul(&s).unwrap().index());
        }
        for a in monic_polys(f5, 4) {
            assert_eq!(is_square(&a), squares.contains(&a.index()), "{a}");
        }
        assert!(!is_square(&m(5, "x^3")));
    }
}
