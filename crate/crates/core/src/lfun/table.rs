//! Primes up to a degree bound with precomputed quadratic-residue tables.
//!
//! For a prime P of degree d the table maps the base-q code of a residue class mod P
//! to its Legendre symbol in F_{q^d}. Tables are filled by walking powers of a
//! primitive element of the form x + c (O(d) per step); when no such element exists the
//! squares are marked directly.

use crate::ffq::{is_irreducible, monic_polys, raw, FieldOrder, MonicPoly, PrimePoly};
use crate::{Budget, Error, Result};

/// Residue tables larger than this many entries in total are not materialized.
const TABLE_ENTRY_CAP: f64 = 3.0e8;

pub struct PrimeEntry {
    pub prime: PrimePoly,
    table: Option<Vec<i8>>,
}

impl PrimeEntry {
    pub fn degree(&self) -> usize {
        self.prime.degree()
    }

    /// Legendre symbol of the residue with low-to-high coefficients `res` (length = degree).
    #[inline]
    pub fn symbol_of_residue(&self, res: &[u64], f: FieldOrder) -> i8 {
        match &self.table {
            Some(t) => t[encode(res, f.q())],
            None => {
                let mut num = res.to_vec();
                raw::trim(&mut num);
                let mut den = self.prime.coeffs().to_vec();
                crate::ffq::jacobi_raw(&mut num, &mut den, f)
            }
        }
    }

    /// χ_h(P) = (h / P).
    pub fn chi(&self, h: &[u64], f: FieldOrder, scratch: &mut Vec<u64>) -> i8 {
        scratch.clear();
        scratch.extend_from_slice(h);
        raw::rem_monic(scratch, self.prime.coeffs(), f);
        scratch.resize(self.degree(), 0);
        self.symbol_of_residue(scratch, f)
    }
}

#[inline]
fn encode(res: &[u64], q: u64) -> usize {
    res.iter().rev().fold(0u64, |acc, &c| acc * q + c) as usize
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn residue_table(p: &[u64], f: FieldOrder) -> Vec<i8> {
    let q = f.q();
    let d = p.len() - 1;
    let size = q.pow(d as u32);
    let order = size - 1;
    let factors = prime_factors(order);
    let mut t = vec![-1i8; size as usize];
    t[0] = 0;
    let primitive = (0..q).find(|&c| {
        let gamma = {
            let mut g = vec![c, 1];
            raw::rem_monic(&mut g, p, f);
            g
        };
        !gamma.is_empty() && factors.iter().all(|&l| raw::pow_mod(&gamma, order / l, p, f) != [1])
    });
    match primitive {
        Some(c) => {
            let mut cur = vec![0u64; d];
            cur[0] = 1;
            let mut next = vec![0u64; d];
            for k in 0..order {
                t[encode(&cur, q)] = if k % 2 == 0 { 1 } else { -1 };
                // cur ← cur·(x + c) mod p
                let top = cur[d - 1];
                for i in 0..d {
                    let shifted = if i == 0 { 0 } else { cur[i - 1] };
                    let v = shifted + c * cur[i] + (q - top) * p[i];
                    next[i] = v % q;
                }
                std::mem::swap(&mut cur, &mut next);
            }
        }
        None => {
            for r in 1..size {
                let mut v = Vec::with_capacity(d);
                let mut x = r;
                for _ in 0..d {
                    v.push(x % q);
                    x /= q;
                }
                raw::trim(&mut v);
                let mut s = raw::mul_mod(&v, &v, p, f);
                s.resize(d, 0);
                t[encode(&s, q)] = 1;
            }
        }
    }
    t
}

/// All monic primes of degree ≤ `max_deg`, grouped by degree.
pub struct PrimeTable {
    field: FieldOrder,
    by_degree: Vec<Vec<PrimeEntry>>,
}

impl PrimeTable {
    pub fn new(field: FieldOrder, max_deg: usize, budget: Budget) -> Result<Self> {
        let q = field.q() as f64;
        let scan: f64 = (1..=max_deg).map(|d| q.powi(d as i32) * d as f64).sum();
        budget.check(&format!("prime table up to degree {max_deg} over {field}"), scan)?;
        let entries: f64 = (1..=max_deg).map(|d| q.powi(2 * d as i32) / d as f64).sum();
        let with_tables = entries <= TABLE_ENTRY_CAP;
        let mut by_degree = vec![Vec::new()];
        for d in 1..=max_deg {
            let primes: Vec<MonicPoly> = monic_polys(field, d).filter(is_irreducible).collect();
            let level = primes
                .into_iter()
                .map(|m| {
                    let table = with_tables.then(|| residue_table(m.coeffs(), field));
                    PrimeEntry { prime: PrimePoly::new_unchecked(m), table }
                })
                .collect();
            by_degree.push(level);
        }
        Ok(PrimeTable { field, by_degree })
    }

    pub fn field(&self) -> FieldOrder {
        self.field
    }

    pub fn max_degree(&self) -> usize {
        self.by_degree.len() - 1
    }

    pub fn of_degree(&self, d: usize) -> &[PrimeEntry] {
        &self.by_degree[d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &PrimeEntry> {
        self.by_degree.iter().flatten()
    }
}

/// A_D(β), β < n, for every monic D of degree n in index order, as a flat row-major array.
///
/// Uses the Euler product Σ_B χ_D(B) u^{deg B} = Π_P (1 − χ_D(P) u^{deg P})^{-1} truncated
/// below u^n; residues D mod P are updated incrementally as D runs through the coefficient
/// odometer. Row `i` belongs to `MonicPoly::from_index(field, n, i)`.
pub fn l_coeffs_all(field: FieldOrder, n: usize, budget: Budget) -> Result<Vec<i64>> {
    if n == 0 {
        return Err(Error::Domain("L-coefficients need deg D ≥ 1".into()));
    }
    let q = field.q();
    let count = q.pow(n as u32) as usize;
    let table = PrimeTable::new(field, n.saturating_sub(1), budget)?;
    let work: f64 = table.iter().map(|_| count as f64 * (n + 1) as f64).sum();
    budget.check(&format!("batch L-coefficients of degree {n} over {field}"), work)?;

    let mut rows = vec![0i64; count * n];
    for i in 0..count {
        rows[i * n] = 1;
    }
    let mut digits = vec![0u64; n];
    for entry in table.iter() {
        let d = entry.degree();
        let p = entry.prime.coeffs();
        let xpow: Vec<Vec<u64>> = (0..=n)
            .map(|i| {
                let mut v = vec![0u64; i + 1];
                v[i] = 1;
                raw::rem_monic(&mut v, p, field);
                v.resize(d, 0);
                v
            })
            .collect();
        let mut res = xpow[n].clone();
        digits.iter_mut().for_each(|x| *x = 0);
        for idx in 0..count {
            let chi = entry.symbol_of_residue(&res, field) as i64;
            if chi != 0 {
                let row = &mut rows[idx * n..(idx + 1) * n];
                for k in d..n {
                    row[k] += chi * row[k - d];
                }
            }
            for j in 0..n {
                digits[j] += 1;
                for (r, &b) in res.iter_mut().zip(&xpow[j]) {
                    *r += b;
                    if *r >= q {
                        *r -= q;
                    }
                }
                if digits[j] < q {
                    break;
                }
                digits[j] = 0;
            }
        }
    }
    Ok(rows)
}
