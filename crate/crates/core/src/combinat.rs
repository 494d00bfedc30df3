//! Set partitions with their Möbius function, perfect pairings, and the exact
//! arithmetic quantities σ(r⃗; α), φ_δ(r⃗), Φ_β(r⃗).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::ffq::{is_squarefree, mobius_mu, monic_polys, primes_of_degree, FieldOrder, Poly};
use crate::{Budget, Error, Result};

/// Arbitrary-precision rational, always reduced with positive denominator.
pub type ExactRat = BigRational;

/// Largest ground set handled by the partition routines.
pub const MAX_SET: usize = 12;

/// A set partition of {0..n} as a restricted-growth string (first occurrences increasing).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    n: u8,
    rgs: [u8; MAX_SET],
}

impl SetPartition {
    pub fn from_rgs(rgs: &[u8]) -> Result<Self> {
        if rgs.is_empty() || rgs.len() > MAX_SET {
            return Err(Error::Domain(format!("partition size {} outside 1..=12", rgs.len())));
        }
        let mut max = 0u8;
        for (i, &b) in rgs.iter().enumerate() {
            let ok = if i == 0 { b == 0 } else { b <= max + 1 };
            if !ok {
                return Err(Error::Domain(format!("{rgs:?} is not a restricted-growth string")));
            }
            max = max.max(b);
        }
        let mut arr = [0u8; MAX_SET];
        arr[..rgs.len()].copy_from_slice(rgs);
        Ok(SetPartition { n: rgs.len() as u8, rgs: arr })
    }

    /// All singletons (the bottom element Ô).
    pub fn finest(n: usize) -> Result<Self> {
        SetPartition::from_rgs(&(0..n as u8).collect::<Vec<_>>())
    }

    /// One block.
    pub fn coarsest(n: usize) -> Result<Self> {
        SetPartition::from_rgs(&vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn rgs(&self) -> &[u8] {
        &self.rgs[..self.n()]
    }

    pub fn num_blocks(&self) -> usize {
        self.rgs().iter().copied().max().map_or(0, |m| m as usize + 1)
    }

    /// Blocks as sorted element lists, ordered by smallest element.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (i, &b) in self.rgs().iter().enumerate() {
            out[b as usize].push(i);
        }
        out
    }

    /// Blocks as bitmasks over {0..n}.
    pub fn block_masks(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.num_blocks()];
        for (i, &b) in self.rgs().iter().enumerate() {
            out[b as usize] |= 1 << i;
        }
        out
    }
}

impl std::fmt::Display for SetPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let blocks: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "{{{}}}", blocks.join(","))
    }
}

/// All set partitions of an n-element set (Bell(n) of them), in lexicographic RGS order.
pub fn partitions(n: usize) -> Result<Vec<SetPartition>> {
    if !(1..=MAX_SET).contains(&n) {
        return Err(Error::Domain(format!("partitions need 1 ≤ n ≤ {MAX_SET}, got {n}")));
    }
    let mut out = Vec::with_capacity(bell(n) as usize);
    let mut rgs = vec![0u8; n];
    // prefix_max[i] = max(rgs[0..=i])
    let mut prefix_max = vec![0u8; n];
    loop {
        let mut arr = [0u8; MAX_SET];
        arr[..n].copy_from_slice(&rgs);
        out.push(SetPartition { n: n as u8, rgs: arr });
        // Find the rightmost position that can be incremented.
        let mut i = n - 1;
        loop {
            if i == 0 {
                return Ok(out);
            }
            if rgs[i] <= prefix_max[i - 1] {
                break;
            }
            i -= 1;
        }
        rgs[i] += 1;
        prefix_max[i] = prefix_max[i - 1].max(rgs[i]);
        for j in i + 1..n {
            rgs[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
}

/// Bell numbers for n ≤ 12.
pub fn bell(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![*row.last().unwrap()];
        for &x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row[0]
}

/// F ≺ G: every block of F lies inside a block of G.
pub fn refines(f: &SetPartition, g: &SetPartition) -> bool {
    if f.n != g.n {
        return false;
    }
    let mut image = [u8::MAX; MAX_SET];
    for (&a, &b) in f.rgs().iter().zip(g.rgs()) {
        let slot = &mut image[a as usize];
        if *slot == u8::MAX {
            *slot = b;
        } else if *slot != b {
            return false;
        }
    }
    true
}

/// μ(Ô, F) = Π_blocks (−1)^{|F_l|−1} (|F_l| − 1)!.
pub fn partition_mobius(f: &SetPartition) -> i64 {
    f.blocks()
        .iter()
        .map(|b| {
            let k = b.len() as i64;
            let fact: i64 = (1..k).product();
            if (k - 1) % 2 == 0 {
                fact
            } else {
                -fact
            }
        })
        .product()
}

/// All perfect matchings of `s`; empty for odd |s|, a single empty matching for |s| = 0.
pub fn pairings(s: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if s.len() % 2 == 1 {
        return Vec::new();
    }
    if s.is_empty() {
        return vec![Vec::new()];
    }
    let first = s[0];
    let mut out = Vec::new();
    for k in 1..s.len() {
        let rest: Vec<usize> = s[1..].iter().enumerate().filter(|&(j, _)| j + 1 != k).map(|(_, &x)| x).collect();
        for mut m in pairings(&rest) {
            m.insert(0, (first, s[k]));
            out.push(m);
        }
    }
    out
}

/// Degrees r⃗ = (r_1..r_n) of a tuple of distinct primes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DegreeVector(Vec<usize>);

impl DegreeVector {
    pub fn new(r: Vec<usize>) -> Result<Self> {
        if r.is_empty() || r.len() > MAX_SET || r.contains(&0) {
            return Err(Error::Domain(format!("degree vector {r:?} must have 1..=12 positive entries")));
        }
        Ok(DegreeVector(r))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// σ(I) = Σ_{i ∈ I} r_i for a bitmask I.
    pub fn sigma(&self, mask: u32) -> usize {
        self.0.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &r)| r).sum()
    }

    /// Iterates over all 2^n subsets as bitmasks.
    pub fn subsets(&self) -> impl Iterator<Item = u32> {
        0..(1u32 << self.0.len())
    }
}

/// σ(r⃗; α): coefficient of X^α in (1 − qX) / Π_j (1 − X^{r_j}).
pub fn sigma_sum(r: &DegreeVector, alpha: usize, q: u64) -> BigInt {
    let mut series = vec![BigInt::zero(); alpha + 1];
    series[0] = BigInt::one();
    if alpha >= 1 {
        series[1] = -BigInt::from(q);
    }
    for &rj in r.as_slice() {
        for k in rj..=alpha {
            let prev = series[k - rj].clone();
            series[k] += prev;
        }
    }
    series.swap_remove(alpha)
}

/// Σ μ(A) over monic A of degree α coprime to the first distinct primes of degrees r⃗.
pub fn sigma_sum_brute(r: &DegreeVector, alpha: usize, field: FieldOrder, budget: Budget) -> Result<BigInt> {
    budget.check("coprime Möbius enumeration", (field.q() as f64).powi(alpha as i32) * (alpha * alpha) as f64)?;
    let mut modulus = Poly::constant(field, 1);
    let mut used: std::collections::HashMap<usize, usize> = Default::default();
    for &d in r.as_slice() {
        let k = used.entry(d).or_insert(0);
        let primes = primes_of_degree(d, field, budget)?;
        let p = primes
            .get(*k)
            .ok_or_else(|| Error::Domain(format!("fewer than {} primes of degree {d}", *k + 1)))?;
        modulus = modulus.mul(p)?;
        *k += 1;
    }
    let mut total = BigInt::zero();
    for a in monic_polys(field, alpha) {
        if a.gcd(&modulus)?.degree() == Some(0) && is_squarefree(&a) {
            total += mobius_mu(&a) as i64;
        }
    }
    Ok(total)
}

fn q_power(q: u64, e: i64) -> BigRational {
    let base = BigInt::from(q).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(base)
    } else {
        BigRational::new(BigInt::one(), base)
    }
}

/// φ_δ(r⃗) = Σ_{I : σ(I) ≤ δ} (−1)^{|I|} q^{−σ(I)}.
pub fn phi_delta(r: &DegreeVector, delta: usize, q: u64) -> ExactRat {
    r.subsets()
        .filter(|&m| r.sigma(m) <= delta)
        .map(|m| {
            let v = q_power(q, -(r.sigma(m) as i64));
            if m.count_ones() % 2 == 0 {
                v
            } else {
                -v
            }
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

fn phi_cap_level(r: &DegreeVector, beta: usize) -> Result<usize> {
    let total = r.total();
    // The definition only needs 2L = Σr − 1 − β ≥ 0; the subset form is a lemma for β ≤ Σr − 2
    // and holds trivially at L = 0.
    if beta % 2 == 0 || total % 2 == 1 || beta + 1 > total {
        return Err(Error::Domain(format!(
            "Φ_β needs β odd, Σr even and β ≤ Σr − 1 (β = {beta}, Σr = {total})"
        )));
    }
    Ok((total - 1 - beta) / 2)
}

/// Φ_β(r⃗) = −q^L φ_L + (q − 1) Σ_{l < L} q^l φ_l with 2L = Σr − 1 − β, for odd β ≤ Σr − 1.
pub fn phi_cap(r: &DegreeVector, beta: usize, q: u64) -> Result<ExactRat> {
    let l_top = phi_cap_level(r, beta)?;
    let mut acc = -(q_power(q, l_top as i64) * phi_delta(r, l_top, q));
    let qm1 = BigRational::from_integer(BigInt::from(q - 1));
    for l in 0..l_top {
        acc += &qm1 * q_power(q, l as i64) * phi_delta(r, l, q);
    }
    Ok(acc)
}

/// The subset form −Σ_{σ(I) ≤ L} (−1)^{|I|}, equal to Φ_β whenever both are defined.
pub fn phi_cap_subset_form(r: &DegreeVector, beta: usize) -> Result<BigInt> {
    let l_top = phi_cap_level(r, beta)?;
    let s: i64 = r
        .subsets()
        .filter(|&m| r.sigma(m) <= l_top)
        .map(|m| if m.count_ones() % 2 == 0 { 1 } else { -1 })
        .sum();
    Ok(BigInt::from(-s))
}
