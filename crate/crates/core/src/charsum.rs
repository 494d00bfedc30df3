//! Multiple character sums S(β; r⃗), the duality identities they satisfy, and the exact
//! average of the prime-tuple statistic P(r⃗) over H(2g+1, q).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::combinat::{sigma_sum, DegreeVector, ExactRat};
use crate::ffq::{is_squarefree, jacobi, monic_polys, primes_of_degree, FieldOrder, MonicPoly, PrimePoly};
use crate::lfun::l_coeffs;
use crate::{Budget, Error, Result};

/// Exact value c·q^{−e/2} with e ∈ {0, 1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfPowerValue {
    c: ExactRat,
    e: u8,
}

impl HalfPowerValue {
    /// Represents c·q^{−k/2}, moving whole powers of q into the rational part.
    pub fn new(c: ExactRat, k: i64, q: u64) -> Self {
        if c.is_zero() {
            return HalfPowerValue { c, e: 0 };
        }
        let e = k.rem_euclid(2);
        let whole = (k - e) / 2;
        let qp = BigInt::from(q).pow(whole.unsigned_abs() as u32);
        let c = if whole >= 0 { c / qp } else { c * qp };
        HalfPowerValue { c, e: e as u8 }
    }

    pub fn rational_part(&self) -> &ExactRat {
        &self.c
    }

    pub fn half_exponent(&self) -> u8 {
        self.e
    }

    pub fn to_f64(&self, q: u64) -> f64 {
        use num_traits::ToPrimitive;
        self.c.to_f64().unwrap_or(f64::NAN) * (q as f64).powf(-(self.e as f64) / 2.0)
    }
}

impl std::fmt::Display for HalfPowerValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.e == 0 {
            write!(f, "{}", self.c)
        } else {
            write!(f, "{}·q^(-1/2)", self.c)
        }
    }
}

/// Outcome of an exact identity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: BigInt,
    pub rhs: BigInt,
}

fn report(name: String, lhs: BigInt, rhs: BigInt) -> Result<IdentityReport> {
    if lhs == rhs {
        Ok(IdentityReport { name, lhs, rhs })
    } else {
        Err(Error::Identity(format!("{name}: lhs = {lhs}, rhs = {rhs}")))
    }
}

/// The primes needed for tuples of degrees r⃗, grouped by degree.
struct TuplePrimes {
    degrees: Vec<usize>,
    by_degree: BTreeMap<usize, Vec<PrimePoly>>,
}

impl TuplePrimes {
    fn new(r: &DegreeVector, field: FieldOrder, budget: Budget) -> Result<Self> {
        let mut by_degree = BTreeMap::new();
        for &d in r.as_slice() {
            if let std::collections::btree_map::Entry::Vacant(e) = by_degree.entry(d) {
                e.insert(primes_of_degree(d, field, budget)?);
            }
        }
        Ok(TuplePrimes { degrees: r.as_slice().to_vec(), by_degree })
    }

    /// Number of ordered tuples of pairwise distinct primes with the given degrees.
    fn tuple_count(&self) -> BigInt {
        let mut used: BTreeMap<usize, usize> = BTreeMap::new();
        let mut total = BigInt::one();
        for &d in &self.degrees {
            let k = used.entry(d).or_insert(0);
            let avail = self.by_degree[&d].len() as i64 - *k as i64;
            total *= BigInt::from(avail.max(0));
            *k += 1;
        }
        total
    }

    /// Σ over ordered distinct tuples of Π_j (num / P_j).
    fn tuple_symbol_sum(&self, num: &MonicPoly) -> i64 {
        let values: BTreeMap<usize, Vec<i8>> =
            self.by_degree.iter().map(|(&d, ps)| (d, ps.iter().map(|p| jacobi(num, p)).collect())).collect();
        let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(self.degrees.len());
        fn rec(
            pos: usize,
            degrees: &[usize],
            values: &BTreeMap<usize, Vec<i8>>,
            chosen: &mut Vec<(usize, usize)>,
            acc: i64,
        ) -> i64 {
            if pos == degrees.len() {
                return acc;
            }
            let d = degrees[pos];
            let mut total = 0;
            for (i, &v) in values[&d].iter().enumerate() {
                if v == 0 || chosen.contains(&(d, i)) {
                    continue;
                }
                chosen.push((d, i));
                total += rec(pos + 1, degrees, values, chosen, acc * v as i64);
                chosen.pop();
            }
            total
        }
        rec(0, &self.degrees, &values, &mut chosen, 1)
    }
}

fn tuple_count_estimate(r: &DegreeVector, q: f64) -> f64 {
    r.as_slice().iter().map(|&d| q.powi(d as i32) / d as f64).product()
}

/// S(β; r⃗) = Σ_{deg B = β} Σ_{ordered distinct P_j, deg P_j = r_j} (B / P_1⋯P_n).
pub fn s_brute(beta: usize, r: &DegreeVector, field: FieldOrder, budget: Budget) -> Result<BigInt> {
    let cost = (field.q() as f64).powi(beta as i32) * tuple_count_estimate(r, field.q() as f64);
    budget.check(&format!("S({beta}; {:?})", r.as_slice()), cost)?;
    let primes = TuplePrimes::new(r, field, budget)?;
    let total: i64 = monic_polys(field, beta).map(|b| primes.tuple_symbol_sum(&b)).sum();
    Ok(BigInt::from(total))
}

/// S(β; r⃗) for β = 0..=Σr (the last entry is zero by the vanishing lemma).
pub fn s_table(r: &DegreeVector, field: FieldOrder, budget: Budget) -> Result<Vec<BigInt>> {
    let top = r.total();
    let cost: f64 = (0..=top).map(|b| (field.q() as f64).powi(b as i32)).sum::<f64>()
        * tuple_count_estimate(r, field.q() as f64);
    budget.check(&format!("S table for {:?}", r.as_slice()), cost)?;
    let primes = TuplePrimes::new(r, field, budget)?;
    Ok((0..=top)
        .map(|beta| BigInt::from(monic_polys(field, beta).map(|b| primes.tuple_symbol_sum(&b)).sum::<i64>()))
        .collect())
}

/// The same sum through L-coefficients: S = (−1)^{((q−1)/2)·β·Σr} Σ_tuples A_{ΠP}(β).
pub fn s_via_l_coeffs(beta: usize, r: &DegreeVector, field: FieldOrder, budget: Budget) -> Result<BigInt> {
    let primes = TuplePrimes::new(r, field, budget)?;
    let mut total = BigInt::zero();
    let mut stack: Vec<(usize, MonicPoly, Vec<(usize, usize)>)> = vec![(0, MonicPoly::one(field), Vec::new())];
    while let Some((pos, prod, used)) = stack.pop() {
        if pos == primes.degrees.len() {
            total += l_coeffs(&prod, budget)?.coeff(beta);
            continue;
        }
        let d = primes.degrees[pos];
        for (i, p) in primes.by_degree[&d].iter().enumerate() {
            if used.contains(&(d, i)) {
                continue;
            }
            let mut u = used.clone();
            u.push((d, i));
            stack.push((pos + 1, prod.mul(p)?, u));
        }
    }
    let flip = field.reciprocity_flips() && (beta * r.total()) % 2 == 1;
    Ok(if flip { -total } else { total })
}

fn scaled_compare(lhs: &BigInt, lhs_exp: i64, rhs: &BigInt, q: u64) -> (BigInt, BigInt) {
    // Compare lhs·q^{lhs_exp} with rhs, clearing a negative exponent onto the right side.
    let qp = BigInt::from(q).pow(lhs_exp.unsigned_abs() as u32);
    if lhs_exp >= 0 {
        (lhs * qp, rhs.clone())
    } else {
        (lhs.clone(), rhs * qp)
    }
}

fn duality_odd_from_table(beta: usize, r: &DegreeVector, s: &[BigInt], q: u64) -> Result<IdentityReport> {
    let total = r.total();
    if total % 2 == 0 || beta + 1 > total {
        return Err(Error::Domain(format!("odd duality needs Σr odd and β ≤ Σr − 1 (β = {beta}, Σr = {total})")));
    }
    let exp = (total as i64 - 1) / 2 - beta as i64;
    let (lhs, rhs) = scaled_compare(&s[beta], exp, &s[total - 1 - beta], q);
    report(format!("odd duality β = {beta}, r = {:?}", r.as_slice()), lhs, rhs)
}

fn duality_even_from_table(beta: usize, r: &DegreeVector, s: &[BigInt], q: u64) -> Result<IdentityReport> {
    let total = r.total();
    if total % 2 == 1 || beta + 2 > total {
        return Err(Error::Domain(format!("even duality needs Σr even and β ≤ Σr − 2 (β = {beta}, Σr = {total})")));
    }
    let tail: BigInt = s[..=total - 2 - beta].iter().sum();
    let rhs = -&s[total - 1 - beta] + BigInt::from(q - 1) * tail;
    let exp = total as i64 / 2 - beta as i64;
    let (lhs, rhs) = scaled_compare(&s[beta], exp, &rhs, q);
    report(format!("even duality β = {beta}, r = {:?}", r.as_slice()), lhs, rhs)
}

/// Checks S(β) q^{(Σr−1)/2 − β} = S(Σr − 1 − β) for Σr odd.
pub fn duality_check_odd(beta: usize, r: &DegreeVector, field: FieldOrder, budget: Budget) -> Result<IdentityReport> {
    if r.total() % 2 == 0 || beta + 1 > r.total() {
        return duality_odd_from_table(beta, r, &[], field.q());
    }
    let s = s_table(r, field, budget)?;
    duality_odd_from_table(beta, r, &s, field.q())
}

/// Checks S(β) q^{Σr/2 − β} = −S(Σr − 1 − β) + (q − 1) Σ_{l ≤ Σr − 2 − β} S(l) for Σr even.
pub fn duality_check_even(beta: usize, r: &DegreeVector, field: FieldOrder, budget: Budget) -> Result<IdentityReport> {
    if r.total() % 2 == 1 || beta + 2 > r.total() {
        return duality_even_from_table(beta, r, &[], field.q());
    }
    let s = s_table(r, field, budget)?;
    duality_even_from_table(beta, r, &s, field.q())
}

/// Checks S(Σr − 1) = −q^{(Σr−2)/2}·T(r⃗) for Σr even, T = number of ordered distinct tuples.
pub fn top_coeff_even(r: &DegreeVector, field: FieldOrder, budget: Budget) -> Result<IdentityReport> {
    let total = r.total();
    if total % 2 == 1 {
        return Err(Error::Domain(format!("top coefficient identity needs Σr even (Σr = {total})")));
    }
    let lhs = s_brute(total - 1, r, field, budget)?;
    let t = TuplePrimes::new(r, field, budget)?.tuple_count();
    let rhs = -BigInt::from(field.q()).pow((total as u32 - 2) / 2) * t;
    report(format!("top coefficient r = {:?}", r.as_slice()), lhs, rhs)
}

/// Every admissible duality and top-coefficient check for one degree vector, from a single S table.
pub fn all_dualities(r: &DegreeVector, field: FieldOrder, budget: Budget) -> Result<Vec<IdentityReport>> {
    let s = s_table(r, field, budget)?;
    let total = r.total();
    let q = field.q();
    let mut out = Vec::new();
    if !s[total].is_zero() {
        return Err(Error::Identity(format!("S(Σr; {:?}) = {} ≠ 0", r.as_slice(), s[total])));
    }
    if total % 2 == 1 {
        for beta in 0..total {
            out.push(duality_odd_from_table(beta, r, &s, q)?);
        }
    } else {
        for beta in 0..=total - 2 {
            out.push(duality_even_from_table(beta, r, &s, q)?);
        }
        let t = TuplePrimes::new(r, field, budget)?.tuple_count();
        let rhs = -BigInt::from(q).pow((total as u32 - 2) / 2) * t;
        out.push(report(format!("top coefficient r = {:?}", r.as_slice()), s[total - 1].clone(), rhs)?);
    }
    Ok(out)
}

/// Both sides of the exact average of P(r⃗) over H(2g+1, q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AvgPReport {
    pub lhs: HalfPowerValue,
    pub rhs: HalfPowerValue,
    pub equal: bool,
}

/// LHS: exhaustive mean of P(r⃗) = Π r_j q^{−r_j/2} Σ_tuples (h / ΠP_j).
/// RHS: Π r_j / ((q−1) q^{2g}) · q^{−Σr/2} Σ_{α ≤ g} σ(r⃗; α) S(2g+1−2α; r⃗).
pub fn avg_p_exact(r: &DegreeVector, field: FieldOrder, g: usize, budget: Budget) -> Result<AvgPReport> {
    let q = field.q();
    let tuples = tuple_count_estimate(r, q as f64);
    budget.check("exhaustive average of P(r)", (q as f64).powi(2 * g as i32 + 1) * tuples)?;
    let primes = TuplePrimes::new(r, field, budget)?;
    let mut sum = 0i64;
    let mut count = 0i64;
    for h in monic_polys(field, 2 * g + 1).filter(is_squarefree) {
        sum += primes.tuple_symbol_sum(&h);
        count += 1;
    }
    let prod_r = BigInt::from(r.as_slice().iter().product::<usize>());
    let k = r.total() as i64;
    let lhs = HalfPowerValue::new(BigRational::new(&prod_r * sum, BigInt::from(count)), k, q);

    let mut acc = BigInt::zero();
    for alpha in 0..=g {
        let beta = 2 * g + 1 - 2 * alpha;
        let sig = sigma_sum(r, alpha, q);
        if sig.is_zero() || beta >= r.total() {
            continue;
        }
        acc += sig * s_brute(beta, r, field, budget)?;
    }
    let denom = BigInt::from(q - 1) * BigInt::from(q).pow(2 * g as u32);
    let rhs = HalfPowerValue::new(BigRational::new(prod_r * acc, denom), k, q);
    let equal = lhs == rhs;
    Ok(AvgPReport { lhs, rhs, equal })
}

/// Which regime of the main-term predictor applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PredictionCase {
    /// Σr > 2g+2 even, off the exceptional hyperplanes: explicit main term.
    Generic,
    /// Σr ∈ {2g, 2g+2} or on an exceptional hyperplane: bounded, no main term.
    Exceptional,
    /// Σr < 2g, or Σr > 2g odd: main term 0.
    Negligible,
}

impl std::fmt::Display for PredictionCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PredictionCase::Generic => "i",
            PredictionCase::Exceptional => "ii",
            PredictionCase::Negligible => "iii",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prediction {
    /// `None` in the exceptional case, where only an O(1) bound is asserted.
    pub main: Option<BigInt>,
    pub case: PredictionCase,
}

/// Default margin δ in the hypothesis Σr < 4g(1 − δ).
pub const DEFAULT_DELTA: f64 = 0.05;

/// Main term of the average of P(r⃗) predicted away from the exceptional hyperplanes.
pub fn avg_p_predicted(r: &DegreeVector, g: usize, delta: f64) -> Result<Prediction> {
    let total = r.total();
    if !(delta > 0.0 && delta < 1.0) || (total as f64) >= 4.0 * g as f64 * (1.0 - delta) {
        return Err(Error::Domain(format!("predictor needs Σr < 4g(1 − δ) (Σr = {total}, g = {g}, δ = {delta})")));
    }
    let two_g = 2 * g;
    if total < two_g || (total > two_g && total % 2 == 1) {
        return Ok(Prediction { main: Some(BigInt::zero()), case: PredictionCase::Negligible });
    }
    let full = (1u32 << r.len()) - 1;
    let on_hyperplane = r.subsets().any(|i| r.sigma(full ^ i) as i64 - r.sigma(i) as i64 == two_g as i64);
    if total == two_g || total == two_g + 2 || on_hyperplane {
        return Ok(Prediction { main: None, case: PredictionCase::Exceptional });
    }
    let s: i64 = r
        .subsets()
        .filter(|&i| r.sigma(i) + two_g < r.sigma(full ^ i))
        .map(|i| if i.count_ones() % 2 == 0 { 1 } else { -1 })
        .sum();
    Ok(Prediction { main: Some(BigInt::from(-s)), case: PredictionCase::Generic })
}
