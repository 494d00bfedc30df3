use super::{PrimeTable, StarData};
use crate::ffq::{is_square, is_squarefree, jacobi, primes_of_degree, FieldOrder, MonicPoly};
use crate::{Budget, Error, Result};

/// c_r = λ + Σ_{deg f = r} Λ(f) χ_h(f) = −q^{r/2} tr Θ_h^r for r = 1..=r_max.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledTraces {
    field: FieldOrder,
    g: usize,
    lambda: u8,
    c: Vec<i128>,
}

impl ScaledTraces {
    pub fn new(field: FieldOrder, g: usize, lambda: u8, c: Vec<i128>) -> Self {
        ScaledTraces { field, g, lambda, c }
    }

    pub fn field(&self) -> FieldOrder {
        self.field
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn lambda(&self) -> u8 {
        self.lambda
    }

    pub fn r_max(&self) -> usize {
        self.c.len()
    }

    /// c_r for 1 ≤ r ≤ r_max.
    pub fn c(&self, r: usize) -> i128 {
        self.c[r - 1]
    }

    pub fn values(&self) -> &[i128] {
        &self.c
    }

    /// tr Θ_h^r = −q^{−r/2} c_r.
    pub fn trace(&self, r: usize) -> f64 {
        -(self.c(r) as f64) * (self.field.q() as f64).powf(-(r as f64) / 2.0)
    }

    /// |c_r| ≤ λ + 2g q^{r/2} for every stored r, checked exactly.
    pub fn within_weil_bound(&self) -> bool {
        let q = self.field.q() as i128;
        let two_g = 2 * self.g as i128;
        self.c.iter().enumerate().all(|(i, &c)| {
            let excess = c.abs() - self.lambda as i128;
            if excess <= 0 {
                return true;
            }
            match q.checked_pow(i as u32 + 1).and_then(|qr| qr.checked_mul(two_g * two_g)) {
                Some(bound) => excess * excess <= bound,
                None => true,
            }
        })
    }
}

fn genus_and_lambda(h: &MonicPoly) -> Result<(usize, u8)> {
    if h.degree() == 0 {
        return Err(Error::Domain("h must have degree ≥ 1".into()));
    }
    if is_square(h) {
        return Err(Error::PerfectSquare(h.to_string()));
    }
    if !is_squarefree(h) {
        return Err(Error::NotSquarefree(h.to_string()));
    }
    let n = h.degree();
    let lambda = (n % 2 == 0) as u8;
    Ok(((n - 1 - lambda as usize) / 2, lambda))
}

/// Combines per-degree prime sums into c_r = λ + Σ_{d | r} d·Σ_{deg P = d} χ(P)^{r/d}.
///
/// `s[d]` = Σ_{deg P = d} χ(P) and `n[d]` = #{deg P = d : P ∤ h}, since χ(P)^k is χ(P) for
/// odd k and the indicator of P ∤ h for even k.
fn combine_prime_sums(s: &[i128], n: &[i128], lambda: u8, r_max: usize) -> Vec<i128> {
    (1..=r_max)
        .map(|r| {
            let mut c = lambda as i128;
            for d in (1..=r).filter(|d| r % d == 0) {
                let k = r / d;
                c += d as i128 * if k % 2 == 1 { s[d] } else { n[d] };
            }
            c
        })
        .collect()
}

/// c_r by summing over all prime powers of degree r (direct route).
pub fn scaled_traces(h: &MonicPoly, r_max: usize, budget: Budget) -> Result<ScaledTraces> {
    let (g, lambda) = genus_and_lambda(h)?;
    let f = h.field();
    let work: f64 = (1..=r_max).map(|d| (f.q() as f64).powi(d as i32) * (d * d) as f64).sum();
    budget.check(&format!("prime-power trace sums to r = {r_max}"), work)?;
    let mut s = vec![0i128; r_max + 1];
    let mut n = vec![0i128; r_max + 1];
    for d in 1..=r_max {
        for p in primes_of_degree(d, f, budget)? {
            let x = jacobi(h, &p);
            s[d] += x as i128;
            n[d] += (x != 0) as i128;
        }
    }
    Ok(ScaledTraces::new(f, g, lambda, combine_prime_sums(&s, &n, lambda, r_max)))
}

/// Power sums p_k = Σ α_j^k of the inverse roots of Σ a_i u^i (a_0 = 1) for k = 1..=r_max.
pub fn newton_power_sums(a: &[i128], r_max: usize) -> Vec<i128> {
    let coeff = |i: usize| a.get(i).copied().unwrap_or(0);
    let mut p: Vec<i128> = Vec::with_capacity(r_max);
    for k in 1..=r_max {
        let mut v = -(k as i128) * coeff(k);
        for i in 1..k {
            v -= coeff(i) * p[k - i - 1];
        }
        p.push(v);
    }
    p
}

/// c_r from the L*-coefficients by Newton's identities (c_r = −p_r).
pub fn traces_from_star(sd: &StarData, r_max: usize) -> ScaledTraces {
    let a: Vec<i128> = sd.star().iter().map(|&x| x as i128).collect();
    let c = newton_power_sums(&a, r_max).into_iter().map(|p| -p).collect();
    ScaledTraces::new(sd.field(), sd.delta(), sd.lambda(), c)
}

/// Rebuilds L* (degree 2g, λ = 0) from c_1..c_g via Newton and the functional equation.
pub fn star_from_low_traces(c: &[i128], q: u64, g: usize) -> Result<Vec<i128>> {
    let mut a = vec![0i128; 2 * g + 1];
    a[0] = 1;
    for k in 1..=g {
        let num: i128 = (1..=k).map(|i| c[i - 1] * a[k - i]).sum();
        if num % k as i128 != 0 {
            return Err(Error::Identity(format!("Newton recursion not integral at k = {k}")));
        }
        a[k] = num / k as i128;
    }
    let q = q as i128;
    for k in 0..g {
        a[2 * g - k] = q.pow((g - k) as u32) * a[k];
    }
    Ok(a)
}

/// Fast traces for members of H(2g+1, q): primes of degree ≤ g determine L*, and hence every c_r.
pub struct TraceEngine {
    table: PrimeTable,
    g: usize,
}

impl TraceEngine {
    pub fn new(field: FieldOrder, g: usize, budget: Budget) -> Result<Self> {
        if g == 0 {
            return Err(Error::Domain("genus must be ≥ 1".into()));
        }
        Ok(TraceEngine { table: PrimeTable::new(field, g, budget)?, g })
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn field(&self) -> FieldOrder {
        self.table.field()
    }

    /// Exact c_1..c_{r_max} for squarefree h of degree 2g+1 (not re-checked here).
    pub fn traces(&self, h: &MonicPoly, r_max: usize) -> Result<ScaledTraces> {
        let g = self.g;
        if h.degree() != 2 * g + 1 {
            return Err(Error::Domain(format!("{h} does not have degree {}", 2 * g + 1)));
        }
        let f = self.field();
        let mut s = vec![0i128; g + 1];
        let mut n = vec![0i128; g + 1];
        let mut scratch = Vec::with_capacity(h.degree() + 1);
        for d in 1..=g {
            for e in self.table.of_degree(d) {
                let x = e.chi(h.coeffs(), f, &mut scratch);
                s[d] += x as i128;
                n[d] += (x != 0) as i128;
            }
        }
        let low = combine_prime_sums(&s, &n, 0, g);
        let star = star_from_low_traces(&low, f.q(), g)?;
        let c = newton_power_sums(&star, r_max).into_iter().map(|p| -p).collect();
        Ok(ScaledTraces::new(f, g, 0, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffq::monic_polys;
    use crate::lfun::{l_coeffs, star_reduce};

    fn f(q: u64) -> FieldOrder {
        FieldOrder::new(q).unwrap()
    }

    #[test]
    fn spec_trace_examples() {
        let h = MonicPoly::parse(f(3), "x^3+x").unwrap();
        let t = scaled_traces(&h, 4, Budget::default()).unwrap();
        assert_eq!((t.c(1), t.c(2)), (0, 6));
        assert!(t.within_weil_bound());
        assert!((t.trace(2) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn direct_newton_and_engine_agree() {
        for (q, g) in [(3u64, 1usize), (3, 2), (5, 1), (5, 2)] {
            let fq = f(q);
            let engine = TraceEngine::new(fq, g, Budget::default()).unwrap();
            let r_max = 2 * g + 1;
            for h in monic_polys(fq, 2 * g + 1).filter(is_squarefree).step_by(if q == 5 && g == 2 { 23 } else { 1 }) {
                let direct = scaled_traces(&h, r_max, Budget::default()).unwrap();
                let sd = star_reduce(&l_coeffs(&h, Budget::default()).unwrap()).unwrap();
                assert_eq!(traces_from_star(&sd, r_max), direct, "{h}");
                assert_eq!(engine.traces(&h, r_max).unwrap(), direct, "{h}");
                assert!(direct.within_weil_bound());
            }
        }
    }

    #[test]
    fn point_count_relation() {
        // #C(F_q) = q + 1 + c_1 with the single point at infinity of an odd-degree model.
        let fq = f(5);
        for h in monic_polys(fq, 5).filter(is_squarefree).take(200) {
            let affine: i64 = (0..5).map(|x| 1 + fq.legendre(h.eval(x)) as i64).sum();
            let t = scaled_traces(&h, 1, Budget::default()).unwrap();
            assert_eq!(affine + 1, 5 + 1 + t.c(1) as i64);
        }
    }
}
