//! The ensemble H(2g+1, q): enumeration, seeded sampling, averages and n-level densities.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::combinat::{partitions, ExactRat};
use crate::ffq::{is_squarefree, jacobi, mobius_mu, monic_polys, primes_of_degree, FieldOrder, MonicPoly};
use crate::lfun::{chi, Eigenphases, ScaledTraces, TraceEngine};
use crate::testfn::{check_supports, lattice_transform, TestFn, SUPPORT_LIMIT};
use crate::{Budget, Error, Result};

/// Default number of curves per parallel chunk.
pub const DEFAULT_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { n: u64, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub field: FieldOrder,
    pub g: usize,
    pub mode: Mode,
}

impl EnsembleSpec {
    pub fn exhaustive(field: FieldOrder, g: usize) -> Self {
        EnsembleSpec { field, g, mode: Mode::Exhaustive }
    }

    pub fn sampled(field: FieldOrder, g: usize, n: u64, seed: u64) -> Self {
        EnsembleSpec { field, g, mode: Mode::Sampled { n, seed } }
    }

    pub fn degree(&self) -> usize {
        2 * self.g + 1
    }

    /// Genus ≥ 1; exhaustive mode needs q^{2g+1} within the budget.
    pub fn validate(&self, budget: Budget) -> Result<()> {
        if self.g == 0 {
            return Err(Error::Domain("genus must be ≥ 1".into()));
        }
        match self.mode {
            Mode::Exhaustive => {
                budget.check("exhaustive enumeration of H(2g+1,q)", (self.field.q() as f64).powi(self.degree() as i32))
            }
            Mode::Sampled { n, .. } if n == 0 => Err(Error::Domain("sample count must be ≥ 1".into())),
            Mode::Sampled { .. } => Ok(()),
        }
    }

    /// (q−1)q^{2g} in exhaustive mode, N in sampled mode.
    pub fn size(&self) -> u64 {
        match self.mode {
            Mode::Exhaustive => (self.field.q() - 1) * self.field.q().pow(2 * self.g as u32),
            Mode::Sampled { n, .. } => n,
        }
    }
}

/// Seed of draw `i`: splitmix64 finalizer applied to master + (i+1)·0x9E3779B97F4A7C15.
pub fn draw_seed(master: u64, i: u64) -> u64 {
    let mut z = master.wrapping_add((i.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw `i` of a sampled ensemble: uniform monic of degree 2g+1, rejected until squarefree.
pub fn sample_h(field: FieldOrder, g: usize, master: u64, i: u64) -> MonicPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(draw_seed(master, i));
    let q = field.q();
    loop {
        let mut c: Vec<u64> = (0..2 * g + 1).map(|_| rng.random_range(0..q)).collect();
        c.push(1);
        let h = MonicPoly::from_coeffs(field, c).expect("leading coefficient is 1");
        if is_squarefree(&h) {
            return h;
        }
    }
}

/// The members of the ensemble (with multiplicity in sampled mode), in a fixed order.
pub fn enum_h(spec: &EnsembleSpec, budget: Budget) -> Result<Box<dyn Iterator<Item = MonicPoly> + Send>> {
    spec.validate(budget)?;
    let (field, g) = (spec.field, spec.g);
    Ok(match spec.mode {
        Mode::Exhaustive => Box::new(monic_polys(field, 2 * g + 1).filter(is_squarefree)),
        Mode::Sampled { n, seed } => Box::new((0..n).map(move |i| sample_h(field, g, seed, i))),
    })
}

/// Mean with standard error; stderr is 0 for exhaustive averages.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AvgResult {
    pub mean: f64,
    pub stderr: f64,
    pub count: u64,
}

#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
    sq: f64,
    csq: f64,
    n: u64,
}

impl Kahan {
    fn add_to(sum: &mut f64, c: &mut f64, x: f64) {
        let y = x - *c;
        let t = *sum + y;
        *c = (t - *sum) - y;
        *sum = t;
    }

    fn push(&mut self, x: f64) {
        Self::add_to(&mut self.sum, &mut self.c, x);
        Self::add_to(&mut self.sq, &mut self.csq, x * x);
        self.n += 1;
    }

    fn merge(&mut self, o: &Kahan) {
        Self::add_to(&mut self.sum, &mut self.c, o.sum);
        Self::add_to(&mut self.sum, &mut self.c, -o.c);
        Self::add_to(&mut self.sq, &mut self.csq, o.sq);
        Self::add_to(&mut self.sq, &mut self.csq, -o.csq);
        self.n += o.n;
    }
}

/// Averages `stat` over the ensemble: per-curve work runs in parallel chunks, chunks are
/// reduced in index order so results do not depend on the thread count.
pub fn average<F>(spec: &EnsembleSpec, chunk: usize, budget: Budget, stat: F) -> Result<AvgResult>
where
    F: Fn(&MonicPoly) -> Result<f64> + Sync,
{
    spec.validate(budget)?;
    let chunk = chunk.max(1);
    let (field, g) = (spec.field, spec.g);
    let partials: Vec<Result<Kahan>> = match spec.mode {
        Mode::Exhaustive => {
            let all: Vec<MonicPoly> = monic_polys(field, 2 * g + 1).filter(is_squarefree).collect();
            all.par_chunks(chunk)
                .map(|c| {
                    let mut k = Kahan::default();
                    for h in c {
                        k.push(stat(h)?);
                    }
                    Ok(k)
                })
                .collect()
        }
        Mode::Sampled { n, seed } => {
            let chunks = n.div_ceil(chunk as u64);
            (0..chunks)
                .into_par_iter()
                .map(|ci| {
                    let mut k = Kahan::default();
                    for i in ci * chunk as u64..((ci + 1) * chunk as u64).min(n) {
                        k.push(stat(&sample_h(field, g, seed, i))?);
                    }
                    Ok(k)
                })
                .collect()
        }
    };
    let mut total = Kahan::default();
    for p in partials {
        total.merge(&p?);
    }
    let n = total.n as f64;
    let mean = total.sum / n;
    let stderr = match spec.mode {
        Mode::Exhaustive => 0.0,
        Mode::Sampled { .. } if total.n > 1 => ((total.sq - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt(),
        Mode::Sampled { .. } => f64::INFINITY,
    };
    Ok(AvgResult { mean, stderr, count: total.n })
}

/// ⟨χ_h(f)⟩ over H(2g+1, q), computed directly and through the Möbius expansion; both must agree.
pub fn avg_char(f: &MonicPoly, spec: &EnsembleSpec, budget: Budget) -> Result<ExactRat> {
    if spec.mode != Mode::Exhaustive {
        return Err(Error::Domain("avg_char needs exhaustive mode".into()));
    }
    spec.validate(budget)?;
    let (field, g) = (spec.field, spec.g);
    let n = spec.size();
    let direct: i64 = monic_polys(field, 2 * g + 1).filter(is_squarefree).map(|h| chi(&h, f) as i64).sum();
    let mut rhs = BigInt::zero();
    for alpha in 0..=g {
        let beta = 2 * g + 1 - 2 * alpha;
        let sigma: i64 = monic_polys(field, alpha)
            .filter(|a| a.as_poly().gcd(f.as_poly()).map(|d| d.degree() == Some(0)).unwrap_or(false))
            .map(|a| mobius_mu(&a) as i64)
            .sum();
        if sigma == 0 {
            continue;
        }
        let b_sum: i64 = monic_polys(field, beta).map(|b| jacobi(b.as_poly(), f) as i64).sum();
        rhs += BigInt::from(sigma) * BigInt::from(b_sum);
    }
    let denom = BigInt::from(n);
    let lhs = BigRational::new(BigInt::from(direct), denom.clone());
    let rhs = BigRational::new(rhs, denom);
    if lhs != rhs {
        return Err(Error::Identity(format!("<chi_h({f})>: direct {lhs} vs Mobius expansion {rhs}")));
    }
    Ok(lhs)
}

/// Traces tr U^r, r = 1..=r_max, of a 2g×2g symplectic class.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSeq {
    g: usize,
    tr: Vec<f64>,
}

impl TraceSeq {
    pub fn new(g: usize, tr: Vec<f64>) -> Self {
        TraceSeq { g, tr }
    }

    pub fn from_scaled(t: &ScaledTraces) -> Self {
        TraceSeq { g: t.genus(), tr: (1..=t.r_max()).map(|r| t.trace(r)).collect() }
    }

    /// tr U^r = 2 Σ_j cos(rθ_j).
    pub fn from_phases(p: &Eigenphases, r_max: usize) -> Self {
        let tr = (1..=r_max).map(|r| 2.0 * p.thetas().iter().map(|t| (r as f64 * t).cos()).sum::<f64>()).collect();
        TraceSeq { g: p.genus(), tr }
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn r_max(&self) -> usize {
        self.tr.len()
    }

    pub fn trace(&self, r: usize) -> f64 {
        self.tr[r - 1]
    }
}

/// Largest r with f̂(r/2g) possibly nonzero for support s.
pub fn r_needed(s: f64, g: usize) -> usize {
    let x = 2.0 * g as f64 * s;
    if x <= 0.0 {
        0
    } else {
        (x.ceil() as usize).saturating_sub(1)
    }
}

/// Σ_{1≤|j|≤g} ũ(θ_j) from samples u[r] = Û(r/2g): Û(0) + (1/g) Σ_{r≥1} Û(r/2g) tr U^r.
fn zero_sum(samples: &[f64], t: &TraceSeq) -> Result<f64> {
    let last = samples.iter().rposition(|v| *v != 0.0).unwrap_or(0);
    if last > t.r_max() {
        return Err(Error::TraceDepth { need: last, have: t.r_max() });
    }
    let g = t.genus() as f64;
    let tail: f64 = (1..=last).map(|r| samples[r] * t.trace(r)).sum();
    Ok(samples.first().copied().unwrap_or(0.0) + tail / g)
}

/// One-level statistic Σ_{1≤|j|≤g} f̃(θ_j) from the explicit formula (exact given exact traces).
pub fn linear_stat(traces: &ScaledTraces, tf: &TestFn) -> Result<f64> {
    let g = traces.genus();
    let two_g = 2.0 * g as f64;
    let rmax = r_needed(tf.support(), g);
    if rmax > traces.r_max() {
        return Err(Error::TraceDepth { need: rmax, have: traces.r_max() });
    }
    let q = traces.field().q() as f64;
    let sum: f64 = (1..=rmax).map(|r| q.powf(-(r as f64) / 2.0) * tf.eval_fhat(r as f64 / two_g) * traces.c(r) as f64).sum();
    Ok(tf.eval_fhat(0.0) - sum / g as f64)
}

/// f̃(θ) = Σ_m f(2g(θ/2π + m)) through its finite Fourier series.
pub fn periodized(tf: &TestFn, g: usize, theta: f64) -> f64 {
    let two_g = 2.0 * g as f64;
    let rmax = r_needed(tf.support(), g);
    let s: f64 = (1..=rmax).map(|r| tf.eval_fhat(r as f64 / two_g) * (r as f64 * theta).cos()).sum();
    (tf.eval_fhat(0.0) + 2.0 * s) / two_g
}

/// W⁽ⁿ⁾ by direct summation over index tuples with pairwise distinct |j_k|.
pub fn nlevel_direct(phases: &Eigenphases, fs: &[TestFn], g: usize) -> f64 {
    let n = fs.len();
    let th = phases.thetas();
    if n == 0 {
        return 1.0;
    }
    if th.len() < n {
        return 0.0;
    }
    let vals: Vec<Vec<f64>> = fs.iter().map(|f| th.iter().map(|&t| periodized(f, g, t)).collect()).collect();
    fn rec(k: usize, used: &mut Vec<bool>, vals: &[Vec<f64>]) -> f64 {
        if k == vals.len() {
            return 1.0;
        }
        let mut s = 0.0;
        for j in 0..used.len() {
            if !used[j] && vals[k][j] != 0.0 {
                used[j] = true;
                s += vals[k][j] * rec(k + 1, used, vals);
                used[j] = false;
            }
        }
        s
    }
    let mut used = vec![false; th.len()];
    2f64.powi(n as i32) * rec(0, &mut used, &vals)
}

/// W⁽ⁿ⁾ through the partition sieve, each block's unrestricted zero sum taken from traces.
pub fn nlevel_sieved(traces: &TraceSeq, fs: &[TestFn]) -> Result<f64> {
    let refs: Vec<&TestFn> = fs.iter().collect();
    check_supports(&refs, SUPPORT_LIMIT)?;
    nlevel_sieved_unchecked(traces, fs)
}

/// As [`nlevel_sieved`] without the Σ s_k < 2 restriction (random-matrix side).
pub fn nlevel_sieved_unchecked(traces: &TraceSeq, fs: &[TestFn]) -> Result<f64> {
    let n = fs.len();
    if n == 0 {
        return Ok(1.0);
    }
    let g = traces.genus();
    let mut block_sums = std::collections::HashMap::new();
    let mut total = 0.0;
    for p in partitions(n)? {
        let nu = p.num_blocks();
        let mut w = (-2f64).powi((n - nu) as i32);
        let mut prod = 1.0;
        for (b, mask) in p.blocks().iter().zip(p.block_masks()) {
            w *= (1..b.len()).product::<usize>() as f64;
            let v = match block_sums.get(&mask) {
                Some(v) => *v,
                None => {
                    let members: Vec<&TestFn> = b.iter().map(|&k| &fs[k]).collect();
                    let v = zero_sum(&lattice_transform(&members, g), traces)?;
                    block_sums.insert(mask, v);
                    v
                }
            };
            prod *= v;
        }
        total += w * prod;
    }
    Ok(total)
}

/// Trace depth needed by [`nlevel_sieved`] for these test functions.
pub fn sieve_depth(fs: &[TestFn], g: usize) -> usize {
    r_needed(fs.iter().map(|f| f.support()).sum(), g)
}

/// ⟨W⁽ⁿ⁾⟩ over the ensemble, traces from the prime-table engine.
pub fn avg_nlevel(spec: &EnsembleSpec, fs: &[TestFn], chunk: usize, budget: Budget) -> Result<AvgResult> {
    let refs: Vec<&TestFn> = fs.iter().collect();
    check_supports(&refs, SUPPORT_LIMIT)?;
    spec.validate(budget)?;
    let engine = TraceEngine::new(spec.field, spec.g, budget)?;
    let depth = sieve_depth(fs, spec.g).max(1);
    average(spec, chunk, budget, |h| {
        let t = engine.traces(h, depth)?;
        nlevel_sieved(&TraceSeq::from_scaled(&t), fs)
    })
}

/// T(f; h) = (1/g) Σ_r r q^{−r/2} f̂(r/2g) Σ_{deg P = r} (h/P): the primes-only part of the explicit formula.
pub fn diag_t(h: &MonicPoly, tf: &TestFn, g: usize, budget: Budget) -> Result<f64> {
    let field = h.field();
    let q = field.q() as f64;
    let two_g = 2.0 * g as f64;
    let mut s = 0.0;
    for r in 1..=r_needed(tf.support(), g) {
        let w = tf.eval_fhat(r as f64 / two_g);
        if w == 0.0 {
            continue;
        }
        let p_sum: i64 = primes_of_degree(r, field, budget)?.iter().map(|p| jacobi(h.as_poly(), p) as i64).sum();
        s += r as f64 * q.powf(-(r as f64) / 2.0) * w * p_sum as f64;
    }
    Ok(s / g as f64)
}

/// Eigenphases from arbitrary angles, folded into [0, π].
pub fn phases_from_angles(thetas: Vec<f64>) -> Eigenphases {
    Eigenphases::from_thetas(thetas.into_iter().map(|t| t.rem_euclid(2.0 * PI)).map(|t| if t > PI { 2.0 * PI - t } else { t }).collect(), 0.0)
}
