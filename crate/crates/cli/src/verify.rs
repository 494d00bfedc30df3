//! `verify`: one suite per library module, each check one listed invariant of that module.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::Instant;

use hyperell_core::budget::Budget;
use hyperell_core::charsum::{avg_p_exact, avg_p_predicted, s_brute, s_via_l_coeffs, PredictionCase};
use hyperell_core::combinat::{
    partition_mobius, partitions, phi_cap, phi_cap_subset_form, refines, sigma_sum, sigma_sum_brute, DegreeVector,
    SetPartition,
};
use hyperell_core::ensemble::{
    avg_char, draw_seed, enum_h, linear_stat, nlevel_direct, nlevel_sieved, phases_from_angles, r_needed,
    EnsembleSpec, TraceSeq,
};
use hyperell_core::ffq::{is_square, is_squarefree, jacobi, monic_polys, prime_count, primes_of_degree};
use hyperell_core::gao::{a_one_closed_form, a_value, b_value, d_value, FnSet};
use hyperell_core::lfun::{eigenphases, l_coeffs, l_coeffs_all, scaled_traces, star_reduce, traces_from_star, LPolynomial};
use hyperell_core::quad::{breakpoints, GaussLegendre};
use hyperell_core::rmt::{haar_usp, kernel_det, kernel_integral, kernel_k, nlevel_rmt_empirical, KernelSpec};
use hyperell_core::testfn::{product_at_zero, product_transform, GridParams, TestFn};
use hyperell_core::{Error, FieldOrder, MonicPoly, Poly, Result};
use num_bigint::BigInt;

use crate::commands::Outcome;
use crate::config::{parse_config, Command, RunConfig, Settings};
use crate::record::{write_atomic, HEADER};

type Check = (&'static str, fn(Budget) -> Result<usize>);

fn f(q: u64) -> FieldOrder {
    FieldOrder::new(q).expect("odd prime")
}

fn identity(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Identity(msg()))
    }
}

fn accuracy(what: &str, err: f64, target: f64) -> Result<()> {
    if err <= target {
        Ok(())
    } else {
        Err(Error::Accuracy { what: what.into(), target, estimate: err })
    }
}

/// Deterministic pseudo-random stream from the per-draw seed mixer.
struct Stream(u64, u64);

impl Stream {
    fn new(seed: u64) -> Self {
        Stream(seed, 0)
    }

    fn next(&mut self) -> u64 {
        self.1 += 1;
        draw_seed(self.0, self.1)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    fn unit(&mut self) -> f64 {
        (self.next() >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub fn suite(name: &str) -> &'static [Check] {
    match name {
        "ffq" => &[
            ("multiplicativity (random triples)", ffq_multiplicative),
            ("Euler criterion, q ∈ {3,5}, deg P ≤ 3", ffq_euler),
            ("reciprocity sign, q = 3 and 5", ffq_reciprocity),
            ("Σ_{d|r} d·π_q(d) = q^r, r ≤ 12", ffq_necklace),
            ("squarefree count, q = 3, d ≤ 8", ffq_squarefree),
        ],
        "lfun" => &[
            ("functional equation, q ∈ {3,5}, deg D ≤ 7", lfun_fe),
            ("Newton = prime-power traces, H(5,3) ∪ H(7,3)", lfun_traces),
            ("RH within 1e-8, H(5,3) ∪ H(7,3)", lfun_rh),
            ("Weil bound, q = 3, deg B ≤ 5, r ≤ 5", lfun_weil),
        ],
        "ensemble" => &[
            ("|H(2g+1,q)| = (q−1)q^{2g}", ens_sizes),
            ("Möbius averaging identity, deg f ≤ 4", ens_avg_char),
            ("sieved = direct, 100 fixtures", ens_sieve),
            ("linear statistic on H(5,3)", ens_linear),
        ],
        "combinat" => &[
            ("Möbius inversion round trip, n ≤ 6", comb_inversion),
            ("σ bound for α ≥ Σr, 1000 inputs", comb_sigma_bound),
            ("σ zero window", comb_zero_window),
            ("Φ_β two forms, 2000 inputs", comb_phi),
            ("σ = coprime Möbius enumeration", comb_sigma_brute),
        ],
        "charsum" => &[
            ("reciprocity form of S(β; r)", cs_reciprocity),
            ("⟨P(r)⟩ approaches the prediction in q", cs_trend),
            ("S(β; r) permutation symmetry", cs_symmetry),
        ],
        "testfn" => &[
            ("Parseval", tf_parseval),
            ("convolution associativity", tf_assoc),
            ("support certificate", tf_support),
            ("positivity", tf_positivity),
        ],
        "gao" => &[
            ("n = 1 closed form, 20 supports", gao_one),
            ("multilinearity, n = 2", gao_linear),
            ("permutation symmetry", gao_sym),
            ("B/D consistency, m = 2", gao_bd),
        ],
        "rmt" => &[
            ("sampler moments, g = 3", rmt_moments),
            ("empirical vs kernel, g = 30", rmt_empirical),
            ("det K symmetry", rmt_det_symmetry),
            ("W⁽¹⁾ range", rmt_w1),
        ],
        "cli" => &[
            ("deterministic CSV", cli_determinism),
            ("atomic output", cli_atomic),
            ("config examples", cli_config),
        ],
        _ => &[],
    }
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let mut lines = vec![format!("{:<10} {:<46} {:>8} {:>9}  status", "suite", "check", "items", "time_ms")];
    let mut first_error = None;
    let (mut passed, mut total) = (0, 0);
    for name in &cfg.suites {
        for (label, check) in suite(name) {
            total += 1;
            let t = Instant::now();
            let result = check(cfg.budget);
            let ms = t.elapsed().as_millis();
            let (items, status) = match &result {
                Ok(k) => {
                    passed += 1;
                    (k.to_string(), "ok".to_string())
                }
                Err(e) => ("-".to_string(), format!("FAIL ({e})")),
            };
            lines.push(format!("{name:<10} {label:<46} {items:>8} {ms:>9}  {status}"));
            if let (Err(e), None) = (result, &first_error) {
                first_error = Some(e);
            }
        }
    }
    lines.push(format!("{passed} of {total} checks passed"));
    Outcome { text: lines.join("\n") + "\n", error: first_error }
}

// ffq

fn random_poly(s: &mut Stream, fq: FieldOrder, max_deg: usize) -> Poly {
    let d = s.below(max_deg as u64 + 1) as usize;
    Poly::new(fq, (0..=d).map(|_| s.below(fq.q())).collect())
}

fn random_monic(s: &mut Stream, fq: FieldOrder, lo: usize, hi: usize) -> MonicPoly {
    let d = lo + s.below((hi - lo + 1) as u64) as usize;
    MonicPoly::from_index(fq, d, s.below(fq.q().pow(d as u32)))
}

fn ffq_multiplicative(_: Budget) -> Result<usize> {
    let mut s = Stream::new(0x6d75_6c74);
    for i in 0..400 {
        let fq = f([3, 5, 7][i % 3]);
        let (b1, b2) = (random_poly(&mut s, fq, 6), random_poly(&mut s, fq, 6));
        let (a1, a2) = (random_monic(&mut s, fq, 1, 5), random_monic(&mut s, fq, 1, 5));
        let lhs = jacobi(&b1.mul(&b2)?, &a1);
        identity(lhs == jacobi(&b1, &a1) * jacobi(&b2, &a1), || format!("({b1}·{b2} / {a1})"))?;
        let lhs = jacobi(&b1, &a1.mul(&a2)?);
        identity(lhs == jacobi(&b1, &a1) * jacobi(&b1, &a2), || format!("({b1} / {a1}·{a2})"))?;
    }
    Ok(800)
}

fn ffq_euler(budget: Budget) -> Result<usize> {
    let mut k = 0;
    for q in [3u64, 5] {
        let fq = f(q);
        for d in 1..=3 {
            for p in primes_of_degree(d, fq, budget)? {
                let e = (q.pow(d as u32) - 1) / 2;
                for index in 1..q.pow(d as u32) {
                    let digits: Vec<u64> = (0..d).map(|i| index / q.pow(i as u32) % q).collect();
                    let b = Poly::new(fq, digits);
                    let r = b.pow_mod(e, &p)?;
                    let euler = if r.degree() == Some(0) && r.coeff(0) == 1 { 1 } else { -1 };
                    identity(jacobi(&b, &p) == euler, || format!("({b} / {p}) against Euler's criterion"))?;
                    k += 1;
                }
            }
        }
    }
    Ok(k)
}

fn ffq_reciprocity(_: Budget) -> Result<usize> {
    let mut k = 0;
    for q in [3u64, 5] {
        let fq = f(q);
        for da in 1..=3 {
            for db in 1..=3 {
                for a in monic_polys(fq, da) {
                    for b in monic_polys(fq, db) {
                        let ab = jacobi(b.as_poly(), &a);
                        if ab == 0 {
                            continue;
                        }
                        let flip = (q - 1) / 2 * (da * db) as u64 % 2 == 1;
                        let ba = jacobi(a.as_poly(), &b);
                        identity(ab == if flip { -ba } else { ba }, || format!("reciprocity for {a}, {b}"))?;
                        k += 1;
                    }
                }
            }
        }
    }
    Ok(k)
}

fn ffq_necklace(_: Budget) -> Result<usize> {
    for q in [3u64, 5, 7] {
        for r in 1..=12usize {
            let s: BigInt = (1..=r).filter(|d| r % d == 0).map(|d| BigInt::from(d) * prime_count(d, f(q))).sum();
            identity(s == BigInt::from(q).pow(r as u32), || format!("q={q} r={r}: {s}"))?;
        }
    }
    Ok(36)
}

fn ffq_squarefree(_: Budget) -> Result<usize> {
    for d in 2..=8usize {
        let n = monic_polys(f(3), d).filter(is_squarefree).count() as u64;
        identity(n == 3u64.pow(d as u32) - 3u64.pow(d as u32 - 1), || format!("degree {d}: {n}"))?;
    }
    Ok(7)
}

// lfun

fn lfun_fe(budget: Budget) -> Result<usize> {
    let mut k = 0;
    for q in [3u64, 5] {
        let fq = f(q);
        for n in 2..=7 {
            let rows = l_coeffs_all(fq, n, budget)?;
            for (i, row) in rows.chunks(n).enumerate() {
                let d = MonicPoly::from_index(fq, n, i as u64);
                if is_squarefree(&d) {
                    star_reduce(&LPolynomial::from_parts(d, row.to_vec())?)?;
                    k += 1;
                }
            }
        }
    }
    Ok(k)
}

fn small_curves() -> Vec<MonicPoly> {
    [5, 7].iter().flat_map(|&n| monic_polys(f(3), n).filter(is_squarefree)).collect()
}

fn lfun_traces(budget: Budget) -> Result<usize> {
    let hs = small_curves();
    for h in &hs {
        let sd = star_reduce(&l_coeffs(h, budget)?)?;
        let r_max = 2 * sd.delta();
        let a = scaled_traces(h, r_max, budget)?;
        identity(a.values() == traces_from_star(&sd, r_max).values(), || format!("traces of {h}"))?;
    }
    Ok(hs.len())
}

fn lfun_rh(budget: Budget) -> Result<usize> {
    let hs = small_curves();
    for h in &hs {
        let ph = eigenphases(&star_reduce(&l_coeffs(h, budget)?)?)?;
        if ph.residual() > 1e-8 {
            return Err(Error::UnitModulus { residual: ph.residual() });
        }
    }
    Ok(hs.len())
}

fn lfun_weil(budget: Budget) -> Result<usize> {
    let fq = f(3);
    let primes: Vec<_> = (1..=5).map(|r| primes_of_degree(r, fq, budget)).collect::<Result<_>>()?;
    let mut k = 0;
    for deg in 1..=5 {
        for b in monic_polys(fq, deg).filter(|b| !is_square(b)) {
            for (i, ps) in primes.iter().enumerate() {
                let r = i + 1;
                let s: i64 = ps.iter().map(|p| jacobi(b.as_poly(), p) as i64).sum();
                let bound = 3f64.powf(r as f64 / 2.0) * (deg as f64 / r as f64 + 1.0);
                identity(s.abs() as f64 <= bound, || format!("|Σ (B/P)| = {} for B = {b}, r = {r}", s.abs()))?;
                k += 1;
            }
        }
    }
    Ok(k)
}

// ensemble

fn ens_sizes(budget: Budget) -> Result<usize> {
    let mut k = 0;
    for q in [3u64, 5, 7] {
        for g in 1..=2usize {
            let spec = EnsembleSpec::exhaustive(f(q), g);
            let count = enum_h(&spec, budget)?.count() as u64;
            identity(count == (q - 1) * q.pow(2 * g as u32), || format!("|H({}, {q})| = {count}", 2 * g + 1))?;
            k += 1;
        }
    }
    Ok(k)
}

fn ens_avg_char(budget: Budget) -> Result<usize> {
    let mut k = 0;
    for g in 1..=2 {
        let spec = EnsembleSpec::exhaustive(f(3), g);
        for d in 0..=4 {
            for m in monic_polys(f(3), d) {
                avg_char(&m, &spec, budget)?;
                k += 1;
            }
        }
    }
    Ok(k)
}

fn random_fns(s: &mut Stream, n: usize) -> Result<Vec<TestFn>> {
    let mut left = 1.95;
    (0..n)
        .map(|k| {
            let room = left / (n - k) as f64;
            let width = 0.05 + (room - 0.05).max(0.0) * s.unit();
            left -= width;
            if s.below(2) == 0 {
                TestFn::triangle(width)
            } else {
                TestFn::sinc4(width)
            }
        })
        .collect()
}

fn ens_sieve(_: Budget) -> Result<usize> {
    let mut s = Stream::new(0x7369_6576);
    for _ in 0..100 {
        let g = 1 + s.below(8) as usize;
        let n = 1 + s.below(4) as usize;
        let thetas: Vec<f64> = (0..g).map(|_| PI * s.unit()).collect();
        let fs = random_fns(&mut s, n)?;
        let ph = phases_from_angles(thetas);
        let direct = nlevel_direct(&ph, &fs, g);
        let sieved = nlevel_sieved(&TraceSeq::from_phases(&ph, 4 * g), &fs)?;
        accuracy("sieved vs direct n-level sum", (direct - sieved).abs(), 1e-10)?;
    }
    Ok(100)
}

fn ens_linear(budget: Budget) -> Result<usize> {
    let tf = TestFn::triangle(1.7)?;
    let hs: Vec<MonicPoly> = monic_polys(f(3), 5).filter(is_squarefree).collect();
    for h in &hs {
        let ph = eigenphases(&star_reduce(&l_coeffs(h, budget)?)?)?;
        let t = scaled_traces(h, r_needed(tf.support(), 2), budget)?;
        let direct = nlevel_direct(&ph, std::slice::from_ref(&tf), 2);
        accuracy("linear statistic vs periodization", (linear_stat(&t, &tf)? - direct).abs(), 1e-9)?;
    }
    Ok(hs.len())
}

// combinat

fn comb_inversion(_: Budget) -> Result<usize> {
    let mut s = Stream::new(0x696e_7672);
    let mut k = 0;
    for n in 1..=6 {
        let parts = partitions(n)?;
        for _ in 0..5 {
            let r: HashMap<SetPartition, i64> = parts.iter().map(|p| (*p, s.below(201) as i64 - 100)).collect();
            let c: HashMap<SetPartition, i64> =
                parts.iter().map(|a| (*a, parts.iter().filter(|b| refines(a, b)).map(|b| r[b]).sum())).collect();
            let back: i64 = parts.iter().map(|p| partition_mobius(p) * c[p]).sum();
            identity(back == r[&SetPartition::finest(n)?], || format!("inversion failed at n = {n}"))?;
            k += 1;
        }
    }
    Ok(k)
}

fn comb_sigma_bound(_: Budget) -> Result<usize> {
    let mut s = Stream::new(0x7369_676d);
    let mut k = 0;
    while k < 1000 {
        let n = 1 + s.below(4) as usize;
        let r: Vec<usize> = (0..n).map(|_| 1 + s.below(6) as usize).collect();
        let q = [3u64, 5, 7, 11][s.below(4) as usize];
        // Below Σr the bound has counterexamples, e.g. r = (4,3,1,6), α = 2, q = 7 gives σ = −6.
        let alpha = r.iter().sum::<usize>() + s.below(12) as usize;
        let sig = sigma_sum(&DegreeVector::new(r.clone())?, alpha, q);
        let bound = (q + 1) as f64 * (alpha as f64).powi(n as i32) / r.iter().product::<usize>() as f64;
        let v: f64 = sig.to_string().parse().unwrap_or(f64::INFINITY);
        identity(v.abs() <= bound, || format!("|σ({r:?}; {alpha})| = {sig} above {bound} (q = {q})"))?;
        k += 1;
    }
    Ok(k)
}

fn comb_zero_window(_: Budget) -> Result<usize> {
    let mut k = 0;
    for q in [3u64, 5] {
        for n in 1..=4u32 {
            for code in 0..6usize.pow(n) {
                let r: Vec<usize> = (0..n).map(|i| 1 + code / 6usize.pow(i) % 6).collect();
                let min = *r.iter().min().unwrap();
                if min < 2 {
                    continue;
                }
                let dv = DegreeVector::new(r.clone())?;
                for alpha in 2..min {
                    let v = sigma_sum(&dv, alpha, q);
                    identity(v == BigInt::from(0), || format!("σ({r:?}; {alpha}) = {v}, q = {q}"))?;
                    k += 1;
                }
            }
        }
    }
    Ok(k)
}

fn comb_phi(_: Budget) -> Result<usize> {
    let mut s = Stream::new(0x7068_6931);
    let mut k = 0;
    while k < 2000 {
        let n = 1 + s.below(4) as usize;
        let r: Vec<usize> = (0..n).map(|_| 1 + s.below(6) as usize).collect();
        let total: usize = r.iter().sum();
        if total % 2 == 1 || total < 3 {
            continue;
        }
        let beta = 2 * s.below(((total - 1) / 2) as u64) as usize + 1;
        let q = [3u64, 5, 7, 9, 11][s.below(5) as usize];
        let dv = DegreeVector::new(r.clone())?;
        let x = phi_cap(&dv, beta, q)?;
        let y = phi_cap_subset_form(&dv, beta)?;
        identity(x.is_integer() && *x.numer() == y, || format!("Φ_{beta}({r:?}), q={q}: {x} vs {y}"))?;
        k += 1;
    }
    Ok(k)
}

fn comb_sigma_brute(budget: Budget) -> Result<usize> {
    let mut k = 0;
    for n in 1..=3u32 {
        for code in 0..3usize.pow(n) {
            let r: Vec<usize> = (0..n).map(|i| 1 + code / 3usize.pow(i) % 3).collect();
            let dv = DegreeVector::new(r.clone())?;
            for alpha in 0..=6 {
                let a = sigma_sum(&dv, alpha, 3);
                let b = sigma_sum_brute(&dv, alpha, f(3), budget)?;
                identity(a == b, || format!("σ({r:?}; {alpha}): {a} vs {b}"))?;
                k += 1;
            }
        }
    }
    Ok(k)
}

// charsum

fn degree_vectors(max_total: usize, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..max_len {
        frontier = frontier
            .into_iter()
            .flat_map(|v| {
                let used: usize = v.iter().sum();
                (1..=max_total.saturating_sub(used)).map(move |x| [v.clone(), vec![x]].concat())
            })
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

fn cs_reciprocity(budget: Budget) -> Result<usize> {
    let mut k = 0;
    for (q, max_total) in [(3u64, 6usize), (5, 4)] {
        for r in degree_vectors(max_total, 3) {
            let dv = DegreeVector::new(r.clone())?;
            for beta in 0..=dv.total() {
                let a = s_brute(beta, &dv, f(q), budget)?;
                let b = s_via_l_coeffs(beta, &dv, f(q), budget)?;
                identity(a == b, || format!("S({beta}; {r:?}), q = {q}: {a} vs {b}"))?;
                k += 1;
            }
        }
    }
    Ok(k)
}

fn cs_trend(budget: Budget) -> Result<usize> {
    let mut k = 0;
    for (g, r) in [(2usize, vec![1usize]), (2, vec![2]), (2, vec![1, 2]), (1, vec![3])] {
        let dv = DegreeVector::new(r.clone())?;
        let pred = avg_p_predicted(&dv, g, 0.05)?;
        identity(pred.case != PredictionCase::Exceptional, || format!("{r:?} is exceptional at g = {g}"))?;
        let main = pred.main.map(|m| m.to_string().parse::<f64>().unwrap_or(f64::NAN)).unwrap_or(0.0);
        let mut gaps = Vec::new();
        for q in [3u64, 5, 7] {
            let rep = avg_p_exact(&dv, f(q), g, budget)?;
            gaps.push((rep.lhs.to_f64(q) - main).abs());
        }
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
        accuracy(&format!("⟨P({r:?})⟩ at g = {g}, q = 7 (gaps {gaps:?})"), if monotone { 0.0 } else { gaps[2] }, 0.2)?;
        k += 1;
    }
    Ok(k)
}

fn cs_symmetry(budget: Budget) -> Result<usize> {
    let mut k = 0;
    for r in degree_vectors(5, 3) {
        let mut rev = r.clone();
        rev.reverse();
        rev.rotate_left(1);
        if rev == r {
            continue;
        }
        let (a, b) = (DegreeVector::new(r.clone())?, DegreeVector::new(rev.clone())?);
        for beta in 0..=a.total() {
            let (x, y) = (s_brute(beta, &a, f(3), budget)?, s_brute(beta, &b, f(3), budget)?);
            identity(x == y, || format!("S({beta}; {r:?}) = {x}, S({beta}; {rev:?}) = {y}"))?;
            k += 1;
        }
    }
    Ok(k)
}

// testfn

fn tf_parseval(_: Budget) -> Result<usize> {
    let gl = GaussLegendre::new(12);
    for s in [0.5, 1.0, 1.5] {
        for tf in [TestFn::triangle(s)?, TestFn::sinc4(s)?] {
            let fhat2 = 2.0 * gl.integrate_panels(&breakpoints(tf.knots(), 0.0, s), |u| tf.eval_fhat(u).powi(2));
            let f2 = product_at_zero(&[&tf, &tf]);
            accuracy("Parseval", (f2.value - fhat2).abs(), 1e-8)?;
        }
    }
    Ok(6)
}

fn tf_assoc(_: Budget) -> Result<usize> {
    let (a, b, c) = (TestFn::sinc4(0.6)?, TestFn::triangle(0.5)?, TestFn::sinc4(0.4)?);
    let abc = product_transform(&[&a, &b, &c], GridParams::default())?;
    let cab = product_transform(&[&c, &a, &b], GridParams::default())?;
    let tol = 2.0 * (abc.error() + cab.error()) + 1e-14;
    for k in 0..60 {
        let t = k as f64 * 0.025;
        accuracy("grid-order independence", (abc.value(t) - cab.value(t)).abs(), tol)?;
    }
    Ok(60)
}

fn tf_support(_: Budget) -> Result<usize> {
    let (a, b) = (TestFn::sinc4(0.7)?, TestFn::triangle(0.45)?);
    let ab = product_transform(&[&a, &b], GridParams::default())?;
    let mut k = 0;
    for (i, v) in ab.values().iter().enumerate() {
        if i as f64 * ab.spacing() >= 1.15 {
            accuracy("Û outside the support", v.abs(), 1e-12)?;
            k += 1;
        }
    }
    Ok(k)
}

fn tf_positivity(_: Budget) -> Result<usize> {
    let mut k = 0;
    for tf in [TestFn::triangle(0.9)?, TestFn::sinc4(1.4)?] {
        for i in -400..=400 {
            let x = i as f64 * 0.031;
            identity(tf.eval_f(x) >= 0.0 && tf.eval_fhat(x / 50.0) >= 0.0, || format!("{tf} negative near {x}"))?;
            k += 1;
        }
    }
    Ok(k)
}

// gao

fn gao_one(_: Budget) -> Result<usize> {
    let mut s = Stream::new(0x6761_6f31);
    for _ in 0..20 {
        let w = 0.05 + 1.9 * s.unit();
        let tf = if s.below(2) == 0 { TestFn::triangle(w)? } else { TestFn::sinc4(w)? };
        let a = a_value(&FnSet::new(vec![tf.clone()])?)?;
        accuracy("A(f) against the n = 1 closed form", (a.value - a_one_closed_form(&tf)).abs(), 1e-8)?;
    }
    Ok(20)
}

fn gao_linear(_: Budget) -> Result<usize> {
    let (x, y, z) = (TestFn::sinc4(0.7)?, TestFn::triangle(0.6)?, TestFn::sinc4(0.5)?);
    let (al, be) = (1.5, -0.75);
    let mix = x.scaled(al).plus(&y.scaled(be));
    let a = |p: &TestFn| a_value(&FnSet::new(vec![p.clone(), z.clone()])?);
    let (lhs, ax, ay) = (a(&mix)?, a(&x)?, a(&y)?);
    let rhs = al * ax.value + be * ay.value;
    let tol = lhs.error + al.abs() * ax.error + be.abs() * ay.error + 1e-12;
    accuracy("multilinearity", (lhs.value - rhs).abs(), tol)?;
    Ok(1)
}

fn gao_sym(_: Budget) -> Result<usize> {
    let fs = vec![TestFn::sinc4(0.5)?, TestFn::triangle(0.4)?, TestFn::sinc4(0.3)?];
    let base = a_value(&FnSet::new(fs.clone())?)?.value;
    for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
        let p: Vec<TestFn> = perm.iter().map(|&i| fs[i].clone()).collect();
        accuracy("A(f) permutation symmetry", (a_value(&FnSet::new(p)?)?.value - base).abs(), 1e-9)?;
    }
    Ok(3)
}

fn gao_bd(_: Budget) -> Result<usize> {
    // For m = 2, B = 2^{2/2}·(pair of blocks 1,2) + D, with the pair integral 2∫|t|Û₁Û₂ dt.
    let (x, y) = (TestFn::triangle(0.9)?, TestFn::sinc4(0.8)?);
    let set = FnSet::new(vec![x.clone(), y.clone()])?;
    let (b, d) = (b_value(&set)?, d_value(&set)?);
    let g = GaussLegendre::new(12);
    let mut k = x.knots();
    k.extend(y.knots());
    let pair = 2.0 * g.integrate_panels(&breakpoints(k, 0.0, 0.8), |t| t * x.eval_fhat(t) * y.eval_fhat(t));
    accuracy("B − pairing term − D", (b.value - 2.0 * pair - d.value).abs(), 1e-12 + b.error + d.error)?;
    Ok(1)
}

// rmt

fn rmt_moments(_: Budget) -> Result<usize> {
    let n = 100_000u64;
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let u = haar_usp(3, draw_seed(0x6d6f_6d73, i))?;
            Ok((u.trace_power(1).re, u.trace_power(2).re))
        })
        .collect::<Result<_>>()?;
    for (k, target) in [(1, 0.0), (2, -1.0)] {
        let xs: Vec<f64> = samples.iter().map(|p| if k == 1 { p.0 } else { p.1 }).collect();
        let (m, se) = hyperell_core::quad::mean_stderr(&xs);
        accuracy(&format!("E tr U^{k} within 3σ"), (m - target).abs(), 3.0 * se)?;
    }
    Ok(n as usize)
}

fn rmt_empirical(_: Budget) -> Result<usize> {
    let tf = TestFn::triangle(1.0)?;
    let r = nlevel_rmt_empirical(std::slice::from_ref(&tf), 30, 20_000, 0x656d_7031)?;
    let k = kernel_integral(std::slice::from_ref(&tf), &KernelSpec::new(1))?;
    accuracy("USp(60) mean vs kernel", (r.mean - k.value).abs(), 3.0 * r.stderr + 0.02)?;
    Ok(20_000)
}

fn rmt_det_symmetry(_: Budget) -> Result<usize> {
    let mut s = Stream::new(0x6465_7473);
    for _ in 0..200 {
        let n = 2 + s.below(4) as usize;
        let xs: Vec<f64> = (0..n).map(|_| 6.0 * s.unit() - 3.0).collect();
        let base = kernel_det(&xs);
        let mut flipped = xs.clone();
        let i = s.below(n as u64) as usize;
        flipped[i] = -flipped[i];
        let mut swapped = xs.clone();
        swapped.swap(0, n - 1);
        let tol = 1e-12 * (1.0 + base.abs());
        accuracy("det K under a sign flip", (kernel_det(&flipped) - base).abs(), tol)?;
        accuracy("det K under a transposition", (kernel_det(&swapped) - base).abs(), tol)?;
    }
    Ok(200)
}

fn rmt_w1(_: Budget) -> Result<usize> {
    identity(kernel_k(0.0, 0.0) == 0.0, || "W⁽¹⁾(0) ≠ 0".into())?;
    for i in 0..=4000 {
        let x = i as f64 * 0.005;
        let w = kernel_k(x, x);
        identity((0.0..=1.0 + 1.0 / PI).contains(&w), || format!("W⁽¹⁾({x}) = {w}"))?;
    }
    Ok(4001)
}

// cli

fn strip_runtime(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            if cols.len() > 9 {
                cols[9] = "";
            }
            cols.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn small_run(budget: Budget) -> Result<RunConfig> {
    let mut flags = Settings::default();
    for (k, v) in [("q", "3,5"), ("g", "2"), ("mode", "sampled"), ("samples", "300"), ("seed", "42")] {
        flags.set(k, v).map_err(Error::Domain)?;
    }
    flags.budget = Some(budget.ops());
    RunConfig::resolve(Command::AvgNlevel, &Default::default(), &flags, None)
}

fn cli_determinism(budget: Budget) -> Result<usize> {
    let cfg = small_run(budget)?;
    let (a, b) = (crate::commands::run(&cfg), crate::commands::run(&cfg));
    if let Some(e) = a.error.or(b.error) {
        return Err(e);
    }
    identity(a.text.starts_with(HEADER), || "CSV header".into())?;
    identity(strip_runtime(&a.text) == strip_runtime(&b.text), || "repeated runs differ".into())?;
    Ok(2)
}

fn cli_atomic(_: Budget) -> Result<usize> {
    let io = |e: std::io::Error| Error::Domain(e.to_string());
    let dir = std::env::temp_dir().join(format!("hyperell-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(io)?;
    let path = dir.join("out.csv");
    write_atomic(&path, "first\n").map_err(io)?;
    write_atomic(&path, "second\n").map_err(io)?;
    let text = std::fs::read_to_string(&path).map_err(io)?;
    let leftovers = std::fs::read_dir(&dir).map_err(io)?.count();
    std::fs::remove_dir_all(&dir).map_err(io)?;
    identity(text == "second\n" && leftovers == 1, || "temporary file left behind or content torn".into())?;
    Ok(1)
}

fn cli_config(_: Budget) -> Result<usize> {
    let c = RunConfig::resolve(
        Command::AvgNlevel,
        &parse_config("q = 3,5\ng = 1,2\ntf = triangle:s=1.0")?,
        &Settings::default(),
        None,
    )?;
    identity(c.sweep().len() == 4, || "2×2 sweep".into())?;
    identity(parse_config("tf = triangle:s=2.5").is_err(), || "support 2.5 accepted".into())?;
    identity(parse_config("colour = red").is_err(), || "unknown key accepted".into())?;
    Ok(3)
}
