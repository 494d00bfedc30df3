//! Acceptance checks, one PASS/FAIL line each. Oracles live in this file unless noted.

use std::f64::consts::PI;
use std::time::Instant;

use hyperell_core::charsum::{all_dualities, avg_p_exact};
use hyperell_core::combinat::{phi_cap, phi_cap_subset_form, phi_delta, sigma_sum, DegreeVector};
use hyperell_core::ensemble::{
    avg_nlevel, draw_seed, nlevel_direct, nlevel_sieved, phases_from_angles, EnsembleSpec, TraceSeq,
};
use hyperell_core::ffq::monic_polys;
use hyperell_core::gao::{a_value, FnSet};
use hyperell_core::lfun::{
    eigenphases, l_coeffs, l_coeffs_all, scaled_traces, star_reduce, traces_from_star, LPolynomial,
};
use hyperell_core::rmt::{haar_usp, kernel_integral, kernel_one_xspace, nlevel_rmt_empirical, usp_eigenphases, KernelSpec};
use hyperell_core::testfn::TestFn;
use hyperell_core::{Budget, FieldOrder, MonicPoly, Poly};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn field(q: u64) -> FieldOrder {
    FieldOrder::new(q).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------
// 1. Functional equation

fn c1() -> Outcome {
    let budget = Budget::unlimited();
    let mut checked = 0usize;
    for q in [3u64, 5] {
        let f = field(q);
        for n in 2..=7usize {
            let rows = l_coeffs_all(f, n, budget).map_err(err)?;
            for (i, row) in rows.chunks(n).enumerate() {
                let d = MonicPoly::from_index(f, n, i as u64);
                if !own_squarefree(&d) || own_is_square(&d) {
                    continue;
                }
                let lp = LPolynomial::from_parts(d.clone(), row.to_vec()).map_err(err)?;
                let sd = star_reduce(&lp).map_err(err)?;
                own_fe(q as i128, sd.star()).map_err(|b| format!("q={q} D={d}: β={b}"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} characters"))
}

fn own_fe(q: i128, star: &[i64]) -> Result<(), usize> {
    let two_delta = star.len() - 1;
    let delta = two_delta / 2;
    if star[0] != 1 || two_delta % 2 != 0 {
        return Err(0);
    }
    for beta in 0..=two_delta {
        let lhs = star[beta] as i128 * q.pow(delta as u32);
        let rhs = q.pow(beta as u32) * star[two_delta - beta] as i128;
        if lhs != rhs {
            return Err(beta);
        }
    }
    Ok(())
}

fn own_squarefree(d: &MonicPoly) -> bool {
    let p = d.as_poly();
    let g = p.gcd(&p.derivative()).unwrap();
    // Over F_q a zero derivative means a p-th power.
    !p.derivative().is_zero() && g.degree() == Some(0) || d.degree() == 0
}

fn own_is_square(d: &MonicPoly) -> bool {
    let n = d.degree();
    if n % 2 == 1 {
        return false;
    }
    monic_polys(d.field(), n / 2).any(|s| s.mul(&s).unwrap() == *d)
}

// ---------------------------------------------------------------------------
// 2 and 3. Riemann hypothesis and explicit formula

fn curves(q: u64, degrees: &[usize]) -> Vec<MonicPoly> {
    degrees
        .iter()
        .flat_map(|&n| monic_polys(field(q), n).filter(own_squarefree).collect::<Vec<_>>())
        .collect()
}

fn c2() -> Outcome {
    let budget = Budget::unlimited();
    let hs = curves(3, &[3, 5, 7]);
    let mut worst = 0.0f64;
    for h in &hs {
        let sd = star_reduce(&l_coeffs(h, budget).map_err(err)?).map_err(err)?;
        let ph = eigenphases(&sd).map_err(err)?;
        ensure(ph.residual() <= 1e-8, || format!("{h}: residual {}", ph.residual()))?;
        // Rebuild L*(u√q⁻¹) = Π (1 − 2cos θ z + z²) and compare with A*(β) q^{−β/2}.
        let mut poly = vec![1.0f64];
        for &t in ph.thetas() {
            let mut next = vec![0.0; poly.len() + 2];
            for (i, &c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= 2.0 * t.cos() * c;
                next[i + 2] += c;
            }
            poly = next;
        }
        let q = 3f64;
        ensure(poly.len() == sd.star().len(), || format!("{h}: {} phases for δ = {}", ph.thetas().len(), sd.delta()))?;
        for (beta, (&a, &p)) in sd.star().iter().zip(&poly).enumerate() {
            let dev = (a as f64 * q.powf(-(beta as f64) / 2.0) - p).abs();
            worst = worst.max(dev);
            ensure(dev <= 1e-8 * (1.0 + p.abs()), || format!("{h}: β={beta} deviation {dev:e}"))?;
        }
    }
    Ok(format!("{} curves in H(3,3) ∪ H(5,3) ∪ H(7,3), max coefficient deviation {worst:.1e}", hs.len()))
}

fn c3() -> Outcome {
    let budget = Budget::unlimited();
    let hs = curves(3, &[3, 5, 7]);
    for h in &hs {
        let sd = star_reduce(&l_coeffs(h, budget).map_err(err)?).map_err(err)?;
        let r_max = 2 * sd.delta() + 2;
        let a = scaled_traces(h, r_max, budget).map_err(err)?;
        let b = traces_from_star(&sd, r_max);
        ensure(a.values() == b.values(), || format!("{h}: {:?} vs {:?}", a.values(), b.values()))?;
    }
    Ok(format!("{} curves, r ≤ 2g + 2", hs.len()))
}

// ---------------------------------------------------------------------------
// 4. σ and Φ

/// μ(A) by trial division in increasing degree.
fn own_mobius(a: &MonicPoly) -> i32 {
    let f = a.field();
    let mut rest = a.as_poly().clone();
    let mut sign = 1;
    for d in 1..=a.degree() {
        if rest.degree() == Some(0) {
            break;
        }
        for p in monic_polys(f, d) {
            let (quo, rem) = rest.divmod(p.as_poly()).unwrap();
            if rem.is_zero() {
                if quo.divmod(p.as_poly()).unwrap().1.is_zero() {
                    return 0;
                }
                rest = quo;
                sign = -sign;
            }
        }
    }
    sign
}

fn own_irreducible(p: &MonicPoly) -> bool {
    let n = p.degree();
    n >= 1 && (1..=n / 2).all(|d| monic_polys(p.field(), d).all(|t| !p.as_poly().divmod(t.as_poly()).unwrap().1.is_zero()))
}

fn own_sigma(r: &[usize], alpha: usize, q: u64) -> i64 {
    let f = field(q);
    let mut modulus = Poly::constant(f, 1);
    let mut used: Vec<MonicPoly> = Vec::new();
    for &d in r {
        let p = monic_polys(f, d).find(|p| own_irreducible(p) && !used.contains(p)).unwrap();
        modulus = modulus.mul(p.as_poly()).unwrap();
        used.push(p);
    }
    monic_polys(f, alpha)
        .filter(|a| a.as_poly().gcd(&modulus).unwrap().degree() == Some(0))
        .map(|a| own_mobius(&a) as i64)
        .sum()
}

fn vectors(n: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|v| (lo..=hi).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

fn c4() -> Outcome {
    let mut sigma_checks = 0;
    for n in 1..=3 {
        for r in vectors(n, 1, 3) {
            let dv = DegreeVector::new(r.clone()).map_err(err)?;
            for alpha in 0..=6 {
                let got = sigma_sum(&dv, alpha, 3);
                let want = BigInt::from(own_sigma(&r, alpha, 3));
                ensure(got == want, || format!("σ({r:?}; {alpha}) = {got}, brute force {want}"))?;
                sigma_checks += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5048_4931);
    let mut phi_checks = 0;
    while phi_checks < 2000 {
        let n = rng.random_range(1..=4);
        let r: Vec<usize> = (0..n).map(|_| rng.random_range(1..=6)).collect();
        let total: usize = r.iter().sum();
        if total % 2 == 1 || total < 3 {
            continue;
        }
        let beta = 2 * rng.random_range(0..(total - 1) / 2) + 1;
        let q = [3u64, 5, 7, 9, 11][rng.random_range(0..5)];
        let dv = DegreeVector::new(r.clone()).map_err(err)?;
        let lib = phi_cap(&dv, beta, q).map_err(err)?;
        let subset = phi_cap_subset_form(&dv, beta).map_err(err)?;
        let own = own_phi(&r, beta, q);
        ensure(lib == own && subset == *own.numer() && own.is_integer(), || {
            format!("Φ_{beta}({r:?}), q={q}: {lib} / {subset} / own {own}")
        })?;
        // phi_delta is only consumed above through phi_cap; spot-check it too.
        ensure(phi_delta(&dv, 0, q).is_one(), || "φ_0 ≠ 1".into())?;
        phi_checks += 1;
    }
    Ok(format!("{sigma_checks} σ values, {phi_checks} Φ inputs"))
}

/// Φ_β from its definition with φ_δ summed over subsets directly.
fn own_phi(r: &[usize], beta: usize, q: u64) -> BigRational {
    let total: usize = r.iter().sum();
    let l_top = (total - 1 - beta) / 2;
    let qr = |e: i64| {
        let b = BigInt::from(q).pow(e.unsigned_abs() as u32);
        if e >= 0 { BigRational::from_integer(b) } else { BigRational::new(BigInt::one(), b) }
    };
    let phi = |delta: usize| {
        let mut acc = BigRational::zero();
        for mask in 0u32..(1 << r.len()) {
            let s: usize = (0..r.len()).filter(|&j| mask >> j & 1 == 1).map(|j| r[j]).sum();
            if s <= delta {
                let v = qr(-(s as i64));
                if mask.count_ones() % 2 == 0 { acc += v } else { acc -= v }
            }
        }
        acc
    };
    let mut out = -(qr(l_top as i64) * phi(l_top));
    for l in 0..l_top {
        out += BigRational::from_integer(BigInt::from(q - 1)) * qr(l as i64) * phi(l);
    }
    out
}

// ---------------------------------------------------------------------------
// 5 and 6. Character-sum dualities and the average of P

fn c5() -> Outcome {
    let budget = Budget::unlimited();
    let f = field(3);
    let mut count = 0;
    for n in 1..=3 {
        for r in vectors(n, 1, 8) {
            if r.iter().sum::<usize>() > 8 {
                continue;
            }
            let dv = DegreeVector::new(r.clone()).map_err(err)?;
            count += all_dualities(&dv, f, budget).map_err(err)?.len();
        }
    }
    Ok(format!("{count} identities"))
}

fn c6() -> Outcome {
    let budget = Budget::unlimited();
    let f = field(3);
    let mut count = 0;
    for g in 1..=2 {
        for m in 1..=2 {
            for r in vectors(m, 1, 3) {
                let dv = DegreeVector::new(r.clone()).map_err(err)?;
                let rep = avg_p_exact(&dv, f, g, budget).map_err(err)?;
                ensure(rep.equal && rep.lhs == rep.rhs, || format!("g={g} r={r:?}: {:?} vs {:?}", rep.lhs, rep.rhs))?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} (g, r) cases"))
}

// ---------------------------------------------------------------------------
// 7, 8, 9. A(f) against the kernel integral

fn a_of(fs: Vec<TestFn>) -> Result<hyperell_core::quad::Estimate, String> {
    a_value(&FnSet::new(fs).map_err(err)?).map_err(err)
}

fn c7() -> Outcome {
    let mut worst = 0.0f64;
    for s in [0.5, 1.0, 1.5, 1.9] {
        let f = TestFn::triangle(s).map_err(err)?;
        let a = a_of(vec![f.clone()])?;
        let k = kernel_integral(std::slice::from_ref(&f), &KernelSpec::new(1)).map_err(err)?;
        let x = kernel_one_xspace(&f);
        // Closed form: f̂(0) − ½∫_{−1}^{1} f̂ for f̂(u) = max(0, 1 − |u|/s).
        let closed = if s <= 1.0 { 1.0 - s / 2.0 } else { 1.0 / (2.0 * s) };
        let d = (a.value - k.value).abs();
        worst = worst.max(d);
        ensure(d <= 1e-8, || format!("s={s}: A={} kernel={}", a.value, k.value))?;
        ensure((a.value - closed).abs() <= 1e-8, || format!("s={s}: A={} closed form {closed}", a.value))?;
        ensure((x.value - closed).abs() <= 1e-6, || format!("s={s}: x-space {} closed form {closed}", x.value))?;
    }
    Ok(format!("max |A − kernel| = {worst:.1e}"))
}

fn c8() -> Outcome {
    let mut lines = Vec::new();
    for (s1, s2) in [(0.6, 0.6), (0.9, 0.9), (1.2, 0.7)] {
        let fs = vec![TestFn::sinc4(s1).map_err(err)?, TestFn::sinc4(s2).map_err(err)?];
        let a = a_of(fs.clone())?;
        let k = kernel_integral(&fs, &KernelSpec::new(2)).map_err(err)?;
        let d = (a.value - k.value).abs();
        ensure(d <= 5e-4, || format!("({s1},{s2}): A={} kernel={}", a.value, k.value))?;
        lines.push(format!("({s1},{s2}) {d:.1e}"));
    }
    Ok(lines.join(", "))
}

fn c9() -> Outcome {
    let fs = vec![TestFn::sinc4(0.6).map_err(err)?; 3];
    let a = a_of(fs.clone())?;
    let k = kernel_integral(&fs, &KernelSpec::new(3)).map_err(err)?;
    let d = (a.value - k.value).abs();
    ensure(d <= 1e-2, || format!("A={} kernel={}", a.value, k.value))?;
    Ok(format!("A = {:.6e}, kernel = {:.6e} ± {:.1e}", a.value, k.value, k.error))
}

// ---------------------------------------------------------------------------
// 10, 11. Convergence trends

fn c10() -> Outcome {
    let budget = Budget::unlimited();
    let f = TestFn::triangle(1.5).map_err(err)?;
    let target = 1.0 / 3.0;
    let mut rows = Vec::new();
    for g in [4usize, 6, 8] {
        let spec = EnsembleSpec::sampled(field(3), g, 20_000, 0x7472_656e + g as u64);
        let r = avg_nlevel(&spec, std::slice::from_ref(&f), 256, budget).map_err(err)?;
        rows.push((g, (r.mean - target).abs(), r.stderr, r.mean));
    }
    let c = rows.iter().map(|&(g, d, _, _)| d * g as f64 / (g as f64).ln()).fold(0.0, f64::max);
    let summary = rows.iter().map(|(g, d, se, m)| format!("g={g} ⟨W⟩={m:.5} d={d:.4}±{se:.4}")).collect::<Vec<_>>().join(", ");
    ensure(c <= 5.0, || format!("C = {c:.3} > 5; {summary}"))?;
    for w in rows.windows(2) {
        let (d0, s0, d1, s1) = (w[0].1, w[0].2, w[1].1, w[1].2);
        ensure(d1 <= d0 + (s0 * s0 + s1 * s1).sqrt(), || format!("discrepancy grows: {summary}"))?;
    }
    Ok(format!("C = {c:.3}; {summary}"))
}

fn c11() -> Outcome {
    let budget = Budget::unlimited();
    let f = TestFn::triangle(1.5).map_err(err)?;
    let mc = nlevel_rmt_empirical(std::slice::from_ref(&f), 2, 100_000, 0x4b53_3131).map_err(err)?;
    let mut ds = Vec::new();
    for q in [3u64, 5, 7] {
        let ex = avg_nlevel(&EnsembleSpec::exhaustive(field(q), 2), std::slice::from_ref(&f), 256, budget).map_err(err)?;
        ds.push((q, (ex.mean - mc.mean).abs(), ex.mean));
    }
    let summary = format!(
        "USp(4) {:.5}±{:.5}; {}",
        mc.mean,
        mc.stderr,
        ds.iter().map(|(q, d, m)| format!("q={q} ⟨W⟩={m:.5} d={d:.5}")).collect::<Vec<_>>().join(", ")
    );
    for w in ds.windows(2) {
        ensure(w[0].1 - w[1].1 > mc.stderr, || format!("not decreasing beyond stderr: {summary}"))?;
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// 12. Haar sampler

fn c12() -> Outcome {
    let master = 0x4841_4152;
    let n1 = 10_000u64;
    let mut th: Vec<f64> = (0..n1)
        .map(|i| {
            let s = haar_usp(1, draw_seed(master, i)).map_err(err)?;
            Ok(usp_eigenphases(&s.u).map_err(err)?.thetas()[0])
        })
        .collect::<Result<_, String>>()?;
    th.sort_by(f64::total_cmp);
    let cdf = |t: f64| (t - t.sin() * t.cos()) / PI;
    let ks = th
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let c = cdf(t);
            (c - i as f64 / n1 as f64).abs().max((c - (i + 1) as f64 / n1 as f64).abs())
        })
        .fold(0.0, f64::max);
    ensure(ks <= 0.02, || format!("g=1 sup distance {ks:.4}"))?;

    let (m1, m2) = weyl_moments_g3();
    let n3 = 100_000u64;
    let samples: Vec<(f64, f64)> = (0..n3)
        .map(|i| {
            let s = haar_usp(3, draw_seed(master ^ 3, i)).map_err(err)?;
            Ok((s.trace_power(1).re, s.trace_power(2).re))
        })
        .collect::<Result<_, String>>()?;
    let stats = |k: usize| {
        let xs: Vec<f64> = samples.iter().map(|p| if k == 1 { p.0 } else { p.1 }).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        (mean, (var / xs.len() as f64).sqrt())
    };
    let (t1, e1) = stats(1);
    let (t2, e2) = stats(2);
    ensure((t1 - m1).abs() <= 3.0 * e1, || format!("E tr U = {t1:.4} ± {e1:.4}, oracle {m1:.6}"))?;
    ensure((t2 - m2).abs() <= 3.0 * e2, || format!("E tr U² = {t2:.4} ± {e2:.4}, oracle {m2:.6}"))?;
    Ok(format!("KS {ks:.4}; tr U {t1:.4}±{e1:.4} (oracle {m1:.3}); tr U² {t2:.4}±{e2:.4} (oracle {m2:.3})"))
}

/// E tr U and E tr U² for USp(6) from the Weyl density Π_{i<j}(cos θ_i − cos θ_j)² Π sin² θ_i.
/// The integrand is a trigonometric polynomial, so the periodic trapezoid rule is exact.
fn weyl_moments_g3() -> (f64, f64) {
    let m = 48;
    let grid: Vec<f64> = (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect();
    let (mut z, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                let t = [a, b, c];
                let mut w: f64 = t.iter().map(|x| x.sin().powi(2)).product();
                for i in 0..3 {
                    for j in i + 1..3 {
                        w *= (t[i].cos() - t[j].cos()).powi(2);
                    }
                }
                z += w;
                s1 += w * t.iter().map(|x| 2.0 * x.cos()).sum::<f64>();
                s2 += w * t.iter().map(|x| 2.0 * (2.0 * x).cos()).sum::<f64>();
            }
        }
    }
    (s1 / z, s2 / z)
}

// ---------------------------------------------------------------------------
// 13. Sieved against direct n-level sums

fn own_fhat(family: &str, s: f64, u: f64) -> f64 {
    match family {
        "triangle" => (1.0 - u.abs() / s).max(0.0),
        _ => {
            let a = s / 2.0;
            let x = (u / a).abs();
            let m4 = if x <= 1.0 {
                2.0 / 3.0 - x * x + x.powi(3) / 2.0
            } else if x <= 2.0 {
                (2.0 - x).powi(3) / 6.0
            } else {
                0.0
            };
            a * m4
        }
    }
}

/// Σ_m f(2g(θ/2π + m)) by Poisson summation.
fn own_periodized(family: &str, s: f64, g: usize, theta: f64) -> f64 {
    let tg = 2.0 * g as f64;
    let r_max = (tg * s).ceil() as i64 + 1;
    (-r_max..=r_max).map(|r| own_fhat(family, s, r as f64 / tg) * (r as f64 * theta).cos()).sum::<f64>() / tg
}

/// Sum over signed index tuples (j_1..j_n), j ∈ ±{1..g}, with distinct |j_k|, θ_{−j} = −θ_j.
fn own_nlevel(thetas: &[f64], fns: &[(&str, f64)], g: usize) -> f64 {
    let n = fns.len();
    let vals: Vec<Vec<f64>> = fns
        .iter()
        .map(|&(fam, s)| {
            let mut v = Vec::with_capacity(2 * g);
            for &t in thetas {
                v.push(own_periodized(fam, s, g, t));
                v.push(own_periodized(fam, s, g, -t));
            }
            v
        })
        .collect();
    fn rec(k: usize, n: usize, used: &mut Vec<usize>, vals: &[Vec<f64>], g: usize) -> f64 {
        if k == n {
            return 1.0;
        }
        let mut acc = 0.0;
        for idx in 0..2 * g {
            if used.contains(&(idx / 2)) {
                continue;
            }
            used.push(idx / 2);
            acc += vals[k][idx] * rec(k + 1, n, used, vals, g);
            used.pop();
        }
        acc
    }
    rec(0, n, &mut Vec::new(), &vals, g)
}

fn c13() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5349_4556);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let g = rng.random_range(1..=8);
        let n = rng.random_range(1..=4);
        let thetas: Vec<f64> = (0..g).map(|_| rng.random_range(0.0..PI)).collect();
        let mut fns: Vec<(&str, f64)> = Vec::new();
        let budget = 1.95;
        for k in 0..n {
            let room = (budget - fns.iter().map(|p| p.1).sum::<f64>()) / (n - k) as f64;
            let s = rng.random_range(0.05..=room.max(0.06)).min(room);
            fns.push((if rng.random_bool(0.5) { "triangle" } else { "sinc4" }, s));
        }
        let tfs: Vec<TestFn> = fns
            .iter()
            .map(|&(fam, s)| if fam == "triangle" { TestFn::triangle(s) } else { TestFn::sinc4(s) })
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let oracle = own_nlevel(&thetas, &fns, g);
        let ph = phases_from_angles(thetas.clone());
        let direct = nlevel_direct(&ph, &tfs, g);
        let r_max = (2.0 * g as f64 * 2.0).ceil() as usize;
        let sieved = nlevel_sieved(&TraceSeq::from_phases(&ph, r_max), &tfs).map_err(err)?;
        let d = (sieved - oracle).abs().max((direct - oracle).abs());
        worst = worst.max(d);
        ensure(d <= 1e-10, || {
            format!("trial {trial} g={g} {fns:?}: sieved {sieved}, direct {direct}, oracle {oracle}")
        })?;
    }
    Ok(format!("100 fixtures, max deviation {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("functional equation, q ∈ {3,5}, 2 ≤ deg D ≤ 7", c1),
        ("RH residual ≤ 1e-8 on small hyperelliptic families over F_3", c2),
        ("prime-power traces = Newton traces", c3),
        ("σ generating function and Φ_β two forms", c4),
        ("character-sum dualities, q=3, Σr ≤ 8", c5),
        ("exact average of P(r), q=3, g ≤ 2", c6),
        ("A(f) = kernel integral, n=1, 1e-8", c7),
        ("A(f) = kernel integral, n=2, 5e-4", c8),
        ("A(f) = kernel integral, n=3, 1e-2", c9),
        ("ensemble mean → A(f), q=3, g ∈ {4,6,8}", c10),
        ("H(5,q) → USp(4) as q grows", c11),
        ("Haar USp sampler: Weyl CDF and trace moments", c12),
        ("sieved = direct n-level sums, 100 fixtures", c13),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s] {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s] {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
