//! Random-matrix side: Haar samples of USp(2g), eigenphase statistics, the kernel
//! K(x, y) = sinc π(x−y) − sinc π(x+y) and integrals of f against det K(x_i, x_j).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::ensemble::{draw_seed, nlevel_direct, AvgResult};
use crate::lfun::Eigenphases;
use crate::quad::{breakpoints, halton, mean_stderr, Estimate, GaussLegendre};
use crate::testfn::{sinc, TestFn};
use crate::{Error, Result};

/// Largest supported genus for the sampler.
pub const MAX_GENUS: usize = 64;

/// Tolerance on ± pairing of the 2g eigenphases.
pub const PAIRING_TOL: f64 = 1e-8;

/// Tolerance on |λ| − 1 for computed eigenvalues.
pub const UNIT_TOL: f64 = 1e-8;

/// A 2g×2g unitary symplectic matrix with the seed that produced it.
#[derive(Clone, Debug)]
pub struct SymplecticSample {
    pub g: usize,
    pub u: DMatrix<Complex64>,
    pub seed: u64,
}

/// The standard skew form J = [[0, I], [−I, 0]].
pub fn skew_form(g: usize) -> DMatrix<Complex64> {
    let mut j = DMatrix::zeros(2 * g, 2 * g);
    for k in 0..g {
        j[(k, g + k)] = Complex64::new(1.0, 0.0);
        j[(g + k, k)] = Complex64::new(-1.0, 0.0);
    }
    j
}

impl SymplecticSample {
    /// max |U U* − I|.
    pub fn unitarity_residual(&self) -> f64 {
        let n = 2 * self.g;
        let d = &self.u * self.u.adjoint() - DMatrix::<Complex64>::identity(n, n);
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |Uᵀ J U − J|.
    pub fn symplectic_residual(&self) -> f64 {
        let j = skew_form(self.g);
        let d = self.u.transpose() * &j * &self.u - j;
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace_power(&self, r: u32) -> Complex64 {
        let mut m = DMatrix::<Complex64>::identity(2 * self.g, 2 * self.g);
        for _ in 0..r {
            m = &m * &self.u;
        }
        m.trace()
    }
}

/// Haar-distributed element of USp(2g).
///
/// Columns come in quaternionic pairs (u_k, −J ū_k). Each u_k is a complex Gaussian vector
/// orthonormalized against all earlier columns; the construction commutes with left
/// multiplication by USp(2g), which forces the Haar law.
pub fn haar_usp(g: usize, seed: u64) -> Result<SymplecticSample> {
    if g == 0 || g > MAX_GENUS {
        return Err(Error::Domain(format!("genus {g} outside 1..={MAX_GENUS}")));
    }
    let n = 2 * g;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    let mut k = 0;
    while k < g {
        let mut v: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        for _ in 0..2 {
            for col in (0..k).chain(g..g + k) {
                let c = u.column(col);
                let dot: Complex64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ci) in v.iter_mut().zip(c.iter()) {
                    *vi -= dot * ci;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        for (i, z) in v.iter().enumerate() {
            u[(i, k)] = z / norm;
        }
        // w = −J ū: (−J x)_i = −x_{g+i} for i < g and x_{i−g} for i ≥ g.
        for i in 0..g {
            u[(i, g + k)] = -u[(g + i, k)].conj();
            u[(g + i, g + k)] = u[(i, k)].conj();
        }
        k += 1;
    }
    Ok(SymplecticSample { g, u, seed })
}

/// Pairs 2g unsigned phases into g values; mismatches above `tol` fail.
fn pair_abs_phases(mut a: Vec<f64>, tol: f64) -> Result<Vec<f64>> {
    a.sort_by(f64::total_cmp);
    let mut worst = 0.0f64;
    let out = a
        .chunks(2)
        .map(|p| {
            worst = worst.max((p[0] - p[1]).abs());
            0.5 * (p[0] + p[1])
        })
        .collect();
    if worst > tol {
        return Err(Error::Pairing(worst));
    }
    Ok(out)
}

/// The g eigenphases in [0, π] of a unitary symplectic matrix (complex Schur form).
pub fn usp_eigenphases(u: &DMatrix<Complex64>) -> Result<Eigenphases> {
    let n = u.nrows();
    if n % 2 == 1 || u.ncols() != n {
        return Err(Error::Domain(format!("{}×{} is not an even square matrix", n, u.ncols())));
    }
    let schur = nalgebra::Schur::new(u.clone());
    let (_, t) = schur.unpack();
    let mut residual = 0.0f64;
    let mut abs = Vec::with_capacity(n);
    for i in 0..n {
        let z = t[(i, i)];
        residual = residual.max((z.norm() - 1.0).abs());
        abs.push(z.arg().abs());
    }
    if residual > UNIT_TOL {
        return Err(Error::UnitModulus { residual });
    }
    Ok(Eigenphases::from_thetas(pair_abs_phases(abs, PAIRING_TOL)?, residual))
}

/// ⟨W⁽ⁿ⁾⟩ over N Haar samples of USp(2g); sample i uses seed draw_seed(seed, i).
pub fn nlevel_rmt_empirical(fs: &[TestFn], g: usize, n_samples: u64, seed: u64) -> Result<AvgResult> {
    if n_samples == 0 {
        return Err(Error::Domain("sample count must be ≥ 1".into()));
    }
    let vals: Vec<Result<f64>> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let s = haar_usp(g, draw_seed(seed, i))?;
            let ph = usp_eigenphases(&s.u)?;
            Ok(nlevel_direct(&ph, fs, g))
        })
        .collect();
    let mut xs = Vec::with_capacity(vals.len());
    for v in vals {
        xs.push(v?);
    }
    let (mean, stderr) = mean_stderr(&xs);
    Ok(AvgResult { mean, stderr, count: n_samples })
}

/// Exact ⟨W⁽¹⁾⟩ over USp(2g) from E tr U^r = −1 (r even ≤ 2g), 0 otherwise.
pub fn one_level_usp_exact(f: &TestFn, g: usize) -> f64 {
    let two_g = 2.0 * g as f64;
    let s: f64 = (1..=g).map(|m| f.eval_fhat(2.0 * m as f64 / two_g)).sum();
    f.eval_fhat(0.0) - s / g as f64
}

/// K(x, y) = sin π(x−y)/π(x−y) − sin π(x+y)/π(x+y).
pub fn kernel_k(x: f64, y: f64) -> f64 {
    sinc(PI * (x - y)) - sinc(PI * (x + y))
}

/// det[K(x_i, x_j)] by Gaussian elimination with partial pivoting.
pub fn kernel_det(xs: &[f64]) -> f64 {
    let n = xs.len();
    match n {
        0 => 1.0,
        1 => kernel_k(xs[0], xs[0]),
        2 => {
            let k12 = kernel_k(xs[0], xs[1]);
            kernel_k(xs[0], xs[0]) * kernel_k(xs[1], xs[1]) - k12 * k12
        }
        _ => {
            let m = DMatrix::from_fn(n, n, |i, j| kernel_k(xs[i], xs[j]));
            m.determinant()
        }
    }
}

/// Quadrature settings for [`kernel_integral`].
#[derive(Clone, Copy, Debug)]
pub struct KernelSpec {
    pub n: usize,
    /// Truncation radius for the x-space tensor rule (n = 2).
    pub x_max: f64,
    /// Panel width and nodes per panel of the tensor rule.
    pub panel: f64,
    pub nodes: usize,
    /// Quasi-random points per shift and number of shifts (n ≥ 3).
    pub points: u64,
    pub shifts: usize,
    pub seed: u64,
}

impl KernelSpec {
    pub fn new(n: usize) -> Self {
        KernelSpec { n, x_max: 60.0, panel: 0.25, nodes: 8, points: 1 << 17, shifts: 16, seed: 0x4b45_524e }
    }
}

/// ∫_ℝ f(x)(1 − sin 2πx / 2πx) dx on the Fourier side: f̂(0) − ∫_0^1 f̂.
pub fn kernel_one_fourier(f: &TestFn) -> Estimate {
    let gl = GaussLegendre::new(8);
    let mut k = f.knots();
    k.push(1.0);
    let body = gl.integrate_panels(&breakpoints(k, 0.0, 1.0), |u| f.eval_fhat(u));
    Estimate::new(f.eval_fhat(0.0) - body, 1e-15 * (1.0 + body.abs()))
}

/// The same integral in x-space (independent check), with the sin² tail averaged analytically.
pub fn kernel_one_xspace(f: &TestFn) -> Estimate {
    let x_max = 2000.0;
    let width = 0.5 / f.support().max(1.0);
    let panels = (x_max / width).ceil() as usize;
    let run = |nodes: usize| {
        let gl = GaussLegendre::new(nodes);
        2.0 * (0..panels)
            .into_par_iter()
            .map(|k| gl.integrate(k as f64 * width, (k + 1) as f64 * width, |x| f.eval_f(x) * kernel_k(x, x)))
            .sum::<f64>()
    };
    let (a, b) = (run(8), run(12));
    let x_end = panels as f64 * width;
    // ⟨sin²⟩ = 1/2 beyond x_end for the triangle atoms; sinc4 tails are O(x⁻³) and dropped.
    let mut tail = 0.0;
    let mut tail_err = 0.0;
    for (c, a) in f.terms() {
        match a.family {
            crate::testfn::Family::Triangle => tail += c / (PI * PI * a.s * x_end),
            crate::testfn::Family::Sinc4 => tail_err += c.abs() * 4.0 / (3.0 * PI.powi(4) * a.s * a.s * x_end.powi(3)),
        }
    }
    Estimate::new(b + tail, (a - b).abs() + tail_err + 1e-6 * tail.abs())
}

/// ∫_{ℝⁿ} Π f_k(x_k) det K(x_i, x_j) dx.
pub fn kernel_integral(fs: &[TestFn], spec: &KernelSpec) -> Result<Estimate> {
    if fs.len() != spec.n || spec.n == 0 {
        return Err(Error::Domain(format!("kernel integral needs {} test functions, got {}", spec.n, fs.len())));
    }
    match spec.n {
        1 => Ok(kernel_one_fourier(&fs[0])),
        2 => Ok(kernel_two(&fs[0], &fs[1], spec)),
        _ => Ok(kernel_qmc(fs, spec)),
    }
}

fn kernel_two(f1: &TestFn, f2: &TestFn, spec: &KernelSpec) -> Estimate {
    // det = K(x,x)K(y,y) − K(x,y)²; the first part factorizes into one-level integrals.
    let diag = kernel_one_fourier(f1) * kernel_one_fourier(f2);
    let cross = |nodes: usize, x_max: f64| -> f64 {
        let gl = GaussLegendre::new(nodes);
        let panels = (x_max / spec.panel).round() as usize;
        let pts: Vec<(f64, f64)> = (0..panels)
            .flat_map(|k| gl.on(k as f64 * spec.panel, (k + 1) as f64 * spec.panel).collect::<Vec<_>>())
            .collect();
        let a: Vec<f64> = pts.iter().map(|&(x, w)| w * f1.eval_f(x)).collect();
        let b: Vec<f64> = pts.iter().map(|&(y, w)| w * f2.eval_f(y)).collect();
        // K(x,y)² is even in x and in y, so the full-plane integral is four quadrants.
        4.0 * pts
            .par_iter()
            .zip(&a)
            .map(|(&(x, _), &ax)| ax * pts.iter().zip(&b).map(|(&(y, _), &by)| by * kernel_k(x, y).powi(2)).sum::<f64>())
            .sum::<f64>()
    };
    let full = cross(spec.nodes, spec.x_max);
    let coarse = cross(spec.nodes - 2, spec.x_max);
    let short = cross(spec.nodes, 0.75 * spec.x_max);
    let err = (full - coarse).abs() + (full - short).abs();
    diag - Estimate::new(full, err)
}

fn kernel_qmc(fs: &[TestFn], spec: &KernelSpec) -> Estimate {
    let n = fs.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shifts: Vec<Vec<f64>> = (0..spec.shifts).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
    let reps: Vec<f64> = shifts
        .par_iter()
        .map(|shift| {
            let mut u = vec![0.0; n];
            let mut x = vec![0.0; n];
            let mut acc = 0.0;
            for i in 1..=spec.points {
                halton(i, n, &mut u);
                let mut w = 1.0;
                for k in 0..n {
                    // x = tan(πv/2) maps [0,1) onto [0,∞).
                    let v = (u[k] + shift[k]) % 1.0;
                    let a = 0.5 * PI * v;
                    x[k] = a.tan();
                    w *= fs[k].eval_f(x[k]) * 0.5 * PI / (a.cos() * a.cos());
                }
                if w.is_finite() && w != 0.0 {
                    acc += w * kernel_det(&x);
                }
            }
            acc * 2f64.powi(n as i32) / spec.points as f64
        })
        .collect();
    let (m, se) = mean_stderr(&reps);
    Estimate::new(m, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(s: f64) -> TestFn {
        TestFn::triangle(s).unwrap()
    }

    #[test]
    fn samples_are_unitary_symplectic() {
        for g in [1, 2, 5, 12] {
            for seed in 0..5 {
                let s = haar_usp(g, seed).unwrap();
                assert!(s.unitarity_residual() <= 1e-10);
                assert!(s.symplectic_residual() <= 1e-10);
                let det = s.u.determinant();
                assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-8, "{det}");
            }
        }
        assert!(haar_usp(0, 1).is_err());
    }

    #[test]
    fn phases_of_known_matrices() {
        let g = 2;
        let mut u = DMatrix::<Complex64>::zeros(4, 4);
        for (k, t) in [0.3f64, 1.2].into_iter().enumerate() {
            u[(k, k)] = Complex64::from_polar(1.0, t);
            u[(g + k, g + k)] = Complex64::from_polar(1.0, -t);
        }
        let s = SymplecticSample { g, u: u.clone(), seed: 0 };
        assert!(s.symplectic_residual() < 1e-15);
        // conjugate by a random symplectic matrix to hide the structure
        let v = haar_usp(2, 3).unwrap().u;
        let w = &v * u * v.adjoint();
        let ph = usp_eigenphases(&w).unwrap();
        assert!((ph.thetas()[0] - 0.3).abs() < 1e-10 && (ph.thetas()[1] - 1.2).abs() < 1e-10);
        let id = DMatrix::<Complex64>::identity(6, 6);
        assert!(usp_eigenphases(&id).unwrap().thetas().iter().all(|t| t.abs() < 1e-12));
        let one = usp_eigenphases(&haar_usp(1, 9).unwrap().u).unwrap();
        assert!(one.thetas().len() == 1 && (0.0..=PI).contains(&one.thetas()[0]));
    }

    #[test]
    fn kernel_values() {
        assert_eq!(kernel_k(0.0, 0.0), 0.0);
        assert!((kernel_k(0.5, 0.5) - 1.0).abs() < 1e-15);
        for x in [0.1, 0.37, 2.2] {
            assert!((kernel_k(x, x) - (1.0 - (2.0 * PI * x).sin() / (2.0 * PI * x))).abs() < 1e-14);
            assert!((kernel_k(-x, 0.4) + kernel_k(x, 0.4)).abs() < 1e-15);
        }
        assert!((kernel_k(1e-6, 1e-6 + 1e-9) - kernel_k(1e-6, 1e-6)).abs() < 1e-8);
        for k in 0..2000 {
            let w = kernel_k(k as f64 * 0.01, k as f64 * 0.01);
            assert!((0.0..=1.0 + 1.0 / PI).contains(&w));
        }
        assert!(kernel_det(&[0.8, 0.8]).abs() < 1e-15);
        let d = kernel_det(&[0.3, -1.1, 0.7]);
        assert!((d - kernel_det(&[-0.3, 1.1, 0.7])).abs() < 1e-14);
        assert!((d - kernel_det(&[0.7, 0.3, -1.1])).abs() < 1e-14);
    }

    #[test]
    fn one_level_kernel_examples() {
        let spec = KernelSpec::new(1);
        for (s, want) in [(1.5, 1.0 / 3.0), (1.0, 0.5), (0.5, 0.75)] {
            let v = kernel_integral(&[tri(s)], &spec).unwrap();
            assert!((v.value - want).abs() < 1e-14);
            let x = kernel_one_xspace(&tri(s));
            assert!((x.value - want).abs() < 1e-4, "s={s}: {x:?}");
        }
        let g = TestFn::sinc4(0.9).unwrap();
        let x = kernel_one_xspace(&g);
        assert!((x.value - kernel_one_fourier(&g).value).abs() < 1e-6);
    }

    #[test]
    fn empirical_small_cases() {
        let r = nlevel_rmt_empirical(&[tri(1.0), tri(0.5)], 1, 50, 1).unwrap();
        assert_eq!((r.mean, r.stderr), (0.0, 0.0));
        let f = tri(1.0);
        let a = nlevel_rmt_empirical(std::slice::from_ref(&f), 6, 4000, 1).unwrap();
        let b = nlevel_rmt_empirical(std::slice::from_ref(&f), 6, 4000, 2).unwrap();
        assert!((a.mean - b.mean).abs() < 4.0 * (a.stderr + b.stderr));
        let exact = one_level_usp_exact(&f, 6);
        assert!((a.mean - exact).abs() < 4.0 * a.stderr, "{} vs {exact}", a.mean);
    }
}
