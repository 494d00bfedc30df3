use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::StarData;
use crate::{Error, Result};

/// Convergence tolerance of the Aberth–Ehrlich iteration.
const ROOT_TOL: f64 = 1e-12;
/// Largest admissible distance of a normalized root from the unit circle.
pub const RH_TOL: f64 = 1e-8;
const PAIR_TOL: f64 = 1e-6;

/// Eigenphases θ_1 ≤ … ≤ θ_g in [0, π]; the conjugates −θ_j are implied.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenphases {
    thetas: Vec<f64>,
    residual: f64,
}

impl Eigenphases {
    /// Builds a phase set directly (synthetic fixtures, random-matrix samples).
    pub fn from_thetas(mut thetas: Vec<f64>, residual: f64) -> Self {
        thetas.sort_by(|a, b| a.total_cmp(b));
        Eigenphases { thetas, residual }
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn genus(&self) -> usize {
        self.thetas.len()
    }

    /// max_k ||z_k| − 1| over the normalized roots.
    pub fn residual(&self) -> f64 {
        self.residual
    }
}

type QPoly = Vec<BigRational>;

fn q_trim(p: &mut QPoly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn q_derivative(p: &[BigRational]) -> QPoly {
    let mut d: QPoly = p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    q_trim(&mut d);
    d
}

fn q_sub(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let n = a.len().max(b.len());
    let zero = BigRational::zero();
    let mut out: QPoly = (0..n).map(|i| a.get(i).unwrap_or(&zero) - b.get(i).unwrap_or(&zero)).collect();
    q_trim(&mut out);
    out
}

fn q_divmod(a: &[BigRational], b: &[BigRational]) -> (QPoly, QPoly) {
    let db = b.len() - 1;
    let mut r: QPoly = a.to_vec();
    if r.len() <= db {
        return (Vec::new(), r);
    }
    let mut quot = vec![BigRational::zero(); r.len() - db];
    let lead = &b[db];
    for i in (db..r.len()).rev() {
        if r[i].is_zero() {
            continue;
        }
        let c = &r[i] / lead;
        for j in 0..=db {
            let t = &c * &b[j];
            r[i - db + j] -= t;
        }
        quot[i - db] = c;
    }
    r.truncate(db);
    q_trim(&mut r);
    q_trim(&mut quot);
    (quot, r)
}

fn q_monic(p: &mut QPoly) {
    if let Some(lead) = p.last().cloned() {
        for c in p.iter_mut() {
            *c /= &lead;
        }
    }
}

fn q_gcd(a: &[BigRational], b: &[BigRational]) -> QPoly {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    while !y.is_empty() {
        let r = q_divmod(&x, &y).1;
        x = y;
        y = r;
    }
    q_monic(&mut x);
    x
}

/// Yun's squarefree decomposition over Q: pairs (factor, multiplicity).
fn squarefree_decomposition(f: &[BigRational]) -> Vec<(QPoly, usize)> {
    let df = q_derivative(f);
    if df.is_empty() {
        return Vec::new();
    }
    let a0 = q_gcd(f, &df);
    let mut b = q_divmod(f, &a0).0;
    let c = q_divmod(&df, &a0).0;
    let mut d = q_sub(&c, &q_derivative(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while b.len() > 1 {
        let a = q_gcd(&b, &d);
        if a.len() > 1 {
            out.push((a.clone(), i));
        }
        b = q_divmod(&b, &a).0;
        let c = q_divmod(&d, &a).0;
        d = q_sub(&c, &q_derivative(&b));
        i += 1;
    }
    out
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::zero();
    let mut dp = Complex64::zero();
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// Roots of the monic polynomial with low-to-high coefficients `c` (Aberth–Ehrlich,
/// companion-matrix eigenvalues as fallback).
pub(crate) fn polynomial_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Complex64::new(-c[0], 0.0)];
    }
    let cc: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let radius = c[..n].iter().map(|x| x.abs().powf(1.0 / n as f64)).fold(0.0f64, f64::max).max(0.5);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut worst = 0.0f64;
        for k in 0..n {
            let (p, dp) = horner(&cc, z[k]);
            if p == Complex64::zero() {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            if !w.is_finite() {
                worst = f64::INFINITY;
                continue;
            }
            z[k] -= w;
            worst = worst.max(w.norm() / z[k].norm().max(1.0));
        }
        if worst < ROOT_TOL {
            return z;
        }
    }
    companion_roots(c)
}

fn companion_roots(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i];
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Normalized roots z = u√q of L*(u), eigenphases θ = −arg z folded into [0, π].
///
/// Repeated roots are separated first (squarefree decomposition over Q) so that the
/// iteration only sees simple roots; multiplicities are restored afterwards.
pub fn eigenphases(sd: &StarData) -> Result<Eigenphases> {
    let coeffs: QPoly = sd.star().iter().map(|&a| BigRational::from_integer(BigInt::from(a))).collect();
    if coeffs.len() == 1 {
        return Ok(Eigenphases { thetas: Vec::new(), residual: 0.0 });
    }
    let sqrt_q = (sd.field().q() as f64).sqrt();
    let mut angles = Vec::with_capacity(coeffs.len() - 1);
    let mut residual = 0.0f64;
    for (factor, mult) in squarefree_decomposition(&coeffs) {
        // Substitute u = z/√q and make monic in z.
        let scaled: Vec<f64> = factor
            .iter()
            .enumerate()
            .map(|(k, c)| c.to_f64().unwrap_or(f64::NAN) / sqrt_q.powi(k as i32))
            .collect();
        let lead = *scaled.last().unwrap();
        let monic: Vec<f64> = scaled.iter().map(|c| c / lead).collect();
        for z in polynomial_roots(&monic) {
            residual = residual.max((z.norm() - 1.0).abs());
            for _ in 0..mult {
                angles.push((-z.arg()).abs());
            }
        }
    }
    if residual.is_nan() || residual > RH_TOL {
        return Err(Error::UnitModulus { residual });
    }
    Ok(Eigenphases { thetas: pair_phases(angles)?, residual })
}

/// Folds 2g phases |θ| into g representatives, checking that they come in ± pairs.
pub(crate) fn pair_phases(mut abs_angles: Vec<f64>) -> Result<Vec<f64>> {
    if abs_angles.len() % 2 == 1 {
        return Err(Error::Pairing(f64::INFINITY));
    }
    abs_angles.sort_by(|a, b| a.total_cmp(b));
    let mut mismatch = 0.0f64;
    let thetas = abs_angles
        .chunks(2)
        .map(|p| {
            mismatch = mismatch.max((p[0] - p[1]).abs());
            0.5 * (p[0] + p[1])
        })
        .collect();
    if mismatch > PAIR_TOL {
        return Err(Error::Pairing(mismatch));
    }
    Ok(thetas)
}
