//! Test functions with compactly supported Fourier transforms, product transforms,
//! pair integrals and the half-space region integrals.
//!
//! Convention: f̂(u) = ∫ f(x) e^{−2πixu} dx, so the Fejér pair is
//! f̂(u) = max(0, 1 − |u|/s), f(x) = s·sinc²(πsx).

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::quad::{breakpoints, halton, mean_stderr, Estimate, GaussLegendre};
use crate::{Error, Result};

/// Σ s_k must stay below this on the L-function side.
pub const SUPPORT_LIMIT: f64 = 2.0;

/// Default number of grid cells per unit of the smallest support.
pub const CELLS_PER_SUPPORT: f64 = 1024.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Triangle,
    Sinc4,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Triangle => "triangle",
            Family::Sinc4 => "sinc4",
        }
    }
}

/// One closed-form (f, f̂) pair with f̂ supported in [−s, s].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub family: Family,
    pub s: f64,
}

/// sin(x)/x with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Centered cubic B-spline (the triple self-convolution of the unit box), support [−2, 2].
fn cubic_bspline(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        2.0 / 3.0 - x * x + 0.5 * x * x * x
    } else if x < 2.0 {
        (2.0 - x).powi(3) / 6.0
    } else {
        0.0
    }
}

impl Atom {
    pub fn f(&self, x: f64) -> f64 {
        let s = self.s;
        match self.family {
            Family::Triangle => s * sinc(PI * s * x).powi(2),
            Family::Sinc4 => 0.25 * s * s * sinc(0.5 * PI * s * x).powi(4),
        }
    }

    pub fn fhat(&self, u: f64) -> f64 {
        let s = self.s;
        match self.family {
            Family::Triangle => (1.0 - u.abs() / s).max(0.0),
            Family::Sinc4 => {
                let a = 0.5 * s;
                a * cubic_bspline(u / a)
            }
        }
    }

    /// ∫_t^∞ f̂(u) du for t ≥ 0.
    pub fn tail(&self, t: f64) -> f64 {
        let s = self.s;
        let t = t.max(0.0);
        if t >= s {
            return 0.0;
        }
        match self.family {
            Family::Triangle => (s - t).powi(2) / (2.0 * s),
            Family::Sinc4 => {
                let a = 0.5 * s;
                let y = t / a;
                if y <= 1.0 {
                    a * a * (0.5 - (2.0 * y / 3.0 - y.powi(3) / 3.0 + y.powi(4) / 8.0))
                } else {
                    a * a * (2.0 - y).powi(4) / 24.0
                }
            }
        }
    }

    /// Nonnegative points where f̂ is not polynomial.
    pub fn knots(&self) -> Vec<f64> {
        match self.family {
            Family::Triangle => vec![0.0, self.s],
            Family::Sinc4 => vec![0.0, 0.5 * self.s, self.s],
        }
    }

    /// Envelope |f(x)| ≤ c·x^{−p} for x > 0, returned as (c, p).
    fn envelope(&self) -> (f64, i32) {
        let s = self.s;
        match self.family {
            Family::Triangle => (1.0 / (PI * PI * s), 2),
            Family::Sinc4 => (4.0 / (PI.powi(4) * s * s), 4),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:s={}", self.family.name(), self.s)
    }
}

/// A finite real combination Σ c_i·atom_i; even, real, with f̂ supported in (−s, s).
#[derive(Clone, Debug, PartialEq)]
pub struct TestFn {
    terms: Vec<(f64, Atom)>,
}

impl TestFn {
    fn atom(family: Family, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Domain(format!("support s = {s} must be positive and finite")));
        }
        Ok(TestFn { terms: vec![(1.0, Atom { family, s })] })
    }

    pub fn triangle(s: f64) -> Result<Self> {
        Self::atom(Family::Triangle, s)
    }

    pub fn sinc4(s: f64) -> Result<Self> {
        Self::atom(Family::Sinc4, s)
    }

    pub fn zero() -> Self {
        TestFn { terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(f64, Atom)] {
        &self.terms
    }

    pub fn scaled(&self, c: f64) -> Self {
        TestFn { terms: self.terms.iter().map(|&(a, t)| (c * a, t)).collect() }
    }

    pub fn plus(&self, other: &TestFn) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        TestFn { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| *c == 0.0)
    }

    /// Radius of the support of f̂ (0 for the zero function).
    pub fn support(&self) -> f64 {
        self.terms.iter().filter(|(c, _)| *c != 0.0).map(|(_, a)| a.s).fold(0.0, f64::max)
    }

    /// Smallest atom support, used to size grids.
    pub fn min_support(&self) -> f64 {
        self.terms.iter().filter(|(c, _)| *c != 0.0).map(|(_, a)| a.s).fold(f64::INFINITY, f64::min)
    }

    pub fn eval_f(&self, x: f64) -> f64 {
        self.terms.iter().map(|(c, a)| c * a.f(x)).sum()
    }

    pub fn eval_fhat(&self, u: f64) -> f64 {
        self.terms.iter().map(|(c, a)| c * a.fhat(u)).sum()
    }

    /// ∫_t^∞ f̂ for t ≥ 0.
    pub fn tail(&self, t: f64) -> f64 {
        self.terms.iter().map(|(c, a)| c * a.tail(t)).sum()
    }

    pub fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.terms.iter().flat_map(|(_, a)| a.knots()).collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    fn envelope(&self) -> (f64, i32) {
        self.terms
            .iter()
            .map(|(c, a)| {
                let (e, p) = a.envelope();
                (c.abs() * e, p)
            })
            .fold((0.0, i32::MAX), |(c0, p0), (c1, p1)| (c0 + c1, p0.min(p1)))
    }

    /// Parses "triangle:s=1.5", "sinc4:s=0.9", "2.5*triangle:s=1" and sums of these joined by '+'.
    pub fn parse(text: &str) -> Result<Self> {
        let err = |col: usize, msg: String| Error::Parse { line: 1, col, msg };
        let mut terms = Vec::new();
        let mut offset = 0;
        for piece in text.split('+') {
            let lead = piece.len() - piece.trim_start().len();
            let body = piece.trim();
            let col0 = offset + lead + 1;
            offset += piece.len() + 1;
            if body.is_empty() {
                return Err(err(col0, "empty test-function term".into()));
            }
            let (coef, rest, rest_col) = match body.split_once('*') {
                Some((c, r)) => {
                    let c_trim = c.trim();
                    let v: f64 = c_trim
                        .parse()
                        .ok()
                        .filter(|v: &f64| v.is_finite())
                        .ok_or_else(|| err(col0, format!("bad coefficient '{c_trim}'")))?;
                    let r_lead = r.len() - r.trim_start().len();
                    (v, r.trim(), col0 + c.len() + 1 + r_lead)
                }
                None => (1.0, body, col0),
            };
            let (name, params) = rest
                .split_once(':')
                .ok_or_else(|| err(rest_col, format!("expected 'family:s=value', found '{rest}'")))?;
            let family = match name.trim() {
                "triangle" => Family::Triangle,
                "sinc4" => Family::Sinc4,
                other => return Err(err(rest_col, format!("unknown test-function family '{other}'"))),
            };
            let pcol = rest_col + name.len() + 1;
            let (key, val) =
                params.split_once('=').ok_or_else(|| err(pcol, format!("expected 's=value', found '{params}'")))?;
            if key.trim() != "s" {
                return Err(err(pcol, format!("unknown parameter '{}'", key.trim())));
            }
            let vcol = pcol + key.len() + 1;
            let s: f64 = val
                .trim()
                .parse()
                .ok()
                .filter(|s: &f64| s.is_finite() && *s > 0.0)
                .ok_or_else(|| err(vcol, format!("support must be a positive number, found '{}'", val.trim())))?;
            terms.push((coef, Atom { family, s }));
        }
        Ok(TestFn { terms })
    }
}

impl fmt::Display for TestFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0*triangle:s=1");
        }
        for (i, (c, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "+")?;
            }
            if *c != 1.0 {
                write!(f, "{c}*")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for TestFn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TestFn::parse(s)
    }
}

/// Σ s_k over a list, rejecting totals at or above `limit`.
pub fn check_supports(fs: &[&TestFn], limit: f64) -> Result<f64> {
    let total: f64 = fs.iter().map(|f| f.support()).sum();
    if total >= limit {
        return Err(Error::SupportOverflow { total, limit });
    }
    Ok(total)
}

/// Grid options for [`product_transform`].
#[derive(Clone, Copy, Debug)]
pub struct GridParams {
    /// Coarse spacing; defaults to min s_k / 1024.
    pub h: Option<f64>,
    /// Σ s_k must stay below this; `None` lifts the check.
    pub max_support: Option<f64>,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams { h: None, max_support: Some(SUPPORT_LIMIT) }
    }
}

impl GridParams {
    pub fn unrestricted() -> Self {
        GridParams { h: None, max_support: None }
    }
}

/// Û_F on a symmetric uniform grid, stored one-sided (Û is even).
#[derive(Clone, Debug)]
pub struct TransformGrid {
    h: f64,
    support: f64,
    values: Vec<f64>,
    cum: Vec<f64>,
    error: f64,
    exact: Option<TestFn>,
    knots: Vec<f64>,
}

fn lagrange4(u: f64) -> [f64; 4] {
    [
        -u * (u - 1.0) * (u - 2.0) / 6.0,
        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
        -(u + 1.0) * u * (u - 2.0) / 2.0,
        (u + 1.0) * u * (u - 1.0) / 6.0,
    ]
}

impl TransformGrid {
    fn from_exact(f: &TestFn, h: f64) -> Self {
        let support = f.support();
        let m = (support / h).ceil() as usize + 1;
        let values: Vec<f64> = (0..=m).map(|i| f.eval_fhat(i as f64 * h)).collect();
        let mut g = TransformGrid { h, support, values, cum: Vec::new(), error: 0.0, exact: Some(f.clone()), knots: f.knots() };
        g.build_cumulative();
        g
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    /// Max |fine − coarse| over the coarse nodes (0 for closed forms).
    pub fn error(&self) -> f64 {
        self.error
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Samples Û(i·h), i ≥ 0.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Points in [0, S] where Û may fail to be smooth.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn node(&self, i: i64) -> f64 {
        let i = i.unsigned_abs() as usize;
        self.values.get(i).copied().unwrap_or(0.0)
    }

    /// Û(t), by closed form or cubic interpolation.
    pub fn value(&self, t: f64) -> f64 {
        if let Some(f) = &self.exact {
            return f.eval_fhat(t);
        }
        let t = t.abs();
        if t >= self.support {
            return 0.0;
        }
        let x = t / self.h;
        let i = x.floor() as i64;
        let w = lagrange4(x - i as f64);
        (0..4).map(|k| w[k] * self.node(i - 1 + k as i64)).sum()
    }

    fn cell_integral(&self, i: i64, from: f64) -> f64 {
        // ∫_{from}^{1} of the cubic through nodes i−1..i+2, in units of h.
        let gl = [(-0.7745966692414834, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.7745966692414834, 5.0 / 9.0)];
        let (m, r) = (0.5 * (from + 1.0), 0.5 * (1.0 - from));
        let nodes = [self.node(i - 1), self.node(i), self.node(i + 1), self.node(i + 2)];
        let mut s = 0.0;
        for (x, w) in gl {
            let l = lagrange4(m + r * x);
            s += r * w * (0..4).map(|k| l[k] * nodes[k]).sum::<f64>();
        }
        s * self.h
    }

    fn build_cumulative(&mut self) {
        let n = self.values.len();
        let mut cum = vec![0.0; n + 1];
        for i in (0..n).rev() {
            cum[i] = cum[i + 1] + self.cell_integral(i as i64, 0.0);
        }
        self.cum = cum;
    }

    /// ∫_t^∞ Û for t ≥ 0.
    pub fn tail(&self, t: f64) -> f64 {
        if let Some(f) = &self.exact {
            return f.tail(t);
        }
        let t = t.max(0.0);
        if t >= self.support {
            return 0.0;
        }
        let x = t / self.h;
        let i = x.floor() as usize;
        if i + 1 >= self.cum.len() {
            return 0.0;
        }
        self.cum[i + 1] + self.cell_integral(i as i64, x - i as f64)
    }

    /// ∫_0^∞ |Û|, used to propagate grid errors.
    pub fn abs_mass(&self) -> f64 {
        match &self.exact {
            Some(f) => {
                let gl = GaussLegendre::new(8);
                gl.integrate_panels(&breakpoints(f.knots(), 0.0, f.support()), |t| f.eval_fhat(t).abs())
            }
            None => self.values.iter().map(|v| v.abs()).sum::<f64>() * self.h,
        }
    }
}

fn sample_full(f: &TestFn, h: f64) -> Vec<f64> {
    let m = (f.support() / h).ceil() as i64;
    (-m..=m).map(|i| f.eval_fhat(i as f64 * h)).collect()
}

/// Discrete convolution h·Σ a_{m−j} b_j of two centered arrays.
fn convolve_centered(a: &[f64], b: &[f64], h: f64) -> Vec<f64> {
    let n = a.len() + b.len() - 1;
    (0..n)
        .into_par_iter()
        .map(|k| {
            let lo = k.saturating_sub(a.len() - 1);
            let hi = k.min(b.len() - 1);
            let mut s = 0.0;
            for j in lo..=hi {
                s += a[k - j] * b[j];
            }
            s * h
        })
        .collect()
}

fn iterated_convolution(fs: &[&TestFn], h: f64) -> Vec<f64> {
    let mut acc = sample_full(fs[0], h);
    for f in &fs[1..] {
        acc = convolve_centered(&acc, &sample_full(f, h), h);
    }
    let mid = (acc.len() - 1) / 2;
    acc[mid..].to_vec()
}

/// Signed sums of the factors' knots, folded into [0, S].
fn sum_knots(fs: &[&TestFn], support: f64) -> Vec<f64> {
    let mut acc = vec![0.0];
    for f in fs {
        let mut next = Vec::new();
        for &a in &acc {
            for &k in &f.knots() {
                next.push(a + k);
                next.push(a - k);
            }
        }
        next.iter_mut().for_each(|x: &mut f64| *x = x.abs());
        next.sort_by(f64::total_cmp);
        next.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        acc = next;
    }
    breakpoints(acc, 0.0, support)
}

/// Û_F = f̂_{k1} * … * f̂_{km}: the transform of the pointwise product Π f_k.
///
/// A single factor is kept in closed form. Otherwise the convolution is run at spacings
/// h and h/2; the finer samples are kept and their disagreement is the reported error.
pub fn product_transform(fs: &[&TestFn], params: GridParams) -> Result<TransformGrid> {
    if fs.is_empty() {
        return Err(Error::Domain("product transform of an empty set".into()));
    }
    let support = match (fs.len(), params.max_support) {
        (2.., Some(limit)) => check_supports(fs, limit)?,
        _ => fs.iter().map(|f| f.support()).sum(),
    };
    let min_s = fs.iter().map(|f| f.min_support()).fold(f64::INFINITY, f64::min);
    let h = params.h.unwrap_or(if min_s.is_finite() { min_s / CELLS_PER_SUPPORT } else { 1.0 / CELLS_PER_SUPPORT });
    if fs.iter().any(|f| f.is_zero()) {
        return Ok(TransformGrid::from_exact(&TestFn::zero(), h));
    }
    if fs.len() == 1 {
        return Ok(TransformGrid::from_exact(fs[0], h));
    }
    let coarse = iterated_convolution(fs, h);
    let fine = iterated_convolution(fs, 0.5 * h);
    let error = coarse.iter().enumerate().map(|(i, c)| (fine.get(2 * i).copied().unwrap_or(0.0) - c).abs()).fold(0.0, f64::max);
    let mut g = TransformGrid {
        h: 0.5 * h,
        support,
        values: fine,
        cum: Vec::new(),
        error,
        exact: None,
        knots: sum_knots(fs, support),
    };
    g.build_cumulative();
    Ok(g)
}

/// Samples of the lattice transform at r/2g, r = 0..: h^{m−1}·(discrete convolution at h = 1/2g).
///
/// These are exactly the Fourier coefficients (times 2g) of the product of the 2g-periodized
/// f_k, so sums over zeros computed from them carry no quadrature error.
pub fn lattice_transform(fs: &[&TestFn], g: usize) -> Vec<f64> {
    let h = 1.0 / (2 * g) as f64;
    if fs.is_empty() {
        return vec![1.0];
    }
    let mut v = iterated_convolution(fs, h);
    while v.len() > 1 && v.last() == Some(&0.0) {
        v.pop();
    }
    v
}

/// ∫_ℝ Π f_k(x) dx computed on the x side (Û_F(0) without any convolution grid).
pub fn product_at_zero(fs: &[&TestFn]) -> Estimate {
    if fs.is_empty() || fs.iter().any(|f| f.is_zero()) {
        return Estimate::exact(if fs.is_empty() { f64::NAN } else { 0.0 });
    }
    if fs.len() == 1 {
        return Estimate::exact(fs[0].eval_fhat(0.0));
    }
    let (c, p) = fs.iter().map(|f| f.envelope()).fold((1.0, 0), |(c0, p0), (c1, p1)| (c0 * c1, p0 + p1));
    let p = p as f64;
    // tail 2·c·X^{1−p}/(p−1) ≤ 1e−13
    let x_max = ((2.0 * c / ((p - 1.0) * 1e-13)).powf(1.0 / (p - 1.0))).clamp(10.0, 2e4);
    let tail = 2.0 * c * x_max.powf(1.0 - p) / (p - 1.0);
    let total_s: f64 = fs.iter().map(|f| f.support()).sum();
    let width = 0.5 / total_s.max(1e-3);
    let panels = (x_max / width).ceil() as usize;
    let run = |n: usize| {
        let gl = GaussLegendre::new(n);
        (0..panels)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (k as f64 * width, (k + 1) as f64 * width);
                gl.integrate(a, b, |x| fs.iter().map(|f| f.eval_f(x)).product())
            })
            .sum::<f64>()
            * 2.0
    };
    let (v1, v2) = (run(10), run(14));
    Estimate::new(v2, (v2 - v1).abs() + tail + 1e-14 * v2.abs())
}

/// ∫_ℝ A(t)B(t)|t| dt (no prefactor).
pub fn pair_integral(a: &TransformGrid, b: &TransformGrid) -> Result<Estimate> {
    let s = a.support.min(b.support);
    if s <= 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    if a.is_exact() && b.is_exact() {
        let mut k = a.knots.clone();
        k.extend_from_slice(&b.knots);
        let br = breakpoints(k, 0.0, s);
        let f = |t: f64| a.value(t) * b.value(t) * t;
        let v1 = 2.0 * GaussLegendre::new(8).integrate_panels(&br, f);
        let v2 = 2.0 * GaussLegendre::new(12).integrate_panels(&br, f);
        return Ok(Estimate::new(v2, (v2 - v1).abs() + 1e-15 * v2.abs()));
    }
    let h = match (a.is_exact(), b.is_exact()) {
        (false, false) => {
            if (a.h - b.h).abs() > 1e-12 * a.h {
                return Err(Error::Domain(format!("incompatible grid spacings {} and {}", a.h, b.h)));
            }
            a.h
        }
        (true, false) => b.h,
        _ => a.h,
    };
    let n = (s / h).ceil() as usize + 1;
    let samples: Vec<f64> = (0..=n).map(|i| {
        let t = i as f64 * h;
        let va = if a.is_exact() { a.value(t) } else { a.node(i as i64) };
        let vb = if b.is_exact() { b.value(t) } else { b.node(i as i64) };
        va * vb * t
    }).collect();
    let trap = |step: usize| 2.0 * h * step as f64 * samples.iter().step_by(step).sum::<f64>();
    let (t1, t2, t4) = (trap(1), trap(2), trap(4));
    let r1 = (4.0 * t1 - t2) / 3.0;
    let r2 = (4.0 * t2 - t4) / 3.0;
    let grid_err = 2.0 * (a.error * b.abs_mass() + b.error * a.abs_mass()) * s;
    Ok(Estimate::new(r1, (r1 - r2).abs() + grid_err))
}

/// Quasi-random settings for regions of dimension above 4.
#[derive(Clone, Copy, Debug)]
pub struct QmcParams {
    pub points: u64,
    pub shifts: usize,
    pub seed: u64,
}

impl Default for QmcParams {
    fn default() -> Self {
        QmcParams { points: 1 << 15, shifts: 16, seed: 0x5eed }
    }
}

/// ∫ over {t ∈ ℝ_{≥0}^d : Σ_{i∈I} t_i ≤ Σ_{i∉I} t_i − 1} of Π Û_i(t_i).
///
/// `i_mask` bit k selects coordinate k into I. One coordinate outside I is integrated in
/// closed form through the tail of its transform.
pub fn region_integral(i_mask: u32, grids: &[&TransformGrid]) -> Result<Estimate> {
    region_integral_with(i_mask, grids, QmcParams::default())
}

pub fn region_integral_with(i_mask: u32, grids: &[&TransformGrid], qmc: QmcParams) -> Result<Estimate> {
    let d = grids.len();
    if d == 0 || d > 31 {
        return Err(Error::Domain(format!("region dimension {d} out of range")));
    }
    let full = (1u32 << d) - 1;
    let ic: Vec<usize> = (0..d).filter(|k| i_mask & (1 << k) == 0).collect();
    if i_mask & full == full || ic.iter().map(|&k| grids[k].support).sum::<f64>() <= 1.0 {
        return Ok(Estimate::exact(0.0));
    }
    let inner = *ic.last().unwrap();
    let outer: Vec<usize> = (0..d).filter(|&k| k != inner).collect();
    let sign: Vec<f64> = outer.iter().map(|&k| if i_mask & (1 << k) != 0 { 1.0 } else { -1.0 }).collect();
    let masses: Vec<f64> = grids.iter().map(|g| g.abs_mass()).collect();
    let grid_err: f64 = (0..d)
        .map(|k| grids[k].error * grids[k].support * (0..d).filter(|&l| l != k).map(|l| masses[l]).product::<f64>())
        .sum();
    let est = if d <= 4 {
        let v1 = nested(grids, inner, &outer, &sign, 8);
        let v2 = nested(grids, inner, &outer, &sign, 12);
        Estimate::new(v2, (v2 - v1).abs())
    } else {
        qmc_region(grids, inner, &outer, &sign, qmc)
    };
    Ok(Estimate::new(est.value, est.error + grid_err))
}

fn nested(grids: &[&TransformGrid], inner: usize, outer: &[usize], sign: &[f64], nodes: usize) -> f64 {
    // Breakpoints in the running offset c for each level, innermost first.
    let gi = grids[inner];
    let mut levels: Vec<Vec<f64>> = vec![{
        let mut b = gi.knots().to_vec();
        b.push(0.0);
        b
    }];
    for (idx, &k) in outer.iter().enumerate().rev() {
        let prev = levels.last().unwrap();
        let mut next = Vec::with_capacity(prev.len() * grids[k].knots().len());
        for &b in prev {
            for &kn in grids[k].knots() {
                next.push(b - sign[idx] * kn);
            }
        }
        next.sort_by(f64::total_cmp);
        next.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        levels.push(next);
    }
    levels.reverse();
    // levels[j] = breakpoints of the function integrated from outer level j inward (levels[d−1] = inner).
    let gl = GaussLegendre::new(nodes);
    fn go(
        level: usize,
        c: f64,
        grids: &[&TransformGrid],
        inner: usize,
        outer: &[usize],
        sign: &[f64],
        levels: &[Vec<f64>],
        gl: &GaussLegendre,
    ) -> f64 {
        if level == outer.len() {
            return grids[inner].tail(c.max(0.0));
        }
        let g = grids[outer[level]];
        let e = sign[level];
        let mut pts = g.knots().to_vec();
        pts.extend(levels[level + 1].iter().map(|b| (b - c) / e));
        let br = breakpoints(pts, 0.0, g.support());
        gl.integrate_panels(&br, |t| {
            let u = g.value(t);
            if u == 0.0 {
                0.0
            } else {
                u * go(level + 1, c + e * t, grids, inner, outer, sign, levels, gl)
            }
        })
    }
    go(0, 1.0, grids, inner, outer, sign, &levels, &gl)
}

fn qmc_region(grids: &[&TransformGrid], inner: usize, outer: &[usize], sign: &[f64], p: QmcParams) -> Estimate {
    let dim = outer.len();
    let vol: f64 = outer.iter().map(|&k| grids[k].support()).product();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let shifts: Vec<Vec<f64>> = (0..p.shifts).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    let reps: Vec<f64> = shifts
        .par_iter()
        .map(|shift| {
            let mut x = vec![0.0; dim];
            let mut acc = 0.0;
            for i in 1..=p.points {
                halton(i, dim, &mut x);
                let mut c = 1.0;
                let mut w = 1.0;
                for (j, &k) in outer.iter().enumerate() {
                    let t = ((x[j] + shift[j]) % 1.0) * grids[k].support();
                    w *= grids[k].value(t);
                    c += sign[j] * t;
                }
                if w != 0.0 {
                    acc += w * grids[inner].tail(c.max(0.0));
                }
            }
            acc * vol / p.points as f64
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

    fn s4(s: f64) -> TestFn {
        TestFn::sinc4(s).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        for s in [0.5, 1.0, 1.5] {
            let f = tri(s);
            assert_eq!(f.eval_fhat(0.0), 1.0);
            assert_eq!(f.eval_f(0.0), s);
            assert_eq!(f.eval_fhat(s), 0.0);
            assert_eq!(f.eval_fhat(-s), 0.0);
            let g = s4(s);
            assert!((g.eval_fhat(0.0) - s / 3.0).abs() < 1e-15);
            assert!((g.eval_f(0.0) - s * s / 4.0).abs() < 1e-15);
            assert!((f.tail(0.0) - f.eval_f(0.0) / 2.0).abs() < 1e-15);
            assert!((g.tail(0.0) - g.eval_f(0.0) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sinc4_matches_numeric_self_convolution() {
        // Independent oracle: brute convolution of two half-width triangles.
        for s in [0.6, 1.0, 1.7] {
            let half = tri(s / 2.0);
            let g = s4(s);
            let gl = GaussLegendre::new(20);
            for k in 0..40 {
                let u = k as f64 * s / 39.0 * 1.1;
                let br = breakpoints(vec![0.0, u, u - s / 2.0, u + s / 2.0, -s / 2.0, s / 2.0], -s, s);
                let conv = gl.integrate_panels(&br, |v| half.eval_fhat(v) * half.eval_fhat(u - v));
                assert!((conv - g.eval_fhat(u)).abs() < 1e-13, "s={s} u={u}");
            }
        }
    }

    #[test]
    fn tails_match_quadrature() {
        let gl = GaussLegendre::new(10);
        for f in [tri(1.3), s4(1.3), tri(0.7).scaled(2.0).plus(&s4(1.1))] {
            for k in 0..30 {
                let t = k as f64 * 0.05;
                let mut pts = f.knots();
                pts.push(t);
                let direct = gl.integrate_panels(&breakpoints(pts, t, f.support().max(t)), |u| f.eval_fhat(u));
                assert!((direct - f.tail(t)).abs() < 1e-14, "{f} t={t}");
            }
        }
    }

    #[test]
    fn parseval_both_families() {
        let gl = GaussLegendre::new(12);
        for s in [0.5, 1.0, 1.5] {
            for f in [tri(s), s4(s)] {
                let fhat2 = 2.0 * gl.integrate_panels(&breakpoints(f.knots(), 0.0, s), |u| f.eval_fhat(u).powi(2));
                let f2 = product_at_zero(&[&f, &f]);
                assert!((f2.value - fhat2).abs() < 1e-8, "{f}: {} vs {fhat2}", f2.value);
            }
        }
    }

    #[test]
    fn positivity_on_grid() {
        for f in [tri(0.9), s4(1.4)] {
            for k in -300..300 {
                let x = k as f64 * 0.037;
                assert!(f.eval_f(x) >= 0.0 && f.eval_fhat(x / 100.0) >= 0.0);
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let f = TestFn::parse("triangle:s=1.5").unwrap();
        assert_eq!(f, tri(1.5));
        assert_eq!(f.to_string(), "triangle:s=1.5");
        let g: TestFn = "2.5*sinc4:s=0.9 + triangle:s=1".parse().unwrap();
        assert_eq!(g.to_string(), "2.5*sinc4:s=0.9+triangle:s=1");
        assert_eq!(TestFn::parse(&g.to_string()).unwrap(), g);
        match TestFn::parse("triangle:s=1+cosine:s=2") {
            Err(Error::Parse { col, .. }) => assert_eq!(col, 14),
            other => panic!("{other:?}"),
        }
        match TestFn::parse("sinc4:s=-1") {
            Err(Error::Parse { col, .. }) => assert_eq!(col, 9),
            other => panic!("{other:?}"),
        }
        assert!(TestFn::parse("triangle").is_err());
        assert!(TestFn::parse("triangle:t=1").is_err());
    }

    #[test]
    fn product_transform_examples() {
        let a = tri(1.0);
        let single = product_transform(&[&a], GridParams::default()).unwrap();
        assert!(single.is_exact() && single.value(0.3) == a.eval_fhat(0.3));
        let b = tri(0.9);
        let g = product_transform(&[&a, &b], GridParams::default()).unwrap();
        // Û(0) = ∫ f̂_a f̂_b = time-side ∫ f_a f_b.
        let direct = product_at_zero(&[&a, &b]);
        assert!((g.value(0.0) - direct.value).abs() <= g.error() + direct.error + 1e-9);
        let two = product_transform(&[&a, &a], GridParams::unrestricted()).unwrap();
        assert!((two.value(0.0) - 2.0 / 3.0).abs() < 1e-7, "{}", two.value(0.0));
        for k in 0..50 {
            let t = k as f64 * 0.0417;
            assert_eq!(two.value(t), two.value(-t));
        }
        assert!(product_transform(&[&a, &tri(1.0)], GridParams::default()).is_err());
    }

    #[test]
    fn support_certificate_and_associativity() {
        let (a, b, c) = (s4(0.6), tri(0.5), s4(0.4));
        let abc = product_transform(&[&a, &b, &c], GridParams::default()).unwrap();
        let cab = product_transform(&[&c, &a, &b], GridParams::default()).unwrap();
        let total = 1.5;
        for (i, v) in abc.values().iter().enumerate() {
            if i as f64 * abc.spacing() >= total {
                assert!(v.abs() <= 1e-12);
            }
        }
        let tol = 2.0 * (abc.error() + cab.error()) + 1e-14;
        for k in 0..60 {
            let t = k as f64 * 0.025;
            assert!((abc.value(t) - cab.value(t)).abs() <= tol, "t={t}");
        }
    }

    #[test]
    fn pair_integral_examples() {
        let g1 = product_transform(&[&tri(1.0)], GridParams::default()).unwrap();
        let g2 = product_transform(&[&tri(2.0)], GridParams::default()).unwrap();
        let zero = product_transform(&[&TestFn::zero()], GridParams::default()).unwrap();
        assert!((pair_integral(&g1, &g1).unwrap().value - 1.0 / 6.0).abs() < 1e-14);
        assert!((pair_integral(&g2, &g2).unwrap().value - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(pair_integral(&g1, &zero).unwrap().value, 0.0);
        // grid route against exact route on a product transform
        let (a, b) = (tri(0.5), tri(0.7));
        let ab = product_transform(&[&a, &b], GridParams::default()).unwrap();
        let p = pair_integral(&ab, &g1).unwrap();
        let gl = GaussLegendre::new(16);
        let conv = |t: f64| {
            let br = breakpoints(vec![-0.5, 0.0, 0.5, t - 0.7, t, t + 0.7], -0.5, 0.5);
            gl.integrate_panels(&br, |v| a.eval_fhat(v) * b.eval_fhat(t - v))
        };
        let br = breakpoints(vec![0.2, 0.5, 0.7, 1.0], 0.0, 1.0);
        let exact = 2.0 * gl.integrate_panels(&br, |t| conv(t) * (1.0 - t) * t);
        assert!((p.value - exact).abs() <= p.error.max(1e-9), "{} vs {exact} (err {})", p.value, p.error);
        assert!(p.error < 1e-6);
    }

    #[test]
    fn region_examples() {
        let g = |s: f64| product_transform(&[&tri(s)], GridParams::default()).unwrap();
        assert_eq!(region_integral(0b1, &[&g(1.5)]).unwrap().value, 0.0);
        assert!((region_integral(0, &[&g(1.5)]).unwrap().value - 1.0 / 12.0).abs() < 1e-14);
        assert_eq!(region_integral(0, &[&g(1.0)]).unwrap().value, 0.0);
        assert_eq!(region_integral(0, &[&g(0.4), &g(0.4)]).unwrap().value, 0.0);
    }

    fn region_mc(i_mask: u32, fs: &[TestFn], n: usize, seed: u64) -> (f64, f64) {
        // Plain Monte Carlo over the box, no tail trick.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = fs.len();
        let vol: f64 = fs.iter().map(|f| f.support()).product();
        let mut xs = Vec::with_capacity(n);
        for _ in 0..n {
            let t: Vec<f64> = fs.iter().map(|f| rng.random::<f64>() * f.support()).collect();
            let (si, sc): (f64, f64) = (0..d).fold((0.0, 0.0), |(a, b), k| {
                if i_mask & (1 << k) != 0 { (a + t[k], b) } else { (a, b + t[k]) }
            });
            let w = if si <= sc - 1.0 { fs.iter().zip(&t).map(|(f, &x)| f.eval_fhat(x)).product::<f64>() } else { 0.0 };
            xs.push(w * vol);
        }
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (m, (v / n as f64).sqrt())
    }

    #[test]
    fn region_against_monte_carlo() {
        let fs = [s4(1.2), tri(0.9), s4(0.8)];
        let grids: Vec<TransformGrid> =
            fs.iter().map(|f| product_transform(&[f], GridParams::default()).unwrap()).collect();
        let refs: Vec<&TransformGrid> = grids.iter().collect();
        for mask in [0u32, 0b001, 0b010, 0b100, 0b011] {
            let r = region_integral(mask, &refs).unwrap();
            let (m, se) = region_mc(mask, &fs, 400_000, 7 + mask as u64);
            assert!((r.value - m).abs() < 5.0 * se + 1e-6, "mask {mask}: {} vs {m} ± {se}", r.value);
        }
    }

    #[test]
    fn region_two_dim_closed_form() {
        // triangles s=1 and s=0.8, I = ∅: ∫∫_{t1+t2 ≥ 1} f̂1 f̂2, against a 1D integral of tails.
        let (a, b) = (tri(1.0), tri(0.8));
        let ga = product_transform(&[&a], GridParams::default()).unwrap();
        let gb = product_transform(&[&b], GridParams::default()).unwrap();
        let r = region_integral(0, &[&ga, &gb]).unwrap();
        let gl = GaussLegendre::new(20);
        let want = gl.integrate_panels(&[0.0, 0.2, 1.0], |t| a.eval_fhat(t) * b.tail(1.0 - t));
        assert!((r.value - want).abs() < 1e-13);
        // I = {2}: t2 ≤ t1 − 1 needs t1 ≥ 1, impossible for s = 1
        assert!(region_integral(0b10, &[&ga, &gb]).unwrap().value.abs() < 1e-15);
    }

    #[test]
    fn high_dimension_uses_qmc() {
        let fs: Vec<TestFn> = (0..5).map(|k| tri(0.3 + 0.02 * k as f64)).collect();
        let grids: Vec<TransformGrid> =
            fs.iter().map(|f| product_transform(&[f], GridParams::default()).unwrap()).collect();
        let refs: Vec<&TransformGrid> = grids.iter().collect();
        let r = region_integral(0b00001, &refs).unwrap();
        let (m, se) = region_mc(0b00001, &fs, 400_000, 3);
        assert!(r.error > 0.0 && (r.value - m).abs() < 5.0 * (se + r.error), "{r:?} vs {m} ± {se}");
    }

    #[test]
    fn lattice_transform_is_discrete_convolution() {
        let (a, b) = (tri(0.5), tri(0.75));
        let g = 4usize;
        let v = lattice_transform(&[&a, &b], g);
        let h = 1.0 / 8.0;
        for (r, &x) in v.iter().enumerate() {
            let mut s = 0.0;
            for j in -10i64..=10 {
                s += a.eval_fhat(j as f64 * h) * b.eval_fhat((r as i64 - j) as f64 * h);
            }
            assert!((x - h * s).abs() < 1e-15);
        }
        assert_eq!(lattice_transform(&[&a], g)[0], 1.0);
    }
}
