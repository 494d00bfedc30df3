//! Quadrature building blocks: Gauss–Legendre rules, Halton points, value/error pairs.

use std::ops::{Add, Mul, Neg, Sub};

/// A numerical value with an absolute error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error: error.abs() }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Estimate { value: c * self.value, error: c.abs() * self.error }
    }
}

impl Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate { value: self.value + o.value, error: self.error + o.error }
    }
}

impl Sub for Estimate {
    type Output = Estimate;
    fn sub(self, o: Estimate) -> Estimate {
        Estimate { value: self.value - o.value, error: self.error + o.error }
    }
}

impl Neg for Estimate {
    type Output = Estimate;
    fn neg(self) -> Estimate {
        Estimate { value: -self.value, error: self.error }
    }
}

impl Mul for Estimate {
    type Output = Estimate;
    fn mul(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value * o.value,
            error: self.value.abs() * o.error + o.value.abs() * self.error + self.error * o.error,
        }
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::default(), |a, b| a + b)
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// n-point rule by Newton iteration on P_n from the Chebyshev initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// (node, weight) pairs mapped onto [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (m + r * x, r * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over consecutive breakpoints (sorted, at least two).
    pub fn integrate_panels(&self, breaks: &[f64], mut f: impl FnMut(f64) -> f64) -> f64 {
        breaks.windows(2).filter(|w| w[1] > w[0]).map(|w| self.integrate(w[0], w[1], &mut f)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Sorted, deduplicated breakpoints restricted to [lo, hi], always including both ends.
pub fn breakpoints(mut pts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    pts.retain(|x| x.is_finite() && *x > lo && *x < hi);
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    let tol = 1e-13 * (1.0 + hi.abs().max(lo.abs()));
    pts.dedup_by(|a, b| (*a - *b).abs() <= tol);
    pts
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `i` in `base`.
pub fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / b as f64;
    let (mut x, mut f) = (0.0, inv);
    while i > 0 {
        x += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    x
}

/// The i-th point of the d-dimensional Halton sequence (d ≤ 16).
pub fn halton(i: u64, d: usize, out: &mut [f64]) {
    assert!(d <= PRIMES.len(), "Halton dimension above {}", PRIMES.len());
    for (k, o) in out.iter_mut().take(d).enumerate() {
        *o = radical_inverse(i, PRIMES[k]);
    }
}

/// Mean and standard error of independent replicate estimates.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
