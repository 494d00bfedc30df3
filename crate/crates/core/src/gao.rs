//! The combinatorial side of the n-level density: D(u_1..u_m), B(u_1..u_m) and A(f_1..f_n).
//!
//! Every quantity is assembled from three primitives in [`crate::testfn`]: block transforms
//! Û_F, pair integrals ∫ Û_a Û_b |t| dt and half-space region integrals.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::combinat::{pairings, partitions};
use crate::quad::Estimate;
use crate::testfn::{
    check_supports, pair_integral, product_at_zero, product_transform, region_integral, GridParams, TestFn,
    TransformGrid, CELLS_PER_SUPPORT, SUPPORT_LIMIT,
};
use crate::{Error, Result};

/// Largest n accepted by [`a_value`].
pub const MAX_N: usize = 8;

/// An ordered list of test functions with Σ s_k < 2.
#[derive(Clone, Debug)]
pub struct FnSet {
    fs: Vec<TestFn>,
    total: f64,
}

impl FnSet {
    pub fn new(fs: Vec<TestFn>) -> Result<Self> {
        if fs.is_empty() || fs.len() > MAX_N {
            return Err(Error::Domain(format!("need between 1 and {MAX_N} test functions, got {}", fs.len())));
        }
        let refs: Vec<&TestFn> = fs.iter().collect();
        let total = check_supports(&refs, SUPPORT_LIMIT)?;
        Ok(FnSet { fs, total })
    }

    pub fn fns(&self) -> &[TestFn] {
        &self.fs
    }

    pub fn len(&self) -> usize {
        self.fs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fs.is_empty()
    }

    pub fn total_support(&self) -> f64 {
        self.total
    }
}

/// Memoized evaluator; blocks are bitmasks over the function indices.
struct Engine<'a> {
    fs: &'a [TestFn],
    params: GridParams,
    grids: HashMap<u32, TransformGrid>,
    hat0: HashMap<u32, Estimate>,
    pairs: HashMap<(u32, u32), Estimate>,
    d_memo: HashMap<Vec<u32>, Estimate>,
    b_memo: HashMap<Vec<u32>, Estimate>,
}

fn members(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |k| mask & (1 << k) != 0)
}

impl<'a> Engine<'a> {
    fn new(fs: &'a [TestFn]) -> Self {
        let min_s = fs.iter().map(|f| f.min_support()).fold(f64::INFINITY, f64::min);
        let h = if min_s.is_finite() { min_s / CELLS_PER_SUPPORT } else { 1.0 / CELLS_PER_SUPPORT };
        Engine {
            fs,
            params: GridParams { h: Some(h), ..GridParams::default() },
            grids: HashMap::new(),
            hat0: HashMap::new(),
            pairs: HashMap::new(),
            d_memo: HashMap::new(),
            b_memo: HashMap::new(),
        }
    }

    /// Builds every block transform up front, in parallel.
    fn prepare(&mut self, masks: &[u32]) -> Result<()> {
        let todo: Vec<u32> = masks.iter().copied().filter(|m| !self.grids.contains_key(m)).collect();
        let built: Vec<Result<(u32, TransformGrid)>> = todo
            .par_iter()
            .map(|&m| {
                let fs: Vec<&TestFn> = members(m).map(|k| &self.fs[k]).collect();
                Ok((m, product_transform(&fs, self.params)?))
            })
            .collect();
        for b in built {
            let (m, g) = b?;
            self.grids.insert(m, g);
        }
        Ok(())
    }

    fn grid(&mut self, mask: u32) -> Result<&TransformGrid> {
        if !self.grids.contains_key(&mask) {
            self.prepare(&[mask])?;
        }
        Ok(&self.grids[&mask])
    }

    /// U_F(0) = Π f_k(0), closed form.
    fn u0(&self, mask: u32) -> Estimate {
        Estimate::exact(members(mask).map(|k| self.fs[k].eval_f(0.0)).product())
    }

    /// Û_F(0): the x-side integral or the grid value, whichever carries the smaller error.
    fn uhat0(&mut self, mask: u32) -> Result<Estimate> {
        if let Some(v) = self.hat0.get(&mask) {
            return Ok(*v);
        }
        let fs: Vec<&TestFn> = members(mask).map(|k| &self.fs[k]).collect();
        let x_side = product_at_zero(&fs);
        let g = self.grid(mask)?;
        let grid_side = Estimate::new(g.value(0.0), g.error());
        let v = if x_side.error <= grid_side.error { x_side } else { grid_side };
        self.hat0.insert(mask, v);
        Ok(v)
    }

    fn pair(&mut self, a: u32, b: u32) -> Result<Estimate> {
        let key = (a.min(b), a.max(b));
        if let Some(v) = self.pairs.get(&key) {
            return Ok(*v);
        }
        self.prepare(&[a, b])?;
        let v = pair_integral(&self.grids[&a], &self.grids[&b])?;
        self.pairs.insert(key, v);
        Ok(v)
    }

    /// Σ over perfect pairings of the blocks of Π pair integrals (0 for odd counts, 1 for none).
    fn pairing_sum(&mut self, blocks: &[u32]) -> Result<Estimate> {
        if blocks.len() % 2 == 1 {
            return Ok(Estimate::exact(0.0));
        }
        let idx: Vec<usize> = (0..blocks.len()).collect();
        let mut total = Estimate::exact(0.0);
        for p in pairings(&idx) {
            let mut prod = Estimate::exact(1.0);
            for (i, j) in p {
                prod = prod * self.pair(blocks[i], blocks[j])?;
            }
            total = total + prod;
        }
        Ok(total)
    }

    /// D = −2^{m−1} Σ_{I} (−1)^{|I|} region(I).
    fn d(&mut self, blocks: &[u32]) -> Result<Estimate> {
        let mut key = blocks.to_vec();
        key.sort_unstable();
        if let Some(v) = self.d_memo.get(&key) {
            return Ok(*v);
        }
        let m = key.len();
        self.prepare(&key)?;
        let grids: Vec<&TransformGrid> = key.iter().map(|k| &self.grids[k]).collect();
        let terms: Vec<Result<Estimate>> = (0u32..1 << m)
            .into_par_iter()
            .map(|i| {
                let sign = if i.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                Ok(region_integral(i, &grids)?.scale(sign))
            })
            .collect();
        let mut sum = Estimate::exact(0.0);
        for t in terms {
            sum = sum + t?;
        }
        let v = sum.scale(-(2f64.powi(m as i32 - 1)));
        self.d_memo.insert(key, v);
        Ok(v)
    }

    /// B = 2^{m/2} Σ_pairings Π + Σ_{S ⊊ blocks} 2^{|S|/2} Σ_pairings(S) Π · D(S^c).
    fn b(&mut self, blocks: &[u32]) -> Result<Estimate> {
        let mut key = blocks.to_vec();
        key.sort_unstable();
        if let Some(v) = self.b_memo.get(&key) {
            return Ok(*v);
        }
        let m = key.len();
        let mut total = self.pairing_sum(&key)?.scale(2f64.powf(m as f64 / 2.0));
        for s in 0u32..(1 << m) - 1 {
            if s.count_ones() % 2 == 1 {
                continue;
            }
            let inside: Vec<u32> = (0..m).filter(|i| s & (1 << i) != 0).map(|i| key[i]).collect();
            let outside: Vec<u32> = (0..m).filter(|i| s & (1 << i) == 0).map(|i| key[i]).collect();
            let p = self.pairing_sum(&inside)?.scale(2f64.powf(inside.len() as f64 / 2.0));
            if p.value == 0.0 && p.error == 0.0 {
                continue;
            }
            total = total + p * self.d(&outside)?;
        }
        self.b_memo.insert(key, total);
        Ok(total)
    }
}

fn singletons(n: usize) -> Vec<u32> {
    (0..n).map(|k| 1u32 << k).collect()
}

/// D(u_1, …, u_m) with each u_k its own block.
pub fn d_value(us: &FnSet) -> Result<Estimate> {
    Engine::new(us.fns()).d(&singletons(us.len()))
}

/// B(u_1, …, u_m) with each u_k its own block.
pub fn b_value(us: &FnSet) -> Result<Estimate> {
    Engine::new(us.fns()).b(&singletons(us.len()))
}

/// A(f_1, …, f_n): the full partition / subset / pairing expansion.
pub fn a_value(fs: &FnSet) -> Result<Estimate> {
    let n = fs.len();
    let mut e = Engine::new(fs.fns());
    let parts = partitions(n)?;
    let mut masks: Vec<u32> = parts.iter().flat_map(|p| p.block_masks()).collect();
    masks.sort_unstable();
    masks.dedup();
    e.prepare(&masks)?;
    let mut total = Estimate::exact(0.0);
    for p in &parts {
        let blocks = p.block_masks();
        let nu = blocks.len();
        let weight = (-2f64).powi((n - nu) as i32)
            * blocks.iter().map(|m| (1..m.count_ones() as usize).product::<usize>() as f64).product::<f64>();
        for s in 0u32..(1 << nu) {
            let mut outer = Estimate::exact(weight);
            for l in (0..nu).filter(|l| s & (1 << l) == 0) {
                outer = outer * e.uhat0(blocks[l])?;
            }
            if outer.value == 0.0 && outer.error == 0.0 {
                continue;
            }
            let mut inner = Estimate::exact(0.0);
            // S2 ranges over subsets of S.
            let mut s2 = s;
            loop {
                let rest = s & !s2;
                let mut term = Estimate::exact((-0.5f64).powi(rest.count_ones() as i32));
                for l in (0..nu).filter(|l| rest & (1 << l) != 0) {
                    term = term * e.u0(blocks[l]);
                }
                let chosen: Vec<u32> = (0..nu).filter(|l| s2 & (1 << l) != 0).map(|l| blocks[l]).collect();
                let sign = if chosen.len() % 2 == 0 { 1.0 } else { -1.0 };
                term = term * e.b(&chosen)?.scale(sign);
                inner = inner + term;
                if s2 == 0 {
                    break;
                }
                s2 = (s2 - 1) & s;
            }
            total = total + outer * inner;
        }
    }
    Ok(total)
}

/// [`a_value`] with the reported error required to stay within `target`.
pub fn a_value_checked(fs: &FnSet, target: f64) -> Result<Estimate> {
    let v = a_value(fs)?;
    if v.error > target {
        return Err(Error::Accuracy { what: "A(f)".into(), target, estimate: v.error });
    }
    Ok(v)
}

/// f̂(0) − ½ f(0) + ∫_1^∞ f̂: the n = 1 value in closed form.
pub fn a_one_closed_form(f: &TestFn) -> f64 {
    f.eval_fhat(0.0) - 0.5 * f.eval_f(0.0) + f.tail(1.0)
}
