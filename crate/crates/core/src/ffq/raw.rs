//! Slice-level kernels shared by the polynomial types and the hot enumeration loops.
//!
//! Coefficient vectors are low-to-high and trimmed (no trailing zeros); the zero
//! polynomial is the empty vector.

use super::FieldOrder;

#[inline]
pub fn trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

pub fn add(a: &[u64], b: &[u64], f: FieldOrder) -> Vec<u64> {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut out = long.to_vec();
    for (o, &s) in out.iter_mut().zip(short) {
        *o = f.add(*o, s);
    }
    trim(&mut out);
    out
}

pub fn sub(a: &[u64], b: &[u64], f: FieldOrder) -> Vec<u64> {
    let mut out = a.to_vec();
    if out.len() < b.len() {
        out.resize(b.len(), 0);
    }
    for (o, &s) in out.iter_mut().zip(b) {
        *o = f.sub(*o, s);
    }
    trim(&mut out);
    out
}

pub fn mul(a: &[u64], b: &[u64], f: FieldOrder) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Products are below 997^2, so a u64 accumulator cannot overflow at any realistic degree.
    let mut acc = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            acc[i + j] += x * y;
        }
    }
    let q = f.q();
    for c in acc.iter_mut() {
        *c %= q;
    }
    trim(&mut acc);
    acc
}

/// Reduces `a` modulo the monic polynomial `m` in place.
pub fn rem_monic(a: &mut Vec<u64>, m: &[u64], f: FieldOrder) {
    let dm = m.len() - 1;
    debug_assert_eq!(m[dm], 1);
    if a.len() <= dm {
        return;
    }
    let q = f.q();
    for i in (dm..a.len()).rev() {
        let c = a[i] % q;
        if c == 0 {
            continue;
        }
        let neg = q - c;
        let base = i - dm;
        for j in 0..dm {
            a[base + j] = (a[base + j] + neg * m[j]) % q;
        }
        a[i] = 0;
    }
    a.truncate(dm);
    trim(a);
}

/// Quotient and remainder of `a` by the nonzero polynomial `b`.
pub fn divmod(a: &[u64], b: &[u64], f: FieldOrder) -> (Vec<u64>, Vec<u64>) {
    let db = b.len() - 1;
    if a.len() <= db {
        return (Vec::new(), a.to_vec());
    }
    let lead_inv = f.inv(b[db]);
    let mut r = a.to_vec();
    let mut quot = vec![0u64; a.len() - db];
    for i in (db..r.len()).rev() {
        let c = f.mul(r[i], lead_inv);
        if c == 0 {
            continue;
        }
        quot[i - db] = c;
        for j in 0..=db {
            r[i - db + j] = f.sub(r[i - db + j], f.mul(c, b[j]));
        }
    }
    r.truncate(db);
    trim(&mut r);
    trim(&mut quot);
    (quot, r)
}

pub fn make_monic(a: &mut [u64], f: FieldOrder) {
    if let Some(&lead) = a.last() {
        if lead != 1 {
            let inv = f.inv(lead);
            for c in a.iter_mut() {
                *c = f.mul(*c, inv);
            }
        }
    }
}

/// Monic gcd (empty when both inputs are zero).
pub fn gcd(a: &[u64], b: &[u64], f: FieldOrder) -> Vec<u64> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    while !y.is_empty() {
        make_monic(&mut y, f);
        rem_monic(&mut x, &y, f);
        std::mem::swap(&mut x, &mut y);
    }
    make_monic(&mut x, f);
    x
}

pub fn derivative(a: &[u64], f: FieldOrder) -> Vec<u64> {
    let mut out: Vec<u64> = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| f.mul(c, i as u64 % f.q()))
        .collect();
    trim(&mut out);
    out
}

pub fn mul_mod(a: &[u64], b: &[u64], m: &[u64], f: FieldOrder) -> Vec<u64> {
    let mut p = mul(a, b, f);
    rem_monic(&mut p, m, f);
    p
}

/// `base^e mod m` for monic `m`.
pub fn pow_mod(base: &[u64], mut e: u64, m: &[u64], f: FieldOrder) -> Vec<u64> {
    let mut acc = vec![1u64];
    rem_monic(&mut acc, m, f);
    let mut b = base.to_vec();
    rem_monic(&mut b, m, f);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(&acc, &b, m, f);
        }
        e >>= 1;
        if e > 0 {
            b = mul_mod(&b, &b, m, f);
        }
    }
    acc
}

pub fn eval(a: &[u64], x: u64, f: FieldOrder) -> u64 {
    a.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c))
}
