use crate::{Error, Result};

/// The prime field F_q for an odd prime 3 ≤ q ≤ 997.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldOrder {
    q: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldOrder {
    pub fn new(q: u64) -> Result<Self> {
        if (3..=997).contains(&q) && q % 2 == 1 && is_prime(q) {
            Ok(FieldOrder { q })
        } else {
            Err(Error::InvalidField(q))
        }
    }

    #[inline]
    pub fn q(self) -> u64 {
        self.q
    }

    #[inline]
    pub fn reduce(self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut acc = 1;
        a %= self.q;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `a` must be nonzero mod q.
    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(a % self.q != 0);
        self.pow(a, self.q - 2)
    }

    /// Legendre symbol of `a` modulo q.
    pub fn legendre(self, a: u64) -> i8 {
        let a = a % self.q;
        if a == 0 {
            0
        } else if self.pow(a, (self.q - 1) / 2) == 1 {
            1
        } else {
            -1
        }
    }

    /// True when (q−1)/2 is odd, i.e. q ≡ 3 mod 4, so reciprocity can flip signs.
    #[inline]
    pub fn reciprocity_flips(self) -> bool {
        (self.q - 1) / 2 % 2 == 1
    }

    /// q^e as an exact big integer.
    pub fn pow_big(self, e: u32) -> num_bigint::BigInt {
        num_bigint::BigInt::from(self.q).pow(e)
    }
}

impl std::fmt::Display for FieldOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F_{}", self.q)
    }
}
