//! Exact arithmetic in F_q[x] for odd primes q.

mod field;
mod jacobi;
mod poly;
mod primes;
pub mod raw;

pub use field::FieldOrder;
pub use jacobi::{jacobi, jacobi_raw};
pub use poly::{monic_polys, MonicPoly, Poly};
pub use primes::{
    count_prime_factors_squarefree, is_irreducible, is_square, is_squarefree, mobius_mu, prime_count,
    primes_of_degree, PrimePoly,
};
