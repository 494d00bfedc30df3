//! Exact statistics of quadratic L-functions over F_q[x] and their random-matrix predictions.
//!
//! The function-field side (`ffq`, `lfun`, `ensemble`, `charsum`, `combinat`) is exact
//! integer and rational arithmetic; the prediction side (`testfn`, `gao`, `rmt`) is
//! numerical quadrature with reported error estimates.

pub mod budget;
pub mod error;
pub mod ffq;
pub mod lfun;
pub mod combinat;
pub mod charsum;
pub mod quad;
pub mod testfn;
pub mod ensemble;
pub mod gao;
pub mod rmt;

pub use budget::Budget;
pub use error::{Error, Result};
pub use ffq::{FieldOrder, MonicPoly, Poly, PrimePoly};
