//! Certified numerics for p-compact sets, p-compact homogeneous polynomials
//! and Taylor models of holomorphic maps between finite-dimensional `ℓ_p`
//! spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod counterex;
pub mod error;
pub mod factor;
pub mod homopoly;
mod linalg;
pub mod lpcore;
pub mod pconvex;
pub mod taylor;

pub use error::{Error, Result};
pub use lpcore::{conjugate_exponent, lp_norm, CVector, Exponent, NormInterval, TailedSequence, C64};
