//! Outer generalized inverses with prescribed idempotents in `M_n(ℂ)`.
//!
//! The crate computes `b` with `bab = b`, `col(b) = col(p)` and
//! `null(b) = col(q)` for a square matrix `a` and idempotents `p`, `q`,
//! together with the inner, strict and group-inverse variants, and
//! evaluates the stable-perturbation equivalences and the condition-number
//! error bounds for those inverses.
//!
//! Everything here is `no_std` with `alloc`. Matrices are dense and complex;
//! the algebra norm is the spectral norm and right ideals `x·M_n(ℂ)` are
//! represented by the column space of `x` (see [`subspace`]).
//!
//! ```
//! use ginv_core::{gen_inverse, Idempotent, Matrix, Tolerances};
//!
//! let tol = Tolerances::default();
//! let a = Matrix::from_real_diag(&[1.0, 2.0, 0.0]);
//! let p = Idempotent::new(Matrix::from_real_diag(&[1.0, 1.0, 0.0]), &tol).unwrap();
//! let q = Idempotent::new(Matrix::from_real_diag(&[0.0, 0.0, 1.0]), &tol).unwrap();
//! let res = gen_inverse::compute_outer_pql(&a, &p, &q, &tol).unwrap();
//! assert!(res.b.approx_eq(&Matrix::from_real_diag(&[1.0, 0.5, 0.0]), 1e-12));
//! ```
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod gen_inverse;
pub mod idempotent;
pub mod linalg;
pub mod perturbation;
pub mod rng;
pub mod subspace;
pub mod tol;

pub use error::{Error, Result};
pub use idempotent::Idempotent;
pub use linalg::exact::{ExactMatrix, ExactScalar};
pub use linalg::matrix::{Matrix, Scalar};
pub use subspace::{GapResult, Subspace};
pub use tol::Tolerances;
