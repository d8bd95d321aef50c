//! Dense complex linear algebra and an exact Gaussian-rational backend.

pub mod exact;
pub mod inverse;
pub mod matrix;
pub mod svd;

pub use inverse::{inverse_margin, pseudo_inverse, try_inverse};
pub use matrix::{product, Matrix, Scalar};
pub use svd::{rank, spectral_norm, Svd};
