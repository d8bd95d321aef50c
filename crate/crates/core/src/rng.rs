//! Reproducible random streams.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)` and positioned on stream `stream`, so that scenario
//! `i` of a campaign with seed `s` always reads the same words regardless of
//! evaluation order or platform.
//!
//! Uniforms use the top 53 bits of a `u64` word: `u = (w >> 11) · 2⁻⁵³`.
//! Standard normals use the Box–Muller transform on two uniforms
//! `u₁, u₂`: `r = sqrt(-2 ln(1 - u₁))`, `θ = 2π u₂`, giving `r cos θ` then
//! `r sin θ`. A complex Gaussian entry is `(g₁ + i g₂) / √2`. The math
//! functions come from `libm`, so the streams do not depend on the host libm.

use alloc::vec::Vec;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::linalg::{Matrix, Scalar};

#[derive(Clone, Debug)]
pub struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        GaussianStream { rng, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_range(&mut self, lo: usize, hi: usize) -> usize {
        assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.rng.next_u64() % span) as usize
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(g) = self.spare.take() {
            return g;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-2.0 * libm::log(1.0 - u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }

    pub fn complex_gaussian(&mut self) -> Scalar {
        let re = self.gaussian();
        let im = self.gaussian();
        Scalar::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
    }

    /// Matrix of independent complex Gaussian entries, row-major fill order.
    pub fn matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |_, _| self.complex_gaussian())
    }

    /// `n × k` matrix with orthonormal columns (Gaussian block, orthonormalized).
    pub fn orthonormal(&mut self, n: usize, k: usize) -> Matrix {
        self.matrix(n, k).orthonormalize_columns()
    }

    pub fn unitary(&mut self, n: usize) -> Matrix {
        self.orthonormal(n, n)
    }

    /// `U·diag(σ)·V^*` with `σ_i = exp(uniform(-L, L))`, `L = ln(cond)/2`, so the
    /// condition number is at most `cond`.
    pub fn well_conditioned(&mut self, n: usize, cond: f64) -> Matrix {
        self.with_rank(n, n, cond)
    }

    /// `n × n` matrix of exact rank `r` whose nonzero singular values have
    /// ratio at most `cond`.
    pub fn with_rank(&mut self, n: usize, r: usize, cond: f64) -> Matrix {
        let u = self.orthonormal(n, r);
        let v = self.orthonormal(n, r);
        let half = libm::log(cond) / 2.0;
        let sig: Vec<f64> = (0..r)
            .map(|_| libm::exp(self.uniform_range(-half, half)))
            .collect();
        let mut us = u;
        for j in 0..r {
            for i in 0..n {
                us[(i, j)] *= sig[j];
            }
        }
        &us * &v.adjoint()
    }

    /// Skew-Hermitian matrix with unit spectral norm.
    pub fn skew_hermitian(&mut self, n: usize) -> Matrix {
        let g = self.matrix(n, n);
        let k = (&g - &g.adjoint()).scale_real(0.5);
        let nrm = k.spectral_norm();
        if nrm == 0.0 {
            k
        } else {
            k.scale_real(1.0 / nrm)
        }
    }
}
