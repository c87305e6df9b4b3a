//! Seedable, portable Gaussian source.
//!
//! Uniforms come from ChaCha8 (`rand_chacha`), whose output is specified
//! bit-for-bit across platforms; normals use the Box–Muller transform
//!
//! ```text
//! z₀ = √(−2 ln u₁) cos(2π u₂),  z₁ = √(−2 ln u₁) sin(2π u₂)
//! ```
//!
//! with `u₁ ∈ (0, 1]` and `u₂ ∈ [0, 1)` built from the top 53 bits of a
//! 64-bit draw.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const INV_2_53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    /// Independent stream `stream` of the generator seeded by `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, spare: None }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * INV_2_53
    }

    /// Standard normal.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare = Some(radius * s);
        radius * c
    }

    /// Circular complex Gaussian with `E|z|² = variance`.
    pub fn complex_normal(&mut self, variance: f64) -> Complex64 {
        let scale = (0.5 * variance).sqrt();
        let re = self.normal();
        let im = self.normal();
        Complex64::new(scale * re, scale * im)
    }
}
