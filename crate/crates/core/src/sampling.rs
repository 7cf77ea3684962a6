//! Reproducible random two-qubit states.
//!
//! The generator is xoshiro256** seeded from a `u64` through SplitMix64
//! (the reference seeding of its authors). Uniform doubles are
//! `(next_u64 >> 11) · 2⁻⁵³`; Gaussians come from the Marsaglia polar method,
//! which uses both variates of each accepted pair. Any reimplementation of
//! these three steps replays the same states bit for bit.

use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::classify::Subspace;
use crate::entanglement::concurrence;
use crate::linalg::{c, Mat4};
use crate::qstate::{validate, DensityMatrix};

/// Identifier recorded alongside every sampled suite.
pub const PRNG_ID: &str = "xoshiro256**+splitmix64/polar-gaussian";

/// Concurrence a sample must exceed to count as entangled.
pub const ENTANGLED_MIN_CONCURRENCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Ensemble {
    /// Normalized vector of i.i.d. complex Gaussians.
    HaarPure,
    /// `G G† / tr(G G†)` with `G` a complex Gaussian matrix.
    GinibreMixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub ensemble: Ensemble,
    /// Draw in the 3-dimensional block that leaves out this subspace's
    /// basis state, which is then exactly unpopulated.
    pub subspace: Option<Subspace>,
}

impl SamplerConfig {
    pub fn new(seed: u64, ensemble: Ensemble) -> Self {
        SamplerConfig {
            seed,
            ensemble,
            subspace: None,
        }
    }

    pub fn confined(self, subspace: Subspace) -> Self {
        SamplerConfig {
            subspace: Some(subspace),
            ..self
        }
    }
}

pub struct Sampler {
    config: SamplerConfig,
    rng: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl Sampler {
    pub fn new(config: SamplerConfig) -> Self {
        Sampler {
            config,
            rng: Xoshiro256StarStar::seed_from_u64(config.seed),
            spare: None,
        }
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let scale = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * scale);
                return u * scale;
            }
        }
    }

    fn complex_gaussian(&mut self) -> Complex64 {
        let re = self.gaussian();
        c(re, self.gaussian())
    }

    /// Basis indices the sample is drawn over.
    fn support(&self) -> Vec<usize> {
        let skip = self.config.subspace.map(Subspace::basis_index);
        (0..4).filter(|&i| Some(i) != skip).collect()
    }

    pub fn next_state(&mut self) -> DensityMatrix {
        let support = self.support();
        let dim = support.len();
        let m = match self.config.ensemble {
            Ensemble::HaarPure => {
                let mut v = [c(0.0, 0.0); 4];
                for &i in &support {
                    v[i] = self.complex_gaussian();
                }
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let v = v.map(|z| z / norm);
                Mat4::outer(&v)
            }
            Ensemble::GinibreMixed => {
                let mut g = Mat4::zeros();
                for &i in &support {
                    for j in 0..dim {
                        g.0[i][j] = self.complex_gaussian();
                    }
                }
                let gg = g * g.adjoint();
                gg.scale(c(1.0 / gg.trace().re, 0.0))
            }
        };
        validate(m).expect("sampled states are valid by construction")
    }

    /// Next state whose concurrence exceeds `min_concurrence`.
    pub fn next_entangled(&mut self, min_concurrence: f64) -> DensityMatrix {
        loop {
            let rho = self.next_state();
            if concurrence(&rho).map(|r| r.concurrence > min_concurrence).unwrap_or(false) {
                return rho;
            }
        }
    }
}

pub fn sample(config: SamplerConfig, n: usize) -> Vec<DensityMatrix> {
    let mut s = Sampler::new(config);
    (0..n).map(|_| s.next_state()).collect()
}

/// `n` states with concurrence above [`ENTANGLED_MIN_CONCURRENCE`], by
/// rejection.
pub fn sample_entangled(config: SamplerConfig, n: usize) -> Vec<DensityMatrix> {
    let mut s = Sampler::new(config);
    (0..n).map(|_| s.next_entangled(ENTANGLED_MIN_CONCURRENCE)).collect()
}
