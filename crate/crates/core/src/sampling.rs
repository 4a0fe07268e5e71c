//! Seeded sampling of ball points and random test operators.
//!
//! Every random quantity in the library flows from a [`SampleConfig`]'s seed.
//! Independent purposes draw from distinct ChaCha streams so that, for
//! example, adding a check that consumes points does not perturb the points
//! used by another check.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::colligation::{BallPoint, OperatorTuple, OutputPair};
use crate::error::{Error, Result};
use crate::numerics::{operator_norm, vstack, ComplexMatrix, Tolerances};

/// Sampling and tolerance settings shared by every sampled certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub tolerances: Tolerances,
    pub sample_count: usize,
    pub sample_radius: f64,
    pub seed: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            tolerances: Tolerances::default(),
            sample_count: 50,
            sample_radius: 0.9,
            seed: 42,
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.sample_count == 0 {
            return Err(Error::InvalidConfig("sample_count must be at least 1".into()));
        }
        if !(self.sample_radius > 0.0 && self.sample_radius < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "sample_radius must lie in (0, 1), got {}",
                self.sample_radius
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Generator for one named purpose.
    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        stream_rng(self.seed, stream as u64)
    }

    /// `sample_count` points in the ball of radius `sample_radius`.
    pub fn points(&self, d: usize, stream: Stream) -> Vec<BallPoint> {
        let mut rng = self.rng(stream);
        sample_points(&mut rng, d, self.sample_count, self.sample_radius)
    }
}

/// Purposes that receive independent random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    KernelPoints = 1,
    KernelPointsSecond = 2,
    DomainGenerators = 3,
    MultiplierKernel = 4,
    Reproduction = 5,
    TestVectors = 6,
    Gleason = 7,
    Overlap = 8,
    Parameters = 9,
    Instances = 10,
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Point uniformly distributed in the ball of the given radius in `C^d`.
pub fn sample_point<R: Rng + ?Sized>(rng: &mut R, d: usize, radius: f64) -> BallPoint {
    let mut coords: Vec<Complex64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    let norm = coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / (2.0 * d as f64));
    let scale = if norm > 0.0 { r / norm } else { 0.0 };
    for z in &mut coords {
        *z *= scale;
    }
    BallPoint::new(coords).expect("sampled radius is below one")
}

pub fn sample_points<R: Rng + ?Sized>(rng: &mut R, d: usize, count: usize, radius: f64) -> Vec<BallPoint> {
    (0..count).map(|_| sample_point(rng, d, radius)).collect()
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    random_matrix(rng, n, 1)
}

/// Random output pair scaled so that `[A; C]` has norm `target` (< 1 gives a
/// strictly contractive pair).
pub fn random_contractive_pair<R: Rng + ?Sized>(
    rng: &mut R,
    d: usize,
    dim_x: usize,
    dim_y: usize,
    target: f64,
) -> OutputPair {
    let blocks: Vec<ComplexMatrix> = (0..d).map(|_| random_matrix(rng, dim_x, dim_x)).collect();
    let c = random_matrix(rng, dim_y, dim_x);
    let mut parts: Vec<&ComplexMatrix> = blocks.iter().collect();
    parts.push(&c);
    let norm = operator_norm(&vstack(&parts));
    let s = if norm > 0.0 { target / norm } else { 1.0 };
    let blocks = blocks.into_iter().map(|b| b.scale(s)).collect();
    OutputPair::new(c.scale(s), OperatorTuple::new(blocks).expect("square blocks"))
        .expect("consistent dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_reproducible_and_inside() {
        let cfg = SampleConfig::default();
        let a = cfg.points(3, Stream::KernelPoints);
        let b = cfg.points(3, Stream::KernelPoints);
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.norm_sq() < 0.81 + 1e-15));
        let other = cfg.points(3, Stream::KernelPointsSecond);
        assert_ne!(a, other);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SampleConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.sample_radius = 1.0;
        assert!(cfg.validate().is_err());
        cfg.sample_radius = 0.5;
        cfg.sample_count = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn random_pair_is_contractive() {
        let mut rng = stream_rng(7, 0);
        let p = random_contractive_pair(&mut rng, 2, 4, 2, 0.95);
        let m = p.contractivity_defect();
        assert!(crate::numerics::min_eigenvalue(&m) > 0.0);
    }
}
