//! Seeded smooth random fields for experiments without external data.
//!
//! A field is a random combination of low-frequency plane waves on an
//! `H x W` grid with geometrically decaying variances, so its snapshot
//! matrix has a rapidly (but not abruptly) decaying spectrum. Train and test
//! sets share the same waves and differ only in their coefficients.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::basis::SnapshotMatrix;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Highest spatial frequency (cycles across the grid) of any wave.
const MAX_FREQUENCY: u32 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticField {
    height: usize,
    width: usize,
    waves: Vec<Vec<f64>>,
    std: Vec<f64>,
}

impl SyntheticField {
    /// `n_waves` plane waves; wave `k` has coefficient std `decay^k`.
    pub fn new(height: usize, width: usize, n_waves: usize, decay: f64, seed: u64) -> Result<Self> {
        if height == 0 || width == 0 || n_waves == 0 {
            return Err(Error::invalid(
                "synthetic field needs a nonempty grid and at least one wave",
            ));
        }
        if !(decay > 0.0 && decay <= 1.0) {
            return Err(Error::invalid(alloc::format!("decay {decay} must lie in (0, 1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut waves = Vec::with_capacity(n_waves);
        for _ in 0..n_waves {
            let fx = rng.random_range(0..=MAX_FREQUENCY) as f64;
            let fy = rng.random_range(0..=MAX_FREQUENCY) as f64;
            let phase = rng.random_range(0.0..2.0 * PI);
            let wave = (0..height * width)
                .map(|i| {
                    let (row, col) = ((i / width) as f64, (i % width) as f64);
                    libm::cos(2.0 * PI * (fx * col / width as f64 + fy * row / height as f64) + phase)
                })
                .collect();
            waves.push(wave);
        }
        let std = (0..n_waves).map(|k| libm::pow(decay, k as f64)).collect();
        Ok(SyntheticField {
            height,
            width,
            waves,
            std,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n_states(&self) -> usize {
        self.height * self.width
    }

    /// `n` snapshots with i.i.d. `N(0, noise²)` added to every pixel.
    pub fn sample(&self, n: usize, noise: f64, seed: u64) -> Result<SnapshotMatrix> {
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "noise {noise} must be finite and nonnegative"
            )));
        }
        let pixel_noise = Normal::new(0.0, noise).map_err(|e| Error::invalid(alloc::format!("{e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = self.n_states();
        let mut data = Matrix::zeros(n, states);
        for k in 0..n {
            let row = data.row_mut(k);
            for (wave, s) in self.waves.iter().zip(&self.std) {
                let z: f64 = StandardNormal.sample(&mut rng);
                let c = s * z;
                row.iter_mut().zip(wave).for_each(|(x, w)| *x += c * w);
            }
            if noise > 0.0 {
                row.iter_mut().for_each(|x| *x += pixel_noise.sample(&mut rng));
            }
        }
        SnapshotMatrix::new(data)
    }
}
