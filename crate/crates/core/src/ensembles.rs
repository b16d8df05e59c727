//! Seeded samplers for the reference random ensembles (GUE, Ginibre, 2D Poisson).
//!
//! Sampling is keyed on `(master_seed, realization_index)` through independent
//! ChaCha streams, so disorder realizations can be drawn in any order, or in
//! parallel, without changing the results.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{C64, CMatrix};

/// Identifies one disorder realization of an ensemble.
///
/// Equal seeds produce bit-identical sample streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EnsembleSeed {
    pub master_seed: u64,
    pub realization_index: u64,
}

impl EnsembleSeed {
    pub fn new(master_seed: u64, realization_index: u64) -> Self {
        Self { master_seed, realization_index }
    }

    /// Counter-style generator: the master seed keys the cipher, the
    /// realization index selects an independent stream.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.realization_index);
        rng
    }
}

fn std_normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Hermitian matrix from the Gaussian unitary ensemble.
///
/// Off-diagonal entries are complex Gaussian with variance `1/D`, the diagonal
/// is real Gaussian with variance `1/D`, so the spectrum follows the semicircle
/// law with support radius ≈ 2.
pub fn sample_gue(dim: usize, seed: EnsembleSeed) -> CMatrix {
    sample_gue_with(dim, &mut seed.rng())
}

pub fn sample_gue_with(dim: usize, rng: &mut impl Rng) -> CMatrix {
    assert!(dim >= 1);
    let d = dim as f64;
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m.set(i, i, C64::new(std_normal(rng) / d.sqrt(), 0.0));
        for j in i + 1..dim {
            // E|H_ij|^2 = 1/D
            let re = std_normal(rng) / (2.0 * d).sqrt();
            let im = std_normal(rng) / (2.0 * d).sqrt();
            m.set(i, j, C64::new(re, im));
            m.set(j, i, C64::new(re, -im));
        }
    }
    m
}

/// `m x n` matrix of i.i.d. complex Gaussian entries with mean 0 and unit
/// variance (`E|w|^2 = 1`).
pub fn sample_ginibre(rows: usize, cols: usize, seed: EnsembleSeed) -> CMatrix {
    sample_ginibre_with(rows, cols, &mut seed.rng())
}

pub fn sample_ginibre_with(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    assert!(rows >= 1 && cols >= 1);
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(
            std_normal(rng) / 2f64.sqrt(),
            std_normal(rng) / 2f64.sqrt(),
        )
    })
}

/// Axis-aligned sampling box in the complex plane.
#[derive(Clone, Copy, Debug)]
pub struct Box2D {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Box2D {
    pub fn unit() -> Self {
        Self { re_min: 0.0, re_max: 1.0, im_min: 0.0, im_max: 1.0 }
    }
}

/// `n` i.i.d. uniform points in the box (a 2D Poisson reference spectrum).
pub fn sample_poisson2d(n: usize, bounds: Box2D, seed: EnsembleSeed) -> Result<Vec<Complex64>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need n >= 3, got {n}")));
    }
    if bounds.re_max <= bounds.re_min || bounds.im_max <= bounds.im_min {
        return Err(Error::DegenerateBox);
    }
    let mut rng = seed.rng();
    Ok((0..n)
        .map(|_| {
            Complex64::new(
                rng.gen_range(bounds.re_min..bounds.re_max),
                rng.gen_range(bounds.im_min..bounds.im_max),
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_streams() {
        let s = EnsembleSeed::new(7, 3);
        let a = sample_ginibre(5, 5, s);
        let b = sample_ginibre(5, 5, s);
        assert_eq!(a, b);
        let c = sample_ginibre(5, 5, EnsembleSeed::new(7, 4));
        assert_ne!(a, c);
    }

    #[test]
    fn gue_hermitian_exactly() {
        let m = sample_gue(32, EnsembleSeed::new(1, 0));
        let dev = (&m - &m.dagger()).frobenius_norm();
        assert_eq!(dev, 0.0);
    }

    #[test]
    fn gue_single_entry() {
        let m = sample_gue(1, EnsembleSeed::new(2, 0));
        assert_eq!(m.get(0, 0).im, 0.0);
    }

    #[test]
    fn ginibre_moments() {
        // Law of large numbers on >= 1e5 entries: mean near 0, E|w|^2 near 1.
        let m = sample_ginibre(400, 400, EnsembleSeed::new(3, 0));
        let n = (m.nrows() * m.ncols()) as f64;
        let mut mean = C64::new(0.0, 0.0);
        let mut var = 0.0;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                mean += m.get(i, j);
                var += m.get(i, j).norm_sqr();
            }
        }
        mean /= n;
        var /= n;
        assert!(mean.norm() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn poisson_counts_and_errors() {
        let pts = sample_poisson2d(3, Box2D::unit(), EnsembleSeed::new(4, 0)).unwrap();
        assert_eq!(pts.len(), 3);
        assert!(pts.iter().all(|z| (0.0..1.0).contains(&z.re) && (0.0..1.0).contains(&z.im)));
        assert!(sample_poisson2d(2, Box2D::unit(), EnsembleSeed::new(4, 0)).is_err());
        let degenerate = Box2D { re_min: 0.0, re_max: 0.0, im_min: 0.0, im_max: 1.0 };
        assert!(matches!(
            sample_poisson2d(10, degenerate, EnsembleSeed::new(4, 0)),
            Err(Error::DegenerateBox)
        ));
    }
}
