//! Seeded reference spectra. Every generator draws from `ChaCha8Rng`
//! seeded with `seed_from_u64`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::LevelSequence;
use crate::linalg::{symmetric_eigenvalues, DenseMatrix};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// Cumulative sums of unit exponential deviates.
    Poisson,
    /// `E_i = i`.
    Picket,
    /// Eigenvalues of one GOE matrix of dimension `size`.
    Goe,
    /// Every second level of a Poisson sequence, rescaled to unit spacing.
    #[serde(alias = "semipoisson")]
    SemiPoisson,
}

impl SyntheticKind {
    pub fn name(&self) -> &'static str {
        match self {
            SyntheticKind::Poisson => "poisson",
            SyntheticKind::Picket => "picket",
            SyntheticKind::Goe => "goe",
            SyntheticKind::SemiPoisson => "semipoisson",
        }
    }
}

pub const MIN_SYNTHETIC_SIZE: usize = 10;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn poisson_levels(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut e = 0.0;
    (0..n)
        .map(|_| {
            let s: f64 = Exp1.sample(rng);
            e += s;
            e
        })
        .collect()
}

/// Symmetric matrix with `N(0, 1)` diagonal and `N(0, 1/2)` off-diagonal
/// entries.
pub fn goe_matrix(dim: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<f64> {
    let mut m = DenseMatrix::zeros(dim);
    let off = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        let d: f64 = StandardNormal.sample(rng);
        m[(i, i)] = d;
        for j in 0..i {
            let x: f64 = StandardNormal.sample(rng);
            m[(i, j)] = off * x;
            m[(j, i)] = off * x;
        }
    }
    m
}

pub fn synthetic_ensemble<T: Real>(kind: SyntheticKind, size: usize, seed: u64) -> Result<LevelSequence<T>> {
    if size < MIN_SYNTHETIC_SIZE {
        return Err(Error::InvalidParameter(format!("synthetic size {size} below {MIN_SYNTHETIC_SIZE}")));
    }
    let mut g = rng(seed);
    let e: Vec<f64> = match kind {
        SyntheticKind::Poisson => poisson_levels(size, &mut g),
        SyntheticKind::Picket => (1..=size).map(|i| i as f64).collect(),
        SyntheticKind::Goe => symmetric_eigenvalues(&goe_matrix(size, &mut g))?,
        SyntheticKind::SemiPoisson => {
            poisson_levels(2 * size, &mut g).into_iter().skip(1).step_by(2).map(|x| 0.5 * x).collect()
        }
    };
    let mut seq = LevelSequence::from_energies(e.into_iter().map(T::lit).collect(), format!("{} seed={seed}", kind.name()))?;
    seq.n_particles = 0;
    Ok(seq)
}

/// `count` GOE spectra of dimension `dim`; member `i` uses seed `seed + i`.
pub fn goe_ensemble<T: Real>(dim: usize, count: usize, seed: u64) -> Result<Vec<LevelSequence<T>>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| synthetic_ensemble(SyntheticKind::Goe, dim, seed.wrapping_add(i)))
        .collect()
}
