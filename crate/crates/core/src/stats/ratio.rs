//! Consecutive-spacing ratios `r_n = s_n / s_{n-1}` of raw energies.

use serde::{Deserialize, Serialize};

use super::histogram::Histogram;
use crate::error::{Error, Result};
use crate::levels::LevelSequence;
use crate::num::Real;

pub const RATIO_BIN_WIDTH: f64 = 0.25;
pub const RATIO_MAX: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSample<T> {
    pub r: Vec<T>,
    pub rtilde: Vec<T>,
    /// Ratios skipped because a spacing was exactly zero.
    pub excluded: usize,
}

impl<T: Real> RatioSample<T> {
    pub fn from_energies(e: &[T]) -> Self {
        let mut out = RatioSample { r: Vec::new(), rtilde: Vec::new(), excluded: 0 };
        for w in e.windows(3) {
            let (prev, next) = (w[1] - w[0], w[2] - w[1]);
            if prev == T::zero() || next == T::zero() {
                out.excluded += 1;
                continue;
            }
            let r = next / prev;
            out.r.push(r);
            out.rtilde.push(r.min(r.recip()));
        }
        out
    }

    pub fn extend(&mut self, other: RatioSample<T>) {
        self.r.extend(other.r);
        self.rtilde.extend(other.rtilde);
        self.excluded += other.excluded;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStatistics<T> {
    pub histogram: Histogram<T>,
    /// Plain finite-sample mean; unbounded for Poisson-like spectra.
    pub mean_r: T,
    pub mean_rtilde: T,
    pub count: usize,
    pub excluded: usize,
}

impl<T: Real> RatioStatistics<T> {
    pub fn from_sample(sample: &RatioSample<T>, bin_width: T, max: T) -> Result<Self> {
        if sample.r.is_empty() {
            return Err(Error::InsufficientLevels { needed: 3, available: sample.r.len() + sample.excluded });
        }
        let n = T::from_count(sample.r.len());
        Ok(Self {
            histogram: Histogram::uniform(&sample.r, T::zero(), max, bin_width)?,
            mean_r: sample.r.iter().copied().sum::<T>() / n,
            mean_rtilde: sample.rtilde.iter().copied().sum::<T>() / n,
            count: sample.r.len(),
            excluded: sample.excluded,
        })
    }
}

/// Ratio statistics of the levels with 1-based ranks in `window`.
pub fn ratio_statistics<T: Real>(seq: &LevelSequence<T>, window: Option<(usize, usize)>) -> Result<RatioStatistics<T>> {
    let (first, last) = window.unwrap_or((1, seq.len()));
    if first == 0 || last > seq.len() || last < first + 2 {
        return Err(Error::InsufficientLevels { needed: 3, available: (last + 1).saturating_sub(first) });
    }
    let sample = RatioSample::from_energies(&seq.energies[first - 1..last]);
    RatioStatistics::from_sample(&sample, T::lit(RATIO_BIN_WIDTH), T::lit(RATIO_MAX))
}
