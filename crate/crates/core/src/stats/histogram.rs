use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Fixed-bin histogram with density normalization against the full sample.
///
/// `density[i] = counts[i] / (total · width_i)`, where `total` also counts
/// values falling outside the edges. The in-range integral is therefore the
/// in-range fraction, and `total_mass()` (in-range integral plus the
/// outside fractions) is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram<T> {
    pub edges: Vec<T>,
    pub counts: Vec<usize>,
    pub density: Vec<T>,
    pub underflow: usize,
    pub overflow: usize,
    pub total: usize,
}

impl<T: Real> Histogram<T> {
    /// Bins of width `width` covering `[lo, hi)`.
    pub fn uniform(data: &[T], lo: T, hi: T, width: T) -> Result<Self> {
        if !(width > T::zero()) || !(hi > lo) {
            return Err(Error::InvalidParameter(format!("histogram range [{lo}, {hi}) with width {width}")));
        }
        let bins = ((hi - lo) / width).round().to_usize().unwrap_or(0).max(1);
        let edges = (0..=bins).map(|i| lo + T::from_count(i) * width).collect();
        Self::with_edges(data, edges)
    }

    /// Bins `[edges[i], edges[i+1])`.
    pub fn with_edges(data: &[T], edges: Vec<T>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty("histogram data"));
        }
        if edges.len() < 2 {
            return Err(Error::InvalidParameter("histogram needs at least one bin".into()));
        }
        if let Some(i) = edges.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneGrid { index: i + 1 });
        }
        let nb = edges.len() - 1;
        let mut counts = vec![0usize; nb];
        let (mut underflow, mut overflow) = (0, 0);
        for &x in data {
            if x < edges[0] {
                underflow += 1;
            } else if !(x < edges[nb]) {
                overflow += 1;
            } else {
                // last edge not above x
                let i = edges.partition_point(|&e| e <= x) - 1;
                counts[i] += 1;
            }
        }
        let total = data.len();
        let n = T::from_count(total);
        let density = (0..nb).map(|i| T::from_count(counts[i]) / (n * (edges[i + 1] - edges[i]))).collect();
        Ok(Self { edges, counts, density, underflow, overflow, total })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn centers(&self) -> Vec<T> {
        self.edges.windows(2).map(|w| T::half() * (w[0] + w[1])).collect()
    }

    /// `∫ density` over the binned range.
    pub fn integral(&self) -> T {
        self.density.iter().zip(self.edges.windows(2)).map(|(&d, w)| d * (w[1] - w[0])).sum()
    }

    /// In-range integral plus the fraction of the sample outside the edges.
    pub fn total_mass(&self) -> T {
        self.integral() + T::from_count(self.underflow + self.overflow) / T::from_count(self.total)
    }

    /// Largest `|density - reference|` where `reference(a, b)` is the mean
    /// of the reference density over the bin `[a, b)`.
    pub fn max_deviation(&self, reference: impl Fn(T, T) -> T) -> T {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&d, w)| (d - reference(w[0], w[1])).abs())
            .fold(T::zero(), T::max)
    }
}
