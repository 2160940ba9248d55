//! Polynomial unfolding of a level sequence to unit mean spacing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::LevelSequence;
use crate::num::Real;

pub const DEFAULT_DEGREE: usize = 6;

/// Smooth staircase `N̄(E) = Σ c_k t^k` with `t = (E - center) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothStaircase<T> {
    pub coeffs: Vec<T>,
    pub center: T,
    pub scale: T,
}

impl<T: Real> SmoothStaircase<T> {
    pub fn eval(&self, e: T) -> T {
        let t = (e - self.center) / self.scale;
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
    }

    /// `dN̄/dE`, the smooth level density.
    pub fn density(&self, e: T) -> T {
        let t = (e - self.center) / self.scale;
        let d = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(T::zero(), |acc, (k, &c)| acc * t + T::from_count(k) * c);
        d / self.scale
    }
}

/// Dimensionless levels with unit mean spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfoldedSequence<T> {
    pub levels: Vec<T>,
    pub staircase: SmoothStaircase<T>,
    /// Factor applied after the fit so the mean spacing is exactly 1.
    pub rescale: T,
    pub source: String,
    pub l: usize,
    /// 1-based inclusive rank range of the input that was unfolded.
    pub window: (usize, usize),
}

impl<T: Real> UnfoldedSequence<T> {
    pub fn spacings(&self) -> Vec<T> {
        self.levels.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn span(&self) -> T {
        match (self.levels.first(), self.levels.last()) {
            (Some(&a), Some(&b)) => b - a,
            _ => T::zero(),
        }
    }

    /// Wraps levels that already have unit mean density (no fit).
    pub fn identity(levels: Vec<T>, source: impl Into<String>) -> Result<Self> {
        if let Some(i) = levels.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::NonMonotoneGrid { index: i + 1 });
        }
        let n = levels.len();
        Ok(Self {
            levels,
            staircase: SmoothStaircase { coeffs: vec![T::zero(), T::one()], center: T::zero(), scale: T::one() },
            rescale: T::one(),
            source: source.into(),
            l: 0,
            window: (1, n),
        })
    }
}

/// Least squares via Householder QR; `cols` are the columns of the design
/// matrix.
fn least_squares<T: Real>(mut cols: Vec<Vec<T>>, mut y: Vec<T>) -> Result<Vec<T>> {
    let p = cols.len();
    let m = y.len();
    let mut diag = vec![T::zero(); p];
    for k in 0..p {
        let norm = cols[k][k..].iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::InvalidParameter("rank-deficient staircase fit".into()));
        }
        let alpha = if cols[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        diag[k] = alpha;
        let reflect = |col: &mut [T]| {
            let dot: T = v.iter().zip(col.iter()).map(|(&a, &b)| a * b).sum();
            let f = T::two() * dot / vnorm2;
            for (c, &vi) in col.iter_mut().zip(&v) {
                *c -= f * vi;
            }
        };
        for col in cols.iter_mut().skip(k + 1) {
            reflect(&mut col[k..m]);
        }
        reflect(&mut y[k..m]);
    }
    let mut x = vec![T::zero(); p];
    for k in (0..p).rev() {
        let mut s = y[k];
        for (j, xj) in x.iter().enumerate().skip(k + 1) {
            s -= cols[j][k] * *xj;
        }
        x[k] = s / diag[k];
    }
    Ok(x)
}

/// Degree-`degree` least-squares fit of the staircase `N(E_i) = i - 1/2`.
pub fn fit_staircase<T: Real>(energies: &[T], degree: usize) -> Result<SmoothStaircase<T>> {
    let needed = 3 * (degree + 1);
    if energies.len() < needed {
        return Err(Error::InsufficientLevels { needed, available: energies.len() });
    }
    let (lo, hi) = (energies[0], energies[energies.len() - 1]);
    if !(hi > lo) {
        return Err(Error::InvalidParameter("levels span a zero-width interval".into()));
    }
    let center = T::half() * (lo + hi);
    let scale = T::half() * (hi - lo);
    let t: Vec<T> = energies.iter().map(|&e| (e - center) / scale).collect();
    let mut cols = Vec::with_capacity(degree + 1);
    let mut col = vec![T::one(); t.len()];
    for _ in 0..=degree {
        cols.push(col.clone());
        col.iter_mut().zip(&t).for_each(|(c, &x)| *c *= x);
    }
    let y = (0..energies.len()).map(|i| T::from_count(i) + T::half()).collect();
    let coeffs = least_squares(cols, y)?;
    Ok(SmoothStaircase { coeffs, center, scale })
}

/// Unfolds the levels with 1-based ranks in `window` (whole sequence when
/// `None`).
///
/// Unfolded values are `N̄(E_i) + 1/2`, followed by an affine rescale about
/// the first level giving exactly unit mean spacing.
pub fn unfold<T: Real>(
    seq: &LevelSequence<T>,
    degree: usize,
    window: Option<(usize, usize)>,
) -> Result<UnfoldedSequence<T>> {
    let (first, last) = window.unwrap_or((1, seq.len()));
    if first == 0 || last < first || last > seq.len() {
        return Err(Error::InsufficientLevels { needed: last.max(3 * (degree + 1)), available: seq.len() });
    }
    let e = &seq.energies[first - 1..last];
    let staircase = fit_staircase(e, degree)?;
    // monotone at every level and between neighbours
    for (i, &x) in e.iter().enumerate() {
        let mut probes = vec![x];
        if i + 1 < e.len() {
            probes.push(T::half() * (x + e[i + 1]));
        }
        for p in probes {
            let d = staircase.density(p);
            if !(d > T::zero()) {
                return Err(Error::NonMonotoneUnfolding { energy: p.to_f64_lossy(), derivative: d.to_f64_lossy() });
            }
        }
    }
    let raw: Vec<T> = e.iter().map(|&x| staircase.eval(x) + T::half()).collect();
    let n = raw.len();
    let mean = (raw[n - 1] - raw[0]) / T::from_count(n - 1);
    let rescale = T::one() / mean;
    let levels = raw.iter().map(|&u| raw[0] + (u - raw[0]) * rescale).collect();
    Ok(UnfoldedSequence {
        levels,
        staircase,
        rescale,
        source: seq.source.clone(),
        l: seq.l,
        window: (first, last),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_polynomial() {
        let t: Vec<f64> = (0..50).map(|i| -1.0 + i as f64 / 24.5).collect();
        let y: Vec<f64> = t.iter().map(|x| 1.0 - 2.0 * x + 0.5 * x * x * x).collect();
        let cols = (0..4).map(|k| t.iter().map(|x| x.powi(k)).collect()).collect();
        let c = least_squares(cols, y).unwrap();
        for (a, b) in c.iter().zip([1.0, -2.0, 0.0, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
