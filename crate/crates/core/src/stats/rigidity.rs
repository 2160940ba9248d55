//! Long-range correlations of unfolded spectra: number variance `Σ²(L)` and
//! spectral rigidity `Δ₃(L)`.

use super::unfold::UnfoldedSequence;
use crate::error::{Error, Result};
use crate::num::Real;

/// Default position strides as fractions of `L`.
pub const SIGMA2_STRIDE: f64 = 0.25;
pub const DELTA3_STRIDE: f64 = 0.5;
/// `L` may not exceed this fraction of the unfolded span.
pub const MAX_LENGTH_FRACTION: f64 = 0.1;

fn check_lengths<T: Real>(levels: &[T], lengths: &[T]) -> Result<T> {
    if levels.len() < 2 {
        return Err(Error::InsufficientLevels { needed: 2, available: levels.len() });
    }
    let span = levels[levels.len() - 1] - levels[0];
    for &l in lengths {
        if !(l > T::zero()) {
            return Err(Error::InvalidParameter(format!("interval length {l}")));
        }
        if l > T::lit(MAX_LENGTH_FRACTION) * span {
            return Err(Error::LengthTooLarge { length: l.to_f64_lossy(), span: span.to_f64_lossy() });
        }
    }
    Ok(span)
}

/// Window starts `first, first + stride, ...` with the window inside the span.
fn starts<T: Real>(levels: &[T], l: T, stride: T) -> impl Iterator<Item = T> + '_ {
    let (lo, hi) = (levels[0], levels[levels.len() - 1]);
    (0..)
        .map(move |k| lo + T::from_count(k) * stride)
        .take_while(move |&a| a + l <= hi)
}

/// Levels in `(a, b]`.
fn count_in<T: Real>(levels: &[T], a: T, b: T) -> usize {
    levels.partition_point(|&x| x <= b) - levels.partition_point(|&x| x <= a)
}

/// Sum of `(n(L) - L)²` over window positions and the number of positions.
pub fn number_variance_terms<T: Real>(levels: &[T], l: T, stride: T) -> (T, usize) {
    starts(levels, l, stride).fold((T::zero(), 0), |(s, n), a| {
        let d = T::from_count(count_in(levels, a, a + l)) - l;
        (s + d * d, n + 1)
    })
}

/// `Δ₃` of one window `[a, a+L]`, exact for the step staircase.
pub fn delta3_window<T: Real>(levels: &[T], a: T, l: T) -> T {
    let lo = levels.partition_point(|&x| x <= a);
    let hi = levels.partition_point(|&x| x <= a + l);
    // staircase counted from zero at the window start; B absorbs the offset
    let (mut i0, mut i1, mut i2) = (T::zero(), T::zero(), T::zero());
    for (j, &e) in levels[lo..hi].iter().enumerate() {
        let x = e - a;
        let rest = l - x;
        i0 += rest;
        i1 += T::half() * (l * l - x * x);
        i2 += T::from_count(2 * j + 1) * rest;
    }
    let twelve = T::lit(12.0);
    let c = i1 - T::half() * l * i0;
    ((i2 - i0 * i0 / l - twelve * c * c / (l * l * l)) / l).max(T::zero())
}

pub fn delta3_terms<T: Real>(levels: &[T], l: T, stride: T) -> (T, usize) {
    starts(levels, l, stride).fold((T::zero(), 0), |(s, n), a| (s + delta3_window(levels, a, l), n + 1))
}

fn averaged<T: Real>(
    seqs: &[&[T]],
    lengths: &[T],
    stride: f64,
    terms: impl Fn(&[T], T, T) -> (T, usize),
) -> Result<Vec<(T, T)>> {
    for s in seqs {
        check_lengths(s, lengths)?;
    }
    lengths
        .iter()
        .map(|&l| {
            let (sum, n) = seqs.iter().map(|s| terms(s, l, l * T::lit(stride))).fold((T::zero(), 0), |acc, t| (acc.0 + t.0, acc.1 + t.1));
            if n == 0 {
                return Err(Error::LengthTooLarge { length: l.to_f64_lossy(), span: 0.0 });
            }
            Ok((l, sum / T::from_count(n)))
        })
        .collect()
}

/// `Σ²(L) = ⟨(n(E, E+L) - L)²⟩` over starts spaced `L/4`.
pub fn number_variance<T: Real>(seq: &UnfoldedSequence<T>, lengths: &[T]) -> Result<Vec<(T, T)>> {
    number_variance_pooled(&[&seq.levels], lengths)
}

/// Number variance averaged over all positions of several sequences.
pub fn number_variance_pooled<T: Real>(seqs: &[&[T]], lengths: &[T]) -> Result<Vec<(T, T)>> {
    averaged(seqs, lengths, SIGMA2_STRIDE, number_variance_terms)
}

/// `⟨Δ₃(L)⟩` over windows spaced `L/2`.
pub fn delta3<T: Real>(seq: &UnfoldedSequence<T>, lengths: &[T]) -> Result<Vec<(T, T)>> {
    delta3_pooled(&[&seq.levels], lengths)
}

pub fn delta3_pooled<T: Real>(seqs: &[&[T]], lengths: &[T]) -> Result<Vec<(T, T)>> {
    averaged(seqs, lengths, DELTA3_STRIDE, delta3_terms)
}

/// Subdivisions of `[0, L]` used by [`delta3_from_number_variance`].
pub const TRANSFORM_POINTS: usize = 128;

/// `Δ₃(L) = (2/L⁴) ∫₀ᴸ (L³ - 2L²r + r³) Σ²(r) dr`, with `Σ²` sampled on a
/// uniform grid (trapezoid rule, starts spaced `L/4` for every `r`).
pub fn delta3_from_number_variance<T: Real>(seq: &UnfoldedSequence<T>, lengths: &[T]) -> Result<Vec<(T, T)>> {
    delta3_from_number_variance_pooled(&[&seq.levels], lengths)
}

pub fn delta3_from_number_variance_pooled<T: Real>(seqs: &[&[T]], lengths: &[T]) -> Result<Vec<(T, T)>> {
    for s in seqs {
        check_lengths(s, lengths)?;
    }
    let m = TRANSFORM_POINTS;
    Ok(lengths
        .iter()
        .map(|&l| {
            let h = l / T::from_count(m);
            let stride = l * T::lit(SIGMA2_STRIDE);
            let mut acc = T::zero();
            for j in 1..=m {
                let r = T::from_count(j) * h;
                let (sum, n) = seqs.iter().map(|s| number_variance_terms(s, r, stride)).fold((T::zero(), 0), |a, t| (a.0 + t.0, a.1 + t.1));
                let sigma2 = sum / T::from_count(n.max(1));
                let kernel = l * l * l - T::two() * l * l * r + r * r * r;
                let w = if j == m { T::half() } else { T::one() };
                acc += w * kernel * sigma2;
            }
            (l, T::two() * acc * h / (l * l * l * l))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta3_of_single_window_matches_brute_force() {
        let levels = [0.3, 0.9, 1.1, 2.6, 3.05, 4.4];
        let (a, l) = (0.1, 4.0);
        // brute force: minimize over A, B on a fine grid via normal equations
        let n = 400_000;
        let h = l / n as f64;
        let (mut sx, mut sxx, mut sy, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for k in 0..n {
            let x = a + (k as f64 + 0.5) * h;
            let y = levels.iter().filter(|&&e| e <= x).count() as f64;
            sx += x * h;
            sxx += x * x * h;
            sy += y * h;
            sxy += x * y * h;
            syy += y * y * h;
        }
        let det = l * sxx - sx * sx;
        let slope = (l * sxy - sx * sy) / det;
        let icpt = (sy - slope * sx) / l;
        let resid = syy - 2.0 * slope * sxy - 2.0 * icpt * sy + slope * slope * sxx + 2.0 * slope * icpt * sx + icpt * icpt * l;
        let brute = resid / l;
        assert!((delta3_window(&levels, a, l) - brute).abs() < 1e-6, "{} vs {brute}", delta3_window(&levels, a, l));
    }
}
