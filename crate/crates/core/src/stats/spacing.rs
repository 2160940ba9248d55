//! Nearest-neighbour spacings: pooling, the integral distribution `I(s)`
//! and Brody fits.

use serde::{Deserialize, Serialize};

use super::histogram::Histogram;
use super::reference::{brody_a, ReferenceCurve};
use super::unfold::UnfoldedSequence;
use crate::error::{Error, Result};
use crate::num::Real;

/// Spacings with the index of the sequence each one came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacingSample<T> {
    pub spacings: Vec<T>,
    pub tags: Vec<usize>,
    /// Label of each tagged source, e.g. `"N=5 l=2 [40-80]"`.
    pub sources: Vec<String>,
}

impl<T: Real> SpacingSample<T> {
    pub fn from_spacings(spacings: Vec<T>, source: impl Into<String>) -> Self {
        let tags = vec![0; spacings.len()];
        Self { spacings, tags, sources: vec![source.into()] }
    }

    pub fn len(&self) -> usize {
        self.spacings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spacings.is_empty()
    }

    pub fn mean(&self) -> T {
        self.spacings.iter().copied().sum::<T>() / T::from_count(self.len().max(1))
    }

    /// Spacings sorted ascending.
    pub fn sorted(&self) -> Vec<T> {
        let mut s = self.spacings.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        s
    }

    pub fn histogram(&self, width: T, max: T) -> Result<Histogram<T>> {
        Histogram::uniform(&self.spacings, T::zero(), max, width)
    }
}

/// Concatenates the spacings of separately unfolded sequences. Spacings
/// are formed within each sequence only.
pub fn pool_ensemble<T: Real>(sequences: &[UnfoldedSequence<T>]) -> Result<SpacingSample<T>> {
    if sequences.is_empty() {
        return Err(Error::Empty("no sequences to pool"));
    }
    let mut out = SpacingSample { spacings: Vec::new(), tags: Vec::new(), sources: Vec::new() };
    for (tag, seq) in sequences.iter().enumerate() {
        let s = seq.spacings();
        out.tags.extend(std::iter::repeat_n(tag, s.len()));
        out.spacings.extend(s);
        out.sources.push(format!("{} [{}-{}]", seq.source, seq.window.0, seq.window.1));
    }
    Ok(out)
}

/// Empirical `I(s)` against `ln s`. Exact zeros have no logarithm; they are
/// counted and raise the starting height of the curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralSpacing<T> {
    pub ln_s: Vec<T>,
    pub i: Vec<T>,
    pub zero_spacings: usize,
}

pub fn integral_spacing<T: Real>(sample: &SpacingSample<T>) -> Result<IntegralSpacing<T>> {
    if sample.is_empty() {
        return Err(Error::Empty("spacing sample"));
    }
    let s = sample.sorted();
    let n = T::from_count(s.len());
    let zero_spacings = s.iter().take_while(|&&x| x <= T::zero()).count();
    let mut ln_s = Vec::new();
    let mut i = Vec::new();
    for (k, &x) in s.iter().enumerate().skip(zero_spacings) {
        let v = T::from_count(k + 1) / n;
        // ties collapse onto their last rank
        if ln_s.last() == Some(&x.ln()) {
            *i.last_mut().expect("paired") = v;
        } else {
            ln_s.push(x.ln());
            i.push(v);
        }
    }
    Ok(IntegralSpacing { ln_s, i, zero_spacings })
}

/// Kolmogorov–Smirnov distance between sorted data and a CDF.
pub fn ks_distance<T: Real>(sorted: &[T], cdf: impl Fn(T) -> T) -> T {
    let n = T::from_count(sorted.len());
    sorted.iter().enumerate().fold(T::zero(), |d, (i, &x)| {
        let f = cdf(x);
        let lo = T::from_count(i) / n;
        let hi = T::from_count(i + 1) / n;
        d.max(hi - f).max(f - lo)
    })
}

/// Fewest spacings accepted by [`brody_fit`].
pub const BRODY_MIN_SAMPLE: usize = 200;
pub const BRODY_RANGE: (f64, f64) = (0.0, 1.2);
/// Bins used for the histogram variant of the fit.
pub const BRODY_HIST: (f64, f64) = (0.2, 4.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrodyFit<T> {
    /// Maximum-likelihood exponent.
    pub nu: T,
    pub a: T,
    /// Exponent from least squares against the binned density.
    pub nu_histogram: T,
    pub log_likelihood: T,
    pub ks_distance: T,
    /// The likelihood optimum sits on an end of the search range.
    pub at_bound: bool,
    pub sample_size: usize,
}

/// Maximum of a unimodal function on `[lo, hi]` by golden-section search.
fn golden_max<T: Real>(mut lo: T, mut hi: T, f: impl Fn(T) -> T) -> T {
    let g = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo < T::lit(1e-10) {
            break;
        }
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    let x = T::half() * (lo + hi);
    // the ends are candidates too
    [lo, x, hi].into_iter().fold(x, |best, c| if f(c) > f(best) { c } else { best })
}

pub fn brody_log_likelihood<T: Real>(spacings: &[T], nu: T) -> T {
    let one = T::one();
    let a = brody_a(nu);
    let tiny = T::min_positive_value();
    let c = (one + nu).ln() + a.ln();
    spacings.iter().map(|&s| c + nu * s.max(tiny).ln() - a * s.powf(one + nu)).sum()
}

pub fn brody_fit<T: Real>(sample: &SpacingSample<T>) -> Result<BrodyFit<T>> {
    if sample.len() < BRODY_MIN_SAMPLE {
        return Err(Error::InsufficientLevels { needed: BRODY_MIN_SAMPLE, available: sample.len() });
    }
    let (lo, hi) = (T::lit(BRODY_RANGE.0), T::lit(BRODY_RANGE.1));
    let s = &sample.spacings;
    let nu = golden_max(lo, hi, |nu| brody_log_likelihood(s, nu));
    let hist = sample.histogram(T::lit(BRODY_HIST.0), T::lit(BRODY_HIST.1))?;
    let centers = hist.centers();
    let nu_histogram = golden_max(lo, hi, |nu| {
        let p = ReferenceCurve::BrodyPs { nu };
        -centers.iter().zip(&hist.density).map(|(&c, &d)| (d - p.eval(c)).powi(2)).sum::<T>()
    });
    let curve = ReferenceCurve::BrodyPs { nu };
    let eps = T::lit(1e-6);
    Ok(BrodyFit {
        nu,
        a: brody_a(nu),
        nu_histogram,
        log_likelihood: brody_log_likelihood(s, nu),
        ks_distance: ks_distance(&sample.sorted(), |x| curve.cdf(x)),
        at_bound: nu - lo < eps || hi - nu < eps,
        sample_size: sample.len(),
    })
}
