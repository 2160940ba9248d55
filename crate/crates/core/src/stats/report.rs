//! All fluctuation measures of a set of spectra in one serializable report.

use serde::{Deserialize, Serialize};

use super::histogram::Histogram;
use super::ratio::{RatioSample, RatioStatistics, RATIO_BIN_WIDTH, RATIO_MAX};
use super::reference::ReferenceCurve;
use super::rigidity::{delta3_from_number_variance_pooled, delta3_pooled, number_variance_pooled, MAX_LENGTH_FRACTION};
use super::spacing::{brody_fit, integral_spacing, pool_ensemble, BrodyFit, IntegralSpacing, BRODY_MIN_SAMPLE};
use super::unfold::{unfold, UnfoldedSequence, DEFAULT_DEGREE};
use crate::error::{Error, Result};
use crate::levels::LevelSequence;
use crate::num::Real;

/// Spacings below this count as quasi-degenerate.
pub const QUASI_DEGENERATE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions<T> {
    pub degree: usize,
    /// 1-based inclusive rank window applied to every sequence.
    pub window: Option<(usize, usize)>,
    pub bin_width: T,
    pub max_spacing: T,
    /// Bin width of the zoomed small-`s` histogram.
    pub fine_bin_width: T,
    pub fine_max: T,
    pub ratio_bin_width: T,
    pub ratio_max: T,
    pub sigma2_lengths: Vec<T>,
    pub delta3_lengths: Vec<T>,
    pub references: Vec<ReferenceCurve<T>>,
}

impl<T: Real> Default for AnalysisOptions<T> {
    fn default() -> Self {
        let lengths = [0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0, 20.0].map(T::lit).to_vec();
        Self {
            degree: DEFAULT_DEGREE,
            window: None,
            bin_width: T::lit(0.2),
            max_spacing: T::lit(4.0),
            fine_bin_width: T::lit(0.01),
            fine_max: T::lit(0.5),
            ratio_bin_width: T::lit(RATIO_BIN_WIDTH),
            ratio_max: T::lit(RATIO_MAX),
            sigma2_lengths: lengths.clone(),
            delta3_lengths: lengths,
            references: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Overlay<T> {
    pub name: String,
    pub points: Vec<(T, T)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport<T> {
    pub sources: Vec<String>,
    pub levels_used: usize,
    pub spacing_count: usize,
    pub ps_histogram: Histogram<T>,
    pub ps_fine: Histogram<T>,
    /// Fraction of spacings below [`QUASI_DEGENERATE`].
    pub quasi_degenerate_fraction: T,
    pub brody: Option<BrodyFit<T>>,
    pub is_curve: IntegralSpacing<T>,
    pub sigma2: Vec<(T, T)>,
    pub delta3: Vec<(T, T)>,
    /// `Δ₃` recomputed from `Σ²` through the integral identity.
    pub delta3_transform: Vec<(T, T)>,
    pub ratio: RatioStatistics<T>,
    pub overlays: Vec<Overlay<T>>,
    pub warnings: Vec<String>,
}

/// Unfolds each sequence on its own, pools spacings, and evaluates every
/// measure. Ratio statistics use the raw energies of the same windows.
pub fn analyze<T: Real>(seqs: &[LevelSequence<T>], opts: &AnalysisOptions<T>) -> Result<FluctuationReport<T>> {
    if seqs.is_empty() {
        return Err(Error::Empty("no spectra to analyze"));
    }
    let mut warnings = Vec::new();
    let unfolded: Vec<UnfoldedSequence<T>> = seqs
        .iter()
        .map(|s| {
            let window = opts.window.map(|(a, b)| (a, b.min(s.len())));
            unfold(s, opts.degree, window)
        })
        .collect::<Result<_>>()?;
    let sample = pool_ensemble(&unfolded)?;
    let ps_histogram = sample.histogram(opts.bin_width, opts.max_spacing)?;
    let ps_fine = sample.histogram(opts.fine_bin_width, opts.fine_max)?;
    let small = sample.spacings.iter().filter(|&&s| s < T::lit(QUASI_DEGENERATE)).count();
    let brody = if sample.len() >= BRODY_MIN_SAMPLE {
        let fit = brody_fit(&sample)?;
        if fit.at_bound {
            warnings.push(format!("Brody exponent at search bound ({})", fit.nu));
        }
        Some(fit)
    } else {
        warnings.push(format!("{} spacings; Brody fit needs {BRODY_MIN_SAMPLE}", sample.len()));
        None
    };

    let levels: Vec<&[T]> = unfolded.iter().map(|u| u.levels.as_slice()).collect();
    let shortest = unfolded.iter().map(|u| u.span()).fold(T::infinity(), T::min);
    let fit = |ls: &[T], what: &str, warnings: &mut Vec<String>| -> Vec<T> {
        let cap = T::lit(MAX_LENGTH_FRACTION) * shortest;
        let kept: Vec<T> = ls.iter().copied().filter(|&l| l <= cap).collect();
        if kept.len() < ls.len() {
            warnings.push(format!("{what}: dropped {} lengths above span/10 = {cap}", ls.len() - kept.len()));
        }
        kept
    };
    let s_lengths = fit(&opts.sigma2_lengths, "sigma2", &mut warnings);
    let d_lengths = fit(&opts.delta3_lengths, "delta3", &mut warnings);

    let mut ratios = RatioSample { r: Vec::new(), rtilde: Vec::new(), excluded: 0 };
    for (s, u) in seqs.iter().zip(&unfolded) {
        ratios.extend(RatioSample::from_energies(&s.energies[u.window.0 - 1..u.window.1]));
    }
    if ratios.excluded > 0 {
        warnings.push(format!("{} ratios excluded for zero spacings", ratios.excluded));
    }

    let overlays = opts
        .references
        .iter()
        .map(|c| {
            let (max, n) = match c {
                ReferenceCurve::PoissonPr | ReferenceCurve::GoePr => (opts.ratio_max, 200),
                _ => (opts.max_spacing, 200),
            };
            let grid: Vec<T> = (0..=n).map(|i| max * T::from_count(i) / T::from_count(n)).collect();
            Overlay { name: c.name(), points: c.curve(&grid) }
        })
        .collect();

    Ok(FluctuationReport {
        sources: sample.sources.clone(),
        levels_used: unfolded.iter().map(|u| u.levels.len()).sum(),
        spacing_count: sample.len(),
        quasi_degenerate_fraction: T::from_count(small) / T::from_count(sample.len().max(1)),
        ps_histogram,
        ps_fine,
        brody,
        is_curve: integral_spacing(&sample)?,
        sigma2: number_variance_pooled(&levels, &s_lengths)?,
        delta3: delta3_pooled(&levels, &d_lengths)?,
        delta3_transform: delta3_from_number_variance_pooled(&levels, &d_lengths)?,
        ratio: RatioStatistics::from_sample(&ratios, opts.ratio_bin_width, opts.ratio_max)?,
        overlays,
        warnings,
    })
}
