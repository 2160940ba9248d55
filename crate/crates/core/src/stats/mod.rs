//! Spectral fluctuation measures and the random-matrix references they are
//! compared against.

pub mod histogram;
pub mod ratio;
pub mod reference;
pub mod report;
pub mod rigidity;
pub mod spacing;
pub mod synthetic;
pub mod unfold;

pub use histogram::Histogram;
pub use ratio::{ratio_statistics, RatioSample, RatioStatistics};
pub use reference::{brody_a, ReferenceCurve};
pub use report::{analyze, AnalysisOptions, FluctuationReport};
pub use rigidity::{delta3, delta3_from_number_variance, number_variance};
pub use spacing::{brody_fit, integral_spacing, ks_distance, pool_ensemble, BrodyFit, IntegralSpacing, SpacingSample};
pub use synthetic::{goe_ensemble, synthetic_ensemble, SyntheticKind};
pub use unfold::{unfold, UnfoldedSequence};
