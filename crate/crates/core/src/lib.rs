//! Bound-state spectra of van der Waals bosonic clusters in the
//! potential-harmonic adiabatic approximation, and the spectral-fluctuation
//! toolkit used to characterize them.
//!
//! Pipeline: tune a hard-core + C6 pair potential to a scattering length
//! ([`twobody`]), build potential-harmonic overlap factors ([`basis`]),
//! diagonalize the hyperangular matrix for the effective potential
//! ([`adiabatic`]), solve the hyperradial equation ([`hyperradial`]), then
//! unfold and analyze the levels ([`stats`]).
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

// `!(x > y)` is deliberate: it rejects NaN along with the ordinary failures.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod basis;
pub mod error;
pub mod hyperradial;
pub mod interp;
pub mod levels;
pub mod linalg;
pub mod num;
pub mod quadrature;
pub mod stats;
pub mod twobody;
pub mod units;

pub use error::{Error, Result};
pub use num::Real;

pub type UnitSystem = units::UnitSystem<f64>;
pub type TwoBodyPotential = twobody::TwoBodyPotential<f64>;
pub type BasisSpec = basis::BasisSpec<f64>;
pub type OverlapFactors = basis::OverlapFactors<f64>;
pub type PotentialMatrix = adiabatic::PotentialMatrix<f64>;
pub type EffectivePotential = adiabatic::EffectivePotential<f64>;
pub type LevelSequence = levels::LevelSequence<f64>;
pub type UnfoldedSequence = stats::UnfoldedSequence<f64>;
pub type SpacingSample = stats::SpacingSample<f64>;
pub type FluctuationReport = stats::FluctuationReport<f64>;
