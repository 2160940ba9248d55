//! Ordered energy levels with their provenance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// How a level sequence was produced by the hyperradial solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMeta<T> {
    pub grid_points: usize,
    pub r_min: T,
    pub r_max: T,
    /// Energy cap below which levels were sought, if any.
    pub threshold: Option<T>,
    /// Richardson error estimate for each retained level.
    pub convergence: Vec<T>,
    pub requested: usize,
    pub warnings: Vec<String>,
}

/// Ascending eigenenergies of one symmetry channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSequence<T> {
    pub energies: Vec<T>,
    pub l: usize,
    /// Cluster size; zero for synthetic sequences.
    pub n_particles: usize,
    /// Free-form provenance label (e.g. `"N=5 l=2"`, `"poisson seed=7"`).
    pub source: String,
    pub solver: Option<SolverMeta<T>>,
}

impl<T: Real> LevelSequence<T> {
    /// Wraps raw energies, which must be finite and non-decreasing.
    pub fn from_energies(energies: Vec<T>, source: impl Into<String>) -> Result<Self> {
        if let Some(i) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite energy at index {i}")));
        }
        if let Some(i) = energies.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::NonMonotoneGrid { index: i + 1 });
        }
        Ok(Self { energies, l: 0, n_particles: 0, source: source.into(), solver: None })
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        self.solver.as_ref().map(|m| m.warnings.as_slice()).unwrap_or(&[])
    }

    /// Levels with 1-based ranks in `[first, last]`.
    pub fn window(&self, first: usize, last: usize) -> Result<Self> {
        if first == 0 || last < first || last > self.len() {
            return Err(Error::InvalidParameter(format!(
                "window {first}-{last} outside 1-{}",
                self.len()
            )));
        }
        Ok(Self {
            energies: self.energies[first - 1..last].to_vec(),
            source: format!("{} [{first}-{last}]", self.source),
            solver: None,
            ..self.clone()
        })
    }
}
