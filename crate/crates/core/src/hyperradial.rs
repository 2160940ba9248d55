//! Bound states of the one-dimensional hyperradial equation
//! `[-ħ²/m d²/dr² + ω(r)] ζ = E ζ` with `ζ(r_min) = ζ(r_max) = 0`.
//!
//! Three-point finite differences on a uniform grid turn the problem into a
//! symmetric tridiagonal eigenproblem. The lowest levels come from Sturm
//! bisection; each is paired with the same level on a grid of twice the
//! spacing, and `|E_h - E_2h| / 3` serves as its error estimate.

use serde::{Deserialize, Serialize};

use crate::adiabatic::{
    effective_potential_with, AdiabaticOptions, EffectivePotential,
};
use crate::basis::{overlap_factors, BasisSpec};
use crate::error::{Error, Result};
use crate::interp::CubicSpline;
use crate::levels::{LevelSequence, SolverMeta};
use crate::linalg::SymTridiagonal;
use crate::num::Real;
use crate::twobody::TwoBodyPotential;
use crate::units::UnitSystem;

/// Uniform solver grid: `points` interior nodes strictly between the two
/// Dirichlet walls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverGrid<T> {
    pub r_min: T,
    pub r_max: T,
    pub points: usize,
}

/// Fewest interior points accepted.
pub const MIN_POINTS: usize = 15;
/// Bounds on the automatically chosen grid size.
pub const AUTO_POINTS: (usize, usize) = (2_001, 400_001);

impl<T: Real> SolverGrid<T> {
    /// Rounds `points` up to an odd number so the grid of double spacing
    /// shares its walls.
    pub fn new(r_min: T, r_max: T, points: usize) -> Result<Self> {
        if !(r_max > r_min) || !r_min.is_finite() || !r_max.is_finite() {
            return Err(Error::InvalidParameter(format!("solver interval [{r_min}, {r_max}]")));
        }
        if points < MIN_POINTS {
            return Err(Error::InvalidParameter(format!("{points} grid points; need at least {MIN_POINTS}")));
        }
        Ok(Self { r_min, r_max, points: points | 1 })
    }

    pub fn spacing(&self) -> T {
        (self.r_max - self.r_min) / T::from_count(self.points + 1)
    }

    pub fn radius(&self, i: usize) -> T {
        self.r_min + T::from_count(i + 1) * self.spacing()
    }

    /// Same walls, twice the spacing.
    pub fn coarsened(&self) -> Self {
        Self { points: self.points.div_ceil(2) - 1, ..*self }
    }

    /// Default grid for an effective potential.
    ///
    /// The outer wall sits where `ω` has recovered to 1% of its depth
    /// beyond the minimum (or at the end of the sampling grid), and the
    /// spacing resolves the largest local wavenumber with `k h <= 0.1`.
    pub fn auto(omega: &EffectivePotential<T>) -> Result<Self> {
        let r = &omega.r_grid;
        let w = &omega.omega;
        let r_min = r[0];
        let (imin, &wmin) = w
            .iter()
            .enumerate()
            .fold((0, &T::infinity()), |acc, (i, x)| if *x < *acc.1 { (i, x) } else { acc });
        let mut r_max = *r.last().expect("non-empty");
        if wmin < T::zero() {
            let cut = T::lit(0.01) * wmin;
            if let Some(j) = (imin..w.len()).find(|&j| w[j] >= cut) {
                r_max = r[j];
            }
        }
        let top = w
            .iter()
            .zip(r)
            .filter(|(_, &rr)| rr <= r_max)
            .map(|(&x, _)| x)
            .fold(T::neg_infinity(), T::max);
        let wall = omega_at(omega, r_max)?;
        let depth = (wall.min(top) - wmin).max(T::min_positive_value());
        let k = (depth / omega.hbar2_over_m).sqrt();
        let span = r_max - r_min;
        let want = (span * k / T::lit(0.1)).ceil().to_usize().unwrap_or(AUTO_POINTS.1);
        Self::new(r_min, r_max, want.clamp(AUTO_POINTS.0, AUTO_POINTS.1))
    }
}

fn omega_at<T: Real>(omega: &EffectivePotential<T>, r: T) -> Result<T> {
    let spline = omega_spline(omega)?;
    Ok(spline(r))
}

/// `ω(r)` as a cubic spline in `ln r`.
pub fn omega_spline<T: Real>(omega: &EffectivePotential<T>) -> Result<impl Fn(T) -> T> {
    let x: Vec<T> = omega.r_grid.iter().map(|r| r.ln()).collect();
    let s = CubicSpline::new(x, omega.omega.clone())?;
    Ok(move |r: T| s.eval(r.ln()))
}

/// Energy cap for retained levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Threshold<T> {
    /// Potential value at the outer wall.
    WallValue,
    Energy(T),
    /// No cap (closed wells such as a box).
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions<T> {
    pub grid: Option<SolverGrid<T>>,
    pub threshold: Threshold<T>,
    /// Levels closer than this many mean spacings to the cap are dropped.
    pub wall_margin: T,
    /// Retained levels need an error estimate below this fraction of the
    /// local spacing.
    pub convergence_fraction: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            grid: None,
            threshold: Threshold::WallValue,
            wall_margin: T::lit(3.0),
            convergence_fraction: T::lit(0.05),
        }
    }
}

fn hamiltonian<T: Real>(v: &impl Fn(T) -> T, grid: &SolverGrid<T>, hbar2_over_m: T) -> Result<SymTridiagonal<T>> {
    let h = grid.spacing();
    let t = hbar2_over_m / (h * h);
    let diag = (0..grid.points).map(|i| T::two() * t + v(grid.radius(i))).collect();
    SymTridiagonal::new(diag, vec![-t; grid.points - 1])
}

/// Levels of an arbitrary well with their error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct WellLevels<T> {
    pub energies: Vec<T>,
    pub convergence: Vec<T>,
    pub threshold: Option<T>,
    pub warnings: Vec<String>,
}

/// Lowest `count_limit` retained levels of `-ħ²/m d²/dr² + v(r)`.
pub fn solve_well<T: Real>(
    v: impl Fn(T) -> T,
    grid: &SolverGrid<T>,
    hbar2_over_m: T,
    count_limit: usize,
    opts: &SolverOptions<T>,
) -> Result<WellLevels<T>> {
    if count_limit == 0 {
        return Err(Error::InvalidParameter("count_limit must be at least 1".into()));
    }
    let cap = match opts.threshold {
        Threshold::WallValue => Some(v(grid.r_max)),
        Threshold::Energy(e) => Some(e),
        Threshold::Unbounded => None,
    };
    let fine = hamiltonian(&v, grid, hbar2_over_m)?.lowest_eigenvalues(count_limit + 1, cap);
    if fine.is_empty() {
        return Err(Error::NoBoundStates);
    }
    let coarse = hamiltonian(&v, &grid.coarsened(), hbar2_over_m)?.lowest_eigenvalues(fine.len(), cap);
    let n = fine.len().min(coarse.len());
    let mut warnings = Vec::new();
    if n < fine.len() {
        warnings.push(format!("coarse grid resolves only {n} of {} levels", fine.len()));
    }
    let mut energies = fine[..n].to_vec();
    let three = T::lit(3.0);
    let mut convergence: Vec<T> = (0..n).map(|i| (fine[i] - coarse[i]).abs() / three).collect();

    if let Some(cap) = cap {
        if energies.len() >= 2 {
            let m = (energies.len() - 1).min(10);
            let last = energies.len() - 1;
            let spacing = (energies[last] - energies[last - m]) / T::from_count(m);
            let limit = cap - opts.wall_margin * spacing;
            let keep = energies.iter().take_while(|&&e| e < limit).count();
            if keep < energies.len() && energies.len() <= count_limit {
                warnings.push(format!("dropped {} levels near the wall", energies.len() - keep));
            }
            energies.truncate(keep);
            convergence.truncate(keep);
        }
    }

    let len = energies.len();
    let local_spacing = |i: usize| -> T {
        match (i.checked_sub(1), i + 1 < len) {
            (Some(p), true) => T::half() * (energies[i + 1] - energies[p]),
            (Some(p), false) => energies[i] - energies[p],
            (None, true) => energies[i + 1] - energies[i],
            (None, false) => cap.map(|c| c - energies[i]).unwrap_or(T::infinity()),
        }
    };
    if let Some(bad) = (0..len).find(|&i| !(convergence[i] < opts.convergence_fraction * local_spacing(i))) {
        warnings.push(format!("truncated at level {}: error estimate exceeds tolerance", bad + 1));
        energies.truncate(bad);
        convergence.truncate(bad);
    }
    if energies.len() > count_limit {
        energies.truncate(count_limit);
        convergence.truncate(count_limit);
    } else if energies.len() < count_limit {
        warnings.push(format!("requested {count_limit} levels, returning {}", energies.len()));
    }
    if energies.is_empty() {
        return Err(Error::NoBoundStates);
    }
    Ok(WellLevels { energies, convergence, threshold: cap, warnings })
}

/// Bound states in an effective potential, with the automatic grid.
pub fn bound_states<T: Real>(
    omega: &EffectivePotential<T>,
    count_limit: usize,
    units: &UnitSystem<T>,
) -> Result<LevelSequence<T>> {
    bound_states_with(omega, count_limit, units, &SolverOptions::default())
}

pub fn bound_states_with<T: Real>(
    omega: &EffectivePotential<T>,
    count_limit: usize,
    units: &UnitSystem<T>,
    opts: &SolverOptions<T>,
) -> Result<LevelSequence<T>> {
    let grid = match opts.grid {
        Some(g) => g,
        None => SolverGrid::auto(omega)?,
    };
    let (lo, hi) = (omega.r_grid[0], *omega.r_grid.last().expect("non-empty"));
    if grid.r_min < lo || grid.r_max > hi {
        return Err(Error::InvalidParameter(format!(
            "solver interval [{}, {}] outside sampled range [{lo}, {hi}]",
            grid.r_min, grid.r_max
        )));
    }
    let v = omega_spline(omega)?;
    let levels = solve_well(v, &grid, units.hbar2_over_m, count_limit, opts)?;
    Ok(LevelSequence {
        energies: levels.energies,
        l: omega.l,
        n_particles: omega.n_particles,
        source: format!("N={} l={}", omega.n_particles, omega.l),
        solver: Some(SolverMeta {
            grid_points: grid.points,
            r_min: grid.r_min,
            r_max: grid.r_max,
            threshold: levels.threshold,
            convergence: levels.convergence,
            requested: count_limit,
            warnings: levels.warnings,
        }),
    })
}

/// One level sequence per `l = 0 ..= l_max`, each from its own effective
/// potential. Channels without bound states yield an empty sequence with a
/// warning.
#[allow(clippy::too_many_arguments)]
pub fn multipolar_spectrum<T: Real>(
    n_particles: usize,
    l_max: usize,
    k_max: usize,
    pot: &TwoBodyPotential<T>,
    r_grid: &[T],
    count_limit: usize,
    adiabatic: &AdiabaticOptions,
    solver: &SolverOptions<T>,
) -> Result<Vec<LevelSequence<T>>> {
    (0..=l_max)
        .map(|l| {
            let spec = BasisSpec::new(n_particles, l, k_max)?;
            let f = overlap_factors(&spec)?;
            let omega = effective_potential_with(&spec, pot, &f, r_grid, adiabatic)?;
            channel_levels(&omega, count_limit, &pot.units, solver)
        })
        .collect()
}

/// Bound states of one channel; an unbound channel gives an empty sequence.
pub fn channel_levels<T: Real>(
    omega: &EffectivePotential<T>,
    count_limit: usize,
    units: &UnitSystem<T>,
    solver: &SolverOptions<T>,
) -> Result<LevelSequence<T>> {
    let empty = |why: &str| LevelSequence {
        energies: Vec::new(),
        l: omega.l,
        n_particles: omega.n_particles,
        source: format!("N={} l={}", omega.n_particles, omega.l),
        solver: Some(SolverMeta {
            grid_points: 0,
            r_min: omega.r_grid[0],
            r_max: *omega.r_grid.last().expect("non-empty"),
            threshold: None,
            convergence: Vec::new(),
            requested: count_limit,
            warnings: vec![why.to_string()],
        }),
    };
    if omega.minimum().1 >= T::zero() {
        return Ok(empty("effective potential has no attractive well"));
    }
    match bound_states_with(omega, count_limit, units, solver) {
        Err(Error::NoBoundStates) => Ok(empty("no bound states below the threshold")),
        other => other,
    }
}
