//! Zero-energy two-body scattering for a hard core plus a `-C6/r⁶` tail.
//!
//! The radial zero-energy equation `u'' = (m/ħ²) V(r) u` is integrated
//! outward from the core edge with `u(r_c) = 0`, `u'(r_c) = 1`. Beyond the
//! range of the potential `u(r) → C (r - a_s)`; the scattering length comes
//! from a least-squares line through the outer part of the grid.
//!
//! Lowering `r_c` at fixed `C6` deepens the well: every time a new dimer
//! bound state appears the scattering length passes through ±∞ and the
//! zero-energy solution gains a node. The tuning routine stays on the branch
//! with the requested number of nodes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::Real;
use crate::units::UnitSystem;

/// Default height of the finite core surrogate, in Kelvin.
pub const DEFAULT_CORE_HEIGHT_K: f64 = 1e6;

/// Hard-core + van der Waals pair potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBodyPotential<T> {
    /// Hard-core radius, Å.
    pub r_c: T,
    /// Dispersion coefficient, energy·Å⁶.
    pub c6: T,
    /// Finite stand-in for the infinite core, used only for hyperangular
    /// matrix elements.
    pub core_height: T,
    pub units: UnitSystem<T>,
}

impl<T: Real> TwoBodyPotential<T> {
    pub fn new(r_c: T, c6: T, core_height: T, units: UnitSystem<T>) -> Result<Self> {
        if !(r_c > T::zero() && r_c.is_finite()) {
            return Err(Error::InvalidParameter(format!("r_c = {r_c}")));
        }
        if !(c6 >= T::zero() && c6.is_finite()) {
            return Err(Error::InvalidParameter(format!("C6 = {c6}")));
        }
        if !(core_height > T::zero()) {
            return Err(Error::InvalidParameter(format!("core height = {core_height}")));
        }
        Ok(Self { r_c, c6, core_height, units })
    }

    /// Potential with the default core height of 10⁶ K.
    pub fn with_default_core(r_c: T, c6: T, units: UnitSystem<T>) -> Result<Self> {
        Self::new(r_c, c6, units.kelvin_to_energy(T::lit(DEFAULT_CORE_HEIGHT_K)), units)
    }

    /// `-C6/r⁶` outside the core.
    #[inline]
    pub fn tail(&self, r: T) -> T {
        -self.c6 / r.powi(6)
    }

    /// `V(r)` with the finite core surrogate inside `r <= r_c`.
    #[inline]
    pub fn value(&self, r: T) -> T {
        if r > self.r_c {
            self.tail(r)
        } else {
            self.core_height
        }
    }

    /// van der Waals length `(m C6/ħ²)^{1/4}`.
    pub fn vdw_length(&self) -> T {
        self.units.vdw_length(self.c6)
    }

    pub fn with_core_radius(&self, r_c: T) -> Self {
        Self { r_c, ..*self }
    }

    pub fn with_core_height(&self, core_height: T) -> Self {
        Self { core_height, ..*self }
    }
}

/// Radially graded integration grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrationGrid<T> {
    pub r_max: T,
    /// Step at the core edge.
    pub first_step: T,
    /// Geometric step growth factor.
    pub growth: T,
    /// Upper bound on `k(r) h` where `k² = (m/ħ²)|V|`.
    pub max_phase_step: T,
    /// Fraction of the radial range (at the outer end) used for the
    /// asymptotic fit.
    pub fit_fraction: T,
}

impl<T: Real> IntegrationGrid<T> {
    /// Grid reaching `100 × max(r_c, vdW length)`.
    pub fn for_potential(pot: &TwoBodyPotential<T>) -> Self {
        let scale = pot.r_c.max(pot.vdw_length());
        Self {
            r_max: T::lit(100.0) * scale,
            first_step: T::lit(1e-3) * pot.r_c,
            growth: T::lit(1.002),
            max_phase_step: T::lit(0.05),
            fit_fraction: T::lit(0.2),
        }
    }

    pub fn with_r_max(&self, r_max: T) -> Self {
        Self { r_max, ..*self }
    }
}

/// Outcome of a zero-energy integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringResult<T> {
    pub a_s: T,
    /// Inner edge of the asymptotic fit window.
    pub matching_radius: T,
    pub fit_window: (T, T),
    /// Nodes of `u` in `(r_c, ∞)`; equals the number of dimer bound states.
    pub node_count: usize,
    /// RMS fit residual relative to the size of the fitted line.
    pub residual: T,
    pub steps: usize,
    pub grid: IntegrationGrid<T>,
}

/// Relative fit residual above which the grid is deemed too short.
const FIT_TOLERANCE: f64 = 1e-4;

/// Zero-energy scattering length and node count.
pub fn scattering_length<T: Real>(pot: &TwoBodyPotential<T>, grid: &IntegrationGrid<T>) -> Result<ScatteringResult<T>> {
    let min_reach = T::lit(50.0) * pot.r_c.max(pot.vdw_length());
    if grid.r_max < min_reach {
        return Err(Error::InvalidParameter(format!(
            "integration grid ends at {} Å; need at least {min_reach} Å",
            grid.r_max
        )));
    }
    let inv_h2m = T::one() / pot.units.hbar2_over_m;
    let k2 = |r: T| pot.tail(r) * inv_h2m;
    let fit_start = grid.r_max - grid.fit_fraction * (grid.r_max - pot.r_c);

    let mut r = pot.r_c;
    let mut u = T::zero();
    let mut du = T::one();
    let mut h_geom = grid.first_step;
    let mut nodes = 0usize;
    let mut steps = 0usize;
    let mut prev_sign = 0i8;
    // (r, u) samples for the least-squares line u = p r + q
    let mut window: Vec<(T, T)> = Vec::new();

    while r < grid.r_max {
        let local_k = k2(r).abs().sqrt();
        let mut h = h_geom;
        if local_k > T::zero() {
            h = h.min(grid.max_phase_step / local_k);
        }
        if r + h > grid.r_max {
            h = grid.r_max - r;
        }
        let half = T::half() * h;
        // RK4 on (u, u')
        let k1u = du;
        let k1d = k2(r) * u;
        let k2u = du + half * k1d;
        let k2d = k2(r + half) * (u + half * k1u);
        let k3u = du + half * k2d;
        let k3d = k2(r + half) * (u + half * k2u);
        let k4u = du + h * k3d;
        let k4d = k2(r + h) * (u + h * k3u);
        let sixth = h / T::lit(6.0);
        u += sixth * (k1u + T::two() * (k2u + k3u) + k4u);
        du += sixth * (k1d + T::two() * (k2d + k3d) + k4d);
        r += h;
        steps += 1;
        h_geom *= grid.growth;
        if !(u.is_finite() && du.is_finite()) {
            return Err(Error::NonFiniteIntegration { r: r.to_f64_lossy() });
        }
        let sign = if u > T::zero() {
            1
        } else if u < T::zero() {
            -1
        } else {
            0
        };
        if sign != 0 {
            if prev_sign != 0 && sign != prev_sign {
                nodes += 1;
            }
            prev_sign = sign;
        }
        if r >= fit_start {
            window.push((r, u));
        }
    }

    if window.len() < 3 {
        return Err(Error::AsymptoteFit { residual: f64::INFINITY, tolerance: FIT_TOLERANCE });
    }
    let n = T::from_count(window.len());
    let mean_r = window.iter().map(|p| p.0).sum::<T>() / n;
    let mean_u = window.iter().map(|p| p.1).sum::<T>() / n;
    let (mut var_r, mut cov) = (T::zero(), T::zero());
    for &(rr, uu) in &window {
        var_r += (rr - mean_r) * (rr - mean_r);
        cov += (rr - mean_r) * (uu - mean_u);
    }
    let slope = cov / var_r;
    let intercept = mean_u - slope * mean_r;
    let sq: T = window.iter().map(|&(rr, uu)| (uu - slope * rr - intercept).powi(2)).sum();
    let scale = (slope.abs() * grid.r_max + intercept.abs()).max(T::min_positive_value());
    let residual = (sq / n).sqrt() / scale;
    if !(residual.to_f64_lossy() <= FIT_TOLERANCE) {
        return Err(Error::AsymptoteFit { residual: residual.to_f64_lossy(), tolerance: FIT_TOLERANCE });
    }
    let a_s = -intercept / slope;
    // the last node may lie beyond the grid when a_s is huge and positive
    if a_s > grid.r_max {
        nodes += 1;
    }
    Ok(ScatteringResult {
        a_s,
        matching_radius: fit_start,
        fit_window: (fit_start, grid.r_max),
        node_count: nodes,
        residual,
        steps,
        grid: *grid,
    })
}

/// Number of dimer bound states supported by `pot`.
pub fn count_dimer_bound_states<T: Real>(pot: &TwoBodyPotential<T>) -> Result<usize> {
    Ok(scattering_length(pot, &IntegrationGrid::for_potential(pot))?.node_count)
}

fn scatter_at<T: Real>(template: &TwoBodyPotential<T>, r_c: T) -> Result<ScatteringResult<T>> {
    let pot = template.with_core_radius(r_c);
    scattering_length(&pot, &IntegrationGrid::for_potential(&pot))
}

/// Hard-core radius interval `(lower, upper)` on which the zero-energy
/// solution has exactly `nodes` nodes.
pub fn branch_interval<T: Real>(template: &TwoBodyPotential<T>, nodes: usize) -> Result<(T, T)> {
    let beta6 = template.vdw_length();
    if beta6 <= T::zero() {
        return Err(Error::Bracketing("no attractive tail".into()));
    }
    let count = |r: T| -> Result<usize> { Ok(scatter_at(template, r)?.node_count) };

    let mut r_hi = T::lit(4.0) * beta6;
    let mut guard = 0;
    while count(r_hi)? >= nodes.max(1) {
        r_hi *= T::two();
        guard += 1;
        if guard > 20 {
            return Err(Error::Bracketing("no node-free radius found".into()));
        }
    }
    let two_pi = T::two() * T::PI();
    let mut r_lo = beta6 / (two_pi * T::from_count(nodes + 2)).sqrt();
    guard = 0;
    while count(r_lo)? <= nodes {
        r_lo /= T::lit(1.5);
        guard += 1;
        if guard > 40 {
            return Err(Error::Bracketing(format!("could not reach more than {nodes} nodes")));
        }
    }
    // count is non-increasing in r_c
    let bisect = |mut inside: T, mut outside: T, pred: &dyn Fn(usize) -> bool| -> Result<T> {
        for _ in 0..200 {
            let mid = T::half() * (inside + outside);
            if (outside - inside).abs() <= T::lit(1e-13) * mid {
                break;
            }
            if pred(count(mid)?) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(T::half() * (inside + outside))
    };
    let upper = bisect(r_lo, r_hi, &|c| c >= nodes)?;
    let lower = bisect(r_lo, upper, &|c| c > nodes)?;
    if !(lower < upper) {
        return Err(Error::Bracketing(format!("empty branch for {nodes} nodes")));
    }
    Ok((lower, upper))
}

/// Result of tuning the hard-core radius.
#[derive(Debug, Clone, Copy)]
pub struct TunedPotential<T> {
    pub potential: TwoBodyPotential<T>,
    pub scattering: ScatteringResult<T>,
    /// Branch interval of `r_c` with the requested node count (absent for
    /// the pure hard sphere).
    pub branch: Option<(T, T)>,
}

/// Finds `r_c` on the branch with `target_nodes` nodes such that
/// `a_s(r_c) = target_as` to relative accuracy 1e-4 or better.
pub fn tune_hardcore<T: Real>(
    c6: T,
    target_as: T,
    target_nodes: usize,
    units: &UnitSystem<T>,
) -> Result<TunedPotential<T>> {
    if !(target_as > T::zero()) {
        return Err(Error::InvalidParameter(format!("target a_s = {target_as}")));
    }
    if c6 == T::zero() {
        // hard sphere: a_s = r_c
        let potential = TwoBodyPotential::with_default_core(target_as, c6, *units)?;
        let scattering = scattering_length(&potential, &IntegrationGrid::for_potential(&potential))?;
        return Ok(TunedPotential { potential, scattering, branch: None });
    }
    if target_nodes < 1 {
        return Err(Error::InvalidParameter("target node count must be >= 1".into()));
    }
    let template = TwoBodyPotential::with_default_core(T::one(), c6, *units)?;
    let (lower, upper) = branch_interval(&template, target_nodes)?;
    let width = upper - lower;
    let mut lo = lower + T::lit(1e-9) * width;
    let mut hi = upper - T::lit(1e-9) * width;
    let g = |r: T| -> Result<T> { Ok(scatter_at(&template, r)?.a_s - target_as) };
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    // a_s runs from -∞ at the lower edge of the branch to +∞ at the upper
    if !(g_lo < T::zero() && g_hi > T::zero()) {
        return Err(Error::Unreachable { target: target_as.to_f64_lossy(), nodes: target_nodes });
    }
    for _ in 0..200 {
        let mid = T::half() * (lo + hi);
        if hi - lo <= T::lit(1e-12) * mid {
            break;
        }
        if g(mid)? > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r_c = T::half() * (lo + hi);
    let potential = template.with_core_radius(r_c);
    let scattering = scattering_length(&potential, &IntegrationGrid::for_potential(&potential))?;
    let rel = ((scattering.a_s - target_as) / target_as).abs();
    if !(rel < T::lit(1e-4)) || scattering.node_count != target_nodes {
        return Err(Error::Unreachable { target: target_as.to_f64_lossy(), nodes: target_nodes });
    }
    Ok(TunedPotential { potential, scattering, branch: Some((lower, upper)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{make_units, Species};

    fn rb() -> UnitSystem<f64> {
        make_units(&Species::Rb87)
    }

    fn rb_c6(units: &UnitSystem<f64>) -> f64 {
        units.c6_from_ev(2803.0)
    }

    #[test]
    fn tail_is_exact() {
        let u = rb();
        let pot = TwoBodyPotential::with_default_core(15.18, rb_c6(&u), u).unwrap();
        for r in [15.2, 20.0, 123.456, 1e4] {
            assert_eq!(pot.value(r), -rb_c6(&u) / r.powi(6));
        }
        assert_eq!(pot.value(15.18), pot.core_height);
        assert_eq!(pot.value(1.0), 1e6);
    }

    #[test]
    fn rejects_invalid_potential() {
        let u = rb();
        assert!(TwoBodyPotential::new(0.0, 1.0, 1.0, u).is_err());
        assert!(TwoBodyPotential::new(1.0, -1.0, 1.0, u).is_err());
        assert!(TwoBodyPotential::new(1.0, 1.0, 0.0, u).is_err());
    }

    #[test]
    fn hard_sphere_scattering_length_is_core_radius() {
        let u = rb();
        let pot = TwoBodyPotential::with_default_core(15.18, 0.0, u).unwrap();
        let res = scattering_length(&pot, &IntegrationGrid::for_potential(&pot)).unwrap();
        assert!((res.a_s - 15.18).abs() < 1e-9, "{}", res.a_s);
        assert_eq!(res.node_count, 0);
        assert_eq!(count_dimer_bound_states(&pot).unwrap(), 0);
    }

    #[test]
    fn hard_sphere_tuning_is_exact() {
        let u = rb();
        let t = tune_hardcore(0.0, 52.9, 1, &u).unwrap();
        assert_eq!(t.potential.r_c, 52.9);
    }

    #[test]
    fn short_grid_is_rejected() {
        let u = rb();
        let pot = TwoBodyPotential::with_default_core(15.18, rb_c6(&u), u).unwrap();
        let grid = IntegrationGrid::for_potential(&pot).with_r_max(500.0);
        assert!(matches!(scattering_length(&pot, &grid), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn stable_under_grid_doubling() {
        let u = rb();
        let pot = TwoBodyPotential::with_default_core(15.18, rb_c6(&u), u).unwrap();
        let grid = IntegrationGrid::for_potential(&pot);
        let a1 = scattering_length(&pot, &grid).unwrap().a_s;
        let a2 = scattering_length(&pot, &grid.with_r_max(grid.r_max * 2.0)).unwrap().a_s;
        assert!(((a1 - a2) / a1).abs() < 5e-3);
    }

    #[test]
    fn matching_radius_invariance() {
        let u = rb();
        let pot = TwoBodyPotential::with_default_core(15.18, rb_c6(&u), u).unwrap();
        let grid = IntegrationGrid::for_potential(&pot);
        let a1 = scattering_length(&pot, &grid).unwrap().a_s;
        let narrow = IntegrationGrid { fit_fraction: 0.05, ..grid };
        let a2 = scattering_length(&pot, &narrow).unwrap().a_s;
        assert!(((a1 - a2) / a1).abs() < 5e-3);
    }
}
