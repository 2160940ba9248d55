//! Potential-harmonic basis: Jacobi polynomials in `z = cos 2φ`, their
//! normalization against the hyperangular weight, and the overlap factors
//! `f_Kl` between one pair's harmonics and the symmetrized sum over pairs.
//!
//! For an `N`-boson cluster with pair angular momentum `l` the hyperangular
//! factor of the `K`-th harmonic is a Jacobi polynomial `P_K^{(α,β)}(z)` with
//! `α = (3N-8)/2` and `β = l + 1/2`, orthogonal under
//! `w(z) = (1-z)^α (1+z)^β` on `[-1, 1]`. The pair distance is
//! `r_ij = r cos φ = r sqrt((1+z)/2)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::{ln_gamma, Real};
use crate::quadrature::{GaussRule, JacobiRecurrence};

/// Largest grand-orbital index the overlap recursion is trusted for.
pub const MAX_K: usize = 400;

/// Quantum numbers and derived exponents of a potential-harmonic basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisSpec<T> {
    pub n_particles: usize,
    pub l: usize,
    pub k_max: usize,
    pub alpha: T,
    pub beta: T,
    /// `ℒ = l + (3N-6)/2`.
    pub cal_l: T,
}

impl<T: Real> BasisSpec<T> {
    pub fn new(n_particles: usize, l: usize, k_max: usize) -> Result<Self> {
        if n_particles < 3 {
            return Err(Error::InvalidParameter(format!("N = {n_particles}; need N >= 3")));
        }
        if k_max < 1 {
            return Err(Error::InvalidParameter("K_max must be at least 1".into()));
        }
        let n = T::from_count(n_particles);
        let three = T::lit(3.0);
        Ok(Self {
            n_particles,
            l,
            k_max,
            alpha: (three * n - T::lit(8.0)) / T::two(),
            beta: T::from_count(l) + T::half(),
            cal_l: T::from_count(l) + (three * n - T::lit(6.0)) / T::two(),
        })
    }

    pub fn size(&self) -> usize {
        self.k_max + 1
    }

    /// `ℒ(ℒ+1) + 4K(K+α+β+1)`: the hypercentrifugal coefficient of `ħ²/(m r²)`.
    pub fn centrifugal(&self, k: usize) -> T {
        let k = T::from_count(k);
        let four = T::lit(4.0);
        self.cal_l * (self.cal_l + T::one()) + four * k * (k + self.alpha + self.beta + T::one())
    }

    /// Default Gauss–Jacobi order `4 K_max + 16`.
    pub fn default_quadrature_order(&self) -> usize {
        4 * self.k_max + 16
    }

    /// Orthonormal basis evaluator for this spec.
    pub fn evaluator(&self) -> Result<BasisEvaluator<T>> {
        BasisEvaluator::new(self)
    }

    pub fn gauss_jacobi(&self, order: usize) -> Result<GaussRule<T>> {
        GaussRule::jacobi(order, self.alpha, self.beta)
    }
}

/// Jacobi polynomial `P_K^{(α,β)}(z)` by the three-term recurrence.
pub fn jacobi_eval<T: Real>(k: usize, alpha: T, beta: T, z: T) -> T {
    let one = T::one();
    let two = T::two();
    let mut p_prev = one;
    if k == 0 {
        return p_prev;
    }
    let mut p = (alpha + one) + (alpha + beta + two) * (z - one) / two;
    let ab = alpha + beta;
    for n in 1..k {
        let nf = T::from_count(n);
        let s = two * nf + ab;
        let c1 = two * (nf + one) * (nf + ab + one) * s;
        let c2 = (s + one) * ((s + two) * s * z + alpha * alpha - beta * beta);
        let c3 = two * (nf + alpha) * (nf + beta) * (s + two);
        let next = (c2 * p - c3 * p_prev) / c1;
        p_prev = p;
        p = next;
    }
    p
}

/// Squared norm `h_K = ∫ P_K² w dz`.
pub fn jacobi_norm_squared<T: Real>(k: usize, alpha: T, beta: T) -> T {
    if k == 0 {
        return crate::quadrature::jacobi_weight_mass(alpha, beta);
    }
    let one = T::one();
    let kf = T::from_count(k);
    let ln = (alpha + beta + one) * T::LN_2() - (T::two() * kf + alpha + beta + one).ln() + ln_gamma(kf + alpha + one)
        + ln_gamma(kf + beta + one)
        - ln_gamma(kf + alpha + beta + one)
        - ln_gamma(kf + one);
    ln.exp()
}

/// Normalization constant making `ph_norm · P_K` orthonormal under `w(z)`.
pub fn ph_norm<T: Real>(spec: &BasisSpec<T>, k: usize) -> Result<T> {
    if k > spec.k_max {
        return Err(Error::InvalidParameter(format!("K = {k} exceeds K_max = {}", spec.k_max)));
    }
    Ok(T::one() / jacobi_norm_squared(k, spec.alpha, spec.beta).sqrt())
}

/// Evaluates all normalized basis functions `B_0(z) .. B_Kmax(z)` at once.
///
/// Uses the orthonormal recurrence, which stays bounded for large `α`
/// where the raw `P_K` would overflow in single precision.
#[derive(Debug, Clone)]
pub struct BasisEvaluator<T> {
    rec: JacobiRecurrence<T>,
}

impl<T: Real> BasisEvaluator<T> {
    pub fn new(spec: &BasisSpec<T>) -> Result<Self> {
        Ok(Self { rec: JacobiRecurrence::new(spec.size(), spec.alpha, spec.beta)? })
    }

    pub fn size(&self) -> usize {
        self.rec.a.len()
    }

    pub fn eval_into(&self, z: T, out: &mut [T]) {
        self.rec.orthonormal_into(z, out)
    }

    pub fn eval(&self, z: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.size()];
        self.eval_into(z, &mut out);
        out
    }
}

/// Overlap factors `f_Kl` for `K = 0 ..= K_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapFactors<T> {
    pub f: Vec<T>,
    pub n_particles: usize,
    pub l: usize,
}

impl<T: Real> OverlapFactors<T> {
    pub fn get(&self, k: usize) -> T {
        self.f[k]
    }

    /// All factors equal to one (single-pair limit); useful for testing the
    /// bare potential matrix.
    pub fn unit(spec: &BasisSpec<T>) -> Self {
        Self { f: vec![T::one(); spec.size()], n_particles: spec.n_particles, l: spec.l }
    }
}

/// Source of `f_Kl²`, the overlap of one pair's harmonic with the sum of
/// the corresponding harmonics of all pairs.
pub trait OverlapProvider<T: Real> {
    fn overlap_squared(&self, n_particles: usize, l: usize, k: usize, alpha: T, beta: T) -> T;
}

/// Closed form from projecting the harmonic of pair `(kl)` onto the
/// harmonics of pair `(ij)`.
///
/// A pair sharing one particle with `(ij)` sits at direction cosine `±1/2`
/// in the mass-weighted relative space (`z = -1/2`), a disjoint pair at
/// cosine 0 (`z = -1`). Each contributes `γ^l P_K(z) / P_K(1)`:
///
/// `f² = 1 + (N-2) [(1/2)^l + (-1/2)^l] P_K(-1/2)/P_K(1)
///         + δ_{l0} (N-2)(N-3)/2 · P_K(-1)/P_K(1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProjectionOverlap;

impl<T: Real> OverlapProvider<T> for ProjectionOverlap {
    fn overlap_squared(&self, n_particles: usize, l: usize, k: usize, alpha: T, beta: T) -> T {
        let at_one = jacobi_eval(k, alpha, beta, T::one());
        let n = T::from_count(n_particles);
        let two = T::two();
        let half_pow = T::half().powi(l as i32);
        let sign = if l.is_multiple_of(2) { T::one() } else { -T::one() };
        let shared = (n - two) * half_pow * (T::one() + sign);
        let mut f2 = T::one();
        if n_particles > 2 {
            f2 += shared * jacobi_eval(k, alpha, beta, -T::half()) / at_one;
        }
        if l == 0 && n_particles > 3 {
            let disjoint = (n - two) * (n - T::lit(3.0)) / two;
            f2 += disjoint * jacobi_eval(k, alpha, beta, -T::one()) / at_one;
        }
        f2
    }
}

/// Overlap factors from the default [`ProjectionOverlap`] provider.
pub fn overlap_factors<T: Real>(spec: &BasisSpec<T>) -> Result<OverlapFactors<T>> {
    overlap_factors_with(spec, &ProjectionOverlap)
}

pub fn overlap_factors_with<T: Real>(
    spec: &BasisSpec<T>,
    provider: &impl OverlapProvider<T>,
) -> Result<OverlapFactors<T>> {
    if spec.k_max > MAX_K {
        return Err(Error::InvalidParameter(format!("K_max = {} beyond supported {MAX_K}", spec.k_max)));
    }
    let f = (0..=spec.k_max)
        .map(|k| {
            let f2 = provider.overlap_squared(spec.n_particles, spec.l, k, spec.alpha, spec.beta);
            // exact zeros (e.g. N = 3, K = 1) come back as tiny negatives
            f2.max(T::zero()).sqrt()
        })
        .collect::<Vec<_>>();
    if !f.iter().all(|x| x.is_finite()) || f[0] <= T::zero() {
        return Err(Error::InvalidParameter("overlap factors not finite or f_0 <= 0".into()));
    }
    Ok(OverlapFactors { f, n_particles: spec.n_particles, l: spec.l })
}
