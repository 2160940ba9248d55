//! Gauss–Jacobi quadrature via the Golub–Welsch construction.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymmetricEigen};
use crate::num::{ln_gamma, Real};

/// Recurrence coefficients of the orthonormal Jacobi polynomials for the
/// weight `(1-z)^α (1+z)^β` on `[-1, 1]`:
/// `z p_k = b_{k+1} p_{k+1} + a_k p_k + b_k p_{k-1}`.
#[derive(Debug, Clone)]
pub struct JacobiRecurrence<T> {
    pub alpha: T,
    pub beta: T,
    /// Diagonal coefficients `a_0 .. a_{n-1}`.
    pub a: Vec<T>,
    /// Off-diagonal coefficients `b_1 .. b_{n-1}` stored at index `k-1`.
    pub b: Vec<T>,
    /// Total mass of the weight, `∫ w(z) dz`.
    pub mass: T,
}

impl<T: Real> JacobiRecurrence<T> {
    pub fn new(n: usize, alpha: T, beta: T) -> Result<Self> {
        if !(alpha > -T::one() && beta > -T::one()) {
            return Err(Error::InvalidParameter(format!("Jacobi weight exponents α = {alpha}, β = {beta}")));
        }
        let two = T::two();
        let ab = alpha + beta;
        let a = (0..n)
            .map(|k| {
                let k = T::from_count(k);
                let s = two * k + ab;
                if k == T::zero() {
                    (beta - alpha) / (ab + two)
                } else {
                    (beta * beta - alpha * alpha) / (s * (s + two))
                }
            })
            .collect();
        let b = (1..n)
            .map(|k| {
                let k = T::from_count(k);
                let s = two * k + ab;
                let num = T::lit(4.0) * k * (k + alpha) * (k + beta) * (k + ab);
                let den = s * s * (s + T::one()) * (s - T::one());
                (num / den).sqrt()
            })
            .collect();
        Ok(Self { alpha, beta, a, b, mass: jacobi_weight_mass(alpha, beta) })
    }

    /// Orthonormal polynomials `p_0(z) .. p_{n-1}(z)` written into `out`.
    pub fn orthonormal_into(&self, z: T, out: &mut [T]) {
        let n = out.len().min(self.a.len());
        if n == 0 {
            return;
        }
        out[0] = T::one() / self.mass.sqrt();
        if n > 1 {
            out[1] = (z - self.a[0]) * out[0] / self.b[0];
        }
        for k in 1..n.saturating_sub(1) {
            out[k + 1] = ((z - self.a[k]) * out[k] - self.b[k - 1] * out[k - 1]) / self.b[k];
        }
    }
}

/// `∫_{-1}^{1} (1-z)^α (1+z)^β dz = 2^{α+β+1} B(α+1, β+1)`.
pub fn jacobi_weight_mass<T: Real>(alpha: T, beta: T) -> T {
    let one = T::one();
    let ln = (alpha + beta + one) * T::LN_2() + ln_gamma(alpha + one) + ln_gamma(beta + one)
        - ln_gamma(alpha + beta + T::two());
    ln.exp()
}

/// Nodes and weights of an n-point Gauss rule.
#[derive(Debug, Clone)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussRule<T> {
    /// Gauss–Jacobi rule for `∫ f(z) (1-z)^α (1+z)^β dz`, exact for
    /// polynomials of degree `2n - 1`.
    pub fn jacobi(n: usize, alpha: T, beta: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("quadrature order 0".into()));
        }
        let rec = JacobiRecurrence::new(n, alpha, beta)?;
        let m = DenseMatrix::from_fn(n, |i, j| {
            if i == j {
                rec.a[i]
            } else if i + 1 == j {
                rec.b[i]
            } else if j + 1 == i {
                rec.b[j]
            } else {
                T::zero()
            }
        });
        let eig = SymmetricEigen::new(&m)?;
        let weights = (0..n).map(|k| rec.mass * eig.vectors[(0, k)] * eig.vectors[(0, k)]).collect();
        Ok(Self { nodes: eig.values, weights })
    }

    /// Gauss–Legendre rule on `[-1, 1]`.
    pub fn legendre(n: usize) -> Result<Self> {
        Self::jacobi(n, T::zero(), T::zero())
    }

    /// Legendre rule mapped to `[lo, hi]`.
    pub fn legendre_on(n: usize, lo: T, hi: T) -> Result<Self> {
        let base = Self::legendre(n)?;
        let half = T::half() * (hi - lo);
        let mid = T::half() * (hi + lo);
        Ok(Self {
            nodes: base.nodes.iter().map(|&x| mid + half * x).collect(),
            weights: base.weights.iter().map(|&w| w * half).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}
