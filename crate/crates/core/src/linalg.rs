//! Dense symmetric and symmetric-tridiagonal eigensolvers.
//!
//! Dense matrices are reduced to tridiagonal form with Householder
//! reflections and then diagonalized by implicit QL with Wilkinson-style
//! shifts. Large tridiagonal problems where only the bottom of the spectrum
//! is wanted go through Sturm-sequence bisection instead.

use crate::error::{Error, Result};
use crate::num::Real;

const MAX_QL_SWEEPS: usize = 60;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        let mut scale = T::min_positive_value();
        for i in 0..self.n {
            for j in 0..self.n {
                scale = scale.max(self[(i, j)].abs());
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    pub fn frobenius_off_diagonal(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    acc += self[(i, j)] * self[(i, j)];
                }
            }
        }
        acc.sqrt()
    }

    pub fn frobenius_diagonal(&self) -> T {
        (0..self.n).map(|i| self[(i, i)] * self[(i, i)]).sum::<T>().sqrt()
    }
}

impl<T> std::ops::Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Symmetric tridiagonal matrix: `diag` of length n, `off` of length n-1.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn new(diag: Vec<T>, off: Vec<T>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::InvalidParameter(format!(
                "tridiagonal with {} diagonal and {} off-diagonal entries",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.dim();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { T::zero() };
            let right = if i + 1 < n { self.off[i].abs() } else { T::zero() };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: T) -> usize {
        let off2: Vec<T> = self.off.iter().map(|&e| e * e).collect();
        sturm_count(&self.diag, &off2, x)
    }

    /// The lowest eigenvalues that lie below `upper`, at most `limit` of them,
    /// in ascending order.
    ///
    /// Each level is isolated by Sturm counts and polished with Newton steps
    /// on `ln|det(T - x)|`; any step leaving the current bracket falls back
    /// to bisection, so the result is as reliable as plain bisection.
    pub fn lowest_eigenvalues(&self, limit: usize, upper: Option<T>) -> Vec<T> {
        let off2: Vec<T> = self.off.iter().map(|&e| e * e).collect();
        let (glo, ghi) = self.gershgorin();
        let pad = (glo.abs() + ghi.abs()) * T::epsilon() * T::lit(4.0) + T::min_positive_value();
        let (glo, ghi) = (glo - pad, ghi + pad);
        let cap = match upper {
            Some(u) => u.min(ghi),
            None => ghi,
        };
        let available = match upper {
            Some(u) if u <= ghi => sturm_count(&self.diag, &off2, u),
            _ => self.dim(),
        };
        let wanted = available.min(limit);
        let eps = T::epsilon();
        // brackets shared across levels: every count tightens all of them
        let mut lo = vec![glo; wanted];
        let mut hi = vec![cap; wanted];
        let mut out = Vec::with_capacity(wanted);
        for k in 0..wanted {
            // extrapolate from the previous spacing for a first guess
            let mut x = match (out.len().checked_sub(2), out.last()) {
                (Some(i), Some(&e)) if e + (e - out[i]) < hi[k] && e > out[i] => e + (e - out[i]),
                _ => T::half() * (lo[k] + hi[k]),
            };
            for _ in 0..300 {
                let tol = eps * (lo[k].abs() + hi[k].abs()) + T::min_positive_value();
                if hi[k] - lo[k] <= tol {
                    break;
                }
                let (c, slope) = sturm_count_slope(&self.diag, &off2, x);
                for j in k..wanted {
                    if j < c {
                        hi[j] = hi[j].min(x);
                    } else {
                        lo[j] = lo[j].max(x);
                    }
                }
                let step = -slope.recip();
                let next = x + step;
                if step.is_finite() && next > lo[k] && next < hi[k] {
                    if step.abs() <= eps * x.abs() + T::min_positive_value() {
                        // converged to some eigenvalue; accept only if it is the k-th
                        let d = T::lit(8.0) * eps * next.abs() + T::min_positive_value();
                        let below = sturm_count(&self.diag, &off2, next - d);
                        let above = sturm_count(&self.diag, &off2, next + d);
                        if below <= k && above > k {
                            lo[k] = next;
                            hi[k] = next;
                            break;
                        }
                        if below > k {
                            hi[k] = hi[k].min(next - d);
                        } else {
                            lo[k] = lo[k].max(next + d);
                        }
                        x = T::half() * (lo[k] + hi[k]);
                        continue;
                    }
                    x = next;
                } else {
                    x = T::half() * (lo[k] + hi[k]);
                }
            }
            let e = T::half() * (lo[k] + hi[k]);
            for j in k + 1..wanted {
                lo[j] = lo[j].max(e);
            }
            out.push(e);
        }
        out
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        let mut d = self.diag.clone();
        let mut e = self.off.clone();
        e.push(T::zero());
        implicit_ql(&mut d, &mut e, None)?;
        d.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Ok(d)
    }
}

/// Sturm count together with `d/dx ln|det(T - x)|`.
fn sturm_count_slope<T: Real>(diag: &[T], off2: &[T], x: T) -> (usize, T) {
    let tiny = T::min_positive_value().sqrt();
    let mut q = diag[0] - x;
    let mut dq = -T::one();
    let mut count = usize::from(q < T::zero());
    let mut slope = dq / q;
    for i in 1..diag.len() {
        let denom = if q.abs() < tiny { tiny.copysign(q) } else { q };
        let r = off2[i - 1] / denom;
        dq = -T::one() + r * dq / denom;
        q = diag[i] - x - r;
        count += usize::from(q < T::zero());
        slope += dq / q;
    }
    (count, slope)
}

fn sturm_count<T: Real>(diag: &[T], off2: &[T], x: T) -> usize {
    let tiny = T::min_positive_value().sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < T::zero() {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q.abs() < tiny { tiny.copysign(q) } else { q };
        q = diag[i] - x - off2[i - 1] / denom;
        if q < T::zero() {
            count += 1;
        }
    }
    count
}

/// Implicit QL iteration on a symmetric tridiagonal matrix.
///
/// `e[i]` couples `d[i]` and `d[i+1]`; `e` has length n and its last entry
/// is scratch. When `z` is given its columns are rotated along, so starting
/// from the identity yields the eigenvectors in the columns of `z`.
fn implicit_ql<T: Real>(d: &mut [T], e: &mut [T], mut z: Option<&mut DenseMatrix<T>>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = T::zero();
    let eps = T::epsilon();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if iter == MAX_QL_SWEEPS {
                return Err(Error::EigenFailure { iterations: iter });
            }
            iter += 1;
            let mut g = (d[l + 1] - d[l]) / (T::two() * e[l]);
            let mut r = g.hypot(T::one());
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::two() * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[(k, i + 1)];
                        z[(k, i + 1)] = s * z[(k, i)] + c * f;
                        z[(k, i)] = c * z[(k, i)] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}

/// Householder reduction `A = Q T Qᵀ`.
///
/// Returns the diagonal and off-diagonal of `T`, and `Q` when requested.
pub fn tridiagonalize<T: Real>(a: &DenseMatrix<T>, want_q: bool) -> (SymTridiagonal<T>, Option<DenseMatrix<T>>) {
    let n = a.dim();
    let mut a = a.clone();
    // reflectors stored as (k, v, tau) acting on rows/cols k+1..n
    let mut reflectors: Vec<(usize, Vec<T>, T)> = Vec::new();
    let mut off = vec![T::zero(); n.saturating_sub(1)];
    let mut p = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut v: Vec<T> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let alpha = v[0];
        let sigma: T = v[1..].iter().map(|&x| x * x).sum();
        if sigma == T::zero() {
            off[k] = alpha;
            continue;
        }
        let norm = (alpha * alpha + sigma).sqrt();
        let beta = if alpha > T::zero() { -norm } else { norm };
        v[0] = alpha - beta;
        let vtv = v[0] * v[0] + sigma;
        let tau = T::two() / vtv;
        off[k] = beta;
        // p = tau * A22 v
        for i in 0..m {
            let row = &a.row(k + 1 + i)[k + 1..];
            let mut acc = T::zero();
            for j in 0..m {
                acc += row[j] * v[j];
            }
            p[i] = tau * acc;
        }
        let mut ptv = T::zero();
        for i in 0..m {
            ptv += p[i] * v[i];
        }
        let half_tau_ptv = T::half() * tau * ptv;
        for i in 0..m {
            w[i] = p[i] - half_tau_ptv * v[i];
        }
        for i in 0..m {
            let vi = v[i];
            let wi = w[i];
            let base = (k + 1 + i) * n + k + 1;
            let row = &mut a.data[base..base + m];
            for j in 0..m {
                row[j] -= vi * w[j] + wi * v[j];
            }
        }
        if want_q {
            reflectors.push((k, v, tau));
        }
    }
    if n >= 2 {
        off[n - 2] = a[(n - 1, n - 2)];
    }
    let diag = a.diagonal();
    let q = want_q.then(|| {
        let mut q = DenseMatrix::identity(n);
        // Q = H_0 H_1 ... H_{n-3}; apply from the right-most reflector outwards
        for (k, v, tau) in reflectors.iter().rev() {
            let m = v.len();
            for col in 0..n {
                let mut dot = T::zero();
                for i in 0..m {
                    dot += v[i] * q[(k + 1 + i, col)];
                }
                if dot == T::zero() {
                    continue;
                }
                let scale = *tau * dot;
                for i in 0..m {
                    q[(k + 1 + i, col)] -= scale * v[i];
                }
            }
        }
        q
    });
    (SymTridiagonal { diag, off }, q)
}

/// Eigen-decomposition of a dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Eigenvectors stored as columns, in the order of `values`.
    pub vectors: DenseMatrix<T>,
}

impl<T: Real> SymmetricEigen<T> {
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        let n = a.dim();
        let (tri, q) = tridiagonalize(a, true);
        let mut z = q.expect("requested");
        let mut d = tri.diag;
        let mut e = tri.off;
        e.push(T::zero());
        implicit_ql(&mut d, &mut e, Some(&mut z))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
        let values = order.iter().map(|&i| d[i]).collect();
        let vectors = DenseMatrix::from_fn(n, |r, c| z[(r, order[c])]);
        Ok(Self { values, vectors })
    }

    pub fn vector(&self, k: usize) -> Vec<T> {
        (0..self.vectors.dim()).map(|r| self.vectors[(r, k)]).collect()
    }
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues<T: Real>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    let (tri, _) = tridiagonalize(a, false);
    tri.eigenvalues()
}
