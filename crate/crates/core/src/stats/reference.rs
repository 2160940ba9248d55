//! Closed-form reference densities for spacings `s` and spacing ratios `r`.

use serde::{Deserialize, Serialize};

use crate::num::{gamma, Real};
use crate::quadrature::GaussRule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReferenceCurve<T> {
    /// `e^{-s}`
    PoissonPs,
    /// `(π/2) s e^{-π s²/4}`
    WignerPs,
    /// `4 s e^{-2s}`
    SemiPoissonPs,
    /// `(1+ν) a s^ν e^{-a s^{1+ν}}`
    BrodyPs { nu: T },
    /// `1/(1+r)²`
    PoissonPr,
    /// `(27/8) (r+r²) / (1+r+r²)^{5/2}`
    GoePr,
}

/// Brody scale `a = Γ((2+ν)/(1+ν))^{1+ν}`.
pub fn brody_a<T: Real>(nu: T) -> T {
    let one = T::one();
    gamma((T::two() + nu) / (one + nu)).powf(one + nu)
}

impl<T: Real> ReferenceCurve<T> {
    pub fn name(&self) -> String {
        match self {
            ReferenceCurve::PoissonPs => "poisson-ps".into(),
            ReferenceCurve::WignerPs => "wigner-ps".into(),
            ReferenceCurve::SemiPoissonPs => "semipoisson-ps".into(),
            ReferenceCurve::BrodyPs { nu } => format!("brody-ps({nu})"),
            ReferenceCurve::PoissonPr => "poisson-pr".into(),
            ReferenceCurve::GoePr => "goe-pr".into(),
        }
    }

    pub fn eval(&self, x: T) -> T {
        let one = T::one();
        let two = T::two();
        match *self {
            ReferenceCurve::PoissonPs => (-x).exp(),
            ReferenceCurve::WignerPs => T::FRAC_PI_2() * x * (-T::FRAC_PI_4() * x * x).exp(),
            ReferenceCurve::SemiPoissonPs => T::lit(4.0) * x * (-two * x).exp(),
            ReferenceCurve::BrodyPs { nu } => {
                let a = brody_a(nu);
                (one + nu) * a * x.powf(nu) * (-a * x.powf(one + nu)).exp()
            }
            ReferenceCurve::PoissonPr => one / ((one + x) * (one + x)),
            ReferenceCurve::GoePr => {
                let q = one + x + x * x;
                T::lit(27.0 / 8.0) * (x + x * x) / (q * q * q.sqrt())
            }
        }
    }

    /// Cumulative distribution from 0.
    pub fn cdf(&self, x: T) -> T {
        let one = T::one();
        let two = T::two();
        match *self {
            ReferenceCurve::PoissonPs => one - (-x).exp(),
            ReferenceCurve::WignerPs => one - (-T::FRAC_PI_4() * x * x).exp(),
            ReferenceCurve::SemiPoissonPs => one - (one + two * x) * (-two * x).exp(),
            ReferenceCurve::BrodyPs { nu } => one - (-brody_a(nu) * x.powf(one + nu)).exp(),
            ReferenceCurve::PoissonPr => x / (one + x),
            ReferenceCurve::GoePr => GaussRule::legendre_on(48, T::zero(), x)
                .map(|g| g.integrate(|t| self.eval(t)))
                .unwrap_or(T::nan()),
        }
    }

    /// Mean of the density over `[a, b]`.
    pub fn bin_average(&self, a: T, b: T) -> T {
        (self.cdf(b) - self.cdf(a)) / (b - a)
    }

    pub fn curve(&self, grid: &[T]) -> Vec<(T, T)> {
        grid.iter().map(|&x| (x, self.eval(x))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_values() {
        assert_eq!(ReferenceCurve::<f64>::WignerPs.eval(0.0), 0.0);
        assert_eq!(ReferenceCurve::<f64>::PoissonPs.eval(0.0), 1.0);
        assert_eq!(ReferenceCurve::<f64>::GoePr.eval(0.0), 0.0);
        assert_eq!(ReferenceCurve::<f64>::PoissonPr.eval(0.0), 1.0);
        assert!((brody_a(0.0f64) - 1.0).abs() < 1e-14);
        assert!((brody_a(1.0f64) - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }
}
