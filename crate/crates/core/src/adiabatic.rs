//! Hyperangular potential matrix and adiabatic effective potentials.
//!
//! At fixed hyperradius `r` the coupled equations reduce to the symmetric
//! matrix
//!
//! `M_KK'(r) = f_K V_KK'(r) f_K' + δ_KK' ħ²/(m r²) [ℒ(ℒ+1) + 4K(K+α+β+1)]`
//!
//! with `V_KK'(r) = ∫ B_K(z) V(r_ij(z)) B_K'(z) w(z) dz` and
//! `r_ij = r sqrt((1+z)/2)`. Its lowest eigenvalue is the effective
//! potential `ω_0(r)` of the hyperradial motion.
//!
//! The hard core is a step in `z`. A single Gauss–Jacobi rule over `[-1, 1]`
//! converges only algebraically across a step, so the default scheme splits
//! the interval at the core edge and covers the steep `r_ij⁻⁶` region with
//! geometrically growing panels in `1 + z`. The endpoint singularities of
//! the weight are absorbed by Gauss–Jacobi rules on the end panels.

use serde::Serialize;

use crate::basis::{BasisEvaluator, BasisSpec, OverlapFactors};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SymmetricEigen};
use crate::num::Real;
use crate::quadrature::GaussRule;
use crate::twobody::TwoBodyPotential;

/// A pair interaction as a function of the pair distance, with the radii at
/// which it is discontinuous.
pub trait PairFunction<T: Real> {
    fn value(&self, r_ij: T) -> T;

    /// Radii of jump discontinuities (may be empty).
    fn breakpoints(&self) -> Vec<T> {
        Vec::new()
    }
}

impl<T: Real> PairFunction<T> for TwoBodyPotential<T> {
    fn value(&self, r_ij: T) -> T {
        TwoBodyPotential::value(self, r_ij)
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![self.r_c]
    }
}

/// The hard-core + C6 interaction with the core region left out of the
/// hyperangular integral (zero inside `r_ij <= r_c`).
#[derive(Debug, Clone, Copy)]
pub struct ExcludedCore<'a, T>(pub &'a TwoBodyPotential<T>);

impl<T: Real> PairFunction<T> for ExcludedCore<'_, T> {
    fn value(&self, r_ij: T) -> T {
        if r_ij > self.0.r_c {
            self.0.tail(r_ij)
        } else {
            T::zero()
        }
    }

    fn breakpoints(&self) -> Vec<T> {
        vec![self.0.r_c]
    }
}

/// Treatment of the hard core inside the hyperangular integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoreModel {
    /// Finite barrier of height `core_height`.
    Barrier,
    /// Integrate only over `r_ij > r_c`.
    #[default]
    Excluded,
}

/// Adapter for a smooth closure.
pub struct Smooth<F>(pub F);

impl<T: Real, F: Fn(T) -> T> PairFunction<T> for Smooth<F> {
    fn value(&self, r_ij: T) -> T {
        (self.0)(r_ij)
    }
}

/// How `V_KK'` is integrated over `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuadratureScheme {
    /// One Gauss–Jacobi rule of the given order over `[-1, 1]`.
    GaussJacobi { order: usize },
    /// Panels split at discontinuities and graded towards `z = -1`, each
    /// with a rule of the given order.
    Split { order: usize },
}

impl QuadratureScheme {
    pub fn order(&self) -> usize {
        match *self {
            QuadratureScheme::GaussJacobi { order } | QuadratureScheme::Split { order } => order,
        }
    }

    fn doubled(&self) -> Self {
        match *self {
            QuadratureScheme::GaussJacobi { order } => QuadratureScheme::GaussJacobi { order: 2 * order },
            QuadratureScheme::Split { order } => QuadratureScheme::Split { order: 2 * order },
        }
    }

    /// Default split scheme for a basis: `K_max + 24` points per panel.
    pub fn default_for<T: Real>(spec: &BasisSpec<T>) -> Self {
        QuadratureScheme::Split { order: spec.k_max + 24 }
    }
}

/// Relative shift under order doubling above which the quadrature is
/// flagged as unconverged.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

/// Nodes stored as `x = 1 + z`, so that pair distances `r sqrt(x/2)` stay
/// accurate when `x` is far below machine epsilon relative to 1. Weights
/// already include `w(z)`.
#[derive(Debug, Clone)]
struct WeightedNodes<T> {
    x: Vec<T>,
    w: Vec<T>,
}

/// Cached reference rules for one basis.
#[derive(Debug, Clone)]
pub struct HyperangularQuadrature<T> {
    spec: BasisSpec<T>,
    scheme: QuadratureScheme,
    full: Option<GaussRule<T>>,
    legendre: Option<GaussRule<T>>,
    left: Option<GaussRule<T>>,
    right: Option<GaussRule<T>>,
    evaluator: BasisEvaluator<T>,
}

impl<T: Real> HyperangularQuadrature<T> {
    pub fn new(spec: &BasisSpec<T>, scheme: QuadratureScheme) -> Result<Self> {
        let n = scheme.order();
        let (full, legendre, left, right) = match scheme {
            QuadratureScheme::GaussJacobi { .. } => (Some(spec.gauss_jacobi(n)?), None, None, None),
            QuadratureScheme::Split { .. } => (
                Some(spec.gauss_jacobi(n)?),
                Some(GaussRule::legendre(n)?),
                Some(GaussRule::jacobi(n, T::zero(), spec.beta)?),
                Some(GaussRule::jacobi(n, spec.alpha, T::zero())?),
            ),
        };
        Ok(Self { spec: *spec, scheme, full, legendre, left, right, evaluator: spec.evaluator()? })
    }

    pub fn scheme(&self) -> QuadratureScheme {
        self.scheme
    }

    /// Panel `[a, b]` in `x = 1 + z`; the weight singularities at `x = 0`
    /// and `x = 2` are absorbed by the end-panel rules.
    fn push_panel(&self, a: T, b: T, out: &mut WeightedNodes<T>) {
        let one = T::one();
        let two = T::two();
        let (alpha, beta) = (self.spec.alpha, self.spec.beta);
        let half = T::half() * (b - a);
        let mid = T::half() * (b + a);
        let at_left = a <= T::zero();
        let at_right = b >= two;
        if at_left && at_right {
            let rule = self.full.as_ref().expect("rule built");
            out.x.extend(rule.nodes.iter().map(|&z| one + z));
            out.w.extend_from_slice(&rule.weights);
        } else if at_left {
            let rule = self.left.as_ref().expect("rule built");
            let scale = half.powf(beta + one);
            for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                let x = half * (one + s);
                out.x.push(x);
                out.w.push(w * scale * (two - x).powf(alpha));
            }
        } else if at_right {
            let rule = self.right.as_ref().expect("rule built");
            let scale = half.powf(alpha + one);
            for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                let x = two - half * (one - s);
                out.x.push(x);
                out.w.push(w * scale * x.powf(beta));
            }
        } else {
            let rule = self.legendre.as_ref().expect("rule built");
            for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                let x = mid + half * s;
                out.x.push(x);
                out.w.push(w * half * (two - x).powf(alpha) * x.powf(beta));
            }
        }
    }

    /// Quadrature nodes for hyperradius `r` and a potential with the given
    /// discontinuities.
    fn nodes(&self, r: T, breakpoints: &[T]) -> WeightedNodes<T> {
        let mut out = WeightedNodes { x: Vec::new(), w: Vec::new() };
        let (zero, one, two) = (T::zero(), T::one(), T::two());
        if matches!(self.scheme, QuadratureScheme::GaussJacobi { .. }) {
            self.push_panel(zero, two, &mut out);
            return out;
        }
        let mut cuts: Vec<T> = breakpoints
            .iter()
            .map(|&b| two * (b / r) * (b / r))
            .filter(|&x| x > zero && x < two)
            .collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let mut edges = vec![zero];
        // geometric grading from the innermost cut up to z = 0
        if let Some(&first) = cuts.first() {
            edges.push(first);
            let mut x = first * two;
            while x < one {
                edges.push(x);
                x *= two;
            }
            edges.extend(cuts.iter().skip(1).copied());
        }
        edges.push(one);
        edges.push(two);
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        edges.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * T::lit(16.0) * a.abs().max(b.abs()));
        for pair in edges.windows(2) {
            self.push_panel(pair[0], pair[1], &mut out);
        }
        out
    }

    /// Bare matrix `V_KK'(r)` of a pair function.
    pub fn project(&self, r: T, v: &impl PairFunction<T>) -> DenseMatrix<T> {
        let nodes = self.nodes(r, &v.breakpoints());
        let n = self.spec.size();
        let mut m = DenseMatrix::zeros(n);
        let mut b = vec![T::zero(); n];
        for (&x, &w) in nodes.x.iter().zip(&nodes.w) {
            let r_ij = r * (T::half() * x).sqrt();
            let wv = w * v.value(r_ij);
            if wv == T::zero() {
                continue;
            }
            self.evaluator.eval_into(x - T::one(), &mut b);
            for i in 0..n {
                let wb = wv * b[i];
                for j in 0..=i {
                    m[(i, j)] += wb * b[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                m[(j, i)] = m[(i, j)];
            }
        }
        m
    }
}

/// Symmetric matrix `f V f + centrifugal` at one hyperradius.
#[derive(Debug, Clone)]
pub struct PotentialMatrix<T> {
    pub r: T,
    pub entries: DenseMatrix<T>,
    pub spec: BasisSpec<T>,
    /// Largest entry change under doubling of the quadrature order,
    /// relative to the largest entry of the assembled matrix; `None` when
    /// not checked.
    pub quadrature_shift: Option<T>,
}

impl<T: Real> PotentialMatrix<T> {
    pub fn converged(&self) -> bool {
        self.quadrature_shift.is_none_or(|s| s <= T::lit(QUADRATURE_TOLERANCE))
    }

    /// Lowest diagonal entry among the active harmonics and its index.
    pub fn min_diagonal(&self, active: &[usize]) -> (usize, T) {
        active
            .iter()
            .map(|&k| (k, self.entries[(k, k)]))
            .fold((0, T::infinity()), |acc, (k, d)| if d < acc.1 { (k, d) } else { acc })
    }

    /// Sub-matrix over the given harmonic indices.
    pub fn restricted(&self, active: &[usize]) -> DenseMatrix<T> {
        DenseMatrix::from_fn(active.len(), |i, j| self.entries[(active[i], active[j])])
    }
}

/// Options controlling matrix assembly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixOptions {
    pub scheme: Option<QuadratureScheme>,
    pub core: CoreModel,
    /// Rebuild with doubled order and record the shift.
    pub verify: bool,
    /// Turn a failed verification into an error instead of a flag.
    pub strict: bool,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        Self { scheme: None, core: CoreModel::default(), verify: true, strict: false }
    }
}

/// Relative size below which `f_K` counts as zero.
pub const INACTIVE_OVERLAP: f64 = 1e-6;

/// Harmonics with a nonzero symmetric component. A vanishing `f_K` means
/// `U_K = f_K u_K` is identically zero, so that row is dropped rather than
/// left as a decoupled pure-centrifugal channel.
pub fn active_harmonics<T: Real>(f: &OverlapFactors<T>) -> Vec<usize> {
    let cut = T::lit(INACTIVE_OVERLAP) * f.get(0);
    (0..f.f.len()).filter(|&k| f.get(k) > cut).collect()
}

/// Centrifugal diagonal `ħ²/(m r²) [ℒ(ℒ+1) + 4K(K+α+β+1)]`.
pub fn centrifugal_diagonal<T: Real>(spec: &BasisSpec<T>, hbar2_over_m: T, r: T) -> Vec<T> {
    let c = hbar2_over_m / (r * r);
    (0..spec.size()).map(|k| c * spec.centrifugal(k)).collect()
}

fn assemble<T: Real>(
    bare: &DenseMatrix<T>,
    spec: &BasisSpec<T>,
    f: &OverlapFactors<T>,
    hbar2_over_m: T,
    r: T,
) -> DenseMatrix<T> {
    let cent = centrifugal_diagonal(spec, hbar2_over_m, r);
    DenseMatrix::from_fn(spec.size(), |i, j| {
        let (a, b) = if i >= j { (i, j) } else { (j, i) };
        let v = f.get(a) * bare[(a, b)] * f.get(b);
        if i == j {
            v + cent[i]
        } else {
            v
        }
    })
}

fn max_abs<T: Real>(m: &DenseMatrix<T>) -> T {
    let n = m.dim();
    let mut best = T::zero();
    for i in 0..n {
        for &x in m.row(i) {
            best = best.max(x.abs());
        }
    }
    best
}

/// Potential matrix of the hard-core + C6 interaction with the default
/// split quadrature, verified by order doubling.
pub fn potential_matrix<T: Real>(
    r: T,
    spec: &BasisSpec<T>,
    pot: &TwoBodyPotential<T>,
    f: &OverlapFactors<T>,
) -> Result<PotentialMatrix<T>> {
    potential_matrix_with(r, spec, pot, f, &MatrixOptions::default())
}

pub fn potential_matrix_with<T: Real>(
    r: T,
    spec: &BasisSpec<T>,
    pot: &TwoBodyPotential<T>,
    f: &OverlapFactors<T>,
    opts: &MatrixOptions,
) -> Result<PotentialMatrix<T>> {
    let scheme = opts.scheme.unwrap_or_else(|| QuadratureScheme::default_for(spec));
    let quad = HyperangularQuadrature::new(spec, scheme)?;
    let check = if opts.verify { Some(HyperangularQuadrature::new(spec, scheme.doubled())?) } else { None };
    build_core_matrix(r, spec, pot, opts.core, f, &quad, check.as_ref(), opts.strict)
}

#[allow(clippy::too_many_arguments)]
fn build_core_matrix<T: Real>(
    r: T,
    spec: &BasisSpec<T>,
    pot: &TwoBodyPotential<T>,
    core: CoreModel,
    f: &OverlapFactors<T>,
    quad: &HyperangularQuadrature<T>,
    check: Option<&HyperangularQuadrature<T>>,
    strict: bool,
) -> Result<PotentialMatrix<T>> {
    let hb = pot.units.hbar2_over_m;
    match core {
        CoreModel::Barrier => build_matrix(r, spec, pot, hb, f, quad, check, strict),
        CoreModel::Excluded => build_matrix(r, spec, &ExcludedCore(pot), hb, f, quad, check, strict),
    }
}

/// Matrix for an arbitrary pair function, reusing prebuilt quadratures.
#[allow(clippy::too_many_arguments)]
pub fn build_matrix<T: Real>(
    r: T,
    spec: &BasisSpec<T>,
    v: &impl PairFunction<T>,
    hbar2_over_m: T,
    f: &OverlapFactors<T>,
    quad: &HyperangularQuadrature<T>,
    check: Option<&HyperangularQuadrature<T>>,
    strict: bool,
) -> Result<PotentialMatrix<T>> {
    if !(r > T::zero()) {
        return Err(Error::InvalidParameter(format!("hyperradius r = {r}")));
    }
    if f.f.len() != spec.size() {
        return Err(Error::InvalidParameter("overlap factors do not match basis size".into()));
    }
    let entries = assemble(&quad.project(r, v), spec, f, hbar2_over_m, r);
    let quadrature_shift = check.map(|q| {
        let fine = assemble(&q.project(r, v), spec, f, hbar2_over_m, r);
        let scale = max_abs(&entries).max(T::min_positive_value());
        let n = spec.size();
        let mut worst = T::zero();
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((fine[(i, j)] - entries[(i, j)]).abs() / scale);
            }
        }
        worst
    });
    if strict {
        if let Some(s) = quadrature_shift {
            if s > T::lit(QUADRATURE_TOLERANCE) {
                return Err(Error::QuadratureNonConvergence { shift: s.to_f64_lossy() });
            }
        }
    }
    Ok(PotentialMatrix { r, entries, spec: *spec, quadrature_shift })
}

/// How `ω_l(r)` is extracted from the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionMode {
    FullDiagonalization,
    DiagonalOnly,
}

impl ConstructionMode {
    /// Full diagonalization for `l = 0`, diagonal entries otherwise.
    pub fn for_l(l: usize) -> Self {
        if l == 0 {
            ConstructionMode::FullDiagonalization
        } else {
            ConstructionMode::DiagonalOnly
        }
    }
}

/// Per-run quality indicators.
#[derive(Debug, Clone, Default, PartialEq, Serialize, serde::Deserialize)]
pub struct AdiabaticDiagnostics {
    /// Grid points whose quadrature failed the doubling check.
    pub unconverged_points: usize,
    pub max_quadrature_shift: f64,
    /// Largest relative asymmetry of any matrix.
    pub max_asymmetry: f64,
    /// Diagonal-only mode: grid points where the lowest diagonal entry was
    /// not `K = 0`.
    pub nonzero_k_minimum: usize,
}

/// Effective hyperradial potential sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectivePotential<T> {
    pub l: usize,
    pub n_particles: usize,
    pub k_max: usize,
    pub r_grid: Vec<T>,
    pub omega: Vec<T>,
    /// Lowest-eigenvector coefficients `χ_K0(r)` per grid point (`l = 0`).
    pub channel: Option<Vec<Vec<T>>>,
    pub construction_mode: ConstructionMode,
    /// `ħ²/m` the potential was built with.
    pub hbar2_over_m: T,
    /// `ℒ(ℒ+1)`, the large-`r` limit of `ω m r² / ħ²`.
    pub asymptotic_coefficient: T,
    pub diagnostics: AdiabaticDiagnostics,
}

impl<T: Real> EffectivePotential<T> {
    /// Location and value of the minimum.
    pub fn minimum(&self) -> (T, T) {
        self.r_grid
            .iter()
            .zip(&self.omega)
            .fold((T::nan(), T::infinity()), |acc, (&r, &w)| if w < acc.1 { (r, w) } else { acc })
    }

    /// Number of local minima along the grid.
    pub fn local_minima(&self) -> usize {
        self.omega.windows(3).filter(|w| w[1] < w[0] && w[1] <= w[2]).count()
    }

    /// `ω m r² / ħ²` at the last grid point.
    pub fn asymptotic_ratio(&self) -> T {
        let (r, w) = (*self.r_grid.last().expect("non-empty"), *self.omega.last().expect("non-empty"));
        w * r * r / self.hbar2_over_m
    }
}

/// Default sampling grid: 400 logarithmic points from `0.3 r_c` to 10⁴ Å.
pub fn default_r_grid<T: Real>(r_c: T) -> Vec<T> {
    log_grid(T::lit(0.3) * r_c, T::lit(1e4), 400)
}

/// `n` logarithmically spaced points on `[lo, hi]`.
pub fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (a, b) = (lo.ln(), hi.ln());
    let d = T::from_count(n.max(2) - 1);
    (0..n).map(|i| (a + (b - a) * T::from_count(i) / d).exp()).collect()
}

/// Options for [`effective_potential_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[derive(Default)]
pub struct AdiabaticOptions {
    pub matrix: MatrixOptions,
    /// Override of the `l`-dependent default mode.
    pub mode: Option<ConstructionMode>,
}


pub fn effective_potential<T: Real>(
    spec: &BasisSpec<T>,
    pot: &TwoBodyPotential<T>,
    f: &OverlapFactors<T>,
    r_grid: &[T],
) -> Result<EffectivePotential<T>> {
    effective_potential_with(spec, pot, f, r_grid, &AdiabaticOptions::default())
}

pub fn effective_potential_with<T: Real>(
    spec: &BasisSpec<T>,
    pot: &TwoBodyPotential<T>,
    f: &OverlapFactors<T>,
    r_grid: &[T],
    opts: &AdiabaticOptions,
) -> Result<EffectivePotential<T>> {
    if r_grid.is_empty() {
        return Err(Error::Empty("r grid"));
    }
    if let Some(i) = r_grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneGrid { index: i + 1 });
    }
    let mode = opts.mode.unwrap_or_else(|| ConstructionMode::for_l(spec.l));
    let scheme = opts.matrix.scheme.unwrap_or_else(|| QuadratureScheme::default_for(spec));
    let quad = HyperangularQuadrature::new(spec, scheme)?;
    let check = if opts.matrix.verify { Some(HyperangularQuadrature::new(spec, scheme.doubled())?) } else { None };
    let hb = pot.units.hbar2_over_m;

    let active = active_harmonics(f);
    let mut omega = Vec::with_capacity(r_grid.len());
    let mut channel: Vec<Vec<T>> = Vec::new();
    let mut diag = AdiabaticDiagnostics::default();
    for &r in r_grid {
        let m = build_core_matrix(r, spec, pot, opts.matrix.core, f, &quad, check.as_ref(), opts.matrix.strict)?;
        if let Some(s) = m.quadrature_shift {
            let s = s.to_f64_lossy();
            diag.max_quadrature_shift = diag.max_quadrature_shift.max(s);
            if s > QUADRATURE_TOLERANCE {
                diag.unconverged_points += 1;
            }
        }
        diag.max_asymmetry = diag.max_asymmetry.max(m.entries.asymmetry().to_f64_lossy());
        match mode {
            ConstructionMode::FullDiagonalization => {
                let eig = SymmetricEigen::new(&m.restricted(&active))?;
                let mut v = vec![T::zero(); spec.size()];
                for (i, &k) in active.iter().enumerate() {
                    v[k] = eig.vectors[(i, 0)];
                }
                let flip = match channel.last() {
                    Some(prev) => v.iter().zip(prev).map(|(&a, &b)| a * b).sum::<T>() < T::zero(),
                    None => {
                        let big = v.iter().fold(T::zero(), |acc, &x| if x.abs() > acc.abs() { x } else { acc });
                        big < T::zero()
                    }
                };
                if flip {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                omega.push(eig.values[0]);
                channel.push(v);
            }
            ConstructionMode::DiagonalOnly => {
                let (k, w) = m.min_diagonal(&active);
                if k != 0 {
                    diag.nonzero_k_minimum += 1;
                }
                omega.push(w);
            }
        }
    }
    if let Some(i) = omega.iter().position(|w| !w.is_finite()) {
        return Err(Error::NonFiniteIntegration { r: r_grid[i].to_f64_lossy() });
    }
    Ok(EffectivePotential {
        l: spec.l,
        n_particles: spec.n_particles,
        k_max: spec.k_max,
        r_grid: r_grid.to_vec(),
        omega,
        channel: (mode == ConstructionMode::FullDiagonalization).then_some(channel),
        construction_mode: mode,
        hbar2_over_m: hb,
        asymptotic_coefficient: spec.cal_l * (spec.cal_l + T::one()),
        diagnostics: diag,
    })
}
