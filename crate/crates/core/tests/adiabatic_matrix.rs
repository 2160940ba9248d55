use std::f64::consts::PI;

use vdw_spectra::adiabatic::*;
use vdw_spectra::basis::{overlap_factors, BasisSpec, OverlapFactors};
use vdw_spectra::twobody::TwoBodyPotential;
use vdw_spectra::units::{make_units, Species, UnitSystem};

const R_C: f64 = 15.1497;

fn rb() -> (UnitSystem<f64>, TwoBodyPotential<f64>) {
    let units: UnitSystem<f64> = make_units(&Species::Rb87);
    let c6 = units.c6_from_ev(2803.0);
    (units, TwoBodyPotential::with_default_core(R_C, c6, units).unwrap())
}

fn setup(n: usize, l: usize, k_max: usize) -> (BasisSpec<f64>, OverlapFactors<f64>) {
    let spec = BasisSpec::new(n, l, k_max).unwrap();
    let f = overlap_factors(&spec).unwrap();
    (spec, f)
}

fn schemes(spec: &BasisSpec<f64>) -> [QuadratureScheme; 2] {
    [QuadratureScheme::default_for(spec), QuadratureScheme::GaussJacobi { order: spec.default_quadrature_order() }]
}

#[test]
fn constant_potential_is_diagonal() {
    for (n, l) in [(3, 0), (5, 2), (40, 0), (12, 1)] {
        let spec = BasisSpec::<f64>::new(n, l, 16).unwrap();
        for scheme in schemes(&spec) {
            let q = HyperangularQuadrature::new(&spec, scheme).unwrap();
            let m = q.project(37.0, &Smooth(|_| -2.5));
            for i in 0..spec.size() {
                for j in 0..spec.size() {
                    let want = if i == j { -2.5 } else { 0.0 };
                    assert!((m[(i, j)] - want).abs() < 1e-10, "N={n} l={l} {scheme:?} ({i},{j}) {}", m[(i, j)]);
                }
            }
        }
    }
}

#[test]
fn zero_potential_leaves_centrifugal_diagonal() {
    let (units, _) = rb();
    let (spec, f) = setup(5, 0, 12);
    let q = HyperangularQuadrature::new(&spec, QuadratureScheme::default_for(&spec)).unwrap();
    let r = 50.0;
    let m = build_matrix(r, &spec, &Smooth(|_| 0.0), units.hbar2_over_m, &f, &q, None, false).unwrap();
    for i in 0..spec.size() {
        for j in 0..spec.size() {
            let want = if i == j { units.hbar2_over_m / (r * r) * spec.centrifugal(i) } else { 0.0 };
            assert_eq!(m.entries[(i, j)], want);
        }
    }
    // ℒ = 9/2 and 4K(K + α + β + 1) with α = 7/2, β = 1/2
    assert_eq!(spec.centrifugal(0), 4.5 * 5.5);
    assert_eq!(spec.centrifugal(2), 4.5 * 5.5 + 8.0 * 7.0);
}

/// Composite Simpson rule on `[a, b]`.
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// For N = 3, l = 0 the weight is `sqrt(1 - z²)` and the orthonormal
/// harmonics are `sqrt(2/π) sin((K+1)θ) / sin θ` with `z = cos θ`, so
/// `V_KK' = (2/π) ∫ sin((K+1)θ) sin((K'+1)θ) V(r cos(θ/2)) dθ`.
fn chebyshev_oracle(k: usize, kp: usize, r: f64, outside: impl Fn(f64) -> f64, inside: f64) -> f64 {
    // split where r_ij = r_c; each side uses its own branch so the endpoint
    // on the discontinuity is never evaluated on the wrong side
    let theta_c = 2.0 * (R_C / r).acos();
    let basis = |t: f64| (2.0 / PI) * ((k + 1) as f64 * t).sin() * ((kp + 1) as f64 * t).sin();
    simpson(0.0, theta_c, 200_000, |t| basis(t) * outside(r * (t / 2.0).cos()))
        + simpson(theta_c, PI, 200_000, |t| basis(t) * inside)
}

#[test]
fn three_body_matrix_matches_dense_oracle() {
    let (_, pot) = rb();
    let (spec, _) = setup(3, 0, 10);
    let r = 100.0;
    let q = HyperangularQuadrature::new(&spec, QuadratureScheme::default_for(&spec)).unwrap();
    let barrier = q.project(r, &pot);
    let excluded = q.project(r, &ExcludedCore(&pot));
    let scale = |m: &vdw_spectra::linalg::DenseMatrix<f64>| (0..spec.size()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    let (sb, se) = (scale(&barrier), scale(&excluded));
    for k in 0..spec.size() {
        for kp in 0..=k {
            let b = chebyshev_oracle(k, kp, r, |x| pot.tail(x), pot.core_height);
            assert!((barrier[(k, kp)] - b).abs() < 1e-8 * sb, "barrier ({k},{kp}) {} vs {b}", barrier[(k, kp)]);
            let e = chebyshev_oracle(k, kp, r, |x| pot.tail(x), 0.0);
            assert!((excluded[(k, kp)] - e).abs() < 1e-8 * se, "excluded ({k},{kp}) {} vs {e}", excluded[(k, kp)]);
        }
    }
}

#[test]
fn assembled_matrix_is_symmetric_and_converged() {
    let (_, pot) = rb();
    for n in [3, 5, 40] {
        let (spec, f) = setup(n, 0, 20);
        for r in [12.0, 20.0, 35.0, 110.0, 900.0] {
            for core in [CoreModel::Excluded, CoreModel::Barrier] {
                let opts = MatrixOptions { core, ..MatrixOptions::default() };
                let m = potential_matrix_with(r, &spec, &pot, &f, &opts).unwrap();
                assert!(m.entries.asymmetry() < 1e-12);
                assert!(m.converged(), "N={n} r={r} {core:?} shift {:?}", m.quadrature_shift);
            }
        }
    }
}

#[test]
fn centrifugal_term_dominates_at_large_r() {
    // off-diagonal coupling falls off as r⁻³ against the r⁻² diagonal
    let (_, pot) = rb();
    let (spec, f) = setup(5, 0, 20);
    let mut prev = f64::INFINITY;
    for r in [1e4, 1e5, 1e6, 1e7, 1e8] {
        let m = potential_matrix(r, &spec, &pot, &f).unwrap();
        let ratio = m.entries.frobenius_off_diagonal() / m.entries.frobenius_diagonal();
        assert!(ratio < prev, "r={r}: {ratio}");
        prev = ratio;
    }
    assert!(prev < 1e-3, "{prev}");
}

#[test]
fn pure_gauss_jacobi_fails_its_doubling_check_across_the_core() {
    let (_, pot) = rb();
    let (spec, f) = setup(5, 0, 20);
    let opts = MatrixOptions {
        scheme: Some(QuadratureScheme::GaussJacobi { order: spec.default_quadrature_order() }),
        core: CoreModel::Barrier,
        ..MatrixOptions::default()
    };
    let m = potential_matrix_with(30.0, &spec, &pot, &f, &opts).unwrap();
    assert!(!m.converged());
    let strict = MatrixOptions { strict: true, ..opts };
    assert!(potential_matrix_with(30.0, &spec, &pot, &f, &strict).is_err());
}

fn omega(n: usize, l: usize, k_max: usize, grid: &[f64], opts: &AdiabaticOptions) -> EffectivePotential<f64> {
    let (_, pot) = rb();
    let (spec, f) = setup(n, l, k_max);
    effective_potential_with(&spec, &pot, &f, grid, opts).unwrap()
}

#[test]
fn well_deepens_with_cluster_size() {
    let grid = default_r_grid(R_C);
    let depths: Vec<f64> =
        [3, 5, 40].iter().map(|&n| omega(n, 0, 20, &grid, &AdiabaticOptions::default()).minimum().1).collect();
    assert!(depths[0] < 0.0);
    assert!(depths[1] < depths[0] && depths[2] < depths[1], "{depths:?}");
}

#[test]
fn approaches_hypercentrifugal_limit() {
    let grid = log_grid(0.3 * R_C, 1e9, 400);
    for n in [3, 5, 40] {
        let w = omega(n, 0, 20, &grid, &AdiabaticOptions::default());
        let ratio = w.asymptotic_ratio() / w.asymptotic_coefficient;
        assert!((ratio - 1.0).abs() < 0.01, "N={n}: {ratio}");
        assert!(w.omega.iter().all(|x| x.is_finite()));
    }
}

#[test]
fn one_well_beyond_the_core_edge() {
    // For N = 3 and 5 the excluded-core model adds a second, shallower dip in
    // the first grid cells past r = r_c, where only configurations with a
    // pair near r_c feel the tail. Away from that edge there is one well.
    let grid = default_r_grid(R_C);
    for (n, edge_minima) in [(3, 1), (5, 1), (40, 0)] {
        let w = omega(n, 0, 20, &grid, &AdiabaticOptions::default());
        let minima: Vec<f64> =
            (1..grid.len() - 1).filter(|&i| w.omega[i] < w.omega[i - 1] && w.omega[i] <= w.omega[i + 1]).map(|i| grid[i]).collect();
        let (r_min, w_min) = w.minimum();
        assert!(w_min < 0.0);
        let near_edge = minima.iter().filter(|&&r| r < 1.2 * R_C).count();
        assert_eq!(near_edge, edge_minima, "N={n}: {minima:?}");
        assert_eq!(minima.len(), near_edge + 1, "N={n}: {minima:?}");
        assert!(r_min > 1.2 * R_C);
    }
}

#[test]
fn lowest_eigenvalue_below_every_diagonal_entry() {
    let (_, pot) = rb();
    for n in [3, 5, 40] {
        let (spec, f) = setup(n, 0, 20);
        let active = active_harmonics(&f);
        let grid = log_grid(0.5 * R_C, 2000.0, 40);
        let w = effective_potential(&spec, &pot, &f, &grid).unwrap();
        for (i, &r) in grid.iter().enumerate() {
            let m = potential_matrix(r, &spec, &pot, &f).unwrap();
            for &k in &active {
                assert!(w.omega[i] <= m.entries[(k, k)] * (1.0 + 1e-12) + 1e-12, "N={n} r={r} K={k}");
            }
        }
    }
}

#[test]
fn larger_basis_never_raises_omega() {
    let grid = log_grid(0.5 * R_C, 3000.0, 60);
    for n in [3, 5, 40] {
        let a = omega(n, 0, 10, &grid, &AdiabaticOptions::default());
        let b = omega(n, 0, 20, &grid, &AdiabaticOptions::default());
        let c = omega(n, 0, 40, &grid, &AdiabaticOptions::default());
        for i in 0..grid.len() {
            let tol = 1e-9 * a.omega[i].abs();
            assert!(b.omega[i] <= a.omega[i] + tol && c.omega[i] <= b.omega[i] + tol, "N={n} r={}", grid[i]);
        }
        let (_, d20) = b.minimum();
        let (_, d40) = c.minimum();
        println!("N={n}: min omega K=20 {d20:.6} K=40 {d40:.6} rel change {:.2e}", ((d40 - d20) / d20).abs());
    }
}

#[test]
fn core_height_does_not_affect_excluded_core() {
    let (units, pot) = rb();
    let (spec, f) = setup(5, 0, 20);
    let grid = default_r_grid(R_C);
    let base = effective_potential(&spec, &pot, &f, &grid).unwrap().minimum().1;
    let high = pot.with_core_height(units.kelvin_to_energy(1e7));
    let raised = effective_potential(&spec, &high, &f, &grid).unwrap().minimum().1;
    assert!(((raised - base) / base).abs() < 5e-3);
}

#[test]
fn eigenvector_sign_is_continuous() {
    let grid = default_r_grid(R_C);
    let w = omega(5, 0, 20, &grid, &AdiabaticOptions::default());
    let ch = w.channel.as_ref().unwrap();
    assert_eq!(ch.len(), grid.len());
    for pair in ch.windows(2) {
        let dot: f64 = pair[0].iter().zip(&pair[1]).map(|(a, b)| a * b).sum();
        assert!(dot > 0.0);
    }
    assert_eq!(w.construction_mode, ConstructionMode::FullDiagonalization);
}

#[test]
fn higher_l_uses_diagonal_entries() {
    let (_, pot) = rb();
    let grid = log_grid(0.5 * R_C, 2000.0, 50);
    let (spec, f) = setup(5, 2, 20);
    let w = effective_potential(&spec, &pot, &f, &grid).unwrap();
    assert_eq!(w.construction_mode, ConstructionMode::DiagonalOnly);
    assert!(w.channel.is_none());
    let active = active_harmonics(&f);
    for (i, &r) in grid.iter().enumerate() {
        let m = potential_matrix(r, &spec, &pot, &f).unwrap();
        assert_eq!(w.omega[i], m.min_diagonal(&active).1);
    }
    println!("l=2 points where the minimum is not K=0: {}", w.diagnostics.nonzero_k_minimum);
}

#[test]
fn diagonal_only_self_comparison_for_three_bodies() {
    let grid = default_r_grid(R_C);
    let full = omega(3, 0, 20, &grid, &AdiabaticOptions::default());
    let diag_opts = AdiabaticOptions { mode: Some(ConstructionMode::DiagonalOnly), ..AdiabaticOptions::default() };
    let diag = omega(3, 0, 20, &grid, &diag_opts);
    let mut worst: f64 = 0.0;
    for i in 0..grid.len() {
        assert!(full.omega[i] <= diag.omega[i] + 1e-12 * diag.omega[i].abs());
        worst = worst.max(((diag.omega[i] - full.omega[i]) / full.omega[i]).abs());
    }
    println!("N=3 diagonal-only vs full: max relative deviation {worst:.3e}, minima {:.4} vs {:.4}", diag.minimum().1, full.minimum().1);
    assert!(diag.minimum().1 > full.minimum().1);
}

#[test]
fn rejects_bad_grids() {
    let (_, pot) = rb();
    let (spec, f) = setup(3, 0, 4);
    assert!(effective_potential(&spec, &pot, &f, &[]).is_err());
    assert!(effective_potential(&spec, &pot, &f, &[20.0, 10.0, 30.0]).is_err());
    assert!(potential_matrix(-1.0, &spec, &pot, &f).is_err());
}

#[test]
fn single_precision_tracks_double() {
    let units: UnitSystem<f32> = make_units(&Species::Rb87);
    let pot = TwoBodyPotential::with_default_core(R_C as f32, units.c6_from_ev(2803.0), units).unwrap();
    let spec = BasisSpec::<f32>::new(5, 0, 8).unwrap();
    let f = overlap_factors(&spec).unwrap();
    let grid32: Vec<f32> = log_grid(20.0f32, 60.0, 8);
    let opts = AdiabaticOptions { matrix: MatrixOptions { verify: false, ..MatrixOptions::default() }, mode: None };
    let w32 = effective_potential_with(&spec, &pot, &f, &grid32, &opts).unwrap();
    let grid64: Vec<f64> = grid32.iter().map(|&x| x as f64).collect();
    let w64 = omega(5, 0, 8, &grid64, &opts);
    for (a, b) in w32.omega.iter().zip(&w64.omega) {
        assert!(((*a as f64 - b) / b).abs() < 1e-3, "{a} vs {b}");
    }
}
