//! Fluctuation measures on seeded synthetic spectra with known statistics.

use rand::Rng;
use vdw_spectra::levels::LevelSequence;
use vdw_spectra::quadrature::GaussRule;
use vdw_spectra::stats::rigidity::delta3_window;
use vdw_spectra::stats::*;

// seeds fixed once, before any result was looked at
const POISSON_SEED: u64 = 11;
const SEMI_SEED: u64 = 23;
const GOE_SEED: u64 = 1000;
const SAMPLER_SEED: u64 = 5;

fn poisson(n: usize, seed: u64) -> LevelSequence<f64> {
    synthetic_ensemble(SyntheticKind::Poisson, n, seed).unwrap()
}

fn identity(seq: &LevelSequence<f64>) -> UnfoldedSequence<f64> {
    UnfoldedSequence::identity(seq.energies.clone(), seq.source.clone()).unwrap()
}

#[test]
fn picket_fence_unfolds_to_itself() {
    let seq = synthetic_ensemble::<f64>(SyntheticKind::Picket, 200, 0).unwrap();
    let u = unfold(&seq, 6, None).unwrap();
    for (a, b) in u.levels.iter().zip(&seq.energies) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
    assert!(u.spacings().iter().all(|s| (s - 1.0).abs() < 1e-9));
}

#[test]
fn unfolded_poisson_is_exponential() {
    let seq = poisson(10_000, POISSON_SEED);
    let u = unfold(&seq, 6, None).unwrap();
    let sample = pool_ensemble(std::slice::from_ref(&u)).unwrap();
    assert!((sample.mean() - 1.0).abs() < 0.02);
    let d = ks_distance(&sample.sorted(), |s: f64| 1.0 - (-s).exp());
    assert!(d < 0.02, "KS {d}");
}

#[test]
fn square_staircase_unfolds_flat_in_the_bulk() {
    let e: Vec<f64> = (1..=1000).map(|i| (i * i) as f64).collect();
    let seq = LevelSequence::from_energies(e, "squares").unwrap();
    // √E is singular at 0, so the fit window starts away from the bottom
    let u = unfold(&seq, 6, Some((200, 1000))).unwrap();
    let s = u.spacings();
    let n = s.len();
    for (i, x) in s.iter().enumerate().skip(n / 4).take(n / 2) {
        assert!((x - 1.0).abs() < 0.02, "spacing {i}: {x}");
    }
}

#[test]
fn unfolding_needs_enough_levels() {
    let seq = LevelSequence::from_energies((0..15).map(|i| i as f64).collect(), "short").unwrap();
    assert!(matches!(unfold(&seq, 6, None), Err(vdw_spectra::Error::InsufficientLevels { .. })));
}

#[test]
fn non_monotone_fit_is_rejected() {
    // dense cluster at both ends, nearly empty middle: a sextic staircase fit
    // overshoots and turns back
    let mut e: Vec<f64> = (0..100).map(|i| i as f64 * 1e-3).collect();
    e.extend((0..100).map(|i| 100.0 + i as f64 * 1e-3));
    e.push(50.0);
    e.sort_by(f64::total_cmp);
    let seq = LevelSequence::from_energies(e, "clusters").unwrap();
    assert!(matches!(unfold(&seq, 6, None), Err(vdw_spectra::Error::NonMonotoneUnfolding { .. })));
}

#[test]
fn pooling_respects_sequence_boundaries() {
    let a = identity(&synthetic_ensemble(SyntheticKind::Picket, 50, 0).unwrap());
    let mut shifted = a.clone();
    shifted.levels.iter_mut().for_each(|x| *x += 1000.5);
    let one = pool_ensemble(std::slice::from_ref(&a)).unwrap();
    assert_eq!(one.spacings, a.spacings());
    let two = pool_ensemble(&[a.clone(), shifted]).unwrap();
    assert_eq!(two.len(), 98);
    assert!(two.spacings.iter().all(|&s| s == 1.0));
    assert_eq!(two.tags.iter().filter(|&&t| t == 1).count(), 49);
    assert!(pool_ensemble::<f64>(&[]).is_err());
}

#[test]
fn pooled_poisson_matches_single_long_sample() {
    let parts: Vec<_> = (0..10).map(|i| unfold(&poisson(1000, POISSON_SEED + 100 + i), 6, None).unwrap()).collect();
    let pooled = pool_ensemble(&parts).unwrap();
    let d = ks_distance(&pooled.sorted(), |s: f64| 1.0 - (-s).exp());
    assert!(d < 0.02, "KS {d}");
}

/// Inverse-CDF sampling of the Brody density.
fn brody_sample(nu: f64, n: usize, seed: u64) -> SpacingSample<f64> {
    let mut rng = synthetic::rng(seed);
    let a = brody_a(nu);
    let s = (0..n).map(|_| (-(1.0 - rng.random::<f64>()).ln() / a).powf(1.0 / (1.0 + nu))).collect();
    SpacingSample::from_spacings(s, format!("brody {nu}"))
}

#[test]
fn brody_fit_recovers_sampled_exponent() {
    for (k, nu) in [0.0, 0.25, 0.5, 1.0].into_iter().enumerate() {
        let fit = brody_fit(&brody_sample(nu, 100_000, SAMPLER_SEED + k as u64)).unwrap();
        assert!((fit.nu - nu).abs() < 0.03, "nu={nu}: fitted {}", fit.nu);
        assert!(fit.ks_distance < 0.01);
    }
}

#[test]
fn brody_on_poisson() {
    let u = identity(&poisson(100_001, POISSON_SEED));
    let fit = brody_fit(&pool_ensemble(&[u]).unwrap()).unwrap();
    assert!(fit.nu.abs() < 0.02, "{}", fit.nu);
    assert!(fit.nu_histogram.abs() < 0.05, "{}", fit.nu_histogram);
    let small = SpacingSample::from_spacings(vec![1.0; 150], "small");
    assert!(brody_fit(&small).is_err());
}

#[test]
fn brody_zero_is_exponential() {
    let c = ReferenceCurve::BrodyPs { nu: 0.0 };
    for s in [0.0, 0.3, 1.0, 2.5] {
        assert!((c.eval(s) - (-s as f64).exp()).abs() < 1e-14);
    }
}

#[test]
fn integral_spacing_of_exponential() {
    let u = identity(&poisson(50_000, POISSON_SEED + 1));
    let sample = pool_ensemble(&[u]).unwrap();
    let curve = integral_spacing(&sample).unwrap();
    assert!(curve.i.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(*curve.i.last().unwrap(), 1.0);
    let worst = curve.ln_s.iter().zip(&curve.i).map(|(l, i)| (i - (1.0 - (-l.exp()).exp())).abs()).fold(0.0, f64::max);
    assert!(worst < 0.01, "{worst}");
}

#[test]
fn quasi_degenerate_shoulder_is_linear_in_log_s() {
    let mut rng = synthetic::rng(SAMPLER_SEED + 10);
    let n = 20_000;
    let s: Vec<f64> = (0..n)
        .map(|i| if i % 10 < 3 { (rng.random::<f64>() * (1e-3f64.ln() - 1e-7f64.ln()) + 1e-7f64.ln()).exp() } else { -rng.random::<f64>().ln() })
        .collect();
    let curve = integral_spacing(&SpacingSample::from_spacings(s, "mixture")).unwrap();
    // linear regression of I on ln s inside the shoulder
    let pts: Vec<(f64, f64)> = curve.ln_s.iter().zip(&curve.i).filter(|(l, _)| **l > -15.0 && **l < -8.0).map(|(a, b)| (*a, *b)).collect();
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in &pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    let r2 = sxy * sxy / (sxx * syy);
    assert!(r2 > 0.99, "{r2}");
    let slope = sxy / sxx;
    let expected = 0.3 / (1e-3f64.ln() - 1e-7f64.ln());
    assert!((slope - expected).abs() < 0.1 * expected, "{slope} vs {expected}");
}

#[test]
fn picket_integral_spacing_is_a_step() {
    let u = identity(&synthetic_ensemble(SyntheticKind::Picket, 100, 0).unwrap());
    let curve = integral_spacing(&pool_ensemble(&[u]).unwrap()).unwrap();
    assert_eq!(curve.ln_s, vec![0.0]);
    assert_eq!(curve.i, vec![1.0]);
}

#[test]
fn picket_fence_rigidity() {
    let u = identity(&synthetic_ensemble(SyntheticKind::Picket, 2000, 0).unwrap());
    let lengths: Vec<f64> = vec![0.3, 0.7, 1.5, 2.5, 5.3, 10.0, 20.0, 50.0];
    for (l, s2) in number_variance(&u, &lengths).unwrap() {
        assert!((0.0..=0.25).contains(&s2), "L={l}: {s2}");
    }
    for (l, d3) in delta3(&u, &[50.0, 100.0, 150.0]).unwrap() {
        assert!((d3 - 1.0 / 12.0).abs() < 0.05 / 12.0, "L={l}: {d3}");
    }
}

#[test]
fn poisson_rigidity() {
    let u = identity(&poisson(100_000, POISSON_SEED + 2));
    let lengths: Vec<f64> = vec![1.0, 2.0, 5.0, 10.0, 15.0, 20.0];
    for (l, s2) in number_variance(&u, &lengths).unwrap() {
        assert!((s2 - l).abs() < 0.05 * l, "Sigma2({l}) = {s2}");
    }
    let dl = [5.0, 10.0, 15.0, 20.0];
    let direct = delta3(&u, &dl).unwrap();
    let via = delta3_from_number_variance(&u, &dl).unwrap();
    for ((l, d), (_, t)) in direct.iter().zip(&via) {
        assert!((d - l / 15.0).abs() < 0.05 * l / 15.0, "Delta3({l}) = {d}");
        assert!((d - t).abs() < 0.03 * d, "L={l}: direct {d} transform {t}");
    }
}

#[test]
fn semi_poisson_reference() {
    let seq = synthetic_ensemble::<f64>(SyntheticKind::SemiPoisson, 100_000, SEMI_SEED).unwrap();
    let u = identity(&seq);
    let sample = pool_ensemble(std::slice::from_ref(&u)).unwrap();
    let d = ks_distance(&sample.sorted(), |s| ReferenceCurve::<f64>::SemiPoissonPs.cdf(s));
    assert!(d < 0.01, "KS {d}");
    // decimated Poisson: Σ²(L) = L/2 + (1 - e^{-4L})/8
    let lengths = [0.5, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0];
    for (l, s2) in number_variance(&u, &lengths).unwrap() {
        let exact = l / 2.0 + (1.0 - (-4.0 * l as f64).exp()) / 8.0;
        assert!((s2 - exact).abs() < 0.03 * exact, "Sigma2({l}) = {s2} vs {exact}");
    }
    let direct = delta3(&u, &lengths).unwrap();
    let via = delta3_from_number_variance(&u, &lengths).unwrap();
    for ((l, d), (_, t)) in direct.iter().zip(&via) {
        assert!((d - t).abs() < 0.03 * d, "L={l}: direct {d} transform {t}");
    }
}

#[test]
fn rigidity_rejects_long_intervals() {
    let u = identity(&poisson(100, POISSON_SEED));
    assert!(matches!(number_variance(&u, &[50.0]), Err(vdw_spectra::Error::LengthTooLarge { .. })));
    assert!(delta3(&u, &[50.0]).is_err());
}

#[test]
fn poisson_ratios() {
    let seq = poisson(100_000, POISSON_SEED + 3);
    let st = ratio_statistics(&seq, None).unwrap();
    assert!((st.mean_rtilde - 0.3863).abs() < 0.005, "{}", st.mean_rtilde);
    let dev = st.histogram.max_deviation(|a, b| ReferenceCurve::<f64>::PoissonPr.bin_average(a, b));
    assert!(dev < 0.02, "{dev}");
    assert!((st.histogram.total_mass() - 1.0).abs() < 1e-6);
}

#[test]
fn ratio_zero_spacings_are_excluded() {
    let seq = LevelSequence::from_energies(vec![0.0, 1.0, 1.0, 2.5, 3.0, 3.5], "degenerate").unwrap();
    let st = ratio_statistics(&seq, None).unwrap();
    assert_eq!(st.excluded, 2);
    assert_eq!(st.count, 2);
}

fn integrate_to_infinity(f: impl Fn(f64) -> f64) -> f64 {
    // x = t/(1-t) maps [0, 1) onto [0, ∞); graded panels toward t = 1
    let g = |t: f64| {
        let x = t / (1.0 - t);
        f(x) / ((1.0 - t) * (1.0 - t))
    };
    // graded toward both ends: s^ν is not smooth at 0, tails are long
    let mut edges: Vec<f64> = (0..40).map(|k| 0.5 * 0.5f64.powi(40 - k)).collect();
    edges.insert(0, 0.0);
    let mut t: f64 = 0.5;
    while 1.0 - t > 1e-9 {
        edges.push(t);
        t = 1.0 - (1.0 - t) / 2.0;
    }
    edges.push(1.0);
    edges.windows(2).map(|w| GaussRule::legendre_on(32, w[0], w[1]).unwrap().integrate(g)).sum()
}

#[test]
fn reference_curves_are_normalized() {
    let curves = [
        ReferenceCurve::PoissonPs,
        ReferenceCurve::WignerPs,
        ReferenceCurve::SemiPoissonPs,
        ReferenceCurve::BrodyPs { nu: 0.4 },
        ReferenceCurve::PoissonPr,
        ReferenceCurve::GoePr,
    ];
    for c in curves {
        let total = integrate_to_infinity(|x| c.eval(x));
        assert!((total - 1.0).abs() < 1e-6, "{}: {total}", c.name());
    }
    // the GOE ratio mean from the density itself
    let mean = integrate_to_infinity(|r| r.min(1.0 / r) * ReferenceCurve::GoePr.eval(r));
    assert!((mean - 0.5359).abs() < 1e-3, "{mean}");
}

#[test]
fn generators_are_deterministic() {
    for kind in [SyntheticKind::Poisson, SyntheticKind::SemiPoisson, SyntheticKind::Goe] {
        let a = synthetic_ensemble::<f64>(kind, 60, 9).unwrap();
        let b = synthetic_ensemble::<f64>(kind, 60, 9).unwrap();
        let c = synthetic_ensemble::<f64>(kind, 60, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.energies, c.energies);
    }
    assert!(synthetic_ensemble::<f64>(SyntheticKind::Poisson, 5, 0).is_err());
}

#[test]
fn poisson_generator_passes_exponential_ks_at_one_percent() {
    let seq = poisson(20_000, POISSON_SEED + 4);
    let s = identity(&seq).spacings();
    let sample = SpacingSample::from_spacings(s, "raw");
    let d = ks_distance(&sample.sorted(), |x: f64| 1.0 - (-x).exp());
    // asymptotic 1% critical value 1.628/√n
    assert!(d < 1.628 / (sample.len() as f64).sqrt(), "{d}");
}

#[test]
fn goe_spacings_show_level_repulsion() {
    let seqs = goe_ensemble::<f64>(1000, 4, GOE_SEED).unwrap();
    let unfolded: Vec<_> = seqs.iter().map(|s| unfold(s, 6, Some((151, 850))).unwrap()).collect();
    let sample = pool_ensemble(&unfolded).unwrap();
    let small = sample.spacings.iter().filter(|&&s| s < 0.1).count() as f64 / sample.len() as f64;
    // Wigner: 1 - exp(-π/400) ≈ 0.0078; Poisson would give 0.095
    assert!(small < 0.02, "{small}");
    let fit = brody_fit(&sample).unwrap();
    assert!(fit.nu > 0.8, "{}", fit.nu);
}
