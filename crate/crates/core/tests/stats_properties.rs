use proptest::prelude::*;
use vdw_spectra::levels::LevelSequence;
use vdw_spectra::stats::*;

/// Ascending energies on a dyadic grid (multiples of 1/8 below 2^20), so
/// `3E + 7` and every difference are exact in f64.
fn dyadic_levels(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u32..64, min..max).prop_map(|steps| {
        let mut acc = 0u64;
        steps
            .into_iter()
            .map(|s| {
                acc += s as u64;
                acc as f64 / 8.0
            })
            .collect()
    })
}

fn positive_spacings(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..5.0, min..max)
}

fn cumulative(s: &[f64]) -> Vec<f64> {
    s.iter()
        .scan(0.0, |a, x| {
            *a += x;
            Some(*a)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ratios_survive_affine_maps_bit_for_bit(e in dyadic_levels(3, 200)) {
        let mapped: Vec<f64> = e.iter().map(|x| 3.0 * x + 7.0).collect();
        let a = RatioSample::from_energies(&e);
        let b = RatioSample::from_energies(&mapped);
        prop_assert_eq!(a.excluded, b.excluded);
        prop_assert_eq!(a.r.len(), b.r.len());
        for (x, y) in a.r.iter().zip(&b.r).chain(a.rtilde.iter().zip(&b.rtilde)) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn rtilde_is_the_folded_ratio(e in dyadic_levels(3, 200)) {
        let s = RatioSample::from_energies(&e);
        prop_assert_eq!(s.r.len() + s.excluded, e.len() - 2);
        for (&r, &rt) in s.r.iter().zip(&s.rtilde) {
            prop_assert!(r > 0.0);
            prop_assert!((0.0..=1.0).contains(&rt));
            prop_assert_eq!(rt, r.min(1.0 / r));
        }
    }

    #[test]
    fn histograms_carry_unit_mass(data in prop::collection::vec(-1.0f64..6.0, 1..500), width in 0.05f64..1.0) {
        let h = Histogram::uniform(&data, 0.0, 4.0, width).unwrap();
        prop_assert!((h.total_mass() - 1.0).abs() < 1e-12);
        let inside = data.iter().filter(|&&x| (0.0..4.0).contains(&x)).count();
        if inside == data.len() {
            prop_assert!((h.integral() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rigidity_measures_are_nonnegative(s in positive_spacings(200, 600)) {
        let levels = cumulative(&s);
        let u = UnfoldedSequence::identity(levels, "random").unwrap();
        let top = u.span() / 10.0;
        let lengths: Vec<f64> = [0.1, 0.35, 0.7, 1.0].iter().map(|f| f * top).collect();
        for (_, v) in number_variance(&u, &lengths).unwrap() {
            prop_assert!(v >= 0.0);
        }
        for (_, v) in delta3(&u, &lengths).unwrap() {
            prop_assert!(v >= 0.0);
        }
    }

    #[test]
    fn pooling_never_bridges_sequences(
        a in positive_spacings(2, 40),
        b in positive_spacings(2, 40),
        gap in 0.0f64..1e4,
    ) {
        let la = cumulative(&a);
        let lb: Vec<f64> = cumulative(&b).into_iter().map(|x| x + la.last().unwrap() + gap).collect();
        let ua = UnfoldedSequence::identity(la, "a").unwrap();
        let ub = UnfoldedSequence::identity(lb, "b").unwrap();
        let pooled = pool_ensemble(&[ua.clone(), ub.clone()]).unwrap();
        let mut expected = ua.spacings();
        expected.extend(ub.spacings());
        prop_assert_eq!(&pooled.spacings, &expected);
        prop_assert_eq!(pooled.tags.iter().filter(|&&t| t == 0).count(), a.len() - 1);
    }

    #[test]
    fn unfolding_is_monotone_with_unit_mean(s in positive_spacings(60, 400), curve in 0.0f64..0.5) {
        // a smoothly varying density with random local fluctuations
        let e: Vec<f64> = cumulative(&s).iter().map(|x| x + curve * x * x / 1000.0).collect();
        let seq = LevelSequence::from_energies(e, "warped").unwrap();
        if let Ok(u) = unfold(&seq, 6, None) {
            prop_assert!(u.levels.windows(2).all(|w| w[1] >= w[0]));
            let sp = u.spacings();
            let mean = sp.iter().sum::<f64>() / sp.len() as f64;
            prop_assert!((mean - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn integral_spacing_climbs_to_one(s in prop::collection::vec(1e-9f64..5.0, 1..300)) {
        let curve = integral_spacing(&SpacingSample::from_spacings(s, "x")).unwrap();
        prop_assert!(curve.i.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(curve.ln_s.windows(2).all(|w| w[1] > w[0]));
        prop_assert_eq!(*curve.i.last().unwrap(), 1.0);
    }
}
