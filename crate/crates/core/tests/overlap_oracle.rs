//! Monte-Carlo check of the overlap factors against direct integration over
//! the hyperangular space.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use vdw_spectra::basis::{jacobi_eval, overlap_factors, BasisSpec};

/// `⟨P(ij) | Σ_kl P(kl)⟩ / ⟨P(ij) | P(ij)⟩` sampled over uniformly distributed
/// hyperangles. Isotropic Gaussian particle positions, once the centre of
/// mass is removed, are isotropic in the relative space, so their direction
/// is uniform on the hypersphere.
fn monte_carlo_overlap(n: usize, k_max: usize, samples: usize, seed: u64) -> Vec<f64> {
    let spec = BasisSpec::<f64>::new(n, 0, k_max).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cross = vec![0.0; k_max + 1];
    let mut diag = vec![0.0; k_max + 1];
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut pos = vec![[0.0f64; 3]; n];
    let mut z = vec![0.0; pairs.len()];
    for _ in 0..samples {
        let mut com = [0.0; 3];
        for p in pos.iter_mut() {
            for c in 0..3 {
                p[c] = StandardNormal.sample(&mut rng);
                com[c] += p[c] / n as f64;
            }
        }
        let r2: f64 = 2.0 * pos.iter().map(|p| (0..3).map(|c| (p[c] - com[c]).powi(2)).sum::<f64>()).sum::<f64>();
        for (q, &(i, j)) in pairs.iter().enumerate() {
            let d2: f64 = (0..3).map(|c| (pos[i][c] - pos[j][c]).powi(2)).sum();
            z[q] = 2.0 * d2 / r2 - 1.0;
        }
        for k in 0..=k_max {
            let p: Vec<f64> = z.iter().map(|&zz| jacobi_eval(k, spec.alpha, spec.beta, zz)).collect();
            let total: f64 = p.iter().sum();
            cross[k] += p[0] * total;
            diag[k] += p[0] * p[0];
        }
    }
    cross.iter().zip(&diag).map(|(c, d)| c / d).collect()
}

fn check(n: usize) {
    let k_max = 4;
    let mc = monte_carlo_overlap(n, k_max, 400_000, 17 + n as u64);
    let spec = BasisSpec::<f64>::new(n, 0, k_max).unwrap();
    let f = overlap_factors(&spec).unwrap();
    for k in 0..=k_max {
        let analytic = f.get(k) * f.get(k);
        // relative 1%, with an absolute floor for the vanishing K = 1 entry
        let tol = 0.01 * analytic.max(1.0);
        assert!(
            (analytic - mc[k]).abs() < tol,
            "N={n} K={k}: analytic {analytic} vs Monte Carlo {}",
            mc[k]
        );
    }
}

#[test]
fn three_bosons_match_direct_integration() {
    check(3);
}

#[test]
fn four_bosons_include_disjoint_pairs() {
    check(4);
}
