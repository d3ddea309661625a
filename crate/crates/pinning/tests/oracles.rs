//! Brute-force oracles for the lattice, the generator and the equilibrium
//! measure. Everything here recomputes from the heights directly rather
//! than through the library's own shortcuts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pinning::dynamics::{flip_rate, PinningParameter, Simulator};
use pinning::equilibrium::{midpoint_pin_probability_exact, partition_function, PartitionTable};
use pinning::lattice::{enumerate_paths, eta_min, LatticePath};
use pinning::observables::{area, generator_drift_area};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn interior_zeros(p: &LatticePath) -> usize {
    let h = p.heights();
    h[1..h.len() - 1].iter().filter(|&&v| v == 0).count()
}

fn weight(p: &LatticePath, lambda: &BigRational) -> BigRational {
    (0..interior_zeros(p)).fold(BigRational::one(), |acc, _| acc * lambda)
}

/// Zero-to-zero stretches with positive heights in between, by length.
fn long_excursions(h: &[i32]) -> usize {
    let zeros: Vec<usize> = (0..h.len()).filter(|&i| h[i] == 0).collect();
    zeros.windows(2).filter(|w| w[1] - w[0] >= 4).count()
}

#[test]
fn path_counts_are_catalan() {
    let catalan = [1, 1, 2, 5, 14, 42, 132, 429];
    for (l, &c) in catalan.iter().enumerate().skip(1) {
        assert_eq!(enumerate_paths(l, true).len(), c);
    }
    // free bridges: central binomial coefficients
    assert_eq!(enumerate_paths(4, false).len(), 70);
}

#[test]
fn drift_identity_by_direct_enumeration() {
    for l in 1..=5 {
        for p in enumerate_paths(l, true) {
            let mut drift = 0.0;
            for x in 1 - l as i64..l as i64 {
                if let Some(next) = p.flipped(x) {
                    let rate = flip_rate(&p, x, &PinningParameter::<f64>::Infinite).unwrap();
                    drift += rate * (area(&next) - area(&p));
                }
            }
            let expected = -2.0 * long_excursions(p.heights()) as f64;
            assert_eq!(drift, expected, "{:?}", p.heights());
            assert_eq!(generator_drift_area(&p, &PinningParameter::Infinite).value, expected);
            if p != eta_min(l) {
                assert!(drift <= -2.0, "non-minimal path without a long excursion: {:?}", p.heights());
            }
        }
    }
}

#[test]
fn detailed_balance_is_exact() {
    for lambda in [q(1, 2), q(1, 1), q(2, 1), q(5, 1), q(7, 3)] {
        let param = PinningParameter::Finite(lambda.clone());
        for l in 1..=4 {
            for p in enumerate_paths(l, true) {
                for x in 1 - l as i64..l as i64 {
                    let Some(next) = p.flipped(x) else { continue };
                    let forward = flip_rate(&p, x, &param).unwrap();
                    let back = flip_rate(&next, x, &param).unwrap();
                    assert!(!forward.is_zero());
                    assert_eq!(weight(&p, &lambda) * forward, weight(&next, &lambda) * back);
                }
            }
        }
    }
}

#[test]
fn partition_function_matches_enumeration() {
    for lambda in [q(0, 1), q(1, 2), q(1, 1), q(2, 1), q(5, 1)] {
        for l in 1..=6 {
            let brute: BigRational = enumerate_paths(l, true).iter().map(|p| weight(p, &lambda)).sum();
            assert_eq!(partition_function(l, &lambda), brute, "l = {l}, λ = {lambda}");
        }
    }
}

#[test]
fn midpoint_probability_matches_enumeration() {
    for lambda in [q(1, 2), q(3, 2), q(4, 1)] {
        for l in 2..=6 {
            let target = if l % 2 == 0 { 1 } else { 0 };
            let mut hit = BigRational::zero();
            let mut z = BigRational::zero();
            for p in enumerate_paths(l, true) {
                let w = weight(&p, &lambda);
                let h = p.heights();
                if h[l - 1] == target && h[l + 1] == target {
                    hit += w.clone();
                }
                z += w;
            }
            assert_eq!(midpoint_pin_probability_exact(l, &lambda), hit / z, "l = {l}");
        }
    }
}

#[test]
fn contact_profile_matches_enumeration() {
    let lambda = 1.7;
    let l = 6;
    let table = PartitionTable::new(l, lambda).unwrap();
    let paths = enumerate_paths(l, true);
    let w: Vec<f64> = paths.iter().map(|p| lambda.powi(interior_zeros(p) as i32)).collect();
    let z: f64 = w.iter().sum();
    for x in 1 - l as i64..l as i64 {
        let p0: f64 = paths.iter().zip(&w).filter(|(p, _)| p.at(x) == 0).map(|(_, w)| w).sum::<f64>() / z;
        assert!((table.contact_probability(x) - p0).abs() < 1e-12, "x = {x}");
    }
    assert!((table.total() - z).abs() < 1e-9 * z);
}

/// χ² against the enumerated measure; `crit` is the 99% quantile for the
/// number of states minus one.
fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts.iter().zip(probs).map(|(&c, &p)| (c as f64 - n as f64 * p).powi(2) / (n as f64 * p)).sum()
}

fn enumerated_measure(l: usize, lambda: f64) -> (Vec<LatticePath>, Vec<f64>) {
    let paths = enumerate_paths(l, true);
    let w: Vec<f64> = paths.iter().map(|p| lambda.powi(interior_zeros(p) as i32)).collect();
    let z: f64 = w.iter().sum();
    (paths, w.into_iter().map(|v| v / z).collect())
}

#[test]
fn sampler_matches_the_measure() {
    // 99% quantiles of χ² with 1 and 4 degrees of freedom
    for (l, crit) in [(2, 6.635), (3, 13.277)] {
        let (paths, probs) = enumerated_measure(l, 1.5);
        let table = PartitionTable::new(l, 1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = vec![0u64; paths.len()];
        for _ in 0..100_000 {
            let s = table.sample(&mut rng);
            counts[paths.iter().position(|p| *p == s).unwrap()] += 1;
        }
        let chi = chi_square(&counts, &probs);
        assert!(chi < crit, "l = {l}: χ² = {chi}");
    }
}

#[test]
fn long_runs_reach_equilibrium() {
    // L = 2: the contact state has mass λ/(1+λ)
    for lambda in [0.5, 1.5] {
        let eta0 = LatticePath::new(2, vec![0, 1, 2, 1, 0], true).unwrap();
        let n = 100_000u64;
        let mut pinned = 0u64;
        for seed in 0..n {
            let mut sim = Simulator::new(&eta0, PinningParameter::Finite(lambda), seed).unwrap();
            sim.advance_to(30.0);
            pinned += (sim.heights()[2] == 0) as u64;
        }
        let p = lambda / (1.0 + lambda);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let freq = pinned as f64 / n as f64;
        assert!((freq - p).abs() <= 3.0 * se, "λ = {lambda}: {freq} vs {p} ± {se}");
    }
}

#[test]
fn long_runs_reach_equilibrium_on_omega_3() {
    let lambda = 2.5;
    let (paths, probs) = enumerated_measure(3, lambda);
    let eta0 = LatticePath::new(3, vec![0, 1, 2, 3, 2, 1, 0], true).unwrap();
    let mut counts = vec![0u64; paths.len()];
    for seed in 0..50_000 {
        let mut sim = Simulator::new(&eta0, PinningParameter::Finite(lambda), seed).unwrap();
        sim.advance_to(40.0);
        counts[paths.iter().position(|p| p.heights() == sim.heights()).unwrap()] += 1;
    }
    let chi = chi_square(&counts, &probs);
    assert!(chi < 13.277, "χ² = {chi}");
}
