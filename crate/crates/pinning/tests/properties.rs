use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pinning::dynamics::{coupled_simulate, CoupledRun, DynamicsConfig, PinningParameter, Simulator};
use pinning::fbp::{
    agmon_check, heat_dirichlet, stefan_front_tracking, SlopeParameter, StefanConfig, Verdict,
};
use pinning::harness::numerics::{local_extrema, random_bump_profile};
use pinning::lattice::{discretize, excursions, validate, LatticePath};
use pinning::observables::{area, contacts, windowed_area};
use pinning::Profile;

/// Walled path from a step pattern: `true` means up unless that would
/// break the wall or the return to zero.
fn walled_path(l: usize, pattern: &[bool]) -> LatticePath {
    let n = 2 * l;
    let mut h = vec![0i32];
    for i in 0..n {
        let cur = h[i];
        let left = (n - i) as i32;
        let up = if cur == 0 { true } else if cur >= left { false } else { pattern[i % pattern.len()] };
        h.push(cur + if up { 1 } else { -1 });
    }
    LatticePath::new(l, h, true).unwrap()
}

fn path_strategy(max_l: usize) -> impl Strategy<Value = LatticePath> {
    (1..=max_l, prop::collection::vec(any::<bool>(), 1..64)).prop_map(|(l, p)| walled_path(l, &p))
}

fn ordered_pair(max_l: usize) -> impl Strategy<Value = (LatticePath, LatticePath)> {
    (2..=max_l, prop::collection::vec(any::<bool>(), 1..64), prop::collection::vec(any::<bool>(), 1..64)).prop_map(
        |(l, a, b)| {
            let (p, q) = (walled_path(l, &a), walled_path(l, &b));
            let lo = p.heights().iter().zip(q.heights()).map(|(&x, &y)| x.min(y)).collect();
            let hi = p.heights().iter().zip(q.heights()).map(|(&x, &y)| x.max(y)).collect();
            (LatticePath::new(l, lo, true).unwrap(), LatticePath::new(l, hi, true).unwrap())
        },
    )
}

fn lambda_strategy() -> impl Strategy<Value = PinningParameter> {
    prop_oneof![
        (0.0..6.0f64).prop_map(PinningParameter::Finite),
        Just(PinningParameter::Infinite),
    ]
}

/// `min(1 - |x|, max(0, g))` with `g` piecewise linear, slopes in `[-1, 1]`.
fn lipschitz_profile(start: f64, slopes: &[f64]) -> Profile<f64> {
    let k = slopes.len();
    Profile::from_fn(-1.0, 1.0, 4096, |x| {
        let pos = (x + 1.0) / 2.0 * k as f64;
        let mut g = start;
        for (i, s) in slopes.iter().enumerate() {
            let w = (pos - i as f64).clamp(0.0, 1.0) * 2.0 / k as f64;
            g += s * w;
        }
        (1.0 - x.abs()).min(g.max(0.0))
    })
    .unwrap()
}

/// Convex combination of two admissible shapes with slopes `±s` at the ends
/// of `[-a, a]`.
fn admissible(a: f64, mix: f64, s: f64) -> Profile<f64> {
    let c = (1.0 - 0.15 * std::f64::consts::PI) * 2.0 / std::f64::consts::PI;
    Profile::from_fn(-a, a, 2048, |x| {
        let u = x / a;
        let cosine = 2.0 / std::f64::consts::PI * (std::f64::consts::FRAC_PI_2 * u).cos();
        let bump = c * (std::f64::consts::FRAC_PI_2 * u).cos() - 0.1 * (1.5 * std::f64::consts::PI * u).cos();
        s * a * ((1.0 - mix) * cosine + mix * bump)
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn discretization_error_is_at_most_two_over_l(
        start in 0.0..1.0f64,
        slopes in prop::collection::vec(-1.0..=1.0f64, 1..12),
        l in 1usize..300,
    ) {
        let f0 = lipschitz_profile(start, &slopes);
        let eta = discretize(&f0, l, true).unwrap();
        let lf = l as f64;
        for (x, h) in eta.sites() {
            let err = (h as f64 / lf - f0.eval(x as f64 / lf)).abs();
            prop_assert!(err <= 2.0 / lf + 1e-12, "x = {x}: {err}");
        }
    }

    #[test]
    fn flips_preserve_validity_and_undo(p in path_strategy(12), site in any::<u32>()) {
        let l = p.half_length() as i64;
        if l > 1 {
            let x = 1 - l + (site as i64).rem_euclid(2 * l - 1);
            if let Some(q) = p.flipped(x) {
                prop_assert!(validate(p.half_length(), q.heights(), true).is_none());
                prop_assert_eq!((q.at(x) - p.at(x)).abs(), 2);
                prop_assert_eq!(q.flipped(x).unwrap(), p.clone());
            }
        }
        for (x, h) in p.sites() {
            prop_assert_eq!((h as i64 + x + l).rem_euclid(2), 0);
        }
    }

    #[test]
    fn excursions_partition_the_zero_set(p in path_strategy(16)) {
        let ex = excursions(&p);
        let zeros: Vec<i64> = p.sites().filter(|&(_, h)| h == 0).map(|(x, _)| x).collect();
        prop_assert_eq!(ex.len(), zeros.len() - 1);
        for (e, w) in ex.iter().zip(zeros.windows(2)) {
            prop_assert_eq!((e.left, e.right), (w[0], w[1]));
            prop_assert!((e.left + 1..e.right).all(|x| p.at(x) > 0));
        }
    }

    #[test]
    fn windowed_area_is_additive(p in path_strategy(16), a in any::<u32>(), b in any::<u32>()) {
        let l = p.half_length() as i64;
        let total = windowed_area(&p, -l, l).unwrap();
        prop_assert_eq!(total, area(&p));
        if l > 1 {
            let m = -l + 1 + (a as i64).rem_euclid(2 * l - 1);
            prop_assert_eq!(windowed_area(&p, -l, m).unwrap() + windowed_area(&p, m, l).unwrap(), total);
            let k = -l + (b as i64).rem_euclid(m + l);
            if k < m {
                let split = windowed_area(&p, k, m).unwrap() + windowed_area(&p, m, l).unwrap();
                prop_assert_eq!(split, windowed_area(&p, k, l).unwrap());
            }
        }
    }

    #[test]
    fn agmon_holds_on_random_bumps(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_bump_profile(&mut rng).unwrap();
        let rep = agmon_check(&g);
        prop_assert!(rep.residual >= -1e-9 * (1.0 + rep.sup.powi(4)), "{rep:?}");
    }

    #[test]
    fn heat_flow_moves_extrema_inward(
        bumps in prop::collection::vec((-1.0..1.0f64, -0.6..0.6f64, 0.1..0.35f64), 1..5),
    ) {
        let f0 = Profile::from_fn(-1.0, 1.0, 1024, |x| {
            bumps.iter().map(|&(a, c, w)| {
                let u = (x - c) / w;
                if u.abs() < 1.0 { a * (1.0 - u * u).powi(3) } else { 0.0 }
            }).sum()
        }).unwrap();
        let (mut hi, mut lo) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 1..=12 {
            let t = 0.01 * k as f64;
            let f = heat_dirichlet(&f0, t, 256).unwrap().profile;
            let (maxima, minima) = local_extrema(f.values());
            let slack = 1e-9 * (1.0 + f0.sup_norm());
            if let Some(m) = maxima.into_iter().reduce(f64::max) {
                prop_assert!(m <= hi + slack, "t = {t}: max {m} after {hi}");
                hi = m;
            }
            if let Some(m) = minima.into_iter().reduce(f64::min) {
                prop_assert!(m >= lo - slack, "t = {t}: min {m} after {lo}");
                lo = m;
            }
        }
    }

    #[test]
    fn coupled_runs_stay_ordered(
        (low, high) in ordered_pair(10),
        lam_a in lambda_strategy(),
        lam_b in lambda_strategy(),
        seed in any::<u64>(),
    ) {
        // the lower start gets the larger λ
        let (big, small) = if lam_a.as_f64() >= lam_b.as_f64() { (lam_a, lam_b) } else { (lam_b, lam_a) };
        let l = low.half_length();
        let times: Vec<f64> = (0..=8).map(|k| 0.1 * k as f64).collect();
        let cfg = DynamicsConfig::new(l, small, true, 0.8, seed).with_snapshots(times);
        let runs = [CoupledRun { eta0: low, lambda: big }, CoupledRun { eta0: high, lambda: small }];
        let recs = coupled_simulate(&cfg, &runs).unwrap();
        for (a, b) in recs[0].snapshots.iter().zip(&recs[1].snapshots) {
            prop_assert!(b.path.dominates(&a.path), "t = {}", a.t);
        }
    }

    #[test]
    fn contacts_are_never_removed_at_infinite_lambda(p in path_strategy(16), seed in any::<u64>()) {
        let mut sim = Simulator::new(&p, PinningParameter::Infinite, seed).unwrap();
        let l2 = (p.half_length() * p.half_length()) as f64;
        let mut zeros: Vec<bool> = sim.heights().iter().map(|&h| h == 0).collect();
        for k in 1..=20 {
            sim.advance_to(0.05 * k as f64 * l2);
            let now: Vec<bool> = sim.heights().iter().map(|&h| h == 0).collect();
            prop_assert!(zeros.iter().zip(&now).all(|(&was, &is)| !was || is));
            prop_assert!(validate(p.half_length(), sim.heights(), true).is_none());
            zeros = now;
        }
        prop_assert!(contacts(&sim.path()) >= contacts(&p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn stefan_area_law_and_slopes(a in 0.6..1.5f64, mix in 0.0..1.0f64, lambda in prop_oneof![Just(f64::INFINITY), 3.0..20.0f64]) {
        let s = if lambda.is_finite() { 1.0 - 2.0 / lambda } else { 1.0 };
        let f0 = admissible(a, mix, s);
        // the area law forces collision by a0 / 2s
        let mut cfg = StefanConfig::new(a / 128.0, 1e-3, f0.integral() / s);
        cfg.slope = if lambda.is_finite() { SlopeParameter::for_lambda(lambda).unwrap() } else { SlopeParameter::unit() };
        cfg.record_times = (1..10).map(|k| 0.05 * k as f64 * f0.integral()).collect();
        let run = stefan_front_tracking(&f0, &cfg).unwrap();
        prop_assert_eq!(run.verdict, Verdict::Collided);
        let a0 = run.series[0].area;
        for p in &run.series {
            prop_assert!((p.area - a0 + 2.0 * s * p.t).abs() <= 1e-3, "t = {}: {}", p.t, p.area - a0 + 2.0 * s * p.t);
        }
        for st in &run.states {
            let lip = st.f.lipschitz_constant();
            prop_assert!(lip <= s + 0.02, "t = {}: |f_x| = {lip}", st.t);
        }
    }

    #[test]
    fn negative_area_never_collides(a in 0.7..1.3f64, c2 in 0.25..0.45f64) {
        // -k (u² - 1)(u² - c²): slopes ±1 at u = ∓1, 1-Lipschitz for c² ≤ 1/2,
        // negative area for c² > 1/5
        let k = 1.0 / (2.0 * (1.0 - c2));
        let f0 = Profile::from_fn(-a, a, 1024, |x| {
            let u = x / a;
            -a * k * (u * u - 1.0) * (u * u - c2)
        }).unwrap();
        prop_assert!(f0.integral() < 0.0);
        let cfg = StefanConfig::new(a / 128.0, 1e-3, 20.0);
        let run = stefan_front_tracking(&f0, &cfg).unwrap();
        prop_assert_eq!(run.verdict, Verdict::Blowup);
        prop_assert!(run.collision_time.is_none());
    }
}
