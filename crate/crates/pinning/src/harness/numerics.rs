//! Deterministic experiments: Stefan and heat studies, equilibrium tables,
//! the exhaustive small-`L` oracle and the Agmon sweep.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ensembles::loglog_slope;
use super::spec::ExperimentSpec;
use super::table::ResultTable;
use crate::dynamics::{flip_rate, PinningParameter};
use crate::equilibrium::PartitionTable;
use crate::error::{Error, Result};
use crate::fbp::diagnostics::{boundary_relation_residual, CONCAVIFICATION, INFLECTIONS};
use crate::fbp::{
    agmon_check, heat_boundary_slope, heat_crank_nicolson, heat_dirichlet, run_distance, stefan_diagnostics,
    stefan_fixed_point, stefan_front_tracking, tstar, FixedPointConfig, SlopeParameter, StefanConfig, StefanRun,
    Verdict,
};
use crate::lattice::{enumerate_paths, excursions, LatticePath};
use crate::observables::{self, generator_drift_area};
use crate::profile::{sup_distance, Profile};

fn has(spec: &ExperimentSpec, check: &str) -> bool {
    spec.checks.iter().any(|c| c == check)
}

fn slope_of(spec: &ExperimentSpec) -> Result<SlopeParameter<f64>> {
    match spec.lambda {
        Some(PinningParameter::Finite(v)) => SlopeParameter::for_lambda(v),
        _ => Ok(SlopeParameter::unit()),
    }
}

fn stefan_config(spec: &ExperimentSpec, dx: f64, horizon: f64) -> Result<StefanConfig<f64>> {
    let mut cfg = StefanConfig::new(dx, spec.dt.unwrap_or(1e-3), horizon);
    cfg.slope = slope_of(spec)?;
    cfg.record_times = spec.times.clone();
    Ok(cfg)
}

/// Front-tracking run plus the checks named in `checks`:
///
/// * `area-law`: `|a(t) - a(0) + 2t|` at every step, against `tolerance`
///   (default `1e-3`)
/// * `collision-time`: collision within 1% of `a(f0)/2`
/// * `blowup`: confirmed blowup, final width at least 1, a negative part
///   at every step past `t = 1`
/// * `diagnostics`: inflection count and concavification
/// * `relation-refinement`: boundary relation defect at `dx` and `dx/2`
/// * `fixed-point`: fixed-point solver against front tracking on `[0, t0]`
pub fn run_stefan_study(spec: &ExperimentSpec) -> Result<ResultTable> {
    let f0 = spec.initial_profile()?;
    let dx = spec.dx.unwrap_or(1.0 / 512.0);
    let expected = tstar(&f0);
    let horizon = spec.horizon.unwrap_or(if expected > 0.0 { 1.5 * expected } else { 10.0 });
    let run = stefan_front_tracking(&f0, &stefan_config(spec, dx, horizon)?)?;
    let mut table = ResultTable::new(&spec.name, &["left", "right", "area", "area_defect", "k_max", "f_min", "inflections"]);
    let a0 = run.series[0].area;
    let mut defect = 0.0f64;
    for p in &run.series {
        let d = p.area - a0 + 2.0 * p.t;
        defect = defect.max(d.abs());
        table.push(0, 0, p.t, &[
            ("left", p.l),
            ("right", p.r),
            ("area", p.area),
            ("area_defect", d),
            ("k_max", p.k_max),
            ("f_min", p.f_min),
            ("inflections", p.inflections as f64),
        ]);
    }
    table.note("steps", run.series.len() as f64);
    table.note("expected_collision", expected);
    if let Some(t) = run.collision_time {
        table.note("collision_time", t);
    }
    if let Some(t) = run.blowup_time {
        table.note("blowup_time", t);
    }
    table.note("max_area_defect", defect);
    table.artifact(format!("{}.stefan.csv", spec.name), run.series_csv());
    for s in run.states.iter().skip(1).filter(|s| spec.times.iter().any(|&t| (t - s.t).abs() < 1e-12)) {
        table.artifact(format!("{}.state_t{}.csv", spec.name, s.t), s.f.to_csv());
    }

    if has(spec, "area-law") {
        let tol = spec.tolerance_or(1e-3);
        table.criterion("area_law", defect <= tol, format!("max |a(t) - a(0) + 2t| = {defect:.3e} (need ≤ {tol:.0e})"));
    }
    if has(spec, "collision-time") {
        let (ok, detail) = match run.collision_time {
            Some(t) => {
                let rel = (t - expected).abs() / expected;
                (rel <= 0.01, format!("collision at {t:.5} vs a(f0)/2 = {expected:.5} ({:.3}%)", 100.0 * rel))
            }
            None => (false, format!("no collision, verdict {:?}", run.verdict)),
        };
        table.criterion("collision_time", ok, detail);
    }
    if has(spec, "blowup") {
        let last = run.series.last().expect("nonempty");
        let width = last.r - last.l;
        let late: Vec<_> = run.series.iter().filter(|p| p.t >= 1.0).collect();
        let bump = !late.is_empty() && late.iter().all(|p| p.f_min < 0.0);
        let ok = run.verdict == Verdict::Blowup && run.blowup_confirmed && width >= 1.0 && bump;
        table.criterion(
            "blowup",
            ok,
            format!(
                "verdict {:?} at t = {:.4}, confirmed {}, width {width:.3}, negative part on all {} steps past t = 1: {bump}",
                run.verdict, last.t, run.blowup_confirmed, late.len()
            ),
        );
    }
    if has(spec, "diagnostics") {
        let rep = stefan_diagnostics(&run);
        for c in &rep.checks {
            table.note(format!("diagnostic[{}]", c.name), c.value);
        }
        for name in [INFLECTIONS, CONCAVIFICATION] {
            let c = rep.get(name).expect("always reported");
            let detail = format!("{} = {}", c.detail, c.value);
            table.criterion(name, c.passed, detail);
        }
        if run.verdict == Verdict::Blowup {
            let t2 = rep.get(CONCAVIFICATION).map_or(f64::NAN, |c| c.value);
            table.criterion("concave_before_blowup", t2 < run.blowup_time.unwrap_or(0.0), format!("t2 = {t2}"));
        }
    }
    if has(spec, "relation-refinement") {
        let coarse = boundary_relation_residual(&run);
        let fine_run = stefan_front_tracking(&f0, &stefan_config(spec, dx / 2.0, horizon)?)?;
        let fine = boundary_relation_residual(&fine_run);
        let ratio = coarse / fine;
        table.note("relation_residual[dx]", coarse);
        table.note("relation_residual[dx/2]", fine);
        table.criterion(
            "relation_first_order",
            ratio >= 1.5 && coarse <= 100.0 * dx,
            format!("defect {coarse:.3e} at dx, {fine:.3e} at dx/2, ratio {ratio:.2} (need ≥ 1.5)"),
        );
    }
    if has(spec, "fixed-point") {
        fixed_point_check(spec, &f0, &mut table)?;
    }
    Ok(table)
}

fn fixed_point_check(spec: &ExperimentSpec, f0: &Profile<f64>, table: &mut ResultTable) -> Result<()> {
    let t0 = spec.t0.unwrap_or(0.05);
    let dx = spec.dx.unwrap_or(1.0 / 256.0);
    let dt = spec.dt.unwrap_or(2.5e-4);
    let times: Vec<f64> = (1..=10).map(|k| t0 * k as f64 / 10.0).collect();
    let mut cfg = FixedPointConfig::new(dx, dt, t0);
    cfg.slope = slope_of(spec)?;
    cfg.record_times = times.clone();
    let fp = stefan_fixed_point(f0, &cfg)?;
    let mut ft_cfg = StefanConfig::new(dx, dt, t0);
    ft_cfg.slope = cfg.slope;
    ft_cfg.record_times = times.clone();
    let ft: StefanRun<f64> = stefan_front_tracking(f0, &ft_cfg)?;
    let d = run_distance(&fp.run, &ft, &times)?;
    table.note("fixed_point_iterations", fp.iterations as f64);
    table.note("fixed_point_collar", fp.collar);
    table.note("contraction_factor", fp.contraction_factor);
    table.criterion(
        "fixed_point_agreement",
        d.profile <= 5e-3 && d.boundary <= 1e-3,
        format!("sup |f| gap {:.2e} (≤ 5e-3), boundary gap {:.2e} (≤ 1e-3) on [0, {t0}]", d.profile, d.boundary),
    );
    table.criterion(
        "contraction",
        fp.contraction_factor < 1.0,
        format!("observed factor {:.3e} after {} iterations", fp.contraction_factor, fp.iterations),
    );
    Ok(())
}

/// Values of the interior local maxima and minima of the nodal values,
/// plateaus counted once.
pub fn local_extrema(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    let mut i = 1;
    while i + 1 < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        if j + 1 < v.len() {
            if v[i - 1] < v[i] && v[j + 1] < v[i] {
                maxima.push(v[i]);
            } else if v[i - 1] > v[i] && v[j + 1] > v[i] {
                minima.push(v[i]);
            }
        }
        i = j + 1;
    }
    (maxima, minima)
}

/// Spectral heat solution on the time grid, cross-checked against
/// Crank–Nicolson; `extrema` and `boundary-slope` add the corresponding
/// checks.
pub fn run_heat_study(spec: &ExperimentSpec) -> Result<ResultTable> {
    let f0 = spec.initial_profile()?;
    let horizon = spec.horizon.unwrap_or(0.5);
    let mut times = if spec.times.is_empty() { (1..=10).map(|k| horizon * k as f64 / 10.0).collect() } else { spec.times.clone() };
    times.sort_by(f64::total_cmp);
    let modes = spec.modes.unwrap_or(512);
    let dt = spec.dt.unwrap_or(1e-4);
    let tol = spec.tolerance_or(1e-3);
    let q = crate::harness::ensembles::fourier_quadrature(&f0);
    let mut table = ResultTable::new(&spec.name, &["area", "fourier", "cn_gap", "sup"]);
    let mut worst_gap = 0.0f64;
    let mut monotone = true;
    let (mut prev_hi, mut prev_lo) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in &times {
        let exact = heat_dirichlet(&f0, t, modes)?.profile;
        let cn = heat_crank_nicolson(&f0, t, dt)?;
        let gap = sup_distance(&exact, &cn)?;
        worst_gap = worst_gap.max(gap);
        let phi = exact.map(|x, v| v * (std::f64::consts::FRAC_PI_2 * x).cos()).integral();
        table.push(0, 0, t, &[("area", exact.integral()), ("fourier", phi), ("cn_gap", gap), ("sup", exact.sup_norm())]);
        let (maxima, minima) = local_extrema(exact.values());
        let slack = 1e-9 * (1.0 + exact.sup_norm());
        if let Some(hi) = maxima.iter().copied().reduce(f64::max) {
            monotone &= hi <= prev_hi + slack;
            prev_hi = hi;
        }
        if let Some(lo) = minima.iter().copied().reduce(f64::min) {
            monotone &= lo >= prev_lo - slack;
            prev_lo = lo;
        }
        table.artifact(format!("{}.heat_t{t}.csv", spec.name), exact.to_csv());
    }
    table.note("fourier_quadrature_t0", q);
    table.criterion(
        "crank_nicolson",
        worst_gap <= tol,
        format!("max sup gap to the sine series {worst_gap:.2e} (need ≤ {tol:.0e})"),
    );
    if has(spec, "extrema") {
        table.criterion("extrema_monotone", monotone, "largest local max nonincreasing, smallest local min nondecreasing");
    }
    if has(spec, "boundary-slope") {
        let delta_bar = spec.fraction.unwrap_or(0.25);
        let mut ok = true;
        let mut notes = Vec::new();
        for &t in &times {
            let rep = heat_boundary_slope(&f0, t, delta_bar, modes)?;
            ok &= rep.slope_holds && rep.area_holds;
            notes.push(format!("t={t}: slope {:.3}/{:.3}", rep.min_slope_left.min(rep.min_slope_right), rep.slope_bound));
        }
        table.criterion("boundary_slope", ok, notes.join(", "));
    }
    Ok(table)
}

/// Midpoint and contact probabilities for each `L`; with several `L` the
/// log-log slope of the midpoint probability against `L` is checked
/// against `slope_range` when one is given.
pub fn run_equilibrium(spec: &ExperimentSpec) -> Result<ResultTable> {
    let lambda = match spec.lambda_or(PinningParameter::Finite(1.5)) {
        PinningParameter::Finite(v) if v > 0.0 => v,
        other => return Err(Error::Config(format!("{}: need finite λ > 0, got {other}", spec.name))),
    };
    let mut table = ResultTable::new(&spec.name, &["midpoint_pin", "midpoint_zero", "expected_contacts", "log_z"]);
    let mut points = Vec::new();
    for &l in spec.require_l()? {
        let pt = PartitionTable::new(l, lambda)?;
        let p = pt.midpoint_pin_probability();
        points.push((l as f64, p));
        table.push(l, 0, 0.0, &[
            ("midpoint_pin", p),
            ("midpoint_zero", pt.midpoint_zero_probability()),
            ("expected_contacts", pt.expected_contacts()),
            ("log_z", pt.log_total()),
        ]);
        table.artifact(format!("{}.contacts_L{l}.csv", spec.name), pt.to_csv());
    }
    if let (Some([lo, hi]), Some(s)) = (spec.slope_range, loglog_slope(&points)) {
        table.note("slope_in_l", s);
        table.criterion("slope_in_l", (lo..=hi).contains(&s), format!("fitted slope {s:.3}, need [{lo}, {hi}]"));
    }
    Ok(table)
}

fn exact_lambda(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::InvalidParameter(format!("λ = {v} not finite")))
}

fn pow(x: &BigRational, n: usize) -> BigRational {
    (0..n).fold(BigRational::one(), |acc, _| acc * x)
}

/// Failures of reversibility for walled paths of half-length `l`, in exact
/// arithmetic against `π(η) ∝ λ^{N(η)}`.
pub fn detailed_balance_failures(l: usize, lambda: &BigRational) -> Result<usize> {
    let param = PinningParameter::Finite(lambda.clone());
    let mut failures = 0;
    for path in enumerate_paths(l, true) {
        let w = pow(lambda, observables::contacts(&path));
        for x in 1 - l as i64..l as i64 {
            let Some(next) = path.flipped(x) else { continue };
            let forward = flip_rate(&path, x, &param)?;
            let back = flip_rate(&next, x, &param)?;
            let w_next = pow(lambda, observables::contacts(&next));
            if w.clone() * forward != w_next * back {
                failures += 1;
            }
        }
    }
    Ok(failures)
}

/// Walled paths of half-length `l` where the drift of the area at `λ = ∞`
/// is not `-2` times the number of excursions of length at least 4.
pub fn drift_identity_failures(l: usize) -> Vec<LatticePath> {
    enumerate_paths(l, true)
        .into_iter()
        .filter(|p| {
            let long = excursions(p).iter().filter(|e| e.length() >= 4).count();
            generator_drift_area(p, &PinningParameter::Infinite).value != -2.0 * long as f64
        })
        .collect()
}

/// Exhaustive drift identity and exact detailed balance for every
/// `L ≤ max(l)` (default 5) and every `λ` in `lambdas`
/// (default `1/2, 1, 2, 5`).
pub fn run_oracle(spec: &ExperimentSpec) -> Result<ResultTable> {
    let max_l = spec.l.iter().copied().max().unwrap_or(5);
    let lambdas = if spec.lambdas.is_empty() { vec![0.5, 1.0, 2.0, 5.0] } else { spec.lambdas.clone() };
    let mut table = ResultTable::new(&spec.name, &["paths", "drift_failures", "balance_failures", "lambda"]);
    let start = std::time::Instant::now();
    let (mut drift_bad, mut balance_bad, mut checked) = (0, 0, 0);
    for l in 1..=max_l {
        let n = enumerate_paths(l, true).len();
        checked += n;
        let d = drift_identity_failures(l).len();
        drift_bad += d;
        table.push(l, 0, 0.0, &[("paths", n as f64), ("drift_failures", d as f64)]);
        for &v in &lambdas {
            let lam = exact_lambda(v)?;
            if lam <= BigRational::zero() {
                return Err(Error::Config(format!("{}: λ = {v} must be positive", spec.name)));
            }
            let b = detailed_balance_failures(l, &lam)?;
            balance_bad += b;
            table.push(l, 0, 0.0, &[("paths", n as f64), ("balance_failures", b as f64), ("lambda", v)]);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    table.note("seconds", secs);
    table.criterion("drift_identity", drift_bad == 0, format!("{drift_bad} failures over {checked} paths, L ≤ {max_l}"));
    table.criterion(
        "detailed_balance",
        balance_bad == 0,
        format!("{balance_bad} failures, λ ∈ {lambdas:?}, exact rationals"),
    );
    table.criterion("runtime", secs < 10.0, format!("{secs:.2} s (need < 10 s)"));
    Ok(table)
}

/// Smooth random profile on `[0, 10]` built from compactly supported
/// bumps `(1 - u²)³`; it vanishes at the right end.
pub fn random_bump_profile(rng: &mut impl Rng) -> Result<Profile<f64>> {
    let k = rng.random_range(1..=5);
    let bumps: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| (rng.random_range(-2.0..2.0), rng.random_range(0.0..8.0), rng.random_range(0.1..2.0)))
        .collect();
    let n = rng.random_range(500..4000);
    Profile::from_fn(0.0, 10.0, n, |x| {
        bumps
            .iter()
            .map(|&(a, c, w)| {
                let u = (x - c) / w;
                if u.abs() < 1.0 {
                    a * (1.0 - u * u).powi(3)
                } else {
                    0.0
                }
            })
            .sum()
    })
}

/// Random sweep of `‖γ‖∞⁴ ≤ 4 ∫γ² ∫γ_x²` plus the equality case `e^{-x}`.
pub fn run_agmon(spec: &ExperimentSpec) -> Result<ResultTable> {
    let samples = spec.samples.unwrap_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut table = ResultTable::new(&spec.name, &["l2", "h1", "sup", "residual"]);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for i in 0..samples {
        let g = random_bump_profile(&mut rng)?;
        let rep = agmon_check(&g);
        let tol = 1e-9 * (1.0 + rep.sup.powi(4));
        if rep.residual < -tol {
            violations += 1;
        }
        worst = worst.min(rep.residual / (1.0 + rep.sup.powi(4)));
        table.push(0, i as u64, 0.0, &[("l2", rep.l2), ("h1", rep.h1), ("sup", rep.sup), ("residual", rep.residual)]);
    }
    table.note("min_relative_residual", worst);
    table.criterion("agmon_sweep", violations == 0, format!("{violations} violations in {samples} profiles"));
    let cells = spec.profile_cells.unwrap_or(400_000);
    let witness = agmon_check(&Profile::from_fn(0.0, 40.0, cells, |x: f64| (-x).exp())?);
    let tol = spec.tolerance_or(1e-6);
    table.criterion(
        "equality_witness",
        witness.residual.abs() <= tol,
        format!("e^(-x): residual {:.2e} (need ≤ {tol:.0e})", witness.residual),
    );
    Ok(table)
}
