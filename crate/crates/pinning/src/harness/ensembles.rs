//! Monte Carlo experiments: scaling limits, Fourier decay, termination,
//! contact decay and coupling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::spec::ExperimentSpec;
use super::table::ResultTable;
use crate::dynamics::{
    coupled_simulate, simulate, termination_time_ensemble, CoupledRun, DynamicsConfig, PinningParameter, Simulator,
};
use crate::equilibrium::PartitionTable;
use crate::error::{Error, Result};
use crate::fbp::stefan::{state_value, stefan_front_tracking, StefanConfig, StefanRun, StefanState};
use crate::fbp::{heat_dirichlet, tstar};
use crate::lattice::{discretize, eta_min, excursions, rescale, LatticePath};
use crate::observables;
use crate::profile::{sup_distance, Profile};

fn default_grid(horizon: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| horizon * k as f64 / n as f64).collect()
}

fn time_grid(spec: &ExperimentSpec, horizon: f64) -> Vec<f64> {
    let mut ts = if spec.times.is_empty() { default_grid(horizon, 10) } else { spec.times.clone() };
    if !ts.contains(&0.0) {
        ts.push(0.0);
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

fn finite_lambda(spec: &ExperimentSpec, default: f64, range: (f64, f64), open_left: bool) -> Result<f64> {
    let lambda = spec.lambda_or(PinningParameter::Finite(default));
    let ok = match lambda {
        PinningParameter::Finite(v) => (if open_left { v > range.0 } else { v >= range.0 }) && v < range.1,
        PinningParameter::Infinite => false,
    };
    if !ok {
        let left = if open_left { "(" } else { "[" };
        return Err(Error::Config(format!(
            "{}: λ = {lambda} outside {left}{}, {})",
            spec.name, range.0, range.1
        )));
    }
    Ok(lambda.as_f64())
}

fn on_unit_interval(spec: &ExperimentSpec, f0: &Profile<f64>) -> Result<()> {
    let (a, b) = f0.domain();
    if (a + 1.0).abs() > 1e-9 || (b - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("{}: profile must live on [-1, 1]", spec.name)));
    }
    Ok(())
}

fn fraction_within(samples: &[f64], tol: f64) -> f64 {
    samples.iter().filter(|&&d| d <= tol).count() as f64 / samples.len().max(1) as f64
}

/// Walled, `0 ≤ λ < 2`: sup distance of the rescaled path to the heat flow
/// of `f0` over the time grid.
pub fn run_repulsive_limit(spec: &ExperimentSpec) -> Result<ResultTable> {
    let lambda = finite_lambda(spec, 1.0, (0.0, 2.0), false)?;
    let walled = spec.walled.unwrap_or(true);
    let f0 = spec.initial_profile()?;
    on_unit_interval(spec, &f0)?;
    let horizon = spec.require_horizon()?;
    let times = time_grid(spec, horizon);
    let modes = spec.modes.unwrap_or(512);
    let heat: Vec<Profile<f64>> =
        times.iter().map(|&t| heat_dirichlet(&f0, t, modes).map(|h| h.profile)).collect::<Result<_>>()?;
    let tol = spec.tolerance_or(0.1);
    let fraction = spec.fraction_or(0.95);
    let mut table = ResultTable::standard(&spec.name);
    let mut means = Vec::new();
    for &l in spec.require_l()? {
        let eta0 = discretize(&f0, l, walled)?;
        let runs: Vec<_> = (0..spec.seed_count() as u64)
            .into_par_iter()
            .map(|k| {
                let seed = spec.seed.wrapping_add(k);
                let cfg = DynamicsConfig::new(l, PinningParameter::Finite(lambda), walled, horizon, seed)
                    .with_snapshots(times.clone());
                let rec = simulate(&cfg, &eta0)?;
                let mut rows = Vec::with_capacity(times.len());
                for (snap, target) in rec.snapshots.iter().zip(&heat) {
                    let d = sup_distance(&rescale::<f64>(&snap.path), target)?;
                    rows.push((snap.t, d, &snap.path));
                }
                let rows: Vec<_> = rows
                    .into_iter()
                    .map(|(t, d, p)| (t, d, observables::area(p), observables::fourier(p), observables::contacts(p)))
                    .collect();
                Ok((seed, rows))
            })
            .collect::<Result<_>>()?;
        let l2 = (l * l) as f64;
        let mut worst = Vec::with_capacity(runs.len());
        for (seed, rows) in &runs {
            let mut m = 0.0f64;
            for &(t, d, a, phi, c) in rows {
                m = m.max(d);
                table.push(l, *seed, t, &[("sup_distance", d), ("area", a / l2), ("fourier", phi / l2), ("contacts", c as f64)]);
            }
            worst.push(m);
        }
        let s = table.summarize(format!("max_sup_distance[L={l}]"), &worst);
        means.push((l, s.mean));
        table.note(format!("fraction_within_{tol}[L={l}]"), fraction_within(&worst, tol));
        if Some(&l) == spec.l.iter().max() {
            let f = fraction_within(&worst, tol);
            table.criterion(
                "sup_distance",
                f >= fraction,
                format!("L = {l}: {:.0}% of seeds within {tol} (need {:.0}%)", 100.0 * f, 100.0 * fraction),
            );
        }
    }
    if means.len() > 1 {
        let mut sorted = means.clone();
        sorted.sort_by_key(|m| m.0);
        let decreasing = sorted.windows(2).all(|w| w[1].1 < w[0].1);
        let detail = sorted.iter().map(|(l, m)| format!("L={l}: {m:.4}")).collect::<Vec<_>>().join(", ");
        table.criterion("decreasing_in_l", decreasing, format!("mean max distance {detail}"));
    }
    Ok(table)
}

/// Sup distance between a rescaled path and a Stefan state extended by
/// zero, over the nodes of both and the free boundaries.
pub fn distance_to_state(path: &LatticePath, state: Option<&StefanState<f64>>) -> f64 {
    let p = rescale::<f64>(path);
    let f = |x: f64| state.map_or(0.0, |s| state_value(s, x));
    let mut d = p.nodes().fold(0.0f64, |m, (x, v)| m.max((v - f(x)).abs()));
    if let Some(s) = state {
        for (x, v) in s.f.nodes().chain([(s.l, 0.0), (s.r, 0.0)]) {
            if (-1.0..=1.0).contains(&x) {
                d = d.max((p.eval(x) - v).abs());
            }
        }
    }
    d
}

/// Endpoints of the longest excursion, rescaled to `[-1, 1]`.
pub fn contact_fronts(path: &LatticePath) -> Option<(f64, f64)> {
    let l = path.half_length() as f64;
    excursions(path)
        .into_iter()
        .max_by_key(|e| (e.length(), -e.left))
        .filter(|e| e.length() > 2)
        .map(|e| (e.left as f64 / l, e.right as f64 / l))
}

fn stefan_reference(spec: &ExperimentSpec, f0: &Profile<f64>, times: &[f64]) -> Result<StefanRun<f64>> {
    let mut cfg = StefanConfig::new(spec.dx.unwrap_or(1.0 / 512.0), spec.dt.unwrap_or(1e-3), times[times.len() - 1]);
    cfg.record_times = times.to_vec();
    stefan_front_tracking(f0, &cfg)
}

/// `λ = ∞`: distance to the Stefan solution, termination time, fronts.
pub fn run_sticky_limit(spec: &ExperimentSpec) -> Result<ResultTable> {
    if !spec.lambda_or(PinningParameter::Infinite).is_infinite() {
        return Err(Error::Config(format!("{}: sticky limit needs λ = inf", spec.name)));
    }
    let f0 = spec.initial_profile()?;
    on_unit_interval(spec, &f0)?;
    let a0 = f0.integral();
    let horizon = spec.require_horizon()?;
    if horizon < a0 {
        return Err(Error::Config(format!("{}: horizon {horizon} below the initial area {a0}", spec.name)));
    }
    let times = time_grid(spec, horizon);
    let stefan = stefan_reference(spec, &f0, &times)?;
    let end = stefan.series.last().map_or(0.0, |p| p.t);
    let states: Vec<Option<&StefanState<f64>>> =
        times.iter().map(|&t| if t <= end { stefan.state_at(t) } else { None }).collect();
    let expected = tstar(&f0);
    let tol = spec.tolerance_or(0.1);
    let fraction = spec.fraction_or(0.95);
    let mut table = ResultTable::new(&spec.name, &["sup_distance", "area", "contacts", "termination", "front_distance"]);
    for &l in spec.require_l()? {
        let eta0 = discretize(&f0, l, true)?;
        let runs: Vec<_> = (0..spec.seed_count() as u64)
            .into_par_iter()
            .map(|k| {
                let seed = spec.seed.wrapping_add(k);
                let cfg = DynamicsConfig::new(l, PinningParameter::Infinite, true, horizon, seed)
                    .with_snapshots(times.clone());
                let rec = simulate(&cfg, &eta0)?;
                let rows: Vec<_> = rec
                    .snapshots
                    .iter()
                    .zip(&states)
                    .map(|(snap, st)| {
                        let d = distance_to_state(&snap.path, *st);
                        let front = st.zip(contact_fronts(&snap.path)).map(|(s, (a, b))| (a - s.l).abs().max((b - s.r).abs()));
                        (snap.t, d, observables::area(&snap.path), observables::contacts(&snap.path), front)
                    })
                    .collect();
                Ok((seed, rows, rec.termination_rescaled()))
            })
            .collect::<Result<_>>()?;
        let l2 = (l * l) as f64;
        let (mut worst, mut terms, mut fronts) = (Vec::new(), Vec::new(), Vec::new());
        let mut flagged = 0;
        for (seed, rows, term) in &runs {
            let mut m = 0.0f64;
            let mut fm = 0.0f64;
            for &(t, d, a, c, front) in rows {
                m = m.max(d);
                let mut vals = vec![("sup_distance", d), ("area", a / l2), ("contacts", c as f64)];
                if let Some(fd) = front {
                    fm = fm.max(fd);
                    vals.push(("front_distance", fd));
                }
                table.push(l, *seed, t, &vals);
            }
            match term {
                Some(tt) => {
                    terms.push(*tt);
                    table.push(l, *seed, horizon, &[("termination", *tt)]);
                }
                None => flagged += 1,
            }
            worst.push(m);
            fronts.push(fm);
        }
        table.summarize(format!("max_sup_distance[L={l}]"), &worst);
        let ts = table.summarize(format!("termination[L={l}]"), &terms);
        table.summarize(format!("max_front_distance[L={l}]"), &fronts);
        table.note(format!("expected_termination[L={l}]"), expected);
        table.note(format!("unterminated[L={l}]"), flagged as f64);
        if Some(&l) == spec.l.iter().max() {
            let f = fraction_within(&worst, tol);
            table.criterion(
                "sup_distance",
                f >= fraction,
                format!("L = {l}: {:.0}% of seeds within {tol} (need {:.0}%)", 100.0 * f, 100.0 * fraction),
            );
            let rel = (ts.mean - expected).abs() / expected;
            table.criterion(
                "termination_time",
                flagged == 0 && rel <= 0.1,
                format!("mean 𝒯/L² = {:.4} vs a(f0)/2 = {expected:.4} ({:.1}%), {flagged} unterminated", ts.mean, 100.0 * rel),
            );
            if spec.checks.iter().any(|c| c == "fronts") {
                let f = fraction_within(&fronts, tol);
                table.criterion("fronts", f >= fraction, format!("{:.0}% of seeds with fronts within {tol}", 100.0 * f));
            }
        }
    }
    table.artifact(format!("{}.stefan.csv", spec.name), stefan.series_csv());
    Ok(table)
}

/// `∫ f0(x) cos(πx/2) dx` by the trapezoid rule on the grid of `f0`.
pub fn fourier_quadrature(f0: &Profile<f64>) -> f64 {
    f0.map(|x, v| v * (std::f64::consts::FRAC_PI_2 * x).cos()).integral()
}

/// `1 < λ < 2`: ensemble mean of `Φ/L²` against `e^{-π²t/4} ∫ f0 cos(πx/2)`.
pub fn run_fourier_decay(spec: &ExperimentSpec) -> Result<ResultTable> {
    let lambda = finite_lambda(spec, 1.5, (1.0, 2.0), true)?;
    let f0 = spec.initial_profile()?;
    on_unit_interval(spec, &f0)?;
    let horizon = spec.require_horizon()?;
    let times = time_grid(spec, horizon);
    let q = fourier_quadrature(&f0);
    let tol = spec.tolerance_or(0.1);
    let mut table = ResultTable::standard(&spec.name);
    let mut all_ok = true;
    let mut detail = Vec::new();
    for &l in spec.require_l()? {
        let eta0 = discretize(&f0, l, true)?;
        let l2 = (l * l) as f64;
        let runs: Vec<_> = (0..spec.seed_count() as u64)
            .into_par_iter()
            .map(|k| {
                let seed = spec.seed.wrapping_add(k);
                let cfg = DynamicsConfig::new(l, PinningParameter::Finite(lambda), true, horizon, seed)
                    .with_snapshots(times.clone());
                Ok((seed, simulate(&cfg, &eta0)?))
            })
            .collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for (i, &t) in times.iter().enumerate() {
            let mut phis = Vec::with_capacity(runs.len());
            for (seed, rec) in &runs {
                let p = &rec.snapshots[i].path;
                let phi = observables::fourier(p) / l2;
                phis.push(phi);
                table.push(l, *seed, t, &[("fourier", phi), ("area", observables::area(p) / l2), ("contacts", observables::contacts(p) as f64)]);
            }
            let s = table.summarize(format!("mean_fourier[L={l},t={t}]"), &phis);
            let target = (-std::f64::consts::PI.powi(2) * t / 4.0).exp() * q;
            let rel = (s.mean - target).abs() / target.abs();
            if t > 0.0 {
                worst = worst.max(rel);
            } else {
                let ok = (s.mean - q).abs() <= 2.0 / l as f64;
                table.criterion(format!("initial_fourier[L={l}]"), ok, format!("|Φ(η0)/L² - ∫f0 cos| = {:.2e} (need ≤ 2/L)", (s.mean - q).abs()));
            }
        }
        all_ok &= worst <= tol;
        detail.push(format!("L = {l}: worst relative deviation {:.2}%", 100.0 * worst));
        if spec.checks.iter().any(|c| c == "microscopic") {
            // |Φ(η_t) - e^{-κ_L t} Φ(η0)| ≤ L^{7/4} at t = L²
            let i = times.iter().position(|&t| (t - 1.0).abs() < 1e-12).ok_or_else(|| {
                Error::Config(format!("{}: the microscopic check needs t = 1 on the grid", spec.name))
            })?;
            let decay = (-observables::kappa(l) * l2).exp();
            let phi0 = observables::fourier(&eta0);
            let devs: Vec<f64> = runs
                .iter()
                .map(|(_, rec)| (observables::fourier(&rec.snapshots[i].path) - decay * phi0).abs())
                .collect();
            let bound = (l as f64).powf(1.75);
            let f = fraction_within(&devs, bound);
            table.criterion(
                format!("microscopic[L={l}]"),
                f >= spec.fraction_or(0.95),
                format!("{:.0}% of seeds within L^(7/4) = {bound:.1}", 100.0 * f),
            );
        }
    }
    table.criterion("fourier_decay", all_ok, format!("{} (need ≤ {:.0}%)", detail.join("; "), 100.0 * tol));
    Ok(table)
}

/// `λ = ∞`: rescaled termination times against `a(f0)/2`.
pub fn run_termination_time(spec: &ExperimentSpec) -> Result<ResultTable> {
    let f0 = spec.initial_profile()?;
    on_unit_interval(spec, &f0)?;
    let horizon = spec.require_horizon()?;
    let expected = tstar(&f0);
    let tol = spec.tolerance_or(0.1);
    let mut table = ResultTable::standard(&spec.name);
    for &l in spec.require_l()? {
        let eta0 = discretize(&f0, l, true)?;
        let cfg = DynamicsConfig::new(l, PinningParameter::Infinite, true, horizon, spec.seed);
        let samples = termination_time_ensemble(&cfg, &eta0, spec.seed_count())?;
        let mut times = Vec::new();
        for s in &samples {
            if let Some(t) = s.time {
                times.push(t);
                table.push(l, s.seed, t, &[("termination", t)]);
            }
        }
        let flagged = samples.iter().filter(|s| s.flagged()).count();
        let st = table.summarize(format!("termination[L={l}]"), &times);
        table.note(format!("unterminated[L={l}]"), flagged as f64);
        let rel = (st.mean - expected).abs() / expected.max(f64::MIN_POSITIVE);
        let ok = flagged == 0 && (if expected == 0.0 { st.mean == 0.0 } else { rel <= tol });
        table.criterion(
            format!("termination[L={l}]"),
            ok,
            format!("mean {:.4} vs a(f0)/2 = {expected:.4}, {flagged} unterminated", st.mean),
        );
    }
    Ok(table)
}

/// Midpoint pinning event of [`PartitionTable::midpoint_pin_probability`]:
/// `η(±1) = 1` for even `L`, `η(±1) = 0` for odd `L`.
pub fn midpoint_pinned(heights: &[i32], l: usize) -> bool {
    let target = if l.is_multiple_of(2) { 1 } else { 0 };
    heights[l - 1] == target && heights[l + 1] == target
}

/// Least-squares slope of `log y` against `log x` over the positive points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|p| (p.0.ln(), p.1.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `1 < λ < 2`, start from `η_min`: frequency of the midpoint pinning event
/// at microscopic times, with its log-log slope and the equilibrium value.
pub fn run_contact_decay(spec: &ExperimentSpec) -> Result<ResultTable> {
    let lambda = finite_lambda(spec, 1.5, (1.0, 2.0), true)?;
    let l = *spec.require_l()?.first().expect("nonempty");
    if l < 2 {
        return Err(Error::Config(format!("{}: need L ≥ 2", spec.name)));
    }
    let times: Vec<f64> = if spec.times.is_empty() {
        (0..=20).map(|k| 100.0 * 10f64.powf(k as f64 / 10.0)).collect()
    } else {
        let mut t = spec.times.clone();
        t.sort_by(f64::total_cmp);
        t
    };
    let n = spec.seed_count();
    let site = spec.site;
    if let Some(x) = site {
        if x.unsigned_abs() as usize >= l {
            return Err(Error::Config(format!("{}: site {x} not interior", spec.name)));
        }
    }
    let eta0 = eta_min(l);
    let counts = (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let mut sim = Simulator::new(&eta0, PinningParameter::Finite(lambda), spec.seed.wrapping_add(k))
                .expect("η_min is a valid walled start");
            let mut mid = vec![0u64; times.len()];
            let mut side = vec![0u64; times.len()];
            for (i, &t) in times.iter().enumerate() {
                sim.advance_to(t);
                let h = sim.heights();
                mid[i] += midpoint_pinned(h, l) as u64;
                if let Some(x) = site {
                    side[i] += (h[(x + l as i64) as usize] == 0) as u64;
                }
            }
            (mid, side)
        })
        .reduce(
            || (vec![0; times.len()], vec![0; times.len()]),
            |mut a, b| {
                for i in 0..a.0.len() {
                    a.0[i] += b.0[i];
                    a.1[i] += b.1[i];
                }
                a
            },
        );
    let mut table = ResultTable::new(&spec.name, &["pinned_frequency", "pinned_stderr", "site_frequency"]);
    let nf = n as f64;
    let mut points = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        let p = counts.0[i] as f64 / nf;
        let mut vals = vec![("pinned_frequency", p), ("pinned_stderr", (p * (1.0 - p) / nf).sqrt())];
        if site.is_some() {
            vals.push(("site_frequency", counts.1[i] as f64 / nf));
        }
        table.push(l, spec.seed, t, &vals);
        points.push((t, p));
    }
    let min_hits = counts.0.iter().copied().min().unwrap_or(0);
    table.note("min_hits", min_hits as f64);
    let slope = loglog_slope(&points);
    let [lo, hi] = spec.slope_range.unwrap_or([-1.8, -1.2]);
    match slope {
        Some(s) if min_hits >= 10 => {
            table.note("slope", s);
            table.criterion("slope", (lo..=hi).contains(&s), format!("fitted slope {s:.3}, need [{lo}, {hi}]"));
        }
        _ => {
            table.criterion("slope", false, format!("insufficient sampling: {min_hits} hits at the sparsest time"));
        }
    }
    let eq = PartitionTable::new(l, lambda)?.midpoint_pin_probability();
    let late = points[points.len() - 1].1;
    let sigma = (eq * (1.0 - eq) / nf).sqrt();
    table.note("equilibrium_probability", eq);
    table.note("late_frequency", late);
    table.criterion(
        "equilibrium",
        (late - eq).abs() <= 3.0 * sigma,
        format!("late frequency {late:.4e} vs equilibrium {eq:.4e} (3σ = {:.2e})", 3.0 * sigma),
    );
    if let Some(x) = site {
        let d = (l as i64 - x.abs()) as f64;
        let worst = counts.1.iter().map(|&c| c as f64 / nf).fold(0.0f64, f64::max);
        table.note(format!("site_frequency_times_d^1.5[x={x}]"), worst * d.powf(1.5));
    }
    Ok(table)
}

/// One trajectory; the series and snapshots go out as artifacts.
pub fn run_simulate(spec: &ExperimentSpec) -> Result<ResultTable> {
    let l = *spec.require_l()?.first().expect("nonempty");
    let lambda = spec.lambda_or(PinningParameter::Finite(1.0));
    let walled = spec.walled.unwrap_or(true);
    let horizon = spec.require_horizon()?;
    let eta0 = match spec.profile.as_deref() {
        Some("eta-min") => eta_min(l),
        _ => discretize(&spec.initial_profile()?, l, walled)?,
    };
    let mut cfg = DynamicsConfig::new(l, lambda, walled, horizon, spec.seed).with_snapshots(time_grid(spec, horizon));
    if let Some(dt) = spec.dt {
        cfg = cfg.with_sampling(dt);
    }
    let rec = simulate(&cfg, &eta0)?;
    let mut table = ResultTable::standard(&spec.name);
    let l2 = (l * l) as f64;
    for s in &rec.series {
        table.push(l, spec.seed, s.t, &[("area", s.area), ("fourier", s.fourier), ("contacts", s.contacts as f64)]);
    }
    if let Some(t) = rec.termination_time {
        table.push(l, spec.seed, horizon, &[("termination", t / l2)]);
    }
    table.note("rings", rec.rings as f64);
    table.note("flips", rec.flips as f64);
    table.artifact(format!("{}.series.csv", spec.name), rec.series_csv());
    table.artifact(format!("{}.snapshots.txt", spec.name), rec.snapshots_text());
    Ok(table)
}

fn random_walled_path(l: usize, rng: &mut ChaCha8Rng) -> Result<LatticePath> {
    let lambda = rng.random_range(0.2..4.0);
    Ok(PartitionTable::new(l, lambda)?.sample(rng))
}

fn random_free_path(l: usize, rng: &mut ChaCha8Rng) -> Result<LatticePath> {
    let mut steps: Vec<i32> = (0..2 * l).map(|i| if i < l { 1 } else { -1 }).collect();
    for i in (1..steps.len()).rev() {
        let j = rng.random_range(0..=i);
        steps.swap(i, j);
    }
    let mut h = vec![0];
    for s in steps {
        h.push(h[h.len() - 1] + s);
    }
    LatticePath::new(l, h, false)
}

fn pointwise(a: &LatticePath, b: &LatticePath, f: fn(i32, i32) -> i32) -> Result<LatticePath> {
    let h = a.heights().iter().zip(b.heights()).map(|(&x, &y)| f(x, y)).collect();
    LatticePath::new(a.half_length(), h, a.walled())
}

fn random_lambda(rng: &mut ChaCha8Rng) -> PinningParameter {
    if rng.random_bool(0.2) {
        PinningParameter::Infinite
    } else {
        PinningParameter::Finite(rng.random_range(0.0..6.0))
    }
}

/// Random ordered pairs run on shared randomness; counts order violations
/// at the snapshot times.
///
/// Pair `i` cycles through three set-ups: same `λ` with ordered starts, a
/// larger `λ` on the lower start, and walled `λ = 1` over the free dynamics
/// from the same start.
pub fn run_coupling(spec: &ExperimentSpec) -> Result<ResultTable> {
    let sizes = if spec.l.is_empty() { vec![8, 16, 32] } else { spec.l.clone() };
    let pairs = spec.samples.unwrap_or(100);
    let horizon = spec.horizon.unwrap_or(0.5);
    let times = time_grid(spec, horizon);
    let results: Vec<(u64, usize, usize, usize)> = (0..pairs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = spec.seed.wrapping_add(i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            let l = sizes[rng.random_range(0..sizes.len())];
            let (low, high) = match i % 3 {
                0 => {
                    let lam = random_lambda(&mut rng);
                    let (a, b) = (random_walled_path(l, &mut rng)?, random_walled_path(l, &mut rng)?);
                    (
                        CoupledRun { eta0: pointwise(&a, &b, i32::min)?, lambda: lam },
                        CoupledRun { eta0: pointwise(&a, &b, i32::max)?, lambda: lam },
                    )
                }
                1 => {
                    let (mut lo, mut hi) = (random_lambda(&mut rng), random_lambda(&mut rng));
                    if lo.as_f64() > hi.as_f64() {
                        std::mem::swap(&mut lo, &mut hi);
                    }
                    let (a, b) = (random_walled_path(l, &mut rng)?, random_walled_path(l, &mut rng)?);
                    (
                        CoupledRun { eta0: pointwise(&a, &b, i32::min)?, lambda: hi },
                        CoupledRun { eta0: pointwise(&a, &b, i32::max)?, lambda: lo },
                    )
                }
                _ => {
                    let a = random_walled_path(l, &mut rng)?;
                    let b = random_free_path(l, &mut rng)?;
                    let free = pointwise(&a.with_wall(false)?, &b, i32::min)?;
                    (
                        CoupledRun { eta0: free, lambda: PinningParameter::Finite(1.0) },
                        CoupledRun { eta0: a, lambda: PinningParameter::Finite(1.0) },
                    )
                }
            };
            let cfg = DynamicsConfig::new(l, PinningParameter::Finite(1.0), true, horizon, seed)
                .with_snapshots(times.clone());
            let recs = coupled_simulate(&cfg, &[low, high])?;
            let violations = recs[0]
                .snapshots
                .iter()
                .zip(&recs[1].snapshots)
                .filter(|(a, b)| !b.path.dominates(&a.path))
                .count();
            Ok((seed, l, (i % 3) as usize, violations))
        })
        .collect::<Result<_>>()?;
    let mut table = ResultTable::new(&spec.name, &["setup", "violations"]);
    let mut total = 0;
    for &(seed, l, setup, v) in &results {
        total += v;
        table.push(l, seed, horizon, &[("setup", setup as f64), ("violations", v as f64)]);
    }
    table.criterion(
        "order_preserved",
        total == 0,
        format!("{total} order violations over {pairs} pairs and {} snapshot times", times.len()),
    );
    Ok(table)
}
