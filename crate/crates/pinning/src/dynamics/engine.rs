use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{corner_move, PinningParameter};
use crate::error::{Error, Result};
use crate::lattice::LatticePath;
use crate::observables;

/// Parameters of one run. Times are rescaled: microscopic time is `t·L²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub l: usize,
    pub lambda: PinningParameter,
    pub walled: bool,
    pub horizon: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    pub seed: u64,
    /// Spacing of the observable series, in rescaled time. `None` records
    /// the series at snapshot times only.
    #[serde(default)]
    pub sample_interval: Option<f64>,
    /// Maintain the area drift and bracket integrals needed for the
    /// martingale residual.
    #[serde(default)]
    pub track_generator: bool,
}

impl DynamicsConfig {
    pub fn new(l: usize, lambda: PinningParameter, walled: bool, horizon: f64, seed: u64) -> Self {
        Self {
            l,
            lambda,
            walled,
            horizon,
            snapshot_times: Vec::new(),
            seed,
            sample_interval: None,
            track_generator: false,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn with_sampling(mut self, interval: f64) -> Self {
        self.sample_interval = Some(interval);
        self
    }

    pub fn tracking_generator(mut self) -> Self {
        self.track_generator = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::InvalidParameter("L must be positive".into()));
        }
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidParameter(format!("horizon {} must be finite and ≥ 0", self.horizon)));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("snapshot times must be sorted".into()));
        }
        if let Some(&t) = self.snapshot_times.iter().find(|&&t| !(0.0..=self.horizon).contains(&t)) {
            return Err(Error::InvalidParameter(format!("snapshot time {t} outside [0, {}]", self.horizon)));
        }
        if let Some(dt) = self.sample_interval {
            if !(dt > 0.0) {
                return Err(Error::InvalidParameter("sample interval must be positive".into()));
            }
        }
        if self.lambda.is_infinite() && !self.walled {
            return Err(Error::InvalidParameter("λ = ∞ needs a wall".into()));
        }
        Ok(())
    }

    fn micro(&self, t: f64) -> f64 {
        t * (self.l * self.l) as f64
    }

    /// Rescaled sampling times: snapshots, the regular grid, and the horizon.
    fn sample_times(&self) -> Vec<f64> {
        let mut ts = self.snapshot_times.clone();
        ts.push(0.0);
        ts.push(self.horizon);
        if let Some(dt) = self.sample_interval {
            let n = (self.horizon / dt).floor() as usize;
            ts.extend((1..=n).map(|k| k as f64 * dt));
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        ts
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub path: LatticePath,
}

/// One row of the observable series. `area` and `fourier` are divided by
/// `L²`; the integrals are in microscopic units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSample {
    pub t: f64,
    pub area: f64,
    pub fourier: f64,
    pub contacts: usize,
    pub min_height: i32,
    pub area_raw: f64,
    pub drift_integral: f64,
    pub bracket_integral: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub config: DynamicsConfig,
    pub initial: LatticePath,
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<ObservableSample>,
    /// First hitting time of `η_min` in microscopic units (`λ = ∞` only).
    pub termination_time: Option<f64>,
    pub rings: u64,
    pub flips: u64,
}

impl TrajectoryRecord {
    pub fn termination_rescaled(&self) -> Option<f64> {
        self.termination_time.map(|t| t / (self.config.l * self.config.l) as f64)
    }

    pub fn snapshot_at(&self, t: f64) -> Option<&LatticePath> {
        self.snapshots
            .iter()
            .find(|s| (s.t - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .map(|s| &s.path)
    }

    /// Observable series as CSV.
    pub fn series_csv(&self) -> String {
        let mut out = String::from("t_rescaled,area_rescaled,fourier_rescaled,contacts,min_height\n");
        for s in &self.series {
            let _ = writeln!(out, "{},{},{},{},{}", s.t, s.area, s.fourier, s.contacts, s.min_height);
        }
        out
    }

    /// Snapshots, one per line: rescaled time, then the path heights.
    pub fn snapshots_text(&self) -> String {
        let mut out = String::new();
        for s in &self.snapshots {
            let _ = writeln!(out, "{} {}", s.t, s.path.to_line());
        }
        out
    }
}

/// Event-driven simulator.
///
/// Each interior site carries a rate-2 clock; these are superposed into a
/// single clock of rate `2(2L-1)` with a uniform site choice. On a ring at a
/// site whose neighbours agree at height `v`, the new height is `v-1` with
/// probability `p` and `v+1` otherwise, where `p = λ/(1+λ)` for `v = 1`
/// above a wall and `1/2` in every other case. Every ring consumes one
/// exponential, one site index and one uniform whatever the state, so runs
/// started from the same seed see the same clock marks; that is the
/// graphical construction behind all couplings.
#[derive(Clone, Debug)]
pub struct Simulator {
    l: usize,
    walled: bool,
    lambda: PinningParameter,
    wall_p: f64,
    h: Vec<i32>,
    rng: ChaCha8Rng,
    n_interior: u32,
    total_rate: f64,
    now: f64,
    next_ring: f64,
    contacts: usize,
    interior_m: i64,
    track: bool,
    drift: f64,
    bracket: f64,
    drift_int: f64,
    bracket_int: f64,
    last_change: f64,
    rings: u64,
    flips: u64,
    absorbed_at: Option<f64>,
}

impl Simulator {
    pub fn new(eta0: &LatticePath, lambda: PinningParameter, seed: u64) -> Result<Self> {
        let walled = eta0.walled();
        if lambda.is_infinite() && !walled {
            return Err(Error::InvalidParameter("λ = ∞ needs a wall".into()));
        }
        let l = eta0.half_length();
        let h = eta0.heights().to_vec();
        let n_interior = (2 * l - 1) as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let total_rate = 2.0 * n_interior as f64;
        let first: f64 = Exp1.sample(&mut rng);
        let contacts = h[1..2 * l].iter().filter(|&&v| v == 0).count();
        let interior_m = h[1..2 * l].iter().map(|&v| v.max(1) as i64).sum();
        let mut sim = Self {
            l,
            walled,
            lambda,
            wall_p: if walled { lambda.wall_probability() } else { 0.5 },
            h,
            rng,
            n_interior,
            total_rate,
            now: 0.0,
            next_ring: first / total_rate,
            contacts,
            interior_m,
            track: false,
            drift: 0.0,
            bracket: 0.0,
            drift_int: 0.0,
            bracket_int: 0.0,
            last_change: 0.0,
            rings: 0,
            flips: 0,
            absorbed_at: None,
        };
        if sim.is_absorbing() {
            sim.absorbed_at = Some(0.0);
        }
        Ok(sim)
    }

    /// Maintain `ℒA` and `F` along the run and integrate them exactly.
    pub fn track_generator(&mut self) {
        self.track = true;
        let (d, f) = observables::generator_totals(&self.h, self.walled, &self.lambda);
        self.drift = d;
        self.bracket = f;
    }

    fn is_absorbing(&self) -> bool {
        self.lambda.is_infinite() && self.contacts + 1 == self.l
    }

    /// Microscopic time of the last `advance_to` target.
    pub fn time(&self) -> f64 {
        self.now
    }

    pub fn heights(&self) -> &[i32] {
        &self.h
    }

    pub fn path(&self) -> LatticePath {
        LatticePath::from_parts_unchecked(self.l, self.h.clone(), self.walled)
    }

    pub fn contacts(&self) -> usize {
        self.contacts
    }

    /// `A(η)` of the current state.
    pub fn area(&self) -> f64 {
        self.interior_m as f64 + 1.0
    }

    pub fn drift_integral(&self) -> f64 {
        self.drift_int
    }

    pub fn bracket_integral(&self) -> f64 {
        self.bracket_int
    }

    pub fn absorbed_at(&self) -> Option<f64> {
        self.absorbed_at
    }

    pub fn rings(&self) -> u64 {
        self.rings
    }

    pub fn flips(&self) -> u64 {
        self.flips
    }

    /// Runs every clock ring with time `≤ t` (microscopic). Stops early in
    /// the absorbing state.
    pub fn advance_to(&mut self, t: f64) {
        while self.absorbed_at.is_none() && self.next_ring <= t {
            let at = self.next_ring;
            self.ring(at);
            let e: f64 = Exp1.sample(&mut self.rng);
            self.next_ring = at + e / self.total_rate;
        }
        if t > self.now {
            if self.track {
                self.flush(t);
            }
            self.now = t;
        }
    }

    fn flush(&mut self, t: f64) {
        let dt = t - self.last_change;
        if dt > 0.0 {
            self.drift_int += self.drift * dt;
            self.bracket_int += self.bracket * dt;
            self.last_change = t;
        }
    }

    #[inline]
    fn ring(&mut self, at: f64) {
        self.rings += 1;
        let i = 1 + self.rng.random_range(0..self.n_interior) as usize;
        let u: f64 = self.rng.random();
        let (a, b) = (self.h[i - 1], self.h[i + 1]);
        if a != b || (self.walled && a == 0) {
            return;
        }
        let p = if self.walled && a == 1 { self.wall_p } else { 0.5 };
        let new = if u < p { a - 1 } else { a + 1 };
        let old = self.h[i];
        if new == old {
            return;
        }
        self.now = at;
        if self.track {
            self.flush(at);
            self.retract(i);
        }
        self.h[i] = new;
        self.flips += 1;
        self.interior_m += (new.max(1) - old.max(1)) as i64;
        if old == 0 {
            self.contacts -= 1;
        } else if new == 0 {
            self.contacts += 1;
        }
        if self.track {
            self.restore(i);
        }
        debug_assert!(corner_move(a, old, b, self.walled) == Some(new));
        if self.is_absorbing() {
            self.absorbed_at = Some(at);
        }
    }

    fn site_terms(&self, j: usize) -> (f64, f64) {
        if j == 0 || j == 2 * self.l {
            return (0.0, 0.0);
        }
        observables::site_generator(self.h[j - 1], self.h[j], self.h[j + 1], self.walled, &self.lambda)
    }

    fn retract(&mut self, i: usize) {
        for j in i - 1..=i + 1 {
            let (d, f) = self.site_terms(j);
            self.drift -= d;
            self.bracket -= f;
        }
    }

    fn restore(&mut self, i: usize) {
        for j in i - 1..=i + 1 {
            let (d, f) = self.site_terms(j);
            self.drift += d;
            self.bracket += f;
        }
    }

    fn sample(&self, t: f64) -> ObservableSample {
        let l2 = (self.l * self.l) as f64;
        let area_raw = self.area();
        ObservableSample {
            t,
            area: area_raw / l2,
            fourier: observables::fourier_of(&self.h) / l2,
            contacts: self.contacts,
            min_height: *self.h[1..2 * self.l].iter().min().unwrap_or(&0),
            area_raw,
            drift_integral: self.drift_int,
            bracket_integral: self.bracket_int,
        }
    }
}

fn prepare(config: &DynamicsConfig, eta0: &LatticePath) -> Result<LatticePath> {
    config.validate()?;
    if eta0.half_length() != config.l {
        return Err(Error::MismatchedLength(config.l, eta0.half_length()));
    }
    eta0.with_wall(config.walled)
}

fn run(config: &DynamicsConfig, eta0: LatticePath, lambda: PinningParameter) -> Result<TrajectoryRecord> {
    let mut sim = Simulator::new(&eta0, lambda, config.seed)?;
    if config.track_generator {
        sim.track_generator();
    }
    let mut snapshots = Vec::with_capacity(config.snapshot_times.len());
    let mut series = Vec::new();
    let mut snaps = config.snapshot_times.iter().peekable();
    for t in config.sample_times() {
        sim.advance_to(config.micro(t));
        series.push(sim.sample(t));
        while let Some(&&ts) = snaps.peek() {
            if ts > t + 1e-12 * (1.0 + t) {
                break;
            }
            snapshots.push(Snapshot { t: ts, path: sim.path() });
            snaps.next();
        }
    }
    Ok(TrajectoryRecord {
        config: DynamicsConfig { lambda, walled: eta0.walled(), ..config.clone() },
        initial: eta0,
        snapshots,
        series,
        termination_time: sim.absorbed_at(),
        rings: sim.rings(),
        flips: sim.flips(),
    })
}

/// One trajectory of the dynamics started from `eta0`.
pub fn simulate(config: &DynamicsConfig, eta0: &LatticePath) -> Result<TrajectoryRecord> {
    let eta0 = prepare(config, eta0)?;
    run(config, eta0, config.lambda)
}

/// One member of a coupled family: its own start and `λ`. The wall is taken
/// from `eta0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledRun {
    pub eta0: LatticePath,
    pub lambda: PinningParameter,
}

/// Runs every member with the clock marks of `config.seed`.
pub fn coupled_simulate(config: &DynamicsConfig, runs: &[CoupledRun]) -> Result<Vec<TrajectoryRecord>> {
    config.validate()?;
    runs.iter()
        .map(|r| {
            if r.eta0.half_length() != config.l {
                return Err(Error::MismatchedLength(config.l, r.eta0.half_length()));
            }
            let cfg = DynamicsConfig { walled: r.eta0.walled(), lambda: r.lambda, ..config.clone() };
            cfg.validate()?;
            run(&cfg, r.eta0.clone(), r.lambda)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminationSample {
    pub seed: u64,
    /// `𝒯/L²`; `None` when the horizon ran out first.
    pub time: Option<f64>,
}

impl TerminationSample {
    pub fn flagged(&self) -> bool {
        self.time.is_none()
    }
}

/// Rescaled termination times for seeds `config.seed, config.seed + 1, …`.
pub fn termination_time_ensemble(
    config: &DynamicsConfig,
    eta0: &LatticePath,
    n_seeds: usize,
) -> Result<Vec<TerminationSample>> {
    if !config.lambda.is_infinite() || !config.walled {
        return Err(Error::InvalidParameter("termination times need λ = ∞ with a wall".into()));
    }
    let eta0 = prepare(config, eta0)?;
    let l2 = (config.l * config.l) as f64;
    let a0 = observables::area(&eta0) / l2;
    if config.horizon < a0 {
        return Err(Error::InvalidParameter(format!(
            "horizon {} is below the rescaled initial area {a0}",
            config.horizon
        )));
    }
    let horizon = config.micro(config.horizon);
    Ok((0..n_seeds as u64)
        .into_par_iter()
        .map(|k| {
            let seed = config.seed.wrapping_add(k);
            let mut sim = Simulator::new(&eta0, PinningParameter::Infinite, seed)
                .expect("walled λ = ∞ start was validated");
            sim.advance_to(horizon);
            TerminationSample { seed, time: sim.absorbed_at().map(|t| t / l2) }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{eta_min, LatticePath};

    fn tent(l: usize) -> LatticePath {
        let h = (0..=2 * l).map(|i| (l as i32) - (i as i32 - l as i32).abs()).collect();
        LatticePath::new(l, h, true).unwrap()
    }

    #[test]
    fn eta_min_is_absorbing_at_infinite_lambda() {
        let cfg = DynamicsConfig::new(6, PinningParameter::Infinite, true, 1.0, 3)
            .with_snapshots(vec![0.0, 0.5, 1.0]);
        let rec = simulate(&cfg, &eta_min(6)).unwrap();
        assert_eq!(rec.termination_time, Some(0.0));
        assert!(rec.snapshots.iter().all(|s| s.path == eta_min(6)));
        assert_eq!(rec.snapshots.len(), 3);
    }

    #[test]
    fn zero_lambda_never_creates_contacts() {
        let cfg = DynamicsConfig::new(8, PinningParameter::Finite(0.0), true, 2.0, 11).with_sampling(0.01);
        let rec = simulate(&cfg, &tent(8)).unwrap();
        assert!(rec.series.iter().all(|s| s.contacts == 0));
        assert!(rec.flips > 0);
    }

    #[test]
    fn contacts_never_decrease_at_infinite_lambda() {
        let cfg = DynamicsConfig::new(16, PinningParameter::Infinite, true, 1.0, 5).with_sampling(0.002);
        let rec = simulate(&cfg, &tent(16)).unwrap();
        assert!(rec.series.windows(2).all(|w| w[1].contacts >= w[0].contacts));
    }

    #[test]
    fn same_seed_same_trajectory() {
        let cfg = DynamicsConfig::new(10, PinningParameter::Finite(1.5), true, 0.3, 42)
            .with_snapshots(vec![0.1, 0.2, 0.3]);
        let a = simulate(&cfg, &tent(10)).unwrap();
        let b = simulate(&cfg, &tent(10)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn incremental_generator_matches_recomputation() {
        let mut sim = Simulator::new(&tent(12), PinningParameter::Finite(2.5), 9).unwrap();
        sim.track_generator();
        for k in 1..50 {
            sim.advance_to(k as f64 * 3.0);
            let (d, f) = observables::generator_totals(sim.heights(), true, &PinningParameter::Finite(2.5));
            assert!((d - sim.drift).abs() < 1e-9 && (f - sim.bracket).abs() < 1e-9);
            let p = sim.path();
            assert_eq!(observables::area(&p), sim.area());
            assert_eq!(observables::contacts(&p), sim.contacts());
        }
    }

    #[test]
    fn config_guards() {
        let cfg = DynamicsConfig::new(4, PinningParameter::Infinite, true, 0.1, 0);
        assert!(termination_time_ensemble(&cfg, &tent(4), 2).is_err());
        let bad = DynamicsConfig::new(4, PinningParameter::Finite(1.0), true, 1.0, 0).with_snapshots(vec![2.0]);
        assert!(simulate(&bad, &tent(4)).is_err());
        let free = DynamicsConfig::new(4, PinningParameter::Infinite, false, 1.0, 0);
        assert!(free.validate().is_err());
        let cfg = DynamicsConfig::new(5, PinningParameter::Finite(1.0), true, 1.0, 0);
        assert!(matches!(simulate(&cfg, &tent(4)), Err(Error::MismatchedLength(5, 4))));
    }
}
