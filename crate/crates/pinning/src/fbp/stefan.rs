//! Front-tracking solver for the contracting Stefan problem
//!
//! ```text
//! f_t = f_xx on (l, r),  f(l) = f(r) = 0,  f_x(l) = s,  f_x(r) = -s,
//! l' = -f_xx(l)/s,  r' = f_xx(r)/s.
//! ```
//!
//! The domain is mapped to `y ∈ [0, 1]` by `x = l + y (r - l)`. Each step
//! solves for `(l, r)` at the new time level by Newton's method so that the
//! one-sided second-order slopes of the θ-step solution match `±s`; the
//! boundary speeds are then whatever the slope conditions demand.

use std::fmt::Write as _;

use serde::Serialize;

use super::tridiag::{MappedStep, Scratch};
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::scalar::Real;

/// Boundary slope `s ∈ (0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeParameter<T>(T);

impl<T: Real> SlopeParameter<T> {
    pub fn new(s: T) -> Result<Self> {
        if !(s > T::zero() && s <= T::one()) {
            return Err(Error::InvalidParameter(format!("slope {s} outside (0, 1]")));
        }
        Ok(Self(s))
    }

    pub fn unit() -> Self {
        Self(T::one())
    }

    /// `1 - 2/λ`, the equilibrium slope for `λ > 2`.
    pub fn for_lambda(lambda: T) -> Result<Self> {
        if !(lambda > T::lit(2.0)) {
            return Err(Error::InvalidParameter(format!("λ = {lambda} must exceed 2")));
        }
        Self::new(T::one() - T::lit(2.0) / lambda)
    }

    pub fn value(&self) -> T {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TimeScheme {
    /// Crank–Nicolson after two backward-Euler steps.
    CrankNicolson,
    Explicit,
}

#[derive(Clone, Debug)]
pub struct StefanConfig<T: Real> {
    pub slope: SlopeParameter<T>,
    /// Physical grid spacing at `t = 0`.
    pub dx: T,
    /// Time step at `t = 0`; later steps scale with `(r - l)²`.
    pub dt: T,
    pub horizon: T,
    pub scheme: TimeScheme,
    /// Curvature level, relative to the width `r0 - l0`, that counts as
    /// blowup. The test is `‖k‖∞ (r - l) > blowup_factor`, i.e. the
    /// threshold `blowup_factor / (r0 - l0)` at the start.
    pub blowup_factor: T,
    /// Blowup is also declared once `‖k‖∞ h` exceeds this, `h` the current
    /// grid spacing: past it the boundary layer is no longer resolved.
    pub resolution_limit: T,
    /// Rerun at half the grid spacing before reporting blowup.
    pub confirm_blowup: bool,
    /// Times at which the full state is kept, besides the first and last.
    pub record_times: Vec<T>,
    /// Steps are also capped by `curvature_cfl / ‖k‖∞²`.
    pub curvature_cfl: T,
}

impl<T: Real> StefanConfig<T> {
    pub fn new(dx: T, dt: T, horizon: T) -> Self {
        Self {
            slope: SlopeParameter::unit(),
            dx,
            dt,
            horizon,
            scheme: TimeScheme::CrankNicolson,
            blowup_factor: T::lit(1e3),
            resolution_limit: T::lit(0.25),
            confirm_blowup: true,
            record_times: Vec::new(),
            curvature_cfl: T::lit(0.05),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StefanState<T: Real> {
    pub t: T,
    pub l: T,
    pub r: T,
    /// Solution on the mapped grid of `[l, r]`.
    pub f: Profile<T>,
    /// `-f_xx` on the same grid.
    pub k: Profile<T>,
}

/// Scalar diagnostics after every step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepRecord<T> {
    pub t: T,
    pub l: T,
    pub r: T,
    pub area: T,
    pub k_max: T,
    pub k_min: T,
    pub k_l: T,
    pub k_r: T,
    /// `∫ k log k` over `{k > 0}`.
    pub k_log_k: T,
    pub inflections: usize,
    /// `k_x(l) + k(l)²/s`.
    pub relation_l: T,
    /// `k_x(r) - k(r)²/s`.
    pub relation_r: T,
    pub f_min: T,
    /// `∫ max(-f, 0)`.
    pub negative_area: T,
    pub concave: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Collided,
    Blowup,
    Horizon,
}

#[derive(Clone, Debug)]
pub struct StefanRun<T: Real> {
    pub slope: SlopeParameter<T>,
    pub dx: T,
    pub states: Vec<StefanState<T>>,
    pub series: Vec<StepRecord<T>>,
    pub verdict: Verdict,
    pub collision_time: Option<T>,
    pub blowup_time: Option<T>,
    /// Blowup reproduced at half the grid spacing.
    pub blowup_confirmed: bool,
}

impl<T: Real> StefanRun<T> {
    pub fn initial(&self) -> &StefanState<T> {
        &self.states[0]
    }

    pub fn last(&self) -> &StefanState<T> {
        self.states.last().expect("runs keep their initial state")
    }

    pub fn state_at(&self, t: T) -> Option<&StefanState<T>> {
        let tol = T::lit(1e-12) * (T::one() + t.abs());
        self.states.iter().find(|s| (s.t - t).abs() <= tol)
    }

    /// Boundaries at time `t`, linearly interpolated between steps.
    pub fn boundaries_at(&self, t: T) -> Option<(T, T)> {
        let s = &self.series;
        if t < s[0].t || t > s[s.len() - 1].t {
            return None;
        }
        let i = s.partition_point(|p| p.t < t);
        if i == 0 {
            return Some((s[0].l, s[0].r));
        }
        let (a, b) = (&s[i - 1], &s[i]);
        let w = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { T::one() };
        Some((a.l + (b.l - a.l) * w, a.r + (b.r - a.r) * w))
    }

    pub fn series_csv(&self) -> String {
        let mut out = String::from("t,l,r,area,k_max,k_at_l,k_at_r,inflections\n");
        for p in &self.series {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                p.t, p.l, p.r, p.area, p.k_max, p.k_l, p.k_r, p.inflections
            );
        }
        out
    }
}

/// `f` at a state as a function on the real line, zero outside `[l, r]`.
pub fn state_value<T: Real>(state: &StefanState<T>, x: T) -> T {
    if x <= state.l || x >= state.r {
        T::zero()
    } else {
        state.f.eval(x)
    }
}

pub(crate) fn check_admissible<T: Real>(f0: &Profile<T>, s: T) -> Result<()> {
    let v = f0.values();
    let n = f0.n_cells();
    let tol = T::lit(1e-9).max(T::lit(64.0) * T::epsilon()) * (T::one() + f0.sup_norm());
    if v[0].abs() > tol || v[n].abs() > tol {
        return Err(Error::InvalidProfile("initial data must vanish at both ends".into()));
    }
    if n < 8 {
        return Err(Error::InvalidProfile("need at least eight cells".into()));
    }
    if !f0.is_lipschitz(s, T::lit(1e-6) * f0.dx()) {
        return Err(Error::InvalidProfile(format!("initial data is not {s}-Lipschitz")));
    }
    let h = f0.dx();
    let (sl, sr) = ((v[1] - v[0]) / h, (v[n - 1] - v[n]) / h);
    let tol = T::lit(0.02);
    if (sl - s).abs() > tol || (sr - s).abs() > tol {
        return Err(Error::InvalidProfile(format!(
            "boundary slopes {sl}, {} should be ±{s}",
            -sr
        )));
    }
    Ok(())
}

pub(crate) struct Solver<T: Real> {
    s: T,
    n: usize,
    dy: T,
    scratch: Scratch<T>,
    trial: Vec<T>,
}

impl<T: Real> Solver<T> {
    pub(crate) fn new(s: T, n: usize) -> Self {
        Self { s, n, dy: T::one() / T::from_count(n), scratch: Scratch::default(), trial: Vec::new() }
    }

    /// Slope defects of the θ-step landing on `(l1, r1)`.
    #[allow(clippy::too_many_arguments)]
    fn residual(&mut self, f: &[T], l: T, r: T, l1: T, r1: T, dt: T, theta: T) -> Option<(T, T)> {
        let w = r - l;
        let w1 = r1 - l1;
        if !(w1 > T::zero()) {
            return None;
        }
        let step = MappedStep {
            w_old: w,
            w_new: w1,
            l_dot: (l1 - l) / dt,
            w_dot: (w1 - w) / dt,
            dt,
            theta,
            left: T::zero(),
            right: T::zero(),
        };
        step.apply(f, &mut self.trial, &mut self.scratch);
        let (sl, sr) = self.slopes(&self.trial, w1);
        Some((sl - self.s, sr - self.s))
    }

    /// Inward slopes at both ends, second-order one-sided.
    fn slopes(&self, f: &[T], w: T) -> (T, T) {
        let n = self.n;
        let c = T::lit(2.0) * self.dy * w;
        (
            (T::lit(4.0) * f[1] - f[2]) / c,
            (T::lit(4.0) * f[n - 1] - f[n - 2]) / c,
        )
    }

    pub(crate) fn curvature(&self, f: &[T], w: T) -> Vec<T> {
        let n = self.n;
        let dy = self.dy;
        let scale = T::one() / (dy * dy * w * w);
        let mut k = Vec::with_capacity(n + 1);
        let edge = |a: T, b: T| {
            -(T::lit(8.0) * a - b - T::lit(6.0) * dy * self.s * w) / (T::lit(2.0) * dy * dy * w * w)
        };
        k.push(edge(f[1], f[2]));
        for j in 1..n {
            k.push(-(f[j + 1] - (f[j] + f[j]) + f[j - 1]) * scale);
        }
        k.push(edge(f[n - 1], f[n - 2]));
        k
    }

    pub(crate) fn record(&self, t: T, l: T, r: T, f: &[T], k: &[T]) -> StepRecord<T> {
        let n = self.n;
        let w = r - l;
        let h = w * self.dy;
        let half = T::lit(0.5);
        let trap = |g: &dyn Fn(T) -> T, v: &[T]| -> T {
            let inner: T = v[1..n].iter().map(|&x| g(x)).sum();
            (inner + (g(v[0]) + g(v[n])) * half) * h
        };
        let area = trap(&|x| x, f);
        let negative_area = trap(&|x: T| (-x).max(T::zero()), f);
        let k_log_k = trap(&|x: T| if x > T::zero() { x * x.ln() } else { T::zero() }, k);
        let k_max = k.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let eps = T::lit(1e-6) * k_max.max(T::one());
        let mut inflections = 0;
        let mut last = 0i8;
        for &v in k {
            let sign = if v > eps { 1 } else if v < -eps { -1 } else { 0 };
            if sign != 0 {
                if last != 0 && sign != last {
                    inflections += 1;
                }
                last = sign;
            }
        }
        // The slope condition puts the first three nodes on a parabola, so
        // the cubic term is lost in the end cells. Read k_x off the interior
        // at the third node and extrapolate k to the end; both are O(h).
        let two_h = T::lit(2.0) * h;
        let kx_l = (k[4] - k[2]) / two_h;
        let kx_r = (k[n - 2] - k[n - 4]) / two_h;
        let kl = k[3] - T::lit(3.0) * h * kx_l;
        let kr = k[n - 3] + T::lit(3.0) * h * kx_r;
        StepRecord {
            t,
            l,
            r,
            area,
            k_max,
            k_min: k.iter().copied().fold(T::infinity(), T::min),
            k_l: k[0],
            k_r: k[n],
            k_log_k,
            inflections,
            relation_l: kx_l + kl * kl / self.s,
            relation_r: kx_r - kr * kr / self.s,
            f_min: f.iter().copied().fold(T::infinity(), T::min),
            negative_area,
            concave: k.iter().all(|&v| v >= -eps),
        }
    }

    pub(crate) fn state(&self, t: T, l: T, r: T, f: &[T], k: Vec<T>) -> Result<StefanState<T>> {
        Ok(StefanState {
            t,
            l,
            r,
            f: Profile::new(l, r, f.to_vec())?,
            k: Profile::new(l, r, k)?,
        })
    }
}

/// Solves the contracting Stefan problem from `f0` on its own domain.
pub fn stefan_front_tracking<T: Real>(f0: &Profile<T>, config: &StefanConfig<T>) -> Result<StefanRun<T>> {
    let s = config.slope.value();
    check_admissible(f0, s)?;
    if !(config.dx > T::zero() && config.dt > T::zero() && config.horizon >= T::zero()) {
        return Err(Error::InvalidParameter("need dx > 0, dt > 0, horizon ≥ 0".into()));
    }
    let (l0, r0) = f0.domain();
    let w0 = r0 - l0;
    let n = (w0 / config.dx).round().to_usize().unwrap_or(0).max(4);
    if config.scheme == TimeScheme::Explicit {
        let h = w0 / T::from_count(n);
        if config.dt > h * h * T::lit(0.5) {
            return Err(Error::Unstable(format!(
                "explicit stepping needs dt ≤ dx²/2, got dt = {} with dx = {h}",
                config.dt
            )));
        }
    }
    let mut f = if f0.n_cells() == n { f0.values().to_vec() } else { f0.resample(l0, r0, n)?.into_values() };
    f[0] = T::zero();
    f[n] = T::zero();
    let mut solver = Solver::new(s, n);
    let collide_below = T::lit(3.0) * w0 / T::from_count(n);

    let (mut l, mut r, mut t) = (l0, r0, T::zero());
    let mut k = solver.curvature(&f, w0);
    let mut series = vec![solver.record(t, l, r, &f, &k)];
    let mut states = vec![solver.state(t, l, r, &f, k.clone())?];
    let mut records: Vec<T> = config.record_times.iter().copied().filter(|&x| x > T::zero()).collect();
    records.sort_by(|a, b| a.partial_cmp(b).expect("finite record times"));
    let mut next_record = records.into_iter().peekable();

    let mut verdict = Verdict::Horizon;
    let mut collision_time = None;
    let mut blowup_time = None;
    let newton_tol = T::lit(1e3) * T::epsilon() * T::from_count(n);
    let fd = T::epsilon().sqrt();
    let mut step_no = 0usize;
    let mut new_f = Vec::with_capacity(n + 1);

    while t < config.horizon {
        let w = r - l;
        let k_max = series.last().map(|p| p.k_max).unwrap_or(T::zero());
        let mut dt = config.dt * (w / w0) * (w / w0);
        if k_max > T::zero() {
            dt = dt.min(config.curvature_cfl / (k_max * k_max));
        }
        if config.scheme == TimeScheme::Explicit {
            let h = w / T::from_count(n);
            dt = dt.min(h * h * T::lit(0.45));
        }
        dt = dt.min(config.horizon - t);
        while let Some(&tr) = next_record.peek() {
            if tr <= t {
                next_record.next();
            } else {
                dt = dt.min(tr - t);
                break;
            }
        }
        let theta = match config.scheme {
            TimeScheme::Explicit => T::zero(),
            TimeScheme::CrankNicolson if step_no < 2 => T::one(),
            TimeScheme::CrankNicolson => T::lit(0.5),
        };
        let mut solved = None;
        for _ in 0..40 {
            let guess = (l + dt * k[0] / s, r - dt * k[n] / s);
            if let Some(sol) = newton(&mut solver, &f, l, r, guess, dt, theta, newton_tol, fd) {
                solved = Some(sol);
                break;
            }
            dt = dt * T::lit(0.5);
        }
        let Some((l1, r1)) = solved else {
            return Err(Error::Unstable(format!("boundary update failed at t = {t}")));
        };
        let w1 = r1 - l1;
        let step = MappedStep {
            w_old: w,
            w_new: w1,
            l_dot: (l1 - l) / dt,
            w_dot: (w1 - w) / dt,
            dt,
            theta,
            left: T::zero(),
            right: T::zero(),
        };
        step.apply(&f, &mut new_f, &mut solver.scratch);
        std::mem::swap(&mut f, &mut new_f);
        let t_prev = t;
        t = t + dt;
        l = l1;
        r = r1;
        step_no += 1;
        k = solver.curvature(&f, w1);
        let rec = solver.record(t, l, r, &f, &k);
        series.push(rec);
        if next_record.peek().is_some_and(|&tr| (tr - t).abs() <= T::lit(1e-12) * (T::one() + t)) {
            states.push(solver.state(t, l, r, &f, k.clone())?);
            next_record.next();
        }
        if w1 < collide_below {
            verdict = Verdict::Collided;
            collision_time = Some((t_prev + t) * T::lit(0.5));
            break;
        }
        if rec.k_max * w1 > config.blowup_factor || rec.k_max * w1 / T::from_count(n) > config.resolution_limit {
            verdict = Verdict::Blowup;
            blowup_time = Some(t);
            break;
        }
    }
    if states.last().map(|st| st.t) != Some(t) {
        states.push(solver.state(t, l, r, &f, k)?);
    }

    let mut blowup_confirmed = false;
    if verdict == Verdict::Blowup && config.confirm_blowup {
        let mut fine = config.clone();
        fine.dx = config.dx * T::lit(0.5);
        fine.dt = config.dt * T::lit(0.25);
        fine.confirm_blowup = false;
        fine.record_times.clear();
        let f0_fine = f0.resample(l0, r0, 2 * n)?;
        let rerun = stefan_front_tracking(&f0_fine, &fine)?;
        blowup_confirmed = rerun.verdict == Verdict::Blowup;
    }

    Ok(StefanRun {
        slope: config.slope,
        dx: w0 / T::from_count(n),
        states,
        series,
        verdict,
        collision_time,
        blowup_time,
        blowup_confirmed,
    })
}

#[allow(clippy::too_many_arguments)]
fn newton<T: Real>(
    solver: &mut Solver<T>,
    f: &[T],
    l: T,
    r: T,
    guess: (T, T),
    dt: T,
    theta: T,
    tol: T,
    fd: T,
) -> Option<(T, T)> {
    let (mut l1, mut r1) = guess;
    let w = r - l;
    for _ in 0..25 {
        let (a, b) = solver.residual(f, l, r, l1, r1, dt, theta)?;
        if !(a.is_finite() && b.is_finite()) {
            return None;
        }
        if a.abs().max(b.abs()) < tol {
            return Some((l1, r1));
        }
        let h = fd * (r1 - l1);
        let (al, bl) = solver.residual(f, l, r, l1 + h, r1, dt, theta)?;
        let (ar, br) = solver.residual(f, l, r, l1, r1 + h, dt, theta)?;
        let (j11, j21) = ((al - a) / h, (bl - b) / h);
        let (j12, j22) = ((ar - a) / h, (br - b) / h);
        let det = j11 * j22 - j12 * j21;
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let dl = (a * j22 - b * j12) / det;
        let dr = (j11 * b - j21 * a) / det;
        if dl.abs().max(dr.abs()) > T::lit(0.25) * w {
            return None;
        }
        l1 = l1 - dl;
        r1 = r1 - dr;
    }
    None
}
