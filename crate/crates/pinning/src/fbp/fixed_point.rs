//! Short-time Stefan solver built from a contraction on boundary data.
//!
//! The unknown is `ρ = f_x`. Collars of width `2 l̄` at each end, with
//! `l̄ = 1 / (4 ‖ρ0'‖∞)`, carry one-sided problems
//!
//! ```text
//! ρ_t = ρ_xx on (l, x1),  ρ(l) = s,   l' = -ρ_x(l)/s,  ρ(x1) = φ1,
//! ρ_t = ρ_xx on (x2, r),  ρ(r) = -s,  r' =  ρ_x(r)/s,  ρ(x2) = φ2,
//! ```
//!
//! and the heat equation on the resulting domain `(l, r)` with data `±s`
//! gives back new values at `x1`, `x2`. The map `(φ1, φ2) ↦ (φ1', φ2')` is
//! iterated to its fixed point; `f` is then `∫_l^x ρ`.

use serde::Serialize;

use super::stefan::{check_admissible, SlopeParameter, Solver, StefanRun, StefanState, Verdict};
use super::tridiag::{MappedStep, Scratch};
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct FixedPointConfig<T: Real> {
    pub slope: SlopeParameter<T>,
    pub dx: T,
    pub dt: T,
    /// End of the time window, `t0`.
    pub horizon: T,
    /// Stop once successive boundary data differ by less than this.
    pub tolerance: T,
    pub max_iterations: usize,
    pub record_times: Vec<T>,
}

impl<T: Real> FixedPointConfig<T> {
    pub fn new(dx: T, dt: T, horizon: T) -> Self {
        Self {
            slope: SlopeParameter::unit(),
            dx,
            dt,
            horizon,
            tolerance: T::lit(1e-10),
            max_iterations: 60,
            record_times: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FixedPointRun<T: Real> {
    pub run: StefanRun<T>,
    /// `l̄`; the fixed sides sit at `l0 + 2 l̄` and `r0 - 2 l̄`.
    pub collar: T,
    pub iterations: usize,
    /// `sup_t |Φ(φ) - φ|` per iteration.
    pub increments: Vec<T>,
    /// Largest ratio of successive increments above round-off.
    pub contraction_factor: T,
}

/// `l̄ = 1 / (4 ‖f0''‖∞)`, from second differences, capped at an eighth of
/// the support so the two collars stay apart.
pub fn collar_width<T: Real>(f0: &Profile<T>) -> T {
    let v = f0.values();
    let h = f0.dx();
    let curv = v.windows(3).map(|w| ((w[2] - w[1]) - (w[1] - w[0])).abs() / (h * h)).fold(T::zero(), T::max);
    let (a, b) = f0.domain();
    let cap = (b - a) / T::lit(8.0);
    if curv > T::zero() {
        (T::one() / (T::lit(4.0) * curv)).min(cap)
    } else {
        cap
    }
}

fn theta_at<T: Real>(step: usize) -> T {
    if step < 2 {
        T::one()
    } else {
        T::lit(0.5)
    }
}

/// One-sided problem with the moving end on the left (`moving_left`) or
/// on the right. Returns the moving end at every time level.
struct OneSided<'a, T: Real> {
    rho0: &'a [T],
    fixed: T,
    moving0: T,
    moving_left: bool,
    s: T,
}

impl<T: Real> OneSided<'_, T> {
    fn solve(&self, times: &[T], phi: &[T], scratch: &mut Scratch<T>) -> Option<Vec<T>> {
        let n = self.rho0.len() - 1;
        let dy = T::one() / T::from_count(n);
        let mut u = self.rho0.to_vec();
        let mut trial = Vec::with_capacity(n + 1);
        let mut best = Vec::with_capacity(n + 1);
        let mut pos = self.moving0;
        let mut out = Vec::with_capacity(times.len());
        out.push(pos);
        let width = |p: T| if self.moving_left { self.fixed - p } else { p - self.fixed };
        let speed = |u: &[T], w: T| {
            let c = T::lit(2.0) * dy * w;
            if self.moving_left {
                (T::lit(-3.0) * u[0] + T::lit(4.0) * u[1] - u[2]) / c
            } else {
                (T::lit(3.0) * u[n] - T::lit(4.0) * u[n - 1] + u[n - 2]) / c
            }
        };
        // l' = -ρ_x(l)/s, r' = ρ_x(r)/s
        let dir = if self.moving_left { -T::one() } else { T::one() };
        for (i, pair) in times.windows(2).enumerate() {
            let dt = pair[1] - pair[0];
            let theta: T = theta_at(i);
            let w = width(pos);
            let v_old = speed(&u, w);
            let step_to = |p1: T, trial: &mut Vec<T>, scratch: &mut Scratch<T>| -> Option<T> {
                let w1 = width(p1);
                if !(w1 > T::zero()) {
                    return None;
                }
                let l_dot = if self.moving_left { (p1 - pos) / dt } else { T::zero() };
                let (left, right) = if self.moving_left { (self.s, phi[i + 1]) } else { (phi[i + 1], -self.s) };
                let step = MappedStep { w_old: w, w_new: w1, l_dot, w_dot: (w1 - w) / dt, dt, theta, left, right };
                step.apply(&u, trial, scratch);
                let v = theta * speed(trial, w1) + (T::one() - theta) * v_old;
                Some((p1 - pos) / dt - dir * v / self.s)
            };
            let mut p1 = pos + dir * dt * v_old / self.s;
            let tol = T::lit(1e3) * T::epsilon() * ((T::one() + pos.abs()) / dt + v_old.abs() / self.s);
            let mut done = false;
            for _ in 0..30 {
                let g = step_to(p1, &mut trial, scratch)?;
                if !g.is_finite() {
                    return None;
                }
                if g.abs() < tol {
                    std::mem::swap(&mut best, &mut trial);
                    done = true;
                    break;
                }
                let h = T::epsilon().sqrt() * w;
                let g2 = step_to(p1 + h, &mut trial, scratch)?;
                let slope = (g2 - g) / h;
                if slope == T::zero() || !slope.is_finite() {
                    return None;
                }
                p1 = p1 - g / slope;
            }
            if !done {
                return None;
            }
            std::mem::swap(&mut u, &mut best);
            pos = p1;
            out.push(pos);
        }
        Some(out)
    }
}

fn interpolate<T: Real>(u: &[T], a: T, b: T, x: T) -> T {
    let n = u.len() - 1;
    let y = (x - a) / (b - a) * T::from_count(n);
    let j = y.floor().to_usize().unwrap_or(0).min(n - 1);
    let frac = y - T::from_count(j);
    u[j] + (u[j + 1] - u[j]) * frac
}

/// Heat equation on the prescribed domain with data `±s`; calls `visit`
/// at every time level with the solution.
fn middle<T: Real>(
    rho0: &[T],
    times: &[T],
    l: &[T],
    r: &[T],
    s: T,
    scratch: &mut Scratch<T>,
    mut visit: impl FnMut(usize, &[T]),
) {
    let mut u = rho0.to_vec();
    let mut next = Vec::with_capacity(u.len());
    visit(0, &u);
    for (i, pair) in times.windows(2).enumerate() {
        let dt = pair[1] - pair[0];
        let (w, w1) = (r[i] - l[i], r[i + 1] - l[i + 1]);
        MappedStep {
            w_old: w,
            w_new: w1,
            l_dot: (l[i + 1] - l[i]) / dt,
            w_dot: (w1 - w) / dt,
            dt,
            theta: theta_at(i),
            left: s,
            right: -s,
        }
        .apply(&u, &mut next, scratch);
        std::mem::swap(&mut u, &mut next);
        visit(i + 1, &u);
    }
}

/// Solves the Stefan problem on `[0, t0]` as the fixed point of the
/// boundary-data map.
pub fn stefan_fixed_point<T: Real>(f0: &Profile<T>, config: &FixedPointConfig<T>) -> Result<FixedPointRun<T>> {
    let s = config.slope.value();
    check_admissible(f0, s)?;
    if !(config.dx > T::zero() && config.dt > T::zero() && config.horizon > T::zero()) {
        return Err(Error::InvalidParameter("need dx > 0, dt > 0, t0 > 0".into()));
    }
    let (l0, r0) = f0.domain();
    let w0 = r0 - l0;
    let n = (w0 / config.dx).round().to_usize().unwrap_or(0).max(16);
    let h = w0 / T::from_count(n);
    let collar = collar_width(f0);
    let m = (T::lit(2.0) * collar / h).round().to_usize().unwrap_or(0);
    if m < 4 {
        return Err(Error::InvalidParameter(format!("collar {collar} spans fewer than four cells at dx = {h}")));
    }
    let (x1, x2) = (l0 + T::from_count(m) * h, r0 - T::from_count(m) * h);

    let f = if f0.n_cells() == n { f0.clone() } else { f0.resample(l0, r0, n)? };
    let fv = f.values();
    let rho0: Vec<T> = (0..=n)
        .map(|j| match j {
            0 => s,
            j if j == n => -s,
            j => (fv[j + 1] - fv[j - 1]) / (h + h),
        })
        .collect();

    let mut times = vec![T::zero()];
    let steps = (config.horizon / config.dt).ceil().to_usize().unwrap_or(1).max(1);
    let dt = config.horizon / T::from_count(steps);
    for i in 1..=steps {
        times.push(T::from_count(i) * dt);
    }
    times.extend(config.record_times.iter().copied().filter(|&t| t > T::zero() && t < config.horizon));
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    times.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-12) * (T::one() + b.abs()));

    let left = OneSided { rho0: &rho0[..=m], fixed: x1, moving0: l0, moving_left: true, s };
    let right = OneSided { rho0: &rho0[n - m..], fixed: x2, moving0: r0, moving_left: false, s };
    let mut scratch = Scratch::default();
    let mut phi1 = vec![rho0[m]; times.len()];
    let mut phi2 = vec![rho0[n - m]; times.len()];
    let mut increments: Vec<T> = Vec::new();
    let mut bounds;
    let floor = T::lit(1e4) * T::epsilon();
    let factor_of = |inc: &[T]| {
        inc.windows(2)
            .filter(|w| w[0] > floor)
            .map(|w| w[1] / w[0])
            .fold(T::zero(), T::max)
    };
    loop {
        let unstable = || Error::Unstable("one-sided boundary update failed".into());
        let l = left.solve(&times, &phi1, &mut scratch).ok_or_else(unstable)?;
        let r = right.solve(&times, &phi2, &mut scratch).ok_or_else(unstable)?;
        if l.iter().any(|&p| p >= x1 - T::lit(2.0) * h) || r.iter().any(|&p| p <= x2 + T::lit(2.0) * h) {
            return Err(Error::InvalidParameter(format!(
                "t0 = {} too long: a boundary reached its collar",
                config.horizon
            )));
        }
        let mut new1 = vec![T::zero(); times.len()];
        let mut new2 = vec![T::zero(); times.len()];
        middle(&rho0, &times, &l, &r, s, &mut scratch, |i, u| {
            new1[i] = interpolate(u, l[i], r[i], x1);
            new2[i] = interpolate(u, l[i], r[i], x2);
        });
        let inc = new1
            .iter()
            .zip(&phi1)
            .chain(new2.iter().zip(&phi2))
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        increments.push(inc);
        phi1 = new1;
        phi2 = new2;
        bounds = (l, r);
        let k = increments.len();
        if !inc.is_finite() || (k >= 3 && inc > increments[0] * T::lit(1e3)) {
            return Err(Error::NotContracting { factor: factor_of(&increments).to_f64_lossy() });
        }
        if inc < config.tolerance {
            break;
        }
        if k >= config.max_iterations {
            return Err(Error::NotContracting { factor: factor_of(&increments).to_f64_lossy() });
        }
    }

    let (l, r) = bounds;
    let solver = Solver::new(s, n);
    let mut records: Vec<T> = config.record_times.clone();
    records.push(config.horizon);
    let keep = |t: T| t == T::zero() || records.iter().any(|&x| (x - t).abs() <= T::lit(1e-12) * (T::one() + t));
    let mut series = Vec::with_capacity(times.len());
    let mut states: Vec<StefanState<T>> = Vec::new();
    let mut failure = None;
    middle(&rho0, &times, &l, &r, s, &mut scratch, |i, u| {
        let w = r[i] - l[i];
        let hh = w / T::from_count(n);
        let mut fv = Vec::with_capacity(n + 1);
        let mut acc = T::zero();
        fv.push(acc);
        for pair in u.windows(2) {
            acc = acc + (pair[0] + pair[1]) * hh * T::lit(0.5);
            fv.push(acc);
        }
        let k = solver.curvature(&fv, w);
        series.push(solver.record(times[i], l[i], r[i], &fv, &k));
        if keep(times[i]) {
            match solver.state(times[i], l[i], r[i], &fv, k) {
                Ok(st) => states.push(st),
                Err(e) => failure = Some(e),
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(FixedPointRun {
        run: StefanRun {
            slope: config.slope,
            dx: h,
            states,
            series,
            verdict: Verdict::Horizon,
            collision_time: None,
            blowup_time: None,
            blowup_confirmed: false,
        },
        collar,
        iterations: increments.len(),
        contraction_factor: factor_of(&increments),
        increments,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunDistance {
    /// `sup |f_a - f_b|` over the union of domains, `f` extended by zero.
    pub profile: f64,
    /// `max(|l_a - l_b|, |r_a - r_b|)`.
    pub boundary: f64,
}

/// Distance between two runs at the given times; both must hold a state
/// at each of them.
pub fn run_distance<T: Real>(a: &StefanRun<T>, b: &StefanRun<T>, times: &[T]) -> Result<RunDistance> {
    use super::stefan::state_value;
    let mut out = RunDistance { profile: 0.0, boundary: 0.0 };
    for &t in times {
        let missing = || Error::InvalidParameter(format!("no state at t = {t}"));
        let sa = a.state_at(t).ok_or_else(missing)?;
        let sb = b.state_at(t).ok_or_else(missing)?;
        out.boundary = out.boundary.max((sa.l - sb.l).abs().max((sa.r - sb.r).abs()).to_f64_lossy());
        let lo = sa.l.min(sb.l);
        let hi = sa.r.max(sb.r);
        let samples = 4 * sa.f.n_cells().max(sb.f.n_cells());
        for i in 0..=samples {
            let x = lo + (hi - lo) * T::from_count(i) / T::from_count(samples);
            let d = (state_value(sa, x) - state_value(sb, x)).abs().to_f64_lossy();
            out.profile = out.profile.max(d);
        }
    }
    Ok(out)
}
