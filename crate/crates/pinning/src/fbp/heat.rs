//! Heat equation `u_t = u_xx` on a fixed interval with zero Dirichlet data.

use serde::Serialize;

use super::tridiag::{MappedStep, Scratch};
use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::scalar::Real;

/// Sine expansion of the piecewise-linear interpolant of a profile that
/// vanishes at both ends.
///
/// For such a function `f'' = Σ_j Δσ_j δ_{x_j}` with `Δσ_j` the slope jump
/// at node `j`, so integrating by parts twice gives the exact coefficients
/// `b_n = -(2/D) k_n⁻² Σ_j Δσ_j sin(k_n (x_j - a))`, `k_n = nπ/D`.
#[derive(Clone, Debug)]
pub struct SineSeries<T: Real> {
    a: T,
    b: T,
    coeffs: Vec<T>,
    slope_variation: T,
}

impl<T: Real> SineSeries<T> {
    pub fn new(f0: &Profile<T>, modes: usize) -> Result<Self> {
        let (a, b) = f0.domain();
        let v = f0.values();
        let n = f0.n_cells();
        let tol = T::lit(1e-9) * (T::one() + f0.sup_norm());
        if v[0].abs() > tol || v[n].abs() > tol {
            return Err(Error::InvalidProfile("heat data must vanish at both ends".into()));
        }
        if modes == 0 {
            return Err(Error::InvalidParameter("need at least one mode".into()));
        }
        let d = b - a;
        let h = f0.dx();
        let jumps: Vec<(T, T)> = (1..n)
            .map(|j| {
                let left = (v[j] - v[j - 1]) / h;
                let right = (v[j + 1] - v[j]) / h;
                (f0.x(j) - a, right - left)
            })
            .filter(|(_, s)| *s != T::zero())
            .collect();
        let slope_variation = jumps.iter().map(|(_, s)| s.abs()).sum();
        let pi = T::lit(std::f64::consts::PI);
        let two = T::lit(2.0);
        let coeffs = (1..=modes)
            .map(|m| {
                let k = pi * T::from_count(m) / d;
                let s: T = jumps.iter().map(|&(y, ds)| ds * (k * y).sin()).sum();
                -two / d * s / (k * k)
            })
            .collect();
        Ok(Self { a, b, coeffs, slope_variation })
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    fn k(&self, m: usize) -> T {
        T::lit(std::f64::consts::PI) * T::from_count(m + 1) / (self.b - self.a)
    }

    pub fn eval(&self, x: T, t: T) -> T {
        let y = x - self.a;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                let k = self.k(m);
                c * (-k * k * t).exp() * (k * y).sin()
            })
            .sum()
    }

    pub fn eval_dx(&self, x: T, t: T) -> T {
        let y = x - self.a;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                let k = self.k(m);
                c * k * (-k * k * t).exp() * (k * y).cos()
            })
            .sum()
    }

    /// Bound on the truncated tail `Σ_{n>M} |b_n| e^{-k_n² t}`.
    pub fn tail_bound(&self, t: T) -> T {
        let d = self.b - self.a;
        let pi = T::lit(std::f64::consts::PI);
        let m = T::from_count(self.modes());
        let km = pi * m / d;
        T::lit(2.0) * self.slope_variation / d * (d / pi).powi(2) / m * (-km * km * t).exp()
    }

    pub fn profile(&self, t: T, n_cells: usize) -> Result<Profile<T>> {
        let mut v = Profile::from_fn(self.a, self.b, n_cells, |x| self.eval(x, t))?.into_values();
        // the sine series vanishes at the ends up to rounding
        v[0] = T::zero();
        v[n_cells] = T::zero();
        Profile::new(self.a, self.b, v)
    }
}

#[derive(Clone, Debug)]
pub struct HeatSolution<T: Real> {
    pub profile: Profile<T>,
    pub tail_bound: T,
    pub modes: usize,
}

/// Solution at time `t` on the grid of `f0`, by a `modes`-term sine series.
pub fn heat_dirichlet<T: Real>(f0: &Profile<T>, t: T, modes: usize) -> Result<HeatSolution<T>> {
    if t < T::zero() {
        return Err(Error::InvalidParameter(format!("negative time {t}")));
    }
    let series = SineSeries::new(f0, modes)?;
    Ok(HeatSolution {
        profile: series.profile(t, f0.n_cells())?,
        tail_bound: series.tail_bound(t),
        modes,
    })
}

/// Crank–Nicolson on the grid of `f0`, with two backward-Euler half steps
/// first to damp the kinks of the data.
pub fn heat_crank_nicolson<T: Real>(f0: &Profile<T>, t: T, dt: T) -> Result<Profile<T>> {
    if t < T::zero() || !(dt > T::zero()) {
        return Err(Error::InvalidParameter("need t ≥ 0 and dt > 0".into()));
    }
    let (a, b) = f0.domain();
    let w = b - a;
    let steps = (t / dt).ceil().to_usize().unwrap_or(0);
    let mut u = f0.values().to_vec();
    let n = u.len() - 1;
    u[0] = T::zero();
    u[n] = T::zero();
    if steps == 0 || n < 2 {
        return Profile::new(a, b, u);
    }
    let dt = t / T::from_count(steps);
    let mut out = Vec::with_capacity(n + 1);
    let mut scratch = Scratch::default();
    let half = T::lit(0.5);
    let mut plan: Vec<(T, T)> = vec![(dt * half, T::one()), (dt * half, T::one())];
    plan.extend(std::iter::repeat_n((dt, half), steps - 1));
    for (h, theta) in plan {
        let step = MappedStep {
            w_old: w,
            w_new: w,
            l_dot: T::zero(),
            w_dot: T::zero(),
            dt: h,
            theta,
            left: T::zero(),
            right: T::zero(),
        };
        step.apply(&u, &mut out, &mut scratch);
        std::mem::swap(&mut u, &mut out);
    }
    Profile::new(a, b, u)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundarySlopeReport {
    pub t: f64,
    pub delta_bar: f64,
    /// `1 - exp(-δ̄²/16t)`.
    pub slope_bound: f64,
    /// Smallest inward slope within `δ̄/2` of the left end.
    pub min_slope_left: f64,
    /// Same at the right end, sign flipped.
    pub min_slope_right: f64,
    pub boundary_slope_left: f64,
    pub boundary_slope_right: f64,
    pub area0: f64,
    pub area_t: f64,
    /// `∫f0 - 2t`.
    pub area_lower: f64,
    /// `∫f0 - 2t - 2t·exp(-δ̄²/16t)`.
    pub area_lower_weak: f64,
    /// `f_x(b,t) - f_x(a,t)`, the instantaneous area rate.
    pub area_rate: f64,
    pub tail_bound: f64,
    pub slope_holds: bool,
    pub area_holds: bool,
}

/// Checks that the inward slope of the heat solution stays near one close to
/// the boundary for short times, and that the area has not dropped faster
/// than at rate 2.
pub fn heat_boundary_slope<T: Real>(
    f0: &Profile<T>,
    t: T,
    delta_bar: T,
    modes: usize,
) -> Result<BoundarySlopeReport> {
    let (a, b) = f0.domain();
    let h = f0.dx();
    let v = f0.values();
    let n = f0.n_cells();
    if t < T::zero() || !(delta_bar > T::zero()) || delta_bar + delta_bar >= b - a {
        return Err(Error::InvalidParameter("need t ≥ 0 and 0 < δ̄ < (b-a)/2".into()));
    }
    let s_left = (v[1] - v[0]) / h;
    let s_right = (v[n - 1] - v[n]) / h;
    let slope_tol = T::lit(0.02);
    if !f0.is_lipschitz_1(T::lit(1e-9)) || (s_left - T::one()).abs() > slope_tol || (s_right - T::one()).abs() > slope_tol {
        return Err(Error::InvalidProfile(
            "needs 1-Lipschitz data with boundary slopes +1 and -1".into(),
        ));
    }
    let series = SineSeries::new(f0, modes)?;
    let tf = t.to_f64_lossy();
    let db = delta_bar.to_f64_lossy();
    let slope_bound = if tf == 0.0 { 1.0 } else { 1.0 - (-db * db / (16.0 * tf)).exp() };
    let collar = (delta_bar * T::lit(0.5) / h).floor().to_usize().unwrap_or(0).max(1);
    let (mut min_l, mut min_r) = (f64::INFINITY, f64::INFINITY);
    let (bl, br);
    if t == T::zero() {
        for j in 0..collar.min(n) {
            min_l = min_l.min(((v[j + 1] - v[j]) / h).to_f64_lossy());
            min_r = min_r.min(((v[n - j - 1] - v[n - j]) / h).to_f64_lossy());
        }
        bl = s_left.to_f64_lossy();
        br = s_right.to_f64_lossy();
    } else {
        for j in 0..=collar.min(n) {
            min_l = min_l.min(series.eval_dx(f0.x(j), t).to_f64_lossy());
            min_r = min_r.min(-series.eval_dx(f0.x(n - j), t).to_f64_lossy());
        }
        bl = series.eval_dx(a, t).to_f64_lossy();
        br = -series.eval_dx(b, t).to_f64_lossy();
    }
    let area0 = f0.integral().to_f64_lossy();
    let area_t = if t == T::zero() { area0 } else { series.profile(t, n)?.integral().to_f64_lossy() };
    let tail = series.tail_bound(t).to_f64_lossy();
    let weak_err = if tf == 0.0 { 0.0 } else { 2.0 * tf * (-db * db / (16.0 * tf)).exp() };
    // quadrature of a smooth solution on the grid of f0
    let quad_tol = tail * (b - a).to_f64_lossy() + 1e-9;
    Ok(BoundarySlopeReport {
        t: tf,
        delta_bar: db,
        slope_bound,
        min_slope_left: min_l,
        min_slope_right: min_r,
        boundary_slope_left: bl,
        boundary_slope_right: br,
        area0,
        area_t,
        area_lower: area0 - 2.0 * tf,
        area_lower_weak: area0 - 2.0 * tf - weak_err,
        area_rate: -(bl + br),
        tail_bound: tail,
        slope_holds: min_l >= slope_bound - 1e-9 && min_r >= slope_bound - 1e-9,
        area_holds: area_t >= area0 - 2.0 * tf - quad_tol,
    })
}
