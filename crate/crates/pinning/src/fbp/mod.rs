//! Continuum side: heat equation, contracting Stefan problem, and the
//! analytic checks that go with them.

pub mod diagnostics;
pub mod fixed_point;
pub mod heat;
pub mod stefan;
mod tridiag;

pub use diagnostics::{stefan_diagnostics, Check, DiagnosticsReport};
pub use fixed_point::{run_distance, stefan_fixed_point, FixedPointConfig, FixedPointRun, RunDistance};
pub use heat::{heat_boundary_slope, heat_crank_nicolson, heat_dirichlet, BoundarySlopeReport, HeatSolution, SineSeries};
pub use stefan::{
    stefan_front_tracking, SlopeParameter, StefanConfig, StefanRun, StefanState, StepRecord, TimeScheme, Verdict,
};
pub use tridiag::solve_tridiagonal;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::scalar::Real;

/// `T* = ½ ∫ f0`.
pub fn tstar<T: Real>(f0: &Profile<T>) -> T {
    f0.integral() * T::lit(0.5)
}

/// Lifts `f` by `δ̄` on `[l, r]` and adds ramps of slope `±1` and width `δ̄`
/// on either side, on the grid of `f`.
///
/// If `l - δ̄`, `l`, `r`, `r + δ̄` are grid nodes the area grows by exactly
/// `δ̄ (r - l) + δ̄²`.
pub fn pedestal<T: Real>(f: &Profile<T>, l: T, r: T, delta_bar: T) -> Result<Profile<T>> {
    let (a, b) = f.domain();
    if !(l < r) || delta_bar < T::zero() {
        return Err(Error::InvalidParameter("need l < r and δ̄ ≥ 0".into()));
    }
    let slack = T::lit(1e-12) * (b - a);
    if l - delta_bar < a - slack || r + delta_bar > b + slack {
        return Err(Error::InvalidParameter(format!(
            "pedestal [{}, {}] leaves the domain [{a}, {b}]",
            l - delta_bar,
            r + delta_bar
        )));
    }
    let tol = T::lit(1e-9) * (T::one() + f.sup_norm());
    if f.nodes().any(|(x, v)| (x < l - slack || x > r + slack) && v.abs() > tol) {
        return Err(Error::InvalidProfile("f must vanish outside [l, r]".into()));
    }
    Ok(f.map(|x, v| {
        if x < l - delta_bar || x > r + delta_bar {
            T::zero()
        } else if x < l {
            x - l + delta_bar
        } else if x > r {
            r + delta_bar - x
        } else {
            v + delta_bar
        }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AgmonReport {
    pub l2: f64,
    pub h1: f64,
    pub sup: f64,
    /// `4 (∫γ²)(∫γ_x²) - ‖γ‖∞⁴`.
    pub residual: f64,
}

/// Both sides of `‖γ‖∞⁴ ≤ 4 (∫γ²)(∫γ_x²)` for the interpolant of `γ`,
/// read as a function on the half-line that vanishes past the last node.
pub fn agmon_check<T: Real>(gamma: &Profile<T>) -> AgmonReport {
    let h = gamma.dx().to_f64_lossy();
    let v: Vec<f64> = gamma.values().iter().map(|x| x.to_f64_lossy()).collect();
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    for w in v.windows(2) {
        let (p, q) = (w[0], w[1]);
        l2 += h * (p * p + p * q + q * q) / 3.0;
        h1 += (q - p) * (q - p) / h;
    }
    let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    AgmonReport { l2, h1, sup, residual: 4.0 * l2 * h1 - sup.powi(4) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tstar_values() {
        let f0 = Profile::from_fn(-1.0, 1.0, 4096, |x: f64| 2.0 / PI * (PI * x / 2.0).cos()).unwrap();
        assert!((tstar(&f0) - 4.0 / (PI * PI)).abs() < 1e-6);
        assert_eq!(tstar(&Profile::<f64>::zeros(-1.0, 1.0, 8).unwrap()), 0.0);
        assert!((tstar(&f0.scaled(0.5)) - 0.5 * tstar(&f0)).abs() < 1e-15);
    }

    #[test]
    fn pedestal_area_and_identity() {
        // tent on [-0.5, 0.5] inside [-1, 1], grid spacing 1/8
        let f = Profile::from_fn(-1.0, 1.0, 16, |x: f64| (0.5 - x.abs()).max(0.0)).unwrap();
        let same = pedestal(&f, -0.5, 0.5, 0.0).unwrap();
        assert_eq!(same, f);
        let p = pedestal(&f, -0.5, 0.5, 0.25).unwrap();
        let expect = f.integral() + 0.25 * 1.0 + 0.25 * 0.25;
        assert!((p.integral() - expect).abs() < 1e-14);
        assert!(p.is_lipschitz_1(1e-12));
        assert!(pedestal(&f, -0.5, 0.5, 0.75).is_err());
    }

    #[test]
    fn agmon_equality_case_and_zero() {
        let g = Profile::from_fn(0.0, 40.0, 400_000, |x: f64| (-x).exp()).unwrap();
        let rep = agmon_check(&g);
        assert!(rep.residual.abs() < 1e-6, "{rep:?}");
        let z = agmon_check(&Profile::<f64>::zeros(0.0, 1.0, 4).unwrap());
        assert_eq!(z.residual, 0.0);
    }
}
