//! Exact functionals of paths: contact number, area, the Fourier mode,
//! generator drift of the area and the martingale bracket rate.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::dynamics::{corner_move, rate_of, PinningParameter, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::lattice::{excursions, LatticePath};

/// Number of interior sites on the wall.
pub fn contacts(path: &LatticePath) -> usize {
    let h = path.heights();
    h[1..h.len() - 1].iter().filter(|&&v| v == 0).count()
}

/// `A(η)`: trapezoid rule for `max(η, 1)` on `[-L, L]`.
pub fn area(path: &LatticePath) -> f64 {
    trapezoid_m(path.heights())
}

fn trapezoid_m(h: &[i32]) -> f64 {
    let n = h.len() - 1;
    let inner: i64 = h[1..n].iter().map(|&v| v.max(1) as i64).sum();
    inner as f64 + 0.5 * (h[0].max(1) + h[n].max(1)) as f64
}

/// Area restricted to `[x_l, x_r]`, same trapezoid rule. Windows sharing
/// an endpoint add up exactly.
pub fn windowed_area(path: &LatticePath, x_l: i64, x_r: i64) -> Result<f64> {
    let l = path.half_length() as i64;
    if x_l < -l || x_r > l || x_l >= x_r {
        return Err(Error::BadWindow { xl: x_l, xr: x_r, l: path.half_length() });
    }
    let h = path.heights();
    Ok(trapezoid_m(&h[(x_l + l) as usize..=(x_r + l) as usize]))
}

/// `(rate·ΔA, rate·ΔA²)` of the flip at a site with neighbours `a`, `b`.
#[inline]
pub(crate) fn site_generator(a: i32, h: i32, b: i32, walled: bool, lambda: &PinningParameter) -> (f64, f64) {
    match corner_move(a, h, b, walled) {
        None => (0.0, 0.0),
        Some(new) => {
            let da = (new.max(1) - h.max(1)) as f64;
            if da == 0.0 {
                return (0.0, 0.0);
            }
            let r: f64 = rate_of(a, h, b, walled, lambda);
            (r * da, r * da * da)
        }
    }
}

pub(crate) fn generator_totals(h: &[i32], walled: bool, lambda: &PinningParameter) -> (f64, f64) {
    (1..h.len() - 1).fold((0.0, 0.0), |(d, f), i| {
        let (dd, ff) = site_generator(h[i - 1], h[i], h[i + 1], walled, lambda);
        (d + dd, f + ff)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftReport {
    /// `ℒA(η)`.
    pub value: f64,
    pub excursion_count_ge4: usize,
    /// Nonzero `rate·ΔA` terms, by site.
    pub contributions: Vec<(i64, f64)>,
}

impl DriftReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,contribution\n");
        for (x, c) in &self.contributions {
            let _ = writeln!(out, "{x},{c}");
        }
        out
    }
}

/// Exact `ℒA` by enumerating every legal flip.
///
/// At `λ = ∞` the value is `-2` times the number of excursions of length at
/// least 4: inside such an excursion each local minimum above the wall adds
/// `+2` and each local maximum at height `≥ 2` adds `-2` (a crest at height 2
/// drops one unit of `A` at rate 2), and maxima outnumber minima by one.
pub fn generator_drift_area(path: &LatticePath, lambda: &PinningParameter) -> DriftReport {
    let h = path.heights();
    let l = path.half_length() as i64;
    let mut value = 0.0;
    let mut contributions = Vec::new();
    for i in 1..h.len() - 1 {
        let (d, _) = site_generator(h[i - 1], h[i], h[i + 1], path.walled(), lambda);
        if d != 0.0 {
            value += d;
            contributions.push((i as i64 - l, d));
        }
    }
    let excursion_count_ge4 = excursions(path).iter().filter(|e| e.length() >= 4).count();
    DriftReport { value, excursion_count_ge4, contributions }
}

/// `F(η) = Σ rate·(ΔA)²` at `λ = ∞`.
pub fn martingale_bracket_rate(path: &LatticePath) -> f64 {
    generator_totals(path.heights(), path.walled(), &PinningParameter::Infinite).1
}

/// `Φ(η) = Σ_x cos(xπ/2L) η(x)`.
pub fn fourier(path: &LatticePath) -> f64 {
    fourier_of(path.heights())
}

pub(crate) fn fourier_of(h: &[i32]) -> f64 {
    let l = (h.len() - 1) / 2;
    let w = PI / (2 * l) as f64;
    h.iter()
        .enumerate()
        .filter(|(_, &v)| v != 0)
        .map(|(i, &v)| (w * (i as f64 - l as f64)).cos() * v as f64)
        .sum()
}

/// `κ_L = 2(1 - cos(π/2L))`, written as `4 sin²(π/4L)` to avoid cancellation.
pub fn kappa(l: usize) -> f64 {
    let s = (PI / (4 * l) as f64).sin();
    4.0 * s * s
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualPoint {
    /// Rescaled time.
    pub t: f64,
    /// `A(η_t) - A(η_0) - ∫ℒA`.
    pub residual: f64,
    /// `∫F`, the predictable bracket.
    pub bracket: f64,
}

/// Compensated area process along a recorded trajectory.
pub fn martingale_residual(record: &TrajectoryRecord) -> Result<Vec<ResidualPoint>> {
    if !record.config.track_generator {
        return Err(Error::InsufficientSampling(
            "record was produced without generator tracking".into(),
        ));
    }
    let Some(first) = record.series.first() else {
        return Err(Error::InsufficientSampling("empty observable series".into()));
    };
    Ok(record
        .series
        .iter()
        .map(|s| ResidualPoint {
            t: s.t,
            residual: s.area_raw - first.area_raw - s.drift_integral,
            bracket: s.bracket_integral,
        })
        .collect())
}
