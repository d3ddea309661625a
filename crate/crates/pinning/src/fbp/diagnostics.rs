//! Qualitative properties of a Stefan run, each reported with the number it
//! was decided on.

use serde::Serialize;

use super::stefan::{StefanRun, Verdict};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub checks: Vec<Check>,
}

impl DiagnosticsReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub const BOUNDARY_RELATION: &str = "boundary_relation";
pub const CURVATURE_BOUND: &str = "curvature_bound";
pub const INFLECTIONS: &str = "inflections_nonincreasing";
pub const CONCAVIFICATION: &str = "concavification";
pub const COLLISION: &str = "collision";
pub const WIDTH_BOUND: &str = "width_bound";

/// Largest relative defect of `k_x = ∓k²/s` at the two ends over
/// `[0.05, 0.75] t_end`, clear of the initial layer (the data need not
/// satisfy the relation) and of the terminal singularity.
pub fn boundary_relation_residual<T: Real>(run: &StefanRun<T>) -> f64 {
    let s = run.slope.value().to_f64_lossy();
    let end = run.series.last().map(|p| p.t.to_f64_lossy()).unwrap_or(0.0);
    run.series
        .iter()
        .filter(|p| (0.05 * end..=0.75 * end).contains(&p.t.to_f64_lossy()))
        .map(|p| {
            let kl = p.k_l.to_f64_lossy();
            let kr = p.k_r.to_f64_lossy();
            let rl = p.relation_l.to_f64_lossy().abs() / (1.0 + kl * kl / s);
            let rr = p.relation_r.to_f64_lossy().abs() / (1.0 + kr * kr / s);
            rl.max(rr)
        })
        .fold(0.0, f64::max)
}

/// Checks (i)–(vi) with default tolerances.
pub fn stefan_diagnostics<T: Real>(run: &StefanRun<T>) -> DiagnosticsReport {
    let f = |x: T| x.to_f64_lossy();
    let series = &run.series;
    let first = &series[0];
    let last = series.last().expect("nonempty series");
    let dx = f(run.dx);
    let mut checks = Vec::new();

    let rel = boundary_relation_residual(run);
    checks.push(Check {
        name: BOUNDARY_RELATION,
        passed: rel <= 100.0 * dx,
        value: rel,
        detail: format!("max |k_x ± k²/s| / (1 + k²/s), allowed 100 dx = {:.3e}", 100.0 * dx),
    });

    let k0 = f(first.k_max);
    let mut worst = 0.0f64;
    for p in series.iter().skip(1) {
        let cap = k0.max(f(p.k_l).abs()).max(f(p.k_r).abs());
        worst = worst.max((f(p.k_max) - cap) / cap.max(1e-12));
    }
    checks.push(Check {
        name: CURVATURE_BOUND,
        passed: worst <= 0.02,
        value: worst,
        detail: "max relative excess of ‖k‖∞ over max(‖k(0)‖∞, |k(l)|, |k(r)|)".into(),
    });

    let increases = series.windows(2).filter(|w| w[1].inflections > w[0].inflections).count();
    checks.push(Check {
        name: INFLECTIONS,
        passed: increases == 0,
        value: increases as f64,
        detail: format!("inflection count {} → {}", first.inflections, last.inflections),
    });

    let t2 = series
        .iter()
        .rposition(|p| !p.concave)
        .map_or(Some(f(first.t)), |i| series.get(i + 1).map(|p| f(p.t)));
    checks.push(Check {
        name: CONCAVIFICATION,
        passed: t2.is_some_and(|t| t < f(last.t)),
        value: t2.unwrap_or(f64::NAN),
        detail: "first time after which every state is concave".into(),
    });

    let w_end = f(last.r - last.l);
    checks.push(Check {
        name: COLLISION,
        passed: run.verdict == Verdict::Collided,
        value: w_end,
        detail: format!("verdict {:?}, final width {w_end:.3e}", run.verdict),
    });

    let tstar = 0.5 * f(first.area);
    let half = series.iter().find(|p| f(p.t) >= 0.5 * tstar);
    let (passed, value, detail) = match half {
        Some(h) if f(h.k_min) > 0.0 => {
            let eta = f(h.k_min);
            let mut worst = f64::NEG_INFINITY;
            for p in series.iter().filter(|p| f(p.t) >= f(h.t) && f(p.t) < tstar) {
                let bound = 2.0 * (8.0 * (tstar - f(p.t)) / eta).powf(0.25);
                worst = worst.max(f(p.r - p.l) - bound);
            }
            (worst <= 3.0 * dx, worst, format!("η = {eta:.4}, max(r - l - bound) over [T*/2, T*)"))
        }
        _ => (false, f64::NAN, "curvature not bounded below at T*/2".into()),
    };
    checks.push(Check { name: WIDTH_BOUND, passed, value, detail });

    DiagnosticsReport { checks }
}
