//! Real-valued functions sampled on a uniform grid of an interval.
//!
//! A [`Profile`] is read as its piecewise-linear interpolant; every metric
//! and quadrature in the crate uses that reading.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Profile<T: Real> {
    a: T,
    b: T,
    values: Vec<T>,
}

impl<T: Real> Profile<T> {
    /// Builds a profile from node values on `[a, b]`; there are `values.len() - 1` cells.
    pub fn new(a: T, b: T, values: Vec<T>) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidProfile(format!("empty domain [{a}, {b}]")));
        }
        if values.len() < 2 {
            return Err(Error::InvalidProfile("need at least one cell".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile(format!("non-finite value at node {i}")));
        }
        Ok(Self { a, b, values })
    }

    pub fn from_fn(a: T, b: T, n_cells: usize, f: impl Fn(T) -> T) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidProfile("need at least one cell".into()));
        }
        let h = (b - a) / T::from_count(n_cells);
        let values = (0..=n_cells)
            .map(|i| if i == n_cells { f(b) } else { f(a + h * T::from_count(i)) })
            .collect();
        Self::new(a, b, values)
    }

    pub fn zeros(a: T, b: T, n_cells: usize) -> Result<Self> {
        Self::from_fn(a, b, n_cells, |_| T::zero())
    }

    pub fn domain(&self) -> (T, T) {
        (self.a, self.b)
    }

    pub fn n_cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dx(&self) -> T {
        (self.b - self.a) / T::from_count(self.n_cells())
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Abscissa of node `i`.
    pub fn x(&self, i: usize) -> T {
        if i == self.n_cells() {
            self.b
        } else {
            self.a + self.dx() * T::from_count(i)
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.x(i), v))
    }

    /// Linear interpolation; constant extension outside the domain.
    pub fn eval(&self, x: T) -> T {
        let n = self.n_cells();
        if x <= self.a {
            return self.values[0];
        }
        if x >= self.b {
            return self.values[n];
        }
        let s = (x - self.a) / self.dx();
        let i = s.floor().to_usize().unwrap_or(0).min(n - 1);
        let frac = s - T::from_count(i);
        self.values[i] + (self.values[i + 1] - self.values[i]) * frac
    }

    /// Composite trapezoid rule, exact for the interpolant.
    pub fn integral(&self) -> T {
        let n = self.n_cells();
        let inner: T = self.values[1..n].iter().copied().sum();
        (inner + (self.values[0] + self.values[n]) * T::lit(0.5)) * self.dx()
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Largest slope magnitude of the interpolant.
    pub fn lipschitz_constant(&self) -> T {
        let h = self.dx();
        self.values
            .windows(2)
            .fold(T::zero(), |m, w| m.max((w[1] - w[0]).abs() / h))
    }

    /// `|Δvalue| <= constant·Δx + tol` on every cell.
    pub fn is_lipschitz(&self, constant: T, tol: T) -> bool {
        let h = self.dx();
        self.values
            .windows(2)
            .all(|w| (w[1] - w[0]).abs() <= constant * h + tol)
    }

    pub fn is_lipschitz_1(&self, tol: T) -> bool {
        self.is_lipschitz(T::one(), tol)
    }

    pub fn map(&self, f: impl Fn(T, T) -> T) -> Self {
        let values = self.nodes().map(|(x, v)| f(x, v)).collect();
        Self { a: self.a, b: self.b, values }
    }

    pub fn scaled(&self, c: T) -> Self {
        self.map(|_, v| v * c)
    }

    /// Resamples the interpolant on `n_cells` uniform cells of `[a, b]`.
    pub fn resample(&self, a: T, b: T, n_cells: usize) -> Result<Self> {
        Self::from_fn(a, b, n_cells, |x| self.eval(x))
    }

    /// Two-column CSV `x,value` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (x, v) in self.nodes() {
            let _ = writeln!(out, "{},{}", x.to_f64_lossy(), v.to_f64_lossy());
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(xs_), Some(vs_)) = (cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
            };
            let (Ok(x), Ok(v)) = (xs_.trim().parse::<f64>(), vs_.trim().parse::<f64>()) else {
                if lineno == 0 {
                    continue; // header
                }
                return Err(Error::Parse(format!("line {}: not numeric", lineno + 1)));
            };
            xs.push(x);
            vs.push(v);
        }
        if xs.len() < 2 {
            return Err(Error::Parse("profile needs at least two rows".into()));
        }
        let (a, b) = (xs[0], xs[xs.len() - 1]);
        let h = (b - a) / (xs.len() - 1) as f64;
        for (i, &x) in xs.iter().enumerate() {
            if (x - (a + h * i as f64)).abs() > 1e-6 * (1.0 + h) {
                return Err(Error::Parse(format!("row {i}: grid is not uniform")));
            }
        }
        Self::new(
            T::lit(a),
            T::lit(b),
            vs.into_iter().map(T::lit).collect(),
        )
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

fn same_domain<T: Real>(p: &Profile<T>, q: &Profile<T>) -> bool {
    let scale = T::one() + (p.b - p.a).abs();
    let tol = T::lit(1e-9) * scale;
    (p.a - q.a).abs() <= tol && (p.b - q.b).abs() <= tol
}

/// Sup-norm distance between the interpolants of two profiles on a common domain.
///
/// The difference of two piecewise-linear functions is piecewise linear with
/// breakpoints among the union of both node sets, so the maximum over those
/// nodes is the exact supremum.
pub fn sup_distance<T: Real>(p: &Profile<T>, q: &Profile<T>) -> Result<T> {
    if !same_domain(p, q) {
        return Err(Error::DomainMismatch {
            a0: p.a.to_f64_lossy(),
            b0: p.b.to_f64_lossy(),
            a1: q.a.to_f64_lossy(),
            b1: q.b.to_f64_lossy(),
        });
    }
    let over = |u: &Profile<T>, v: &Profile<T>| {
        u.nodes()
            .fold(T::zero(), |m, (x, val)| m.max((val - v.eval(x)).abs()))
    };
    Ok(over(p, q).max(over(q, p)))
}
