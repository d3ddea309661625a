//! Discrete polymer configurations.
//!
//! A path of half-length `L` is a height sequence indexed by
//! `x ∈ {-L, …, L}` with unit increments and zero endpoints; a *walled*
//! path additionally stays nonnegative.

use std::fmt;

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::scalar::Real;

/// First invariant a height sequence breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Length { expected: usize, found: usize },
    Endpoint { x: i64, height: i32 },
    Step { x: i64 },
    Parity { x: i64 },
    BelowWall { x: i64, height: i32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Length { expected, found } => {
                write!(f, "expected {expected} heights, found {found}")
            }
            Violation::Endpoint { x, height } => write!(f, "endpoint {x} has height {height}"),
            Violation::Step { x } => write!(f, "increment at {x} is not ±1"),
            Violation::Parity { x } => write!(f, "height at {x} has the wrong parity"),
            Violation::BelowWall { x, height } => write!(f, "height {height} at {x} is below the wall"),
        }
    }
}

/// Checks every path invariant; `None` means the sequence is admissible.
pub fn validate(l: usize, heights: &[i32], walled: bool) -> Option<Violation> {
    let n = 2 * l + 1;
    if l == 0 || heights.len() != n {
        return Some(Violation::Length { expected: n, found: heights.len() });
    }
    let xl = -(l as i64);
    for (i, end) in [(0usize, heights[0]), (n - 1, heights[n - 1])] {
        if end != 0 {
            return Some(Violation::Endpoint { x: xl + i as i64, height: end });
        }
    }
    for (i, &h) in heights.iter().enumerate() {
        let x = xl + i as i64;
        if (h as i64 - (x + l as i64)).rem_euclid(2) != 0 {
            return Some(Violation::Parity { x });
        }
        if walled && h < 0 {
            return Some(Violation::BelowWall { x, height: h });
        }
    }
    heights
        .windows(2)
        .position(|w| (w[1] - w[0]).abs() != 1)
        .map(|i| Violation::Step { x: xl + i as i64 })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticePath {
    l: usize,
    heights: Vec<i32>,
    walled: bool,
}

impl LatticePath {
    pub fn new(l: usize, heights: Vec<i32>, walled: bool) -> Result<Self> {
        match validate(l, &heights, walled) {
            None => Ok(Self { l, heights, walled }),
            Some(v) => Err(Error::InvalidPath(v.to_string())),
        }
    }

    /// Builds a path whose half-length is inferred from the number of heights.
    pub fn from_heights(heights: Vec<i32>, walled: bool) -> Result<Self> {
        if heights.len().is_multiple_of(2) {
            return Err(Error::InvalidPath(format!("{} heights is not odd", heights.len())));
        }
        Self::new(heights.len() / 2, heights, walled)
    }

    pub(crate) fn from_parts_unchecked(l: usize, heights: Vec<i32>, walled: bool) -> Self {
        debug_assert_eq!(validate(l, &heights, walled), None);
        Self { l, heights, walled }
    }

    pub fn half_length(&self) -> usize {
        self.l
    }

    pub fn walled(&self) -> bool {
        self.walled
    }

    pub fn heights(&self) -> &[i32] {
        &self.heights
    }

    /// Height at site `x ∈ [-L, L]`.
    pub fn at(&self, x: i64) -> i32 {
        self.heights[(x + self.l as i64) as usize]
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, i32)> + '_ {
        let xl = -(self.l as i64);
        self.heights.iter().enumerate().map(move |(i, &h)| (xl + i as i64, h))
    }

    /// Drops or adds the nonnegativity constraint; fails if the heights go negative.
    pub fn with_wall(&self, walled: bool) -> Result<Self> {
        Self::new(self.l, self.heights.clone(), walled)
    }

    /// The configuration obtained by flipping the corner at `x`, if that is a legal move.
    pub fn flipped(&self, x: i64) -> Option<Self> {
        let i = (x + self.l as i64) as usize;
        if i == 0 || i >= 2 * self.l {
            return None;
        }
        let (a, b) = (self.heights[i - 1], self.heights[i + 1]);
        if a != b {
            return None;
        }
        let new = 2 * a - self.heights[i];
        if self.walled && new < 0 {
            return None;
        }
        let mut heights = self.heights.clone();
        heights[i] = new;
        Some(Self { l: self.l, heights, walled: self.walled })
    }

    /// Mirror image `x ↦ -x`.
    pub fn reflected(&self) -> Self {
        let mut heights = self.heights.clone();
        heights.reverse();
        Self { l: self.l, heights, walled: self.walled }
    }

    /// Pointwise order `self ≥ other`.
    pub fn dominates(&self, other: &Self) -> bool {
        self.heights.len() == other.heights.len()
            && self.heights.iter().zip(&other.heights).all(|(a, b)| a >= b)
    }

    /// One line of space-separated heights.
    pub fn to_line(&self) -> String {
        let mut s = String::with_capacity(self.heights.len() * 3);
        for (i, h) in self.heights.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&h.to_string());
        }
        s
    }

    pub fn from_line(line: &str, walled: bool) -> Result<Self> {
        let heights = line
            .split_whitespace()
            .map(|t| t.parse::<i32>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::from_heights(heights, walled)
    }
}

impl fmt::Display for LatticePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// The sawtooth with the maximal number of wall contacts.
pub fn eta_min(l: usize) -> LatticePath {
    assert!(l >= 1, "half-length must be positive");
    let heights = (0..=2 * l).map(|i| (i % 2) as i32).collect();
    LatticePath::from_parts_unchecked(l, heights, true)
}

/// Greedy lattice approximation of `L·f0(x/L)`.
///
/// Walking left to right, each step goes up when the current height is below
/// the target at the next site and down otherwise; a step that would leave the
/// reachable cone (or cross the wall) is replaced by the opposite one.
pub fn discretize<T: Real>(f0: &Profile<T>, l: usize, walled: bool) -> Result<LatticePath> {
    if l == 0 {
        return Err(Error::InvalidParameter("half-length must be positive".into()));
    }
    let (a, b) = f0.domain();
    let tol = T::lit(1e-9);
    if (a + T::one()).abs() > tol || (b - T::one()).abs() > tol {
        return Err(Error::InvalidProfile(format!("domain must be [-1, 1], got [{a}, {b}]")));
    }
    let end_tol = T::lit(1e-6);
    let v = f0.values();
    if v[0].abs() > end_tol || v[v.len() - 1].abs() > end_tol {
        return Err(Error::InvalidProfile("profile must vanish at ±1".into()));
    }
    if !f0.is_lipschitz_1(T::lit(1e-9)) {
        return Err(Error::InvalidProfile(format!(
            "profile is not 1-Lipschitz (constant {})",
            f0.lipschitz_constant()
        )));
    }
    if walled && f0.min_value() < -end_tol {
        return Err(Error::InvalidProfile("negative profile with a wall".into()));
    }

    let n = 2 * l;
    let lf = T::from_count(l);
    let mut heights = Vec::with_capacity(n + 1);
    let mut h: i32 = 0;
    heights.push(h);
    for i in 1..=n {
        let remaining = (n - i) as i32;
        let x = (i as f64 - l as f64) / l as f64;
        let target = lf * f0.eval(T::lit(x));
        let feasible = |c: i32| c.abs() <= remaining && (!walled || c >= 0);
        let preferred = if T::lit(h as f64) < target { h + 1 } else { h - 1 };
        let other = 2 * h - preferred;
        h = if feasible(preferred) { preferred } else { other };
        debug_assert!(feasible(h));
        heights.push(h);
    }
    LatticePath::new(l, heights, walled)
}

/// `x ↦ η(Lx)/L` on `[-1, 1]` with `2L` cells.
pub fn rescale<T: Real>(path: &LatticePath) -> Profile<T> {
    let lf = T::from_count(path.l);
    let values = path.heights.iter().map(|&h| T::lit(h as f64) / lf).collect();
    Profile::new(-T::one(), T::one(), values).expect("rescaled path is a valid profile")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Excursion {
    pub left: i64,
    pub right: i64,
}

impl Excursion {
    pub fn length(&self) -> i64 {
        self.right - self.left
    }
}

/// Maximal strictly positive stretches between consecutive zeros, left to right.
pub fn excursions(path: &LatticePath) -> Vec<Excursion> {
    let mut out = Vec::new();
    let mut last_zero: Option<i64> = None;
    for (x, h) in path.sites() {
        if h == 0 {
            if let Some(z) = last_zero {
                if x - z > 1 {
                    out.push(Excursion { left: z, right: x });
                }
            }
            last_zero = Some(x);
        }
    }
    out
}

/// All paths of half-length `l` in lexicographic order of their step
/// sequences (down before up).
pub fn enumerate_paths(l: usize, walled: bool) -> Vec<LatticePath> {
    fn rec(l: usize, walled: bool, buf: &mut Vec<i32>, out: &mut Vec<LatticePath>) {
        let n = 2 * l;
        let i = buf.len() - 1;
        if i == n {
            out.push(LatticePath::from_parts_unchecked(l, buf.clone(), walled));
            return;
        }
        let h = buf[i];
        let remaining = (n - i - 1) as i32;
        for c in [h - 1, h + 1] {
            if c.abs() <= remaining && (!walled || c >= 0) {
                buf.push(c);
                rec(l, walled, buf, out);
                buf.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(l, walled, &mut vec![0], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_min_small_cases() {
        assert_eq!(eta_min(1).heights(), &[0, 1, 0]);
        assert_eq!(eta_min(2).heights(), &[0, 1, 0, 1, 0]);
        assert_eq!(validate(2, eta_min(2).heights(), true), None);
        let interior_zeros = eta_min(3).heights()[1..6].iter().filter(|&&h| h == 0).count();
        assert_eq!(interior_zeros, 2);
    }

    #[test]
    fn validation_reports() {
        assert!(matches!(
            validate(2, &[1, 0, 1, 0, 1], false),
            Some(Violation::Endpoint { .. })
        ));
        assert_eq!(validate(2, &[0, 1, 2, 1, 0], true), None);
        assert!(matches!(validate(2, &[0, -1, 0, 1, 0], true), Some(Violation::BelowWall { .. })));
        assert_eq!(validate(2, &[0, -1, 0, 1, 0], false), None);
        assert!(matches!(validate(2, &[0, 1, 1, 1, 0], false), Some(Violation::Parity { .. })));
        assert!(matches!(validate(2, &[0, 1, 0], false), Some(Violation::Length { .. })));
        assert!(matches!(validate(2, &[0, 1, 0, 3, 0], false), Some(Violation::Step { x: 0 })));
    }

    #[test]
    fn discretize_zero_gives_eta_min() {
        let f0 = Profile::zeros(-1.0, 1.0, 8).unwrap();
        assert_eq!(discretize(&f0, 2, true).unwrap(), eta_min(2));
    }

    #[test]
    fn discretize_tent_is_exact() {
        let f0 = Profile::from_fn(-1.0, 1.0, 64, |x: f64| 1.0 - x.abs()).unwrap();
        let p = discretize(&f0, 4, true).unwrap();
        assert_eq!(p.heights(), &[0, 1, 2, 3, 4, 3, 2, 1, 0]);
    }

    #[test]
    fn discretize_cosine_within_bound() {
        use std::f64::consts::PI;
        let f0 = Profile::from_fn(-1.0, 1.0, 4096, |x: f64| 2.0 / PI * (PI * x / 2.0).cos()).unwrap();
        let l = 128;
        let p = discretize(&f0, l, true).unwrap();
        let err = sup_err(&p, &f0);
        assert!(err <= 2.0 / l as f64, "{err}");
    }

    fn sup_err(p: &LatticePath, f0: &Profile<f64>) -> f64 {
        let l = p.half_length() as f64;
        p.sites()
            .map(|(x, h)| (h as f64 / l - f0.eval(x as f64 / l)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn discretize_rejects_bad_input() {
        let steep = Profile::from_fn(-1.0, 1.0, 8, |x: f64| 2.0 * (1.0 - x.abs())).unwrap();
        assert!(discretize(&steep, 4, false).is_err());
        let neg = Profile::from_fn(-1.0, 1.0, 8, |x: f64| -(1.0 - x.abs())).unwrap();
        assert!(discretize(&neg, 4, true).is_err());
        let p = discretize(&neg, 4, false).unwrap();
        assert_eq!(p.at(0), -4);
    }

    #[test]
    fn rescale_of_eta_min() {
        let r = rescale::<f64>(&eta_min(8));
        assert_eq!(r.n_cells(), 16);
        assert!((r.sup_norm() - 1.0 / 8.0).abs() < 1e-15);
        assert!(r.is_lipschitz_1(1e-12));
    }

    #[test]
    fn excursion_structure() {
        let p = LatticePath::new(2, vec![0, 1, 0, 1, 0], true).unwrap();
        let e = excursions(&p);
        assert_eq!(e.len(), 2);
        assert!(e.iter().all(|x| x.length() == 2));
        let p = LatticePath::new(2, vec![0, 1, 2, 1, 0], true).unwrap();
        assert_eq!(excursions(&p), vec![Excursion { left: -2, right: 2 }]);
        let tent = LatticePath::new(4, vec![0, 1, 2, 3, 4, 3, 2, 1, 0], true).unwrap();
        assert_eq!(excursions(&tent)[0].length(), 8);
    }

    #[test]
    fn enumeration_counts() {
        // Catalan numbers for walled bridges, central binomials without the wall.
        let catalan = [1, 2, 5, 14, 42, 132];
        for (l, &c) in (1..=6).zip(&catalan) {
            assert_eq!(enumerate_paths(l, true).len(), c);
        }
        assert_eq!(enumerate_paths(3, false).len(), 20);
    }

    #[test]
    fn serialization() {
        let p = LatticePath::new(2, vec![0, 1, 2, 1, 0], true).unwrap();
        assert_eq!(p.to_line(), "0 1 2 1 0");
        assert_eq!(LatticePath::from_line("0 1 2 1 0", true).unwrap(), p);
        assert!(LatticePath::from_line("0 1 2 1", true).is_err());
    }

    #[test]
    fn flips() {
        let p = eta_min(2);
        assert!(p.flipped(-1).is_none()); // crest at height 1 would cross the wall
        let q = p.flipped(0).unwrap();
        assert_eq!(q.heights(), &[0, 1, 2, 1, 0]);
        assert!(q.flipped(-2).is_none());
    }
}
