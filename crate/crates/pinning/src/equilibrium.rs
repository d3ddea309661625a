//! Partition functions and exact sampling for the equilibrium measure
//! `π(η) ∝ λ^{N(η)}` on walled paths.
//!
//! `W[i][h]` is the weighted number of walled prefixes from `(-L, 0)` to
//! `(i - L, h)`, with a factor `λ` for every interior zero up to and
//! including index `i`. The partition function is `W[2L][0]`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::LatticePath;
use crate::scalar::Weight;

fn prefix_table<W: Weight>(l: usize, lambda: &W) -> Vec<Vec<W>> {
    let n = 2 * l;
    let mut cols = Vec::with_capacity(n + 1);
    let mut first = vec![W::zero(); l + 2];
    first[0] = W::one();
    cols.push(first);
    for i in 1..=n {
        let prev: &Vec<W> = &cols[i - 1];
        let mut col = vec![W::zero(); l + 2];
        for h in 0..=l {
            let below = if h > 0 { prev[h - 1].clone() } else { W::zero() };
            let v = below + prev[h + 1].clone();
            col[h] = if h == 0 && i < n { v * lambda.clone() } else { v };
        }
        cols.push(col);
    }
    cols
}

/// `Z^λ_{2L}`, exact in the arithmetic of `W`.
///
/// With `W = f64` this overflows once `Z` passes `f64::MAX` (around
/// `L = 500` for `λ ≤ 2`); use [`PartitionTable`] there.
pub fn partition_function<W: Weight>(l: usize, lambda: &W) -> W {
    prefix_table(l, lambda)[2 * l][0].clone()
}

/// `π(η(±1) = 1)` for even `l`, `π(η(±1) = 0)` for odd `l`, exact in `W`.
pub fn midpoint_pin_probability_exact<W: Weight>(l: usize, lambda: &W) -> W {
    let t = prefix_table(l, lambda);
    let z = t[2 * l][0].clone();
    if l.is_multiple_of(2) {
        let w = t[l - 1][1].clone();
        w.clone() * w * (W::one() + lambda.clone()) / z
    } else {
        let w = t[l - 1][0].clone();
        w.clone() * w / z
    }
}

/// Rescaled floating-point prefix table. Each column is stored divided by
/// its largest entry; `log_scale[i]` keeps the logarithm of that factor.
#[derive(Clone, Debug)]
pub struct PartitionTable {
    l: usize,
    lambda: f64,
    cols: Vec<Vec<f64>>,
    log_scale: Vec<f64>,
}

impl PartitionTable {
    pub fn new(l: usize, lambda: f64) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidParameter("L must be positive".into()));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("λ = {lambda} must be finite and ≥ 0")));
        }
        let n = 2 * l;
        let mut cols = Vec::with_capacity(n + 1);
        let mut log_scale = Vec::with_capacity(n + 1);
        let mut first = vec![0.0; l + 2];
        first[0] = 1.0;
        cols.push(first);
        log_scale.push(0.0);
        for i in 1..=n {
            let prev = &cols[i - 1];
            let mut col = vec![0.0; l + 2];
            for h in 0..=l {
                let below = if h > 0 { prev[h - 1] } else { 0.0 };
                let v = below + prev[h + 1];
                col[h] = if h == 0 && i < n { v * lambda } else { v };
            }
            let m = col.iter().cloned().fold(0.0, f64::max);
            let mut ls = log_scale[i - 1];
            if m > 0.0 {
                col.iter_mut().for_each(|v| *v /= m);
                ls += m.ln();
            }
            cols.push(col);
            log_scale.push(ls);
        }
        Ok(Self { l, lambda, cols, log_scale })
    }

    pub fn half_length(&self) -> usize {
        self.l
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `ln W` at site `x`, height `h`; `-∞` where the weight vanishes.
    pub fn log_weight(&self, x: i64, h: usize) -> f64 {
        let i = (x + self.l as i64) as usize;
        match self.cols.get(i).and_then(|c| c.get(h)) {
            Some(&w) if w > 0.0 => w.ln() + self.log_scale[i],
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn log_total(&self) -> f64 {
        self.log_weight(self.l as i64, 0)
    }

    /// `Z`, possibly `+∞` in `f64`.
    pub fn total(&self) -> f64 {
        self.log_total().exp()
    }

    /// `π(η(x) = 0)` for an interior site.
    pub fn contact_probability(&self, x: i64) -> f64 {
        let l = self.l as i64;
        if x <= -l || x >= l || self.lambda == 0.0 {
            return 0.0;
        }
        // the suffix weight is the mirrored prefix weight; both carry λ at x
        (self.log_weight(x, 0) + self.log_weight(-x, 0) - self.lambda.ln() - self.log_total()).exp()
    }

    /// `E[N(η)]`.
    pub fn expected_contacts(&self) -> f64 {
        let l = self.l as i64;
        (-l + 1..l).map(|x| self.contact_probability(x)).sum()
    }

    /// Same event as [`midpoint_pin_probability_exact`].
    pub fn midpoint_pin_probability(&self) -> f64 {
        let l = self.l;
        if l.is_multiple_of(2) {
            (2.0 * self.log_weight(-1, 1) + (1.0 + self.lambda).ln() - self.log_total()).exp()
        } else {
            (2.0 * self.log_weight(-1, 0) - self.log_total()).exp()
        }
    }

    /// `π(η(0) = 0)`; zero for odd `l`.
    pub fn midpoint_zero_probability(&self) -> f64 {
        if self.l % 2 == 1 {
            0.0
        } else {
            self.contact_probability(0)
        }
    }

    /// Exact sample by backward decoding from the right endpoint.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> LatticePath {
        let n = 2 * self.l;
        let mut h = vec![0i32; n + 1];
        let mut cur = 0usize;
        for i in (1..=n).rev() {
            let prev = &self.cols[i - 1];
            let down = if cur > 0 { prev[cur - 1] } else { 0.0 };
            let up = prev[cur + 1];
            let u: f64 = rng.random();
            cur = if u * (down + up) < down { cur - 1 } else { cur + 1 };
            h[i - 1] = cur as i32;
        }
        debug_assert_eq!(h[0], 0);
        LatticePath::from_parts_unchecked(self.l, h, true)
    }

    /// CSV `x,h,weight` of the unrescaled table (weights may overflow to `inf`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,h,weight\n");
        let l = self.l as i64;
        for x in -l..=l {
            for h in 0..=self.l {
                let lw = self.log_weight(x, h);
                if lw > f64::NEG_INFINITY {
                    let _ = writeln!(out, "{x},{h},{:e}", lw.exp());
                }
            }
        }
        out
    }
}

/// `ln Z^λ_{2L}` without overflow.
pub fn log_partition_function(l: usize, lambda: f64) -> Result<f64> {
    Ok(PartitionTable::new(l, lambda)?.log_total())
}

/// `π(η(±1) = 1)` (even `l`) or `π(η(±1) = 0)` (odd `l`) for the length-`2l` polymer.
pub fn midpoint_pin_probability(l: usize, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("λ must be positive".into()));
    }
    Ok(PartitionTable::new(l, lambda)?.midpoint_pin_probability())
}

/// One exact sample from `π^λ_L`.
pub fn equilibrium_sample(l: usize, lambda: f64, seed: u64) -> Result<LatticePath> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter("sampling needs λ > 0".into()));
    }
    let table = PartitionTable::new(l, lambda)?;
    Ok(table.sample(&mut ChaCha8Rng::seed_from_u64(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn small_partition_functions() {
        assert_eq!(partition_function(1, &3.0), 1.0);
        assert_eq!(partition_function(2, &q(7, 3)), q(10, 3));
        let catalan = [1u64, 2, 5, 14, 42, 132];
        for (l, c) in (1..=6).zip(catalan) {
            assert_eq!(partition_function(l, &1u64), c);
        }
    }

    #[test]
    fn rescaled_table_matches_exact() {
        for l in 1..=12 {
            for lam in [0.5, 1.0, 2.0, 5.0] {
                let exact = partition_function(l, &lam);
                let t = PartitionTable::new(l, lam).unwrap();
                assert!((t.total() / exact - 1.0).abs() < 1e-12, "l={l} λ={lam}");
            }
        }
    }

    #[test]
    fn large_tables_stay_finite() {
        let t = PartitionTable::new(2048, 1.5).unwrap();
        assert!(t.log_total().is_finite());
        assert!(t.midpoint_pin_probability() > 0.0);
    }

    #[test]
    fn midpoint_l2() {
        // Ω_2 has UUDD (weight 1) and UDUD (weight λ); both have η(±1) = 1
        assert_eq!(midpoint_pin_probability_exact(2, &q(1, 1)), q(1, 1));
        let t = PartitionTable::new(4, 1.0).unwrap();
        assert!((t.midpoint_pin_probability() - midpoint_pin_probability_exact(4, &1.0)).abs() < 1e-14);
    }

    #[test]
    fn contact_expectation_sums_over_sites() {
        // Ω_2: E[N] = λ/(1+λ)
        let t = PartitionTable::new(2, 3.0).unwrap();
        assert!((t.expected_contacts() - 0.75).abs() < 1e-14);
    }

    #[test]
    fn samples_are_valid_and_reproducible() {
        let a = equilibrium_sample(20, 1.5, 7).unwrap();
        assert!(crate::lattice::validate(20, a.heights(), true).is_none());
        assert_eq!(a, equilibrium_sample(20, 1.5, 7).unwrap());
        assert!(equilibrium_sample(3, 0.0, 1).is_err());
    }
}
