//! Heat-bath corner-flip dynamics with and without a wall.
//!
//! Rates of a flip `η → η^(x)` on walled paths:
//!
//! | move                         | rate          |
//! |------------------------------|---------------|
//! | crest at height 1 (to -1)    | 0             |
//! | crest at height 2 (to 0)     | 2λ/(1+λ)      |
//! | valley at height 0 (to 2)    | 2/(1+λ)       |
//! | any other corner             | 1             |
//!
//! At `λ = ∞` contacts are created at rate 2 and never removed. Without a
//! wall every corner flips at rate 1.

mod engine;

pub use engine::{
    coupled_simulate, simulate, termination_time_ensemble, CoupledRun, DynamicsConfig,
    ObservableSample, Simulator, Snapshot, TerminationSample, TrajectoryRecord,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::LatticePath;
use crate::scalar::Weight;

/// Weight per wall contact, finite or infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PinningParameter<W = f64> {
    Finite(W),
    Infinite,
}

impl<W: Weight> PinningParameter<W> {
    pub fn finite(lambda: W) -> Result<Self> {
        if lambda < W::zero() {
            return Err(Error::InvalidParameter(format!("λ = {lambda:?} is negative")));
        }
        Ok(Self::Finite(lambda))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Self::Infinite)
    }

    /// Rate of a flip that creates a contact: `2λ/(1+λ)`, or 2 at `λ = ∞`.
    pub fn create_rate(&self) -> W {
        let two = W::one() + W::one();
        match self {
            Self::Finite(l) => two * l.clone() / (W::one() + l.clone()),
            Self::Infinite => two,
        }
    }

    /// Rate of a flip that removes a contact: `2/(1+λ)`, or 0 at `λ = ∞`.
    pub fn remove_rate(&self) -> W {
        let two = W::one() + W::one();
        match self {
            Self::Finite(l) => two / (W::one() + l.clone()),
            Self::Infinite => W::zero(),
        }
    }
}

impl PinningParameter<f64> {
    /// Probability that a heat-bath update at a corner between two height-1
    /// neighbours lands on the wall, `λ/(1+λ)`.
    pub fn wall_probability(&self) -> f64 {
        match *self {
            Self::Finite(l) => l / (1.0 + l),
            Self::Infinite => 1.0,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Self::Finite(l) => l,
            Self::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for PinningParameter<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(l) => write!(f, "{l}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for PinningParameter<f64> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinite),
            other => {
                let v: f64 = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("λ = {s:?} is not a number or 'inf'")))?;
                if !v.is_finite() {
                    return Err(Error::InvalidParameter("write infinite λ as 'inf'".into()));
                }
                Self::finite(v)
            }
        }
    }
}

impl Serialize for PinningParameter<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(l) => s.serialize_f64(*l),
            Self::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PinningParameter<f64> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Self::finite(v).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// What a single corner flip would do, given the two neighbours and the
/// current height. `None` when the site is not a corner or the move is
/// forbidden by the wall.
#[inline]
pub(crate) fn corner_move(left: i32, h: i32, right: i32, walled: bool) -> Option<i32> {
    if left != right {
        return None;
    }
    let new = 2 * left - h;
    if walled && new < 0 {
        None
    } else {
        Some(new)
    }
}

/// Rate of `η → η^(x)`.
///
/// Zero when `x` is not a corner or the flip would cross the wall. Without a
/// wall the rate is 1 for every corner, regardless of `λ`.
pub fn flip_rate<W: Weight>(path: &LatticePath, x: i64, lambda: &PinningParameter<W>) -> Result<W> {
    let l = path.half_length() as i64;
    if x <= -l || x >= l {
        return Err(Error::SiteOutOfRange { x, l: path.half_length() });
    }
    let (a, h, b) = (path.at(x - 1), path.at(x), path.at(x + 1));
    Ok(rate_of(a, h, b, path.walled(), lambda))
}

pub(crate) fn rate_of<W: Weight>(
    a: i32,
    h: i32,
    b: i32,
    walled: bool,
    lambda: &PinningParameter<W>,
) -> W {
    match corner_move(a, h, b, walled) {
        None => W::zero(),
        Some(_) if !walled => W::one(),
        Some(0) => lambda.create_rate(),
        Some(_) if h == 0 => lambda.remove_rate(),
        Some(_) => W::one(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn p(heights: &[i32]) -> LatticePath {
        LatticePath::from_heights(heights.to_vec(), true).unwrap()
    }

    #[test]
    fn rate_table() {
        let three = PinningParameter::Finite(3.0);
        // crest at 2 above two height-1 neighbours, contact creation
        assert_eq!(flip_rate(&p(&[0, 1, 2, 1, 0]), 0, &three).unwrap(), 1.5);
        // valley on the wall, contact removal
        assert_eq!(flip_rate(&p(&[0, 1, 0, 1, 0]), 0, &three).unwrap(), 0.5);
        let inf = PinningParameter::<f64>::Infinite;
        assert_eq!(flip_rate(&p(&[0, 1, 0, 1, 0]), 0, &inf).unwrap(), 0.0);
        assert_eq!(flip_rate(&p(&[0, 1, 2, 1, 0]), 0, &inf).unwrap(), 2.0);
        // not a corner
        assert_eq!(flip_rate(&p(&[0, 1, 2, 3, 2, 1, 0]), -1, &three).unwrap(), 0.0);
        // crest at height 1 cannot cross the wall
        assert_eq!(flip_rate(&p(&[0, 1, 0, 1, 0]), -1, &three).unwrap(), 0.0);
        // bulk corner
        assert_eq!(flip_rate(&p(&[0, 1, 2, 3, 2, 1, 0]), 0, &three).unwrap(), 1.0);
        assert!(flip_rate(&p(&[0, 1, 0]), 1, &three).is_err());
    }

    #[test]
    fn free_paths_flip_at_unit_rate() {
        let free = LatticePath::from_heights(vec![0, -1, 0], false).unwrap();
        assert_eq!(flip_rate(&free, 0, &PinningParameter::Finite(7.0)).unwrap(), 1.0);
    }

    #[test]
    fn exact_rates() {
        let half = BigRational::new(1.into(), 2.into());
        let lam = PinningParameter::finite(half).unwrap();
        let r = flip_rate(&p(&[0, 1, 2, 1, 0]), 0, &lam).unwrap();
        assert_eq!(r, BigRational::new(2.into(), 3.into()));
    }

    #[test]
    fn parse_lambda() {
        assert_eq!("inf".parse::<PinningParameter>().unwrap(), PinningParameter::Infinite);
        assert_eq!("1.5".parse::<PinningParameter>().unwrap(), PinningParameter::Finite(1.5));
        assert!("-1".parse::<PinningParameter>().is_err());
        assert!("abc".parse::<PinningParameter>().is_err());
    }
}
