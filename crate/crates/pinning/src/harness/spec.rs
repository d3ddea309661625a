use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::PinningParameter;
use crate::error::{Error, Result};
use crate::profile::Profile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RepulsiveLimit,
    StickyLimit,
    FourierDecay,
    TerminationTime,
    ContactDecay,
    StefanStudy,
    HeatStudy,
    /// One trajectory, series and snapshots.
    Simulate,
    /// Partition function, contact profile and midpoint probabilities.
    Equilibrium,
    /// Exhaustive small-`L` checks of the drift identity and reversibility.
    Oracle,
    /// Order preservation under shared randomness.
    Coupling,
    /// Random sweep of the one-dimensional Agmon inequality.
    Agmon,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::RepulsiveLimit => "repulsive-limit",
            Self::StickyLimit => "sticky-limit",
            Self::FourierDecay => "fourier-decay",
            Self::TerminationTime => "termination-time",
            Self::ContactDecay => "contact-decay",
            Self::StefanStudy => "stefan-study",
            Self::HeatStudy => "heat-study",
            Self::Simulate => "simulate",
            Self::Equilibrium => "equilibrium",
            Self::Oracle => "oracle",
            Self::Coupling => "coupling",
            Self::Agmon => "agmon",
        }
    }
}

/// Named initial profiles.
///
/// | name | domain | f0 |
/// |---|---|---|
/// | `cosine` | `[-1, 1]` | `(2/π) cos(πx/2)` |
/// | `bump` | `[-1, 1]` | `c cos(πx/2) - 0.1 cos(3πx/2)`, `c = (1 - 0.15π)·2/π` |
/// | `tent` | `[-1, 1]` | `1 - |x|` |
/// | `zero` | `[-1, 1]` | `0` |
/// | `neg-cosine` | `[-3π/2, 3π/2]` | `-cos x` |
///
/// `bump` is positive, has slopes `±1` at the ends and a dip at the origin.
pub fn named_profile(name: &str, n_cells: usize) -> Result<Profile<f64>> {
    match name {
        "cosine" => Profile::from_fn(-1.0, 1.0, n_cells, |x| 2.0 / PI * (PI * x / 2.0).cos()),
        "bump" => {
            let c = (1.0 - 0.15 * PI) * 2.0 / PI;
            Profile::from_fn(-1.0, 1.0, n_cells, |x| c * (PI * x / 2.0).cos() - 0.1 * (1.5 * PI * x).cos())
        }
        "tent" => Profile::from_fn(-1.0, 1.0, n_cells, |x: f64| 1.0 - x.abs()),
        "zero" => Profile::zeros(-1.0, 1.0, n_cells),
        "neg-cosine" => Profile::from_fn(-1.5 * PI, 1.5 * PI, n_cells, |x: f64| -x.cos()),
        other => Err(Error::Config(format!("unknown profile {other:?}"))),
    }
}

/// A flat key-value experiment description. Fields that a kind does not
/// use are ignored; missing ones fall back to the defaults listed in the
/// accessor docs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    /// Named shape, see [`named_profile`].
    #[serde(default)]
    pub profile: Option<String>,
    /// Two-column CSV profile; takes precedence over `profile`.
    #[serde(default)]
    pub profile_csv: Option<PathBuf>,
    #[serde(default)]
    pub profile_cells: Option<usize>,
    /// Half-lengths.
    #[serde(default)]
    pub l: Vec<usize>,
    #[serde(default)]
    pub seeds: Option<usize>,
    /// First seed; runs use `seed, seed + 1, …`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub lambda: Option<PinningParameter>,
    #[serde(default)]
    pub walled: Option<bool>,
    /// Rescaled final time (microscopic for `contact-decay`).
    #[serde(default)]
    pub horizon: Option<f64>,
    /// Observation times, same units as `horizon`.
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub dx: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub modes: Option<usize>,
    /// Window of the fixed-point solver.
    #[serde(default)]
    pub t0: Option<f64>,
    /// Main pass threshold of the experiment.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Fraction of seeds that must meet `tolerance`.
    #[serde(default)]
    pub fraction: Option<f64>,
    /// Stefan checks to evaluate.
    #[serde(default)]
    pub checks: Vec<String>,
    /// Accepted range of the fitted log-log slope.
    #[serde(default)]
    pub slope_range: Option<[f64; 2]>,
    /// Number of random instances (coupling pairs, Agmon profiles).
    #[serde(default)]
    pub samples: Option<usize>,
    /// Extra site for `contact-decay`, e.g. near the boundary.
    #[serde(default)]
    pub site: Option<i64>,
    /// `λ` values for `oracle`.
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(name: impl Into<String>, kind: ExperimentKind) -> Self {
        Self {
            name: name.into(),
            kind,
            profile: None,
            profile_csv: None,
            profile_cells: None,
            l: Vec::new(),
            seeds: None,
            seed: 0,
            lambda: None,
            walled: None,
            horizon: None,
            times: Vec::new(),
            dx: None,
            dt: None,
            modes: None,
            t0: None,
            tolerance: None,
            fraction: None,
            checks: Vec::new(),
            slope_range: None,
            samples: None,
            site: None,
            lambdas: Vec::new(),
            out_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut spec = Self::from_toml(&std::fs::read_to_string(path)?)?;
        if let Some(csv) = &spec.profile_csv {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    spec.profile_csv = Some(dir.join(csv));
                }
            }
        }
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("specs serialise")
    }

    /// SHA-256 of the canonical serialisation, first 16 hex digits.
    pub fn config_hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("specs serialise");
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// The initial profile; `cosine` if none is given.
    pub fn initial_profile(&self) -> Result<Profile<f64>> {
        if let Some(path) = &self.profile_csv {
            return Profile::read_csv(path);
        }
        named_profile(self.profile.as_deref().unwrap_or("cosine"), self.profile_cells.unwrap_or(4096))
    }

    pub fn seed_count(&self) -> usize {
        self.seeds.unwrap_or(1)
    }

    /// Last seed used.
    pub fn seed_last(&self) -> u64 {
        self.seed.wrapping_add(self.seed_count().max(1) as u64 - 1)
    }

    pub fn tolerance_or(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }

    pub fn fraction_or(&self, default: f64) -> f64 {
        self.fraction.unwrap_or(default)
    }

    pub fn lambda_or(&self, default: PinningParameter) -> PinningParameter {
        self.lambda.unwrap_or(default)
    }

    pub fn require_horizon(&self) -> Result<f64> {
        self.horizon.ok_or_else(|| Error::Config(format!("{}: `horizon` is required", self.name)))
    }

    pub fn require_l(&self) -> Result<&[usize]> {
        if self.l.is_empty() {
            return Err(Error::Config(format!("{}: `l` is required", self.name)));
        }
        Ok(&self.l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_flat_config() {
        let spec = ExperimentSpec::from_toml(
            r#"
            name = "demo"
            kind = "repulsive-limit"
            profile = "cosine"
            l = [64, 128]
            seeds = 20
            lambda = 1
            horizon = 0.5
            times = [0.1, 0.5]
            "#,
        )
        .unwrap();
        assert_eq!(spec.kind, ExperimentKind::RepulsiveLimit);
        assert_eq!(spec.lambda, Some(PinningParameter::Finite(1.0)));
        assert_eq!(spec.seed_last(), 19);
        let back = ExperimentSpec::from_toml(&spec.to_toml()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn infinite_lambda_and_unknown_keys() {
        let spec = ExperimentSpec::from_toml("name = \"s\"\nkind = \"sticky-limit\"\nlambda = \"inf\"\n").unwrap();
        assert!(spec.lambda.unwrap().is_infinite());
        assert!(ExperimentSpec::from_toml("name = \"s\"\nkind = \"sticky-limit\"\nlamda = 2\n").is_err());
    }

    #[test]
    fn hash_tracks_every_field() {
        let a = ExperimentSpec::new("x", ExperimentKind::Agmon);
        let mut b = a.clone();
        assert_eq!(a.config_hash(), b.config_hash());
        b.samples = Some(10);
        assert_ne!(a.config_hash(), b.config_hash());
        b = a.clone();
        b.seed = 1;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn named_profiles() {
        let bump = named_profile("bump", 4096).unwrap();
        assert!(bump.min_value() >= 0.0 && bump.is_lipschitz_1(1e-6));
        assert!(bump.eval(0.0) < bump.eval(0.3));
        let neg = named_profile("neg-cosine", 1024).unwrap();
        assert!((neg.integral() - 2.0).abs() < 1e-4);
        assert!(named_profile("nope", 8).is_err());
    }
}
