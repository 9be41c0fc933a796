//! Run configuration: a TOML file, command-line flags on top, defaults underneath.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use amalgam_core::sharpness::CLAIMS;
use amalgam_core::Exponent;
use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Norms,
    FixedTime,
    Strichartz,
    Sharpness,
    Potential,
    Region,
    All,
}

impl Experiment {
    pub const SUITES: [Experiment; 6] = [
        Experiment::Norms,
        Experiment::FixedTime,
        Experiment::Strichartz,
        Experiment::Sharpness,
        Experiment::Potential,
        Experiment::Region,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Norms => "norms",
            Experiment::FixedTime => "fixed-time",
            Experiment::Strichartz => "strichartz",
            Experiment::Sharpness => "sharpness",
            Experiment::Potential => "potential",
            Experiment::Region => "region",
            Experiment::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Experiment> {
        match self {
            Experiment::All => Experiment::SUITES.to_vec(),
            e => vec![e],
        }
    }
}

/// An exponent written as a number or as `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exp(pub Exponent);

impl FromStr for Exp {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let v = match s {
            "inf" | "infinity" => f64::INFINITY,
            _ => s
                .parse::<f64>()
                .map_err(|_| format!("`{s}` is not a number or `inf`"))?,
        };
        Exponent::new(v).map(Exp).map_err(|e| e.to_string())
    }
}

impl fmt::Display for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Exp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_infinite() => "inf".to_string(),
            Raw::Num(v) => v.to_string(),
            Raw::Text(t) => t,
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// `(q1, r1, q2, r2)`, written `q1,r1,q2,r2` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quad(pub [Exp; 4]);

impl FromStr for Quad {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts = s
            .split(',')
            .map(Exp::from_str)
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let arr: [Exp; 4] = parts
            .try_into()
            .map_err(|_| format!("`{s}` is not four exponents q1,r1,q2,r2"))?;
        Ok(Quad(arr))
    }
}

/// Settings shared by the flag parser and the config file. Every field is optional so
/// that the two layers can be merged.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Spatial dimension (1 to 3).
    #[arg(long, visible_alias = "d")]
    pub dim: Option<usize>,
    /// Grid points per axis (power of two); replaces the experiment's own choice.
    #[arg(long)]
    pub grid_n: Option<usize>,
    /// Box side length; replaces the experiment's own choice.
    #[arg(long)]
    pub grid_l: Option<f64>,
    /// Seed for random potentials and spot checks.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Absolute tolerance on fitted exponents.
    #[arg(long)]
    pub tol_slope: Option<f64>,
    /// Relative tolerance on norm comparisons.
    #[arg(long)]
    pub tol_norm: Option<f64>,
    /// Write binary field snapshots next to the report.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub dump_fields: Option<bool>,

    /// Norm exponents for the oracle comparison.
    #[arg(long, value_delimiter = ',')]
    pub exponents: Option<Vec<Exp>>,
    /// Real parts `a` of the Gaussian parameter `a + ib`.
    #[arg(long, value_delimiter = ',')]
    pub widths_a: Option<Vec<f64>>,
    /// Imaginary parts `b` of the Gaussian parameter `a + ib`.
    #[arg(long, value_delimiter = ',')]
    pub widths_b: Option<Vec<f64>>,
    /// Times for the propagator fidelity check.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,

    /// Local exponents `r` for the fixed-time checks and single-claim runs.
    #[arg(long, value_delimiter = ',')]
    pub r: Option<Vec<Exp>>,
    /// Run a single sharpness claim instead of the whole suite.
    #[arg(long)]
    pub claim: Option<String>,
    #[arg(long)]
    pub alpha: Option<Exp>,
    #[arg(long)]
    pub beta: Option<Exp>,
    #[arg(long)]
    pub q1: Option<Exp>,
    #[arg(long)]
    pub r1: Option<Exp>,
    #[arg(long)]
    pub q2: Option<Exp>,
    #[arg(long)]
    pub r2: Option<Exp>,

    /// Smallest λ of the Strichartz family.
    #[arg(long)]
    pub lambda_min: Option<f64>,
    /// Largest λ of the Strichartz family.
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Number of log-spaced λ values.
    #[arg(long)]
    pub lambda_count: Option<usize>,
    /// Time horizons `T` before automatic doubling.
    #[arg(long, value_delimiter = ',')]
    pub horizons: Option<Vec<f64>>,
    /// Exponent quadruple `q1,r1,q2,r2` (repeatable).
    #[arg(long = "quad")]
    pub quadruples: Option<Vec<Quad>>,

    /// Potential time exponent.
    #[arg(long)]
    pub potential_alpha: Option<Exp>,
    /// Potential space exponent.
    #[arg(long)]
    pub potential_p: Option<Exp>,
    /// Sobolev regularity of the random potential.
    #[arg(long)]
    pub sobolev_s: Option<f64>,
    /// Peak amplitude of the random potential.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Horizon of the mass-conservation run.
    #[arg(long)]
    pub potential_horizon: Option<f64>,
    /// Base time step.
    #[arg(long)]
    pub time_step: Option<f64>,
    /// Refinement factor of the Picard comparison over the base step.
    #[arg(long)]
    pub picard_refine: Option<usize>,

    /// Raster resolution of the admissible region.
    #[arg(long)]
    pub resolution: Option<usize>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Settings> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Fully resolved configuration; echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub dim: usize,
    pub grid_n: Option<usize>,
    pub grid_l: Option<f64>,
    pub seed: u64,
    #[serde(skip)]
    pub jobs: Option<usize>,
    #[serde(skip)]
    pub out: PathBuf,
    pub tol_slope: f64,
    pub tol_norm: f64,
    pub dump_fields: bool,
    pub exponents: Vec<Exp>,
    pub widths_a: Vec<f64>,
    pub widths_b: Vec<f64>,
    pub times: Vec<f64>,
    pub r: Vec<Exp>,
    pub claim: Option<String>,
    pub alpha: Exp,
    pub beta: Exp,
    pub q1: Exp,
    pub r1: Exp,
    pub q2: Exp,
    pub r2: Exp,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_count: usize,
    pub horizons: Vec<f64>,
    pub quadruples: Vec<Quad>,
    pub potential_alpha: Exp,
    pub potential_p: Exp,
    pub sobolev_s: f64,
    pub amplitude: f64,
    pub potential_horizon: f64,
    pub time_step: f64,
    pub picard_refine: usize,
    pub resolution: usize,
}

fn exps(vals: &[f64]) -> Vec<Exp> {
    vals.iter()
        .map(|&v| Exp(Exponent::new(v).expect("valid default exponent")))
        .collect()
}

fn quads(vals: &[[f64; 4]]) -> Vec<Quad> {
    vals.iter()
        .map(|q| Quad(exps(q).try_into().expect("four exponents")))
        .collect()
}

impl RunConfig {
    /// Flags override the file; the file overrides the defaults.
    pub fn resolve(
        experiment: Experiment,
        flags: Settings,
        file: Settings,
        out: PathBuf,
    ) -> Result<RunConfig> {
        macro_rules! pick {
            ($field:ident, $default:expr) => {
                flags
                    .$field
                    .clone()
                    .or(file.$field.clone())
                    .unwrap_or_else(|| $default)
            };
            ($field:ident) => {
                flags.$field.clone().or(file.$field.clone())
            };
        }
        let inf = f64::INFINITY;
        let e = |v: f64| Exp(Exponent::new(v).expect("valid default exponent"));
        let cfg = RunConfig {
            experiment,
            dim: pick!(dim, 1),
            grid_n: pick!(grid_n),
            grid_l: pick!(grid_l),
            seed: pick!(seed, 7),
            jobs: pick!(jobs),
            out,
            tol_slope: pick!(tol_slope, 0.05),
            tol_norm: pick!(tol_norm, 0.02),
            dump_fields: pick!(dump_fields, false),
            exponents: pick!(exponents, exps(&[1.0, 2.0, 4.0, inf])),
            widths_a: pick!(widths_a, vec![0.25, 1.0, 4.0]),
            widths_b: pick!(widths_b, vec![0.0, 1.0, 10.0]),
            times: pick!(times, vec![0.1, 1.0, 10.0]),
            r: pick!(r, exps(&[4.0, inf])),
            claim: pick!(claim),
            alpha: pick!(alpha, e(3.0)),
            beta: pick!(beta, e(6.0)),
            q1: pick!(q1, e(8.0)),
            r1: pick!(r1, e(4.0)),
            q2: pick!(q2, e(8.0)),
            r2: pick!(r2, e(4.0)),
            lambda_min: pick!(lambda_min, 0.1),
            lambda_max: pick!(lambda_max, 10.0),
            lambda_count: pick!(lambda_count, 5),
            horizons: pick!(horizons, vec![20.0, 40.0]),
            quadruples: pick!(
                quadruples,
                quads(&[
                    [inf, 2.0, 8.0, 4.0],
                    [8.0, 4.0, 8.0, 4.0],
                    [8.0, 4.0, 6.0, 6.0],
                    [4.0, 2.0, 16.0, 4.0],
                    [6.0, 3.0, 12.0, 6.0],
                ])
            ),
            potential_alpha: pick!(potential_alpha, e(2.0)),
            potential_p: pick!(potential_p, e(4.0)),
            sobolev_s: pick!(sobolev_s, 0.3),
            amplitude: pick!(amplitude, 10.0),
            potential_horizon: pick!(potential_horizon, 0.5),
            time_step: pick!(time_step, 2.5e-4),
            picard_refine: pick!(picard_refine, 2),
            resolution: pick!(resolution, 64),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            bail!("--dim must be 1, 2 or 3, got {}", self.dim);
        }
        if let Some(n) = self.grid_n {
            if n < 2 || !n.is_power_of_two() {
                bail!("--grid-n must be a power of two >= 2, got {n}");
            }
        }
        if let Some(l) = self.grid_l {
            if !(l > 0.0 && l.is_finite()) {
                bail!("--grid-l must be positive, got {l}");
            }
        }
        if self.jobs == Some(0) {
            bail!("--jobs must be positive");
        }
        for (name, v) in [
            ("--tol-slope", self.tol_slope),
            ("--tol-norm", self.tol_norm),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive, got {v}");
            }
        }
        for (name, empty) in [
            ("--exponents", self.exponents.is_empty()),
            ("--widths-a", self.widths_a.is_empty()),
            ("--widths-b", self.widths_b.is_empty()),
            ("--times", self.times.is_empty()),
            ("--r", self.r.is_empty()),
            ("--horizons", self.horizons.is_empty()),
            ("--quad", self.quadruples.is_empty()),
        ] {
            if empty {
                bail!("{name} must not be empty");
            }
        }
        if self.widths_a.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            bail!("--widths-a entries must be positive");
        }
        if self.widths_b.iter().any(|b| !b.is_finite()) {
            bail!("--widths-b entries must be finite");
        }
        if self.times.iter().any(|&t| t == 0.0 || !t.is_finite()) {
            bail!("--times entries must be finite and nonzero");
        }
        if !(self.lambda_min > 0.0
            && self.lambda_min < self.lambda_max
            && self.lambda_max.is_finite())
        {
            bail!(
                "λ range must satisfy 0 < lambda-min < lambda-max, got [{}, {}]",
                self.lambda_min,
                self.lambda_max
            );
        }
        if self.lambda_count < 2 {
            bail!("--lambda-count must be at least 2");
        }
        if self.horizons.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            bail!("--horizons entries must be positive");
        }
        if let Some(c) = &self.claim {
            if !CLAIMS.contains(&c.as_str()) {
                bail!("unknown claim `{c}`; known claims: {}", CLAIMS.join(", "));
            }
        }
        if !(self.potential_horizon > 0.0 && self.time_step > 0.0 && self.amplitude >= 0.0) {
            bail!("potential horizon, time step and amplitude must be positive");
        }
        if self.picard_refine == 0 {
            bail!("--picard-refine must be positive");
        }
        if self.resolution == 0 {
            bail!("--resolution must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(flags: Settings, file: Settings) -> Result<RunConfig> {
        RunConfig::resolve(Experiment::All, flags, file, PathBuf::from("out"))
    }

    #[test]
    fn exponents_parse() {
        assert!("inf".parse::<Exp>().unwrap().0.is_infinite());
        assert_eq!("4".parse::<Exp>().unwrap().0.value(), 4.0);
        assert!("0.5".parse::<Exp>().is_err());
        assert!("x".parse::<Exp>().is_err());
        let q: Quad = "inf,2,8,4".parse().unwrap();
        assert!(q.0[0].0.is_infinite());
        assert!("1,2,3".parse::<Quad>().is_err());
    }

    #[test]
    fn flags_override_file_and_defaults() {
        let file: Settings = toml::from_str(
            "dim = 2\nseed = 3\ntol-slope = 0.1\nr = [4, \"inf\"]\nquadruples = [[\"inf\", 2, 8, 4]]",
        )
        .unwrap();
        let flags = Settings {
            seed: Some(11),
            ..Settings::default()
        };
        let cfg = resolve(flags, file).unwrap();
        assert_eq!(cfg.dim, 2);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.tol_slope, 0.1);
        assert_eq!(cfg.tol_norm, 0.02);
        assert!(cfg.r[1].0.is_infinite());
        assert_eq!(cfg.quadruples.len(), 1);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(toml::from_str::<Settings>("colour = 1").is_err());
        let bad = |s: Settings| resolve(s, Settings::default()).is_err();
        assert!(bad(Settings {
            dim: Some(4),
            ..Settings::default()
        }));
        assert!(bad(Settings {
            grid_n: Some(100),
            ..Settings::default()
        }));
        assert!(bad(Settings {
            claim: Some("nonsense".into()),
            ..Settings::default()
        }));
        assert!(bad(Settings {
            lambda_min: Some(20.0),
            ..Settings::default()
        }));
    }

    #[test]
    fn echo_omits_machine_specific_fields() {
        let cfg = resolve(
            Settings {
                jobs: Some(3),
                ..Settings::default()
            },
            Settings::default(),
        )
        .unwrap();
        let json = serde_json::to_value(&cfg).unwrap();
        assert!(json.get("jobs").is_none());
        assert!(json.get("out").is_none());
        assert_eq!(json["r"][1], "inf");
    }
}
