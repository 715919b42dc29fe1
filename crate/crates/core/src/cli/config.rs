//! Scenario configuration: a flat `key = value` file merged with command-line
//! overrides. Overrides win.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

/// Validation failure naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Evolve,
    Trajectories,
    DampedRabi,
    Projective,
    Mch,
    Compare,
    Sweep,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Evolve => "evolve",
            Scenario::Trajectories => "trajectories",
            Scenario::DampedRabi => "damped-rabi",
            Scenario::Projective => "projective",
            Scenario::Mch => "mch",
            Scenario::Compare => "compare",
            Scenario::Sweep => "sweep",
        }
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "evolve" => Scenario::Evolve,
            "trajectories" => Scenario::Trajectories,
            "damped-rabi" | "damped_rabi" => Scenario::DampedRabi,
            "projective" => Scenario::Projective,
            "mch" => Scenario::Mch,
            "compare" => Scenario::Compare,
            "sweep" => Scenario::Sweep,
            other => return Err(ConfigError::new("scenario", format!("unknown scenario `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisScale {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    Omega,
    Gamma,
    Time,
    Tau,
}

impl AxisName {
    pub fn name(&self) -> &'static str {
        match self {
            AxisName::Omega => "omega",
            AxisName::Gamma => "gamma",
            AxisName::Time => "time",
            AxisName::Tau => "tau",
        }
    }
}

/// Sweep axis `name:min:max:count:lin|log`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    AxisScale::Lin => self.min + (self.max - self.min) * f,
                    AxisScale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                }
            })
            .collect()
    }
}

impl FromStr for Axis {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| ConfigError::new("axis", format!("{msg} (expected name:min:max:count:lin|log, got `{s}`)"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(bad("wrong number of fields"));
        }
        let name = match parts[0] {
            "omega" => AxisName::Omega,
            "gamma" => AxisName::Gamma,
            "time" => AxisName::Time,
            "tau" => AxisName::Tau,
            _ => return Err(bad("unknown axis name")),
        };
        let min: f64 = parts[1].parse().map_err(|_| bad("min is not a number"))?;
        let max: f64 = parts[2].parse().map_err(|_| bad("max is not a number"))?;
        let count: usize = parts[3].parse().map_err(|_| bad("count is not an integer"))?;
        let scale = match parts[4] {
            "lin" => AxisScale::Lin,
            "log" => AxisScale::Log,
            _ => return Err(bad("scale must be lin or log")),
        };
        if count < 2 {
            return Err(bad("count must be >= 2"));
        }
        if !(min.is_finite() && max.is_finite()) || max < min {
            return Err(bad("need finite min <= max"));
        }
        if min < 0.0 || (matches!(name, AxisName::Tau | AxisName::Time) && min <= 0.0) {
            return Err(bad("axis values must be positive"));
        }
        if scale == AxisScale::Log && min <= 0.0 {
            return Err(bad("log axis needs min > 0"));
        }
        Ok(Axis { name, min, max, count, scale })
    }
}

/// Unresolved settings from one source; `None` means "not given here".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub omega: Option<f64>,
    pub gamma: Option<f64>,
    pub delta_omega: Option<f64>,
    pub time: Option<f64>,
    pub tau: Option<f64>,
    pub n_measurements: Option<u64>,
    pub n_traj: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub samples: Option<usize>,
    pub bins: Option<usize>,
    pub axis: Option<Axis>,
    pub dimensionless: Option<bool>,
    pub svg: Option<bool>,
}

fn parse_value<T: FromStr>(field: &str, raw: &str) -> Result<T, ConfigError> {
    raw.parse().map_err(|_| ConfigError::new(field, format!("cannot parse `{raw}`")))
}

fn parse_bool(field: &str, raw: &str) -> Result<bool, ConfigError> {
    match raw {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError::new(field, format!("expected a boolean, got `{raw}`"))),
    }
}

impl Settings {
    /// Parses `key = value` lines; `#` starts a comment. Keys accept either
    /// `_` or `-` as separator. A `scenario` key is returned separately.
    pub fn parse(text: &str) -> Result<(Settings, Option<Scenario>), ConfigError> {
        let mut s = Settings::default();
        let mut scenario = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::new("config", format!("line {}: expected `key = value`", lineno + 1)));
            };
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            match key.as_str() {
                "scenario" => scenario = Some(value.parse()?),
                "omega" => s.omega = Some(parse_value("omega", value)?),
                "gamma" => s.gamma = Some(parse_value("gamma", value)?),
                "delta_omega" => s.delta_omega = Some(parse_value("delta_omega", value)?),
                "time" => s.time = Some(parse_value("time", value)?),
                "tau" => s.tau = Some(parse_value("tau", value)?),
                "n_measurements" => s.n_measurements = Some(parse_value("n_measurements", value)?),
                "n_traj" => s.n_traj = Some(parse_value("n_traj", value)?),
                "seed" => s.seed = Some(parse_value("seed", value)?),
                "out" => s.out = Some(PathBuf::from(value)),
                "samples" => s.samples = Some(parse_value("samples", value)?),
                "bins" => s.bins = Some(parse_value("bins", value)?),
                "axis" => s.axis = Some(value.parse()?),
                "dimensionless" => s.dimensionless = Some(parse_bool("dimensionless", value)?),
                "svg" => s.svg = Some(parse_bool("svg", value)?),
                other => return Err(ConfigError::new(other.to_string(), "unknown configuration key")),
            }
        }
        Ok((s, scenario))
    }

    pub fn load(path: &Path) -> Result<(Settings, Option<Scenario>), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(self, other: Settings) -> Settings {
        Settings {
            omega: other.omega.or(self.omega),
            gamma: other.gamma.or(self.gamma),
            delta_omega: other.delta_omega.or(self.delta_omega),
            time: other.time.or(self.time),
            tau: other.tau.or(self.tau),
            n_measurements: other.n_measurements.or(self.n_measurements),
            n_traj: other.n_traj.or(self.n_traj),
            seed: other.seed.or(self.seed),
            out: other.out.or(self.out),
            samples: other.samples.or(self.samples),
            bins: other.bins.or(self.bins),
            axis: other.axis.or(self.axis),
            dimensionless: other.dimensionless.or(self.dimensionless),
            svg: other.svg.or(self.svg),
        }
    }
}

pub const DEFAULT_SAMPLES: usize = 500;
pub const DEFAULT_N_TRAJ: u64 = 10_000;
pub const DEFAULT_OUT: &str = "zenolab-out";

/// Fully resolved and validated scenario configuration. Times are physical
/// (already rescaled when given in units of 1/Ω).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub omega: f64,
    pub gamma: f64,
    pub delta_omega: f64,
    pub time: f64,
    pub tau: Option<f64>,
    pub n_measurements: Option<u64>,
    pub n_traj: u64,
    pub master_seed: u64,
    #[serde(skip)]
    pub output_path: PathBuf,
    pub sample_points: usize,
    pub bins: usize,
    pub axis: Option<Axis>,
    pub dimensionless: bool,
    #[serde(skip)]
    pub svg: bool,
}

fn require(field: &str, value: Option<f64>) -> Result<f64, ConfigError> {
    value.ok_or_else(|| ConfigError::new(field, "required but not given"))
}

fn non_negative(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be finite and >= 0, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::new(field, format!("must be finite and > 0, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn resolve(scenario: Scenario, s: Settings) -> Result<Self, ConfigError> {
        let omega = non_negative("omega", require("omega", s.omega)?)?;
        let gamma = non_negative("gamma", require("gamma", s.gamma)?)?;
        let delta_omega = positive("delta_omega", s.delta_omega.unwrap_or(1.0))?;
        let dimensionless = s.dimensionless.unwrap_or(false);
        if dimensionless && omega <= 0.0 {
            return Err(ConfigError::new("dimensionless", "time in units of 1/omega needs omega > 0"));
        }
        let unit = if dimensionless { 1.0 / omega } else { 1.0 };

        let mut time = s.time.map(|t| t * unit);
        let tau = s.tau.map(|t| positive("tau", t * unit)).transpose()?;
        let n_measurements = s.n_measurements;
        if n_measurements == Some(0) {
            return Err(ConfigError::new("n_measurements", "must be >= 1"));
        }
        if time.is_none() {
            if let (Some(tau), Some(n)) = (tau, n_measurements) {
                time = Some(tau * n as f64);
            }
        }
        let time = positive("time", require("time", time)?)?;

        let n_traj = s.n_traj.unwrap_or(DEFAULT_N_TRAJ);
        if n_traj == 0 {
            return Err(ConfigError::new("n_traj", "must be >= 1"));
        }
        let sample_points = s.samples.unwrap_or(DEFAULT_SAMPLES);
        if sample_points < 2 {
            return Err(ConfigError::new("samples", "must be >= 2"));
        }
        let bins = s.bins.unwrap_or(crate::trajectories::DEFAULT_BINS);
        if bins == 0 {
            return Err(ConfigError::new("bins", "must be >= 1"));
        }

        match scenario {
            Scenario::Compare if gamma <= 0.0 => {
                return Err(ConfigError::new("gamma", "compare needs gamma > 0"));
            }
            Scenario::Projective if tau.is_none() && gamma <= 0.0 => {
                return Err(ConfigError::new("tau", "required when gamma = 0 (default is 2/gamma)"));
            }
            Scenario::Sweep if s.axis.is_none() => {
                return Err(ConfigError::new("axis", "sweep needs --axis name:min:max:count:lin|log"));
            }
            _ => {}
        }

        Ok(ScenarioConfig {
            scenario,
            omega,
            gamma,
            delta_omega,
            time,
            tau,
            n_measurements,
            n_traj,
            master_seed: s.seed.unwrap_or(0),
            output_path: s.out.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            sample_points,
            bins,
            axis: s.axis,
            dimensionless,
            svg: s.svg.unwrap_or(false),
        })
    }

    /// Settings echo for the JSON summary.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("scenario");
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(omega: f64, gamma: f64, time: f64) -> Settings {
        Settings { omega: Some(omega), gamma: Some(gamma), time: Some(time), ..Default::default() }
    }

    #[test]
    fn parses_key_value_file() {
        let text = "# comment\nscenario = compare\nomega = 1\ngamma=100 # strong\ndelta-omega = 2\ntime = 5\nseed = 7\n";
        let (s, scenario) = Settings::parse(text).unwrap();
        assert_eq!(scenario, Some(Scenario::Compare));
        assert_eq!(s.gamma, Some(100.0));
        assert_eq!(s.delta_omega, Some(2.0));
        assert_eq!(s.seed, Some(7));
    }

    #[test]
    fn unknown_key_names_the_field() {
        let err = Settings::parse("omegaa = 1").unwrap_err();
        assert_eq!(err.field, "omegaa");
    }

    #[test]
    fn override_wins() {
        let file = settings(1.0, 10.0, 5.0);
        let cli = Settings { gamma: Some(20.0), ..Default::default() };
        let merged = file.overridden_by(cli);
        assert_eq!(merged.gamma, Some(20.0));
        assert_eq!(merged.omega, Some(1.0));
    }

    #[test]
    fn negative_gamma_is_rejected() {
        let err = ScenarioConfig::resolve(Scenario::Evolve, settings(1.0, -1.0, 5.0)).unwrap_err();
        assert_eq!(err.field, "gamma");
    }

    #[test]
    fn missing_time_is_rejected() {
        let s = Settings { omega: Some(1.0), gamma: Some(1.0), ..Default::default() };
        assert_eq!(ScenarioConfig::resolve(Scenario::Evolve, s).unwrap_err().field, "time");
    }

    #[test]
    fn time_from_schedule() {
        let s = Settings { omega: Some(1.0), gamma: Some(0.0), tau: Some(0.02), n_measurements: Some(500), ..Default::default() };
        let c = ScenarioConfig::resolve(Scenario::Projective, s).unwrap();
        assert!((c.time - 10.0).abs() < 1e-12);
    }

    #[test]
    fn dimensionless_time_is_rescaled() {
        let mut s = settings(2.0, 1.0, 4.0);
        s.dimensionless = Some(true);
        let c = ScenarioConfig::resolve(Scenario::Evolve, s).unwrap();
        assert_eq!(c.time, 2.0);
    }

    #[test]
    fn axis_parsing() {
        let a: Axis = "gamma:1:1000:10:log".parse().unwrap();
        let pts = a.points();
        assert_eq!(pts.len(), 10);
        assert!((pts[0] - 1.0).abs() < 1e-12 && (pts[9] - 1000.0).abs() < 1e-9);
        assert!("gamma:1:1000:1:log".parse::<Axis>().is_err());
        assert!("gamma:0:10:5:log".parse::<Axis>().is_err());
        assert!("nu:1:2:3:lin".parse::<Axis>().is_err());
        let lin: Axis = "omega:0:2:3:lin".parse().unwrap();
        assert_eq!(lin.points(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn sweep_requires_axis() {
        let err = ScenarioConfig::resolve(Scenario::Sweep, settings(1.0, 1.0, 1.0)).unwrap_err();
        assert_eq!(err.field, "axis");
    }
}
