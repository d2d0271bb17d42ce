use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::freq_profile::FrequencyProfile;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Job {
    KernelGrid,
    SolveF,
    Propagate,
    Validate,
    OracleCompare,
}

impl Job {
    pub fn as_str(&self) -> &'static str {
        match self {
            Job::KernelGrid => "kernel-grid",
            Job::SolveF => "solve-f",
            Job::Propagate => "propagate",
            Job::Validate => "validate",
            Job::OracleCompare => "oracle-compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KernelPath {
    #[default]
    Robust,
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Kernel,
    CrankNicolson,
    TimeSliced,
}

/// One experiment. Every key has a command-line flag of the same name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "defaults::version")]
    pub schema_version: u32,
    pub job: Job,
    pub profile: FrequencyProfile,
    #[serde(default = "defaults::one")]
    pub mass: f64,
    #[serde(default)]
    pub t_a: f64,
    #[serde(default = "defaults::one")]
    pub t_b: f64,
    /// Local tolerance of the classical solver.
    #[serde(default = "defaults::tol")]
    pub tol: f64,

    #[serde(default = "defaults::q_lo")]
    pub q_a_min: f64,
    #[serde(default = "defaults::q_hi")]
    pub q_a_max: f64,
    #[serde(default = "defaults::q_n")]
    pub q_a_n: usize,
    #[serde(default = "defaults::q_lo")]
    pub q_b_min: f64,
    #[serde(default = "defaults::q_hi")]
    pub q_b_max: f64,
    #[serde(default = "defaults::q_n")]
    pub q_b_n: usize,
    #[serde(default)]
    pub kernel_path: KernelPath,

    /// Number of output times for solve-f.
    #[serde(default = "defaults::samples")]
    pub samples: usize,

    #[serde(default = "defaults::grid_lo")]
    pub q_min: f64,
    #[serde(default = "defaults::grid_hi")]
    pub q_max: f64,
    #[serde(default = "defaults::grid_n")]
    pub n_points: usize,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub momentum: f64,
    #[serde(default = "defaults::sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub method: Method,
    #[serde(default = "defaults::dt")]
    pub dt: f64,
    #[serde(default = "defaults::n_slices")]
    pub n_slices: usize,

    /// Finite-difference step for validate.
    #[serde(default = "defaults::h")]
    pub h: f64,
    /// Largest pairwise L² distance accepted by oracle-compare.
    #[serde(default = "defaults::agreement")]
    pub agreement_tol: f64,
    #[serde(default)]
    pub strict: bool,

    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    /// File stem for artifacts; defaults to the job name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

mod defaults {
    use std::path::PathBuf;

    pub fn version() -> u32 {
        super::SCHEMA_VERSION
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn tol() -> f64 {
        1e-10
    }
    pub fn q_lo() -> f64 {
        -2.0
    }
    pub fn q_hi() -> f64 {
        2.0
    }
    pub fn q_n() -> usize {
        21
    }
    pub fn samples() -> usize {
        101
    }
    pub fn grid_lo() -> f64 {
        -20.0
    }
    pub fn grid_hi() -> f64 {
        20.0
    }
    pub fn grid_n() -> usize {
        2048
    }
    pub fn sigma() -> f64 {
        std::f64::consts::FRAC_1_SQRT_2
    }
    pub fn dt() -> f64 {
        1e-3
    }
    pub fn n_slices() -> usize {
        256
    }
    pub fn h() -> f64 {
        1e-2
    }
    pub fn agreement() -> f64 {
        1e-3
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("tdho-out")
    }
}

/// A schema violation located by JSON path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at \"{}\": {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn at(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        path: path.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parses and checks a config object. A manifest (an object with a
    /// `config` member) is accepted in place of a config.
    pub fn from_value(value: Value) -> Result<Self, ConfigError> {
        let value = match value {
            Value::Object(mut map) if !map.contains_key("profile") && map.contains_key("config") => {
                map.remove("config").unwrap()
            }
            other => other,
        };
        let Value::Object(map) = &value else {
            return Err(at("$", "expected a JSON object"));
        };
        for key in ["profile", "job"] {
            if !map.contains_key(key) {
                return Err(at(&format!("$.{key}"), "required field is missing"));
            }
        }
        let config: ExperimentConfig =
            serde_path_to_error::deserialize(&value).map_err(|e| {
                let path = e.path().to_string();
                let path = if path == "." {
                    "$".to_string()
                } else {
                    format!("$.{path}")
                };
                at(&path, e.into_inner().to_string())
            })?;
        config.check()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| at("$", format!("invalid JSON: {e}")))?;
        Self::from_value(value)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(at(
                "$.schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        let positive = [
            ("mass", self.mass),
            ("tol", self.tol),
            ("sigma", self.sigma),
            ("dt", self.dt),
            ("h", self.h),
            ("agreement_tol", self.agreement_tol),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(at(&format!("$.{key}"), format!("must be positive, got {v}")));
            }
        }
        let finite = [
            ("t_a", self.t_a),
            ("t_b", self.t_b),
            ("q_a_min", self.q_a_min),
            ("q_a_max", self.q_a_max),
            ("q_b_min", self.q_b_min),
            ("q_b_max", self.q_b_max),
            ("q_min", self.q_min),
            ("q_max", self.q_max),
            ("center", self.center),
            ("momentum", self.momentum),
        ];
        for (key, v) in finite {
            if !v.is_finite() {
                return Err(at(&format!("$.{key}"), "must be finite"));
            }
        }
        if !(self.t_b > self.t_a) {
            return Err(at("$.t_b", format!("must exceed t_a = {}", self.t_a)));
        }
        for (key, lo, hi, n) in [
            ("q_a", self.q_a_min, self.q_a_max, self.q_a_n),
            ("q_b", self.q_b_min, self.q_b_max, self.q_b_n),
        ] {
            if n == 0 {
                return Err(at(&format!("$.{key}_n"), "must be at least 1"));
            }
            if n > 1 && !(hi > lo) {
                return Err(at(&format!("$.{key}_max"), format!("must exceed {key}_min")));
            }
        }
        if self.samples < 2 {
            return Err(at("$.samples", "must be at least 2"));
        }
        if self.n_points < crate::evolve::MIN_POINTS {
            return Err(at(
                "$.n_points",
                format!("must be at least {}", crate::evolve::MIN_POINTS),
            ));
        }
        if !(self.q_max > self.q_min) {
            return Err(at("$.q_max", "must exceed q_min"));
        }
        if self.n_slices == 0 {
            return Err(at("$.n_slices", "must be at least 1"));
        }
        if let Some(name) = &self.name {
            let ok = !name.is_empty()
                && name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
                && !name.starts_with('.');
            if !ok {
                return Err(at("$.name", "use letters, digits, '-', '_' and '.' only"));
            }
        }
        Ok(())
    }

    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.job.as_str().to_string())
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    /// SHA-256 of the canonical (sorted-key) JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.to_value()).expect("config serializes");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Overlays `flags` onto `base`, key by key.
pub fn overlay(base: Value, flags: Map<String, Value>) -> Value {
    match base {
        Value::Object(mut map) => {
            map.extend(flags);
            Value::Object(map)
        }
        other if flags.is_empty() => other,
        _ => Value::Object(flags),
    }
}
