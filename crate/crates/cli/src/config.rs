//! Flat key-path configuration: one `section.key = value` per line, `#`
//! comments, strict schema (unknown or duplicate keys are rejected, errors
//! name the offending key). Every value has a documented default except the
//! conservation totals required by `map-params`.

use glyco_core::estimation::ParamBox;
use glyco_core::network::{RateConstants, N_PARAMS};

#[derive(Debug)]
pub enum ConfigError {
    /// Malformed line, unknown/duplicate key, unparsable or invalid value.
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Invalid(msg) => write!(f, "config error: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = Result<T, ConfigError>;

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// How state snapshots are recorded by `simulate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecordingChoice {
    Full,
    Slow,
    Grid,
    EveryNth,
}

/// Parsed experiment configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub n: u64,
    pub t: f64,
    pub kappa: RateConstants,
    pub init_z_a1: f64,
    pub init_z_a2: f64,
    pub init_z_a4: f64,
    pub init_a3: u64,
    pub init_e1: u64,
    pub init_e1star: u64,
    pub init_e1a1: u64,
    pub init_e1star_a1: u64,
    pub init_e2: u64,
    pub init_e2a2: u64,

    pub sim_replicates: usize,
    pub sim_recording: RecordingChoice,
    pub sim_record_dt: Option<f64>,
    pub sim_record_stride: usize,

    pub compare_grid: usize,

    pub validate_replicates: usize,
    pub validate_t: f64,
    pub validate_burn_in: f64,

    pub estimate_m: usize,
    pub estimate_grid: usize,
    pub estimate_data: DataSource,
    pub estimate_data_path: Option<String>,
    pub estimate_restarts: usize,
    pub estimate_tol: f64,
    pub estimate_penalty: f64,
    pub estimate_box_lo: [f64; N_PARAMS],
    pub estimate_box_hi: [f64; N_PARAMS],
    pub nm_max_iters: usize,
    pub nm_x_tol: f64,
    pub nm_f_tol: f64,

    pub identify_strategy: IdentifyStrategy,
    pub identify_candidates: usize,
    pub identify_tol_cond: f64,

    pub reduced_tol: f64,

    pub map_j1: Option<f64>,
    pub map_j2: Option<f64>,

    pub output_dir: String,
    pub output_formats: Formats,
    pub seed: u64,
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataSource {
    /// Simulate one SSA path inline and fit its scaled slow view.
    Ssa,
    /// Sample the reduced solution at the true parameters (noiseless data).
    Ode,
    /// Load a trajectory written by `simulate` (CSV + JSON sidecar).
    File,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdentifyStrategy {
    Equitime,
    Greedy,
}

/// Which report formats to emit where a command supports both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

impl Default for Config {
    fn default() -> Self {
        let box_ = ParamBox::benchmark_intervals();
        Config {
            n: 100,
            t: 20.0,
            kappa: RateConstants::benchmark(),
            init_z_a1: 1.0,
            init_z_a2: 1.0,
            init_z_a4: 1.0,
            init_a3: 1,
            init_e1: 5,
            init_e1star: 0,
            init_e1a1: 0,
            init_e1star_a1: 0,
            init_e2: 5,
            init_e2a2: 0,
            sim_replicates: 2,
            sim_recording: RecordingChoice::Slow,
            sim_record_dt: None,
            sim_record_stride: 100,
            compare_grid: 2000,
            validate_replicates: 40,
            validate_t: 250.0,
            validate_burn_in: 0.5,
            estimate_m: 50,
            estimate_grid: 2000,
            estimate_data: DataSource::Ssa,
            estimate_data_path: None,
            estimate_restarts: 3,
            estimate_tol: 1e-8,
            estimate_penalty: 1e12,
            estimate_box_lo: box_.lo,
            estimate_box_hi: box_.hi,
            nm_max_iters: 5000,
            nm_x_tol: 1e-6,
            nm_f_tol: 1e-10,
            identify_strategy: IdentifyStrategy::Equitime,
            identify_candidates: 200,
            identify_tol_cond: 1e12,
            reduced_tol: 1e-8,
            map_j1: None,
            map_j2: None,
            output_dir: "out".to_string(),
            output_formats: Formats {
                csv: true,
                json: true,
            },
            seed: 1,
            jobs: 0,
        }
    }
}

impl Config {
    /// Parses config text over the defaults; rejects unknown and duplicate
    /// keys, then validates cross-field invariants.
    pub fn parse(text: &str) -> CResult<Self> {
        let mut cfg = Config::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(invalid(format!("duplicate key \"{key}\"")));
            }
            cfg.apply(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> CResult<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> CResult<T>
        where
            T::Err: std::fmt::Display,
        {
            value
                .parse()
                .map_err(|e| invalid(format!("key \"{key}\": {e}")))
        }
        fn interval(key: &str, value: &str) -> CResult<(f64, f64)> {
            let (lo, hi) = value
                .split_once(',')
                .ok_or_else(|| invalid(format!("key \"{key}\": expected \"lo,hi\"")))?;
            Ok((num(key, lo.trim())?, num(key, hi.trim())?))
        }

        match key {
            "model.n" => self.n = num(key, value)?,
            "model.t" => self.t = num(key, value)?,
            "model.kappa.k0" => self.kappa.k0 = num(key, value)?,
            "model.kappa.k1" => self.kappa.k1 = num(key, value)?,
            "model.kappa.km1" => self.kappa.km1 = num(key, value)?,
            "model.kappa.k2" => self.kappa.k2 = num(key, value)?,
            "model.kappa.k3" => self.kappa.k3 = num(key, value)?,
            "model.kappa.km3" => self.kappa.km3 = num(key, value)?,
            "model.kappa.k4" => self.kappa.k4 = num(key, value)?,
            "model.kappa.k5" => self.kappa.k5 = num(key, value)?,
            "model.kappa.km5" => self.kappa.km5 = num(key, value)?,
            "model.kappa.k6" => self.kappa.k6 = num(key, value)?,
            "model.kappa.k7" => self.kappa.k7 = num(key, value)?,
            "model.kappa.km7" => self.kappa.km7 = num(key, value)?,
            "model.kappa.k8" => self.kappa.k8 = num(key, value)?,
            "model.kappa.km8" => self.kappa.km8 = num(key, value)?,
            "model.init.z_a1" => self.init_z_a1 = num(key, value)?,
            "model.init.z_a2" => self.init_z_a2 = num(key, value)?,
            "model.init.z_a4" => self.init_z_a4 = num(key, value)?,
            "model.init.a3" => self.init_a3 = num(key, value)?,
            "model.init.e1" => self.init_e1 = num(key, value)?,
            "model.init.e1star" => self.init_e1star = num(key, value)?,
            "model.init.e1a1" => self.init_e1a1 = num(key, value)?,
            "model.init.e1star_a1" => self.init_e1star_a1 = num(key, value)?,
            "model.init.e2" => self.init_e2 = num(key, value)?,
            "model.init.e2a2" => self.init_e2a2 = num(key, value)?,
            "sim.replicates" => self.sim_replicates = num(key, value)?,
            "sim.recording" => {
                self.sim_recording = match value {
                    "full" => RecordingChoice::Full,
                    "slow" => RecordingChoice::Slow,
                    "grid" => RecordingChoice::Grid,
                    "every-nth" => RecordingChoice::EveryNth,
                    other => {
                        return Err(invalid(format!(
                            "key \"{key}\": unknown recording mode \"{other}\""
                        )))
                    }
                }
            }
            "sim.record_dt" => self.sim_record_dt = Some(num(key, value)?),
            "sim.record_stride" => self.sim_record_stride = num(key, value)?,
            "compare.grid" => self.compare_grid = num(key, value)?,
            "validate.replicates" => self.validate_replicates = num(key, value)?,
            "validate.t" => self.validate_t = num(key, value)?,
            "validate.burn_in" => self.validate_burn_in = num(key, value)?,
            "estimate.m" => self.estimate_m = num(key, value)?,
            "estimate.grid" => self.estimate_grid = num(key, value)?,
            "estimate.data" => {
                self.estimate_data = match value {
                    "ssa" => DataSource::Ssa,
                    "ode" => DataSource::Ode,
                    "file" => DataSource::File,
                    other => {
                        return Err(invalid(format!(
                            "key \"{key}\": unknown data source \"{other}\""
                        )))
                    }
                }
            }
            "estimate.data_path" => self.estimate_data_path = Some(value.to_string()),
            "estimate.restarts" => self.estimate_restarts = num(key, value)?,
            "estimate.tol" => self.estimate_tol = num(key, value)?,
            "estimate.penalty" => self.estimate_penalty = num(key, value)?,
            "estimate.box.kappa0" => {
                (self.estimate_box_lo[0], self.estimate_box_hi[0]) = interval(key, value)?
            }
            "estimate.box.k1" => {
                (self.estimate_box_lo[1], self.estimate_box_hi[1]) = interval(key, value)?
            }
            "estimate.box.k_m1" => {
                (self.estimate_box_lo[2], self.estimate_box_hi[2]) = interval(key, value)?
            }
            "estimate.box.k_m1_star" => {
                (self.estimate_box_lo[3], self.estimate_box_hi[3]) = interval(key, value)?
            }
            "estimate.box.k_m2" => {
                (self.estimate_box_lo[4], self.estimate_box_hi[4]) = interval(key, value)?
            }
            "estimate.box.j1_bullet" => {
                (self.estimate_box_lo[5], self.estimate_box_hi[5]) = interval(key, value)?
            }
            "estimate.box.j1_star" => {
                (self.estimate_box_lo[6], self.estimate_box_hi[6]) = interval(key, value)?
            }
            "estimate.box.j2_bullet" => {
                (self.estimate_box_lo[7], self.estimate_box_hi[7]) = interval(key, value)?
            }
            "estimate.nm.max_iters" => self.nm_max_iters = num(key, value)?,
            "estimate.nm.x_tol" => self.nm_x_tol = num(key, value)?,
            "estimate.nm.f_tol" => self.nm_f_tol = num(key, value)?,
            "identify.strategy" => {
                self.identify_strategy = match value {
                    "equitime" => IdentifyStrategy::Equitime,
                    "greedy" => IdentifyStrategy::Greedy,
                    other => {
                        return Err(invalid(format!(
                            "key \"{key}\": unknown strategy \"{other}\""
                        )))
                    }
                }
            }
            "identify.candidates" => self.identify_candidates = num(key, value)?,
            "identify.tol_cond" => self.identify_tol_cond = num(key, value)?,
            "reduced.tol" => self.reduced_tol = num(key, value)?,
            "map.j1" => self.map_j1 = Some(num(key, value)?),
            "map.j2" => self.map_j2 = Some(num(key, value)?),
            "output.dir" => self.output_dir = value.to_string(),
            "output.formats" => {
                let mut formats = Formats {
                    csv: false,
                    json: false,
                };
                for part in value.split(',') {
                    match part.trim() {
                        "csv" => formats.csv = true,
                        "json" => formats.json = true,
                        other => {
                            return Err(invalid(format!(
                                "key \"{key}\": unknown format \"{other}\""
                            )))
                        }
                    }
                }
                self.output_formats = formats;
            }
            "seed" => self.seed = num(key, value)?,
            "jobs" => self.jobs = num(key, value)?,
            other => return Err(invalid(format!("unknown key \"{other}\""))),
        }
        Ok(())
    }

    fn validate(&self) -> CResult<()> {
        if self.n < 1 {
            return Err(invalid("key \"model.n\": must be >= 1"));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(invalid("key \"model.t\": must be > 0"));
        }
        for (name, v) in [
            ("model.init.z_a1", self.init_z_a1),
            ("model.init.z_a2", self.init_z_a2),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("key \"{name}\": must be >= 0")));
            }
        }
        if !(self.init_z_a4 > 0.0 && self.init_z_a4.is_finite()) {
            return Err(invalid("key \"model.init.z_a4\": must be > 0"));
        }
        let kappa_ok = self
            .kappa
            .as_array()
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0);
        if !kappa_ok {
            return Err(invalid("keys \"model.kappa.*\": must be finite and >= 0"));
        }
        if self.sim_replicates == 0 {
            return Err(invalid("key \"sim.replicates\": must be >= 1"));
        }
        if self.sim_recording == RecordingChoice::EveryNth && self.sim_record_stride == 0 {
            return Err(invalid("key \"sim.record_stride\": must be >= 1"));
        }
        if let Some(dt) = self.sim_record_dt {
            if dt.is_nan() || dt <= 0.0 {
                return Err(invalid("key \"sim.record_dt\": must be > 0"));
            }
        }
        if self.compare_grid < 2 {
            return Err(invalid("key \"compare.grid\": must be >= 2"));
        }
        if self.validate_replicates < 2 {
            return Err(invalid("key \"validate.replicates\": must be >= 2"));
        }
        if self.validate_t.is_nan() || self.validate_t <= 0.0 {
            return Err(invalid("key \"validate.t\": must be > 0"));
        }
        if !(0.0..1.0).contains(&self.validate_burn_in) {
            return Err(invalid("key \"validate.burn_in\": must lie in [0, 1)"));
        }
        if self.estimate_m == 0 {
            return Err(invalid("key \"estimate.m\": must be >= 1"));
        }
        if self.estimate_data == DataSource::File && self.estimate_data_path.is_none() {
            return Err(invalid(
                "key \"estimate.data_path\": required when estimate.data = file",
            ));
        }
        if self.estimate_grid < 2 {
            return Err(invalid("key \"estimate.grid\": must be >= 2"));
        }
        if !(self.estimate_tol > 0.0 && self.reduced_tol > 0.0) {
            return Err(invalid(
                "keys \"estimate.tol\" / \"reduced.tol\": must be > 0",
            ));
        }
        if !(self.estimate_penalty > 0.0 && self.estimate_penalty.is_finite()) {
            return Err(invalid("key \"estimate.penalty\": must be finite and > 0"));
        }
        self.param_box()
            .map_err(|e| invalid(format!("keys \"estimate.box.*\": {e}")))?;
        if self.nm_max_iters == 0 {
            return Err(invalid("key \"estimate.nm.max_iters\": must be >= 1"));
        }
        if !(self.nm_x_tol > 0.0 && self.nm_f_tol > 0.0) {
            return Err(invalid("keys \"estimate.nm.*_tol\": must be > 0"));
        }
        if self.identify_tol_cond.is_nan() || self.identify_tol_cond <= 1.0 {
            return Err(invalid("key \"identify.tol_cond\": must be > 1"));
        }
        if !self.output_formats.csv && !self.output_formats.json {
            return Err(invalid("key \"output.formats\": need at least one format"));
        }
        Ok(())
    }

    pub fn param_box(&self) -> glyco_core::Result<ParamBox> {
        ParamBox::new(self.estimate_box_lo, self.estimate_box_hi)
    }

    /// Conservation totals of the configured initial state.
    pub fn enzyme_totals(&self) -> (u64, u64) {
        (
            self.init_e1 + self.init_e1star + self.init_e1a1 + self.init_e1star_a1,
            self.init_e2 + self.init_e2a2,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_from_empty_text() {
        let cfg = Config::parse("").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.enzyme_totals(), (5, 5));
    }

    #[test]
    fn values_comments_and_whitespace() {
        let cfg = Config::parse(
            "# comment\n\nmodel.n = 1000\n  model.t=5.5\nmodel.kappa.k0 = 0.25\nestimate.box.k1 = 0.1, 2.5\n",
        )
        .unwrap();
        assert_eq!(cfg.n, 1000);
        assert_eq!(cfg.t, 5.5);
        assert_eq!(cfg.kappa.k0, 0.25);
        assert_eq!(cfg.estimate_box_lo[1], 0.1);
        assert_eq!(cfg.estimate_box_hi[1], 2.5);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = Config::parse("model.bogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("model.bogus"), "{err}");
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let err = Config::parse("model.n = 10\nmodel.n = 20\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn bad_values_are_rejected_with_key() {
        for (text, key) in [
            ("model.n = 0", "model.n"),
            ("model.t = -1", "model.t"),
            ("model.kappa.k5 = -0.1", "model.kappa"),
            ("validate.burn_in = 1.0", "validate.burn_in"),
            ("estimate.box.kappa0 = 0,1", "estimate.box"),
            ("sim.recording = sometimes", "sim.recording"),
            ("output.formats = yaml", "output.formats"),
            ("model.init.z_a4 = 0", "model.init.z_a4"),
        ] {
            let err = Config::parse(&format!("{text}\n")).unwrap_err();
            assert!(err.to_string().contains(key), "{text} -> {err}");
        }
    }

    #[test]
    fn map_totals_default_to_absent() {
        let cfg = Config::parse("").unwrap();
        assert!(cfg.map_j1.is_none());
        let cfg = Config::parse("map.j1 = 5\nmap.j2 = 5\n").unwrap();
        assert_eq!(cfg.map_j1, Some(5.0));
        assert_eq!(cfg.map_j2, Some(5.0));
    }
}
