//! Flat key-value run configuration with command-line overrides.
//!
//! The parameter space is small and flat, so the config format is plain
//! `key = value` lines ('#' starts a comment). Values from a config file are
//! applied over the defaults, then `--set key=value` overrides are applied in
//! order. The effective configuration, defaults included, is echoed into
//! every JSON report.

use std::fmt;
use std::path::Path;

use edgecb::edge::{FqhState, Sector};
use edgecb::thermo::ThermoParams;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// State preset: "rr-z3" or "laughlin:<d_h>".
    pub state: String,
    /// Explicit filling numerator; together with `d_h` and `neutral` this
    /// overrides the preset.
    pub n_h: Option<u32>,
    pub d_h: Option<u32>,
    /// Neutral model for an explicit state: "trivial" or "z3-parafermion".
    pub neutral: Option<String>,
    /// Sector: "vacuum" or "<l>,<neutral-sector-name>".
    pub sector: String,
    pub t: f64,
    /// Temperatures for scan-temperature (comma separated in config).
    pub t_list: Vec<f64>,
    pub mu_red: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub phi_points: usize,
    pub include_cz: bool,
    pub include_eta: bool,
    pub out_csv: String,
    pub out_json: String,
    /// Optional SVG plot path; empty disables plotting.
    pub out_svg: String,
    pub drop_threshold: f64,
    pub level_cap: i64,
    pub fd_step: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let tol = edgecb::thermo::Tolerances::default();
        RunConfig {
            state: "rr-z3".to_string(),
            n_h: None,
            d_h: None,
            neutral: None,
            sector: "vacuum".to_string(),
            t: 0.5,
            t_list: vec![0.3, 0.5, 0.8],
            mu_red: 0.0,
            phi_min: 0.0,
            phi_max: 15.0,
            phi_points: 15001,
            include_cz: true,
            include_eta: true,
            out_csv: "trace.csv".to_string(),
            out_json: "peaks.json".to_string(),
            out_svg: String::new(),
            drop_threshold: tol.drop_threshold,
            level_cap: tol.level_cap,
            fd_step: tol.fd_step,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl RunConfig {
    pub fn from_sources(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut config = RunConfig::default();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| ConfigError(format!("cannot read config {}: {e}", p.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    ConfigError(format!("line {}: expected key = value", lineno + 1))
                })?;
                config.apply(key.trim(), value.trim())?;
            }
        }
        for entry in overrides {
            let (key, value) = entry
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("--set needs KEY=VALUE, got '{entry}'")))?;
            config.apply(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value
                .parse()
                .map_err(|_| ConfigError(format!("bad value '{value}' for {key}")))
        }
        match key {
            "state" => self.state = value.to_string(),
            "n_h" => self.n_h = Some(num(key, value)?),
            "d_h" => self.d_h = Some(num(key, value)?),
            "neutral" => self.neutral = Some(value.to_string()),
            "sector" => self.sector = value.to_string(),
            "t" => self.t = num(key, value)?,
            "t_list" => {
                self.t_list = value
                    .split(',')
                    .map(|s| num("t_list", s.trim()))
                    .collect::<Result<_, _>>()?;
                if self.t_list.is_empty() {
                    return Err(ConfigError("t_list must not be empty".into()));
                }
            }
            "mu_red" => self.mu_red = num(key, value)?,
            "phi_min" => self.phi_min = num(key, value)?,
            "phi_max" => self.phi_max = num(key, value)?,
            "phi_points" => self.phi_points = num(key, value)?,
            "include_cz" => self.include_cz = num(key, value)?,
            "include_eta" => self.include_eta = num(key, value)?,
            "out_csv" => self.out_csv = value.to_string(),
            "out_json" => self.out_json = value.to_string(),
            "out_svg" => self.out_svg = value.to_string(),
            "drop_threshold" => self.drop_threshold = num(key, value)?,
            "level_cap" => self.level_cap = num(key, value)?,
            "fd_step" => self.fd_step = num(key, value)?,
            other => return Err(ConfigError(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Build and validate the state; diagnostics are config errors.
    ///
    /// Explicit `n_h`/`d_h`/`neutral` keys take precedence over the preset.
    pub fn build_state(&self) -> Result<FqhState, ConfigError> {
        let state = match (self.n_h, self.d_h) {
            (None, None) => {
                FqhState::from_preset(&self.state).map_err(|e| ConfigError(e.to_string()))?
            }
            (Some(n_h), Some(d_h)) => {
                if n_h == 0 || d_h == 0 {
                    return Err(ConfigError("n_h and d_h must be positive".into()));
                }
                let neutral = match self.neutral.as_deref().unwrap_or("trivial") {
                    "trivial" => edgecb::edge::NeutralModel::trivial(),
                    "z3-parafermion" => edgecb::edge::NeutralModel::z3_parafermion(),
                    other => return Err(ConfigError(format!("unknown neutral model '{other}'"))),
                };
                FqhState {
                    filling: edgecb::edge::FillingFactor::new(n_h, d_h),
                    neutral,
                }
            }
            _ => return Err(ConfigError("explicit states need both n_h and d_h".into())),
        };
        let diags = state.validate();
        if !diags.is_empty() {
            let described = if self.n_h.is_some() {
                state.id()
            } else {
                self.state.clone()
            };
            let msgs: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
            return Err(ConfigError(format!(
                "state '{described}' failed validation: {}",
                msgs.join("; ")
            )));
        }
        Ok(state)
    }

    pub fn build_sector(&self, state: &FqhState) -> Result<Sector, ConfigError> {
        if self.sector == "vacuum" {
            return Ok(Sector::vacuum());
        }
        let (l_str, name) = self
            .sector
            .split_once(',')
            .ok_or_else(|| ConfigError(format!("bad sector '{}'", self.sector)))?;
        let l: i64 = l_str
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("bad sector charge '{l_str}'")))?;
        let neutral = state
            .neutral
            .sector_by_name(name.trim())
            .ok_or_else(|| ConfigError(format!("unknown neutral sector '{name}'")))?;
        Ok(Sector { l, neutral })
    }

    pub fn thermo_params(&self) -> ThermoParams {
        let mut params = ThermoParams::new(self.t).with_mu(self.mu_red);
        params.include_cz = self.include_cz;
        params.include_eta = self.include_eta;
        params.tol.drop_threshold = self.drop_threshold;
        params.tol.level_cap = self.level_cap;
        params.tol.fd_step = self.fd_step;
        params
    }
}
