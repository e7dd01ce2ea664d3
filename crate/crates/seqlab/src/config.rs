//! Run configuration: flat `key = value` lines with dotted sections.
//!
//! ```text
//! backend = lindblad
//! ramsey.t_mu1 = 20ns
//! dissipation.gamma_deph_2 = 0.1MHz
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::path::Path;

use qutrit_core::dissipative::{DissipationParams, IntegratorConfig, Method};
use qutrit_core::pairwise::InteractionParams;
use qutrit_core::photostats::{PhotonSource, ShotConfig, TimeBinPopulations};
use qutrit_core::ramsey::{linspace, Backend, RamseyScanConfig};

use crate::output::Format;
use crate::units::{self, Kind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{file}:{line}: {message}")]
pub struct ConfigError {
    pub file: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteractionPattern {
    /// Shift on `11, 22, 33` only.
    SameLevel,
    /// Shift on every configuration.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamseySettings {
    pub t_mu1: f64,
    pub t_mu2: f64,
    pub rabi_mu2: f64,
    pub detuning_mu2: f64,
    pub dead_time: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiSettings {
    /// Duration of the preparing `mu1` pi/2 pulse.
    pub t_mu1: f64,
    pub rabi_mu2: f64,
    pub t_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotSettings {
    pub n_trials: usize,
    pub dark_rate: f64,
    pub source: PhotonSource,
    pub bin: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub backend: Backend,
    pub i0: f64,
    pub format: Option<Format>,
    pub seed: u64,
    pub ramsey: RamseySettings,
    pub rabi: RabiSettings,
    pub dissipation: DissipationParams,
    pub integrator: IntegratorConfig,
    pub interaction_v: f64,
    pub interaction_pattern: InteractionPattern,
    pub p2: f64,
    pub eta: [f64; 3],
    pub readout_dephasing: f64,
    pub shots: ShotSettings,
    /// Fringe period hint for `fit`; defaults to the Ramsey `t_total`.
    pub fit_t_total: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mhz = qutrit_core::mhz_to_angular;
        RunConfig {
            backend: Backend::Analytic,
            i0: 1.0,
            format: None,
            seed: 0,
            ramsey: RamseySettings {
                t_mu1: 20e-9,
                t_mu2: 250e-9,
                rabi_mu2: mhz(4.0),
                detuning_mu2: 0.0,
                dead_time: 0.0,
                delta_min: mhz(-10.0),
                delta_max: mhz(10.0),
                delta_points: 201,
            },
            rabi: RabiSettings { t_mu1: 20e-9, rabi_mu2: mhz(12.5), t_max: 160e-9, points: 161 },
            dissipation: DissipationParams::none(),
            integrator: IntegratorConfig::default(),
            interaction_v: 0.0,
            interaction_pattern: InteractionPattern::SameLevel,
            p2: 0.0,
            eta: [1.0; 3],
            readout_dephasing: 0.0,
            shots: ShotSettings { n_trials: 100_000, dark_rate: 0.0, source: PhotonSource::Qutrit { p2: 0.0 }, bin: 1 },
            fit_t_total: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            file: path.display().to_string(),
            line: 0,
            message: e.to_string(),
        })?;
        Self::parse(&path.display().to_string(), &text)
    }

    pub fn parse(file: &str, text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        let mut shots_p2 = None;
        let mut poisson_mean = None;
        let mut source_name = None;
        let mut area_mu2 = None;
        let mut rabi_mu2_given = false;
        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let err = |message: String| ConfigError { file: file.to_string(), line, message };
            let code = raw.split('#').next().unwrap_or("").trim();
            if code.is_empty() {
                continue;
            }
            let Some((key, value)) = code.split_once('=') else {
                return Err(err(format!("expected `key = value`, found `{code}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("`{key}` is set twice")));
            }
            let q = |kind: Kind| {
                units::parse(value, kind)
                    .ok_or_else(|| err(format!("`{key}` expects {}, found `{value}`", kind.describe())))
            };
            let num = || -> Result<f64, ConfigError> {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("`{key}` expects a number, found `{value}`")))
            };
            let count = || -> Result<usize, ConfigError> {
                value
                    .parse::<usize>()
                    .map_err(|_| err(format!("`{key}` expects a non-negative integer, found `{value}`")))
            };
            match key {
                "backend" => {
                    cfg.backend = parse_backend(value).ok_or_else(|| err(format!("unknown backend `{value}`")))?
                }
                "i0" => cfg.i0 = num()?,
                "format" => {
                    cfg.format = Some(Format::parse(value).ok_or_else(|| err(format!("unknown format `{value}`")))?)
                }
                "seed" => {
                    cfg.seed = value.parse().map_err(|_| err(format!("`seed` expects a u64, found `{value}`")))?
                }
                "ramsey.t_mu1" => cfg.ramsey.t_mu1 = q(Kind::Time)?,
                "ramsey.t_mu2" => cfg.ramsey.t_mu2 = q(Kind::Time)?,
                "ramsey.rabi_mu2" => {
                    cfg.ramsey.rabi_mu2 = q(Kind::Frequency)?;
                    rabi_mu2_given = true;
                }
                "ramsey.area_mu2" => area_mu2 = Some((q(Kind::Angle)?, line)),
                "ramsey.detuning_mu2" => cfg.ramsey.detuning_mu2 = q(Kind::Frequency)?,
                "ramsey.dead_time" => cfg.ramsey.dead_time = q(Kind::Time)?,
                "ramsey.delta_min" => cfg.ramsey.delta_min = q(Kind::Frequency)?,
                "ramsey.delta_max" => cfg.ramsey.delta_max = q(Kind::Frequency)?,
                "ramsey.delta_points" => cfg.ramsey.delta_points = count()?,
                "rabi.t_mu1" => cfg.rabi.t_mu1 = q(Kind::Time)?,
                "rabi.rabi_mu2" => cfg.rabi.rabi_mu2 = q(Kind::Frequency)?,
                "rabi.t_max" => cfg.rabi.t_max = q(Kind::Time)?,
                "rabi.points" => cfg.rabi.points = count()?,
                "integrator.method" => {
                    cfg.integrator.method = match value {
                        "rk4" => Method::Rk4,
                        "rk45" => Method::Rk45,
                        _ => return Err(err(format!("unknown integrator `{value}`"))),
                    }
                }
                "integrator.dt" => cfg.integrator.dt_max = Some(q(Kind::Time)?),
                "integrator.tolerance" => cfg.integrator.tolerance = num()?,
                "integrator.sample_interval" => cfg.integrator.sample_interval = Some(q(Kind::Time)?),
                "interaction.v" => cfg.interaction_v = q(Kind::Frequency)?,
                "interaction.pattern" => {
                    cfg.interaction_pattern = match value {
                        "same_level" => InteractionPattern::SameLevel,
                        "uniform" => InteractionPattern::Uniform,
                        _ => return Err(err(format!("unknown interaction pattern `{value}`"))),
                    }
                }
                "interaction.p2" => cfg.p2 = num()?,
                "readout.dephasing" => cfg.readout_dephasing = q(Kind::Rate)?,
                "shots.n_trials" => cfg.shots.n_trials = count()?,
                "shots.dark_rate" => cfg.shots.dark_rate = num()?,
                "shots.p2" => shots_p2 = Some(num()?),
                "shots.mean" => poisson_mean = Some(num()?),
                "shots.source" => source_name = Some((value.to_string(), line)),
                "shots.bin" => {
                    cfg.shots.bin = match value {
                        "1" => 1,
                        "2" => 2,
                        "3" => 3,
                        _ => return Err(err(format!("`shots.bin` must be 1, 2 or 3, found `{value}`"))),
                    }
                }
                "fit.t_total" => cfg.fit_t_total = Some(q(Kind::Time)?),
                _ => {
                    if let Some(slot) = indexed(key, "dissipation.gamma_decay_") {
                        cfg.dissipation.gamma_decay[slot] = q(Kind::Rate)?;
                    } else if let Some(slot) = indexed(key, "dissipation.gamma_deph_") {
                        cfg.dissipation.gamma_deph[slot] = q(Kind::Rate)?;
                    } else if let Some(slot) = indexed(key, "readout.eta_") {
                        cfg.eta[slot] = num()?;
                    } else {
                        return Err(err(format!("unknown key `{key}`")));
                    }
                }
            }
        }

        if let Some((area, line)) = area_mu2 {
            if rabi_mu2_given {
                return Err(ConfigError {
                    file: file.to_string(),
                    line,
                    message: "give either `ramsey.rabi_mu2` or `ramsey.area_mu2`, not both".into(),
                });
            }
            cfg.ramsey.rabi_mu2 = area / cfg.ramsey.t_mu2;
        }
        cfg.shots.source = match source_name {
            None => PhotonSource::Qutrit { p2: shots_p2.unwrap_or(0.0) },
            Some((name, line)) => match name.as_str() {
                "qutrit" => PhotonSource::Qutrit { p2: shots_p2.unwrap_or(0.0) },
                "poisson" => PhotonSource::Poisson { mean: poisson_mean.unwrap_or(0.1) },
                _ => {
                    return Err(ConfigError {
                        file: file.to_string(),
                        line,
                        message: format!("unknown photon source `{name}`"),
                    })
                }
            },
        };
        cfg.validate().map_err(|message| ConfigError { file: file.to_string(), line: 0, message })?;
        Ok(cfg)
    }

    /// Cross-field checks; numeric ranges are left to the core types.
    fn validate(&self) -> Result<(), String> {
        if self.ramsey.delta_points < 2 && self.ramsey.delta_min != self.ramsey.delta_max {
            return Err("`ramsey.delta_points` must be at least 2".into());
        }
        if self.ramsey.delta_points >= 2 && self.ramsey.delta_max <= self.ramsey.delta_min {
            return Err("`ramsey.delta_max` must exceed `ramsey.delta_min`".into());
        }
        if self.rabi.points < 2 {
            return Err("`rabi.points` must be at least 2".into());
        }
        self.ramsey_config().validate().map_err(|e| e.to_string())?;
        self.interactions().map_err(|e| e.to_string())?;
        self.dissipation.validate().map_err(|e| e.to_string())?;
        self.integrator.validate().map_err(|e| e.to_string())?;
        TimeBinPopulations::new([0.0; 3], self.eta).map_err(|e| e.to_string())?;
        self.shot_config().validate().map_err(|e| e.to_string())?;
        if self.readout_dephasing.is_nan() || self.readout_dephasing < 0.0 {
            return Err(format!("`readout.dephasing` must be non-negative, found {}", self.readout_dephasing));
        }
        Ok(())
    }

    pub fn ramsey_config(&self) -> RamseyScanConfig {
        let r = &self.ramsey;
        let deltas =
            if r.delta_points < 2 { vec![r.delta_min] } else { linspace(r.delta_min, r.delta_max, r.delta_points) };
        let mut cfg = RamseyScanConfig::new(r.t_mu1, deltas, r.rabi_mu2, r.t_mu2).with_backend(self.backend);
        cfg.detuning_mu2 = r.detuning_mu2;
        cfg.dead_time = r.dead_time;
        cfg.i0 = self.i0;
        cfg.dissipation = self.dissipation;
        cfg.integrator = self.integrator;
        cfg
    }

    pub fn shot_config(&self) -> ShotConfig {
        ShotConfig::new(self.shots.n_trials, self.seed)
            .with_dark_rate(self.shots.dark_rate)
            .with_source(self.shots.source)
    }

    pub fn interactions(&self) -> qutrit_core::Result<InteractionParams> {
        match self.interaction_pattern {
            InteractionPattern::SameLevel => InteractionParams::same_level(self.interaction_v, self.p2),
            InteractionPattern::Uniform => InteractionParams::uniform(self.interaction_v, self.p2),
        }
    }
}

fn parse_backend(name: &str) -> Option<Backend> {
    match name {
        "analytic" => Some(Backend::Analytic),
        "unitary" => Some(Backend::Unitary),
        "lindblad" => Some(Backend::Lindblad),
        _ => None,
    }
}

/// `prefix` followed by `1`, `2` or `3`, as a 0-based index.
fn indexed(key: &str, prefix: &str) -> Option<usize> {
    match key.strip_prefix(prefix)? {
        "1" => Some(0),
        "2" => Some(1),
        "3" => Some(2),
        _ => None,
    }
}
