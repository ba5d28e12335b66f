//! Layered run configuration: defaults, then a `key=value` file (or a run
//! manifest), then command-line overrides.
//!
//! Keys are the field names of [`SimConfig`] and [`GpConfig`]. Blank lines
//! and lines starting with `#` are ignored.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, PenAnchor, SimConfig, SpawnRegion};
use crate::gp::{GpConfig, SeedMode};

#[derive(Debug, Error)]
pub enum SettingsError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("unknown setting {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Manifest { path: String, source: serde_json::Error },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Settings {
    pub sim: SimConfig,
    pub gp: GpConfig,
    /// Whether `generations` was given explicitly; otherwise it follows the dog count.
    pub generations_explicit: bool,
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, SettingsError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| SettingsError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn bad(key: &str, value: &str, reason: &str) -> SettingsError {
    SettingsError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

impl Settings {
    /// Sets one field by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), SettingsError> {
        let (sim, gp) = (&mut self.sim, &mut self.gp);
        match key {
            "f_a" => sim.f_a = parse(key, value)?,
            "f_r" => sim.f_r = parse(key, value)?,
            "f_d" => sim.f_d = parse(key, value)?,
            "f_f" => sim.f_f = parse(key, value)?,
            "d_s" => sim.d_s = parse(key, value)?,
            "d_d" => sim.d_d = parse(key, value)?,
            "d_f" => sim.d_f = parse(key, value)?,
            "v_s" => sim.v_s = parse(key, value)?,
            "v_d" => sim.v_d = parse(key, value)?,
            "dt" => sim.dt = parse(key, value)?,
            "steps" => sim.steps = parse(key, value)?,
            "field_size" => sim.field_size = parse(key, value)?,
            "pen_size" => sim.pen_size = parse(key, value)?,
            "n_sheep" => sim.n_sheep = parse(key, value)?,
            "n_dogs" => sim.n_dogs = parse(key, value)?,
            "steering_offset" => sim.steering_offset = parse(key, value)?,
            "sheep_spawn_region" => {
                sim.sheep_spawn_region = match value {
                    "right_half" => SpawnRegion::RightHalf,
                    "lower_half" => SpawnRegion::LowerHalf,
                    _ => return Err(bad(key, value, "expected right_half or lower_half")),
                }
            }
            "steering_anchor" => {
                sim.steering_anchor = match value {
                    "center" => PenAnchor::Center,
                    "corner" => PenAnchor::Corner,
                    "opening" => PenAnchor::Opening,
                    _ => return Err(bad(key, value, "expected center, corner or opening")),
                }
            }
            "population_size" => gp.population_size = parse(key, value)?,
            "generations" => {
                gp.generations = parse(key, value)?;
                self.generations_explicit = true;
            }
            "p_m" => gp.p_m = parse(key, value)?,
            "d_ramp" => gp.d_ramp = parse(key, value)?,
            "d_max" => gp.d_max = parse(key, value)?,
            "tournament_size" => gp.tournament_size = parse(key, value)?,
            "fitness_sims" => gp.fitness_sims = parse(key, value)?,
            "master_seed" => gp.master_seed = parse(key, value)?,
            "seed_mode" => gp.seed_mode = parse::<SeedMode>(key, value)?,
            _ => return Err(SettingsError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies every `key=value` line of `text`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), SettingsError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(SettingsError::Syntax { line: i + 1 })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), SettingsError> {
        let text = std::fs::read_to_string(path).map_err(|source| SettingsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_text(&text)
    }

    /// Replaces both configs with the snapshot recorded in a manifest.
    pub fn apply_manifest(&mut self, path: &Path) -> Result<RunManifest, SettingsError> {
        let text = std::fs::read_to_string(path).map_err(|source| SettingsError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let manifest: RunManifest = serde_json::from_str(&text).map_err(|source| SettingsError::Manifest {
            path: path.display().to_string(),
            source,
        })?;
        self.sim = manifest.sim.clone();
        self.gp = manifest.gp.clone();
        self.generations_explicit = true;
        Ok(manifest)
    }

    /// Fills dependent defaults and validates both configs.
    pub fn finish(mut self) -> Result<Self, ConfigError> {
        if !self.generations_explicit {
            self.gp.generations = GpConfig::default_generations(self.sim.n_dogs);
        }
        self.sim.validate()?;
        self.gp.validate()?;
        Ok(self)
    }
}

/// Everything needed to reproduce an evolution run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub terminals: String,
    pub sim: SimConfig,
    pub gp: GpConfig,
    pub outputs: Vec<String>,
}
