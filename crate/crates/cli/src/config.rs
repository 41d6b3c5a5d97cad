//! Run configuration document: a TOML mirror of an experiment preset.
//!
//! The document holds the full preset under `[preset]` plus an optional
//! output directory. Unknown keys anywhere in the document are rejected by
//! re-serializing the parsed config and demanding that every input key
//! reappears; a key serde silently dropped is a typo worth failing on.

use crate::{CliError, CliResult};
use apnn_core::harness::{find_preset, ExperimentPreset};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Where datasets, checkpoints, and metrics land. Defaults to
    /// `runs/<preset name>`.
    pub out_dir: Option<String>,
    pub preset: ExperimentPreset,
}

impl RunConfig {
    pub fn from_preset(preset: ExperimentPreset) -> Self {
        RunConfig { out_dir: None, preset }
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize: {e}")))
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let input: toml::Value =
            text.parse().map_err(|e| CliError::Config(format!("bad toml: {e}")))?;
        let cfg: RunConfig = input
            .clone()
            .try_into()
            .map_err(|e| CliError::Config(format!("bad config: {e}")))?;
        let shaped = toml::Value::try_from(&cfg)
            .map_err(|e| CliError::Config(format!("cannot reserialize: {e}")))?;
        let mut unknown = Vec::new();
        collect_unknown_keys(&input, &shaped, "", &mut unknown);
        if let Some(key) = unknown.first() {
            return Err(CliError::Config(format!("unknown key '{key}'")));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn out_dir(&self) -> PathBuf {
        match &self.out_dir {
            Some(d) => PathBuf::from(d),
            None => PathBuf::from("runs").join(&self.preset.name),
        }
    }
}

/// Record every key path present in `input` but absent from `shaped`.
fn collect_unknown_keys(
    input: &toml::Value,
    shaped: &toml::Value,
    path: &str,
    out: &mut Vec<String>,
) {
    match (input, shaped) {
        (toml::Value::Table(a), toml::Value::Table(b)) => {
            for (k, v) in a {
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get(k) {
                    Some(w) => collect_unknown_keys(v, w, &sub, out),
                    None => out.push(sub),
                }
            }
        }
        (toml::Value::Array(a), toml::Value::Array(b)) => {
            for (i, (v, w)) in a.iter().zip(b).enumerate() {
                collect_unknown_keys(v, w, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

/// Resolve a preset from `--preset` or `--config`, exactly one of which
/// must be given.
pub fn resolve(
    preset_name: Option<&str>,
    config_path: Option<&Path>,
) -> CliResult<RunConfig> {
    match (preset_name, config_path) {
        (Some(name), None) => Ok(RunConfig::from_preset(find_preset(name)?)),
        (None, Some(path)) => RunConfig::load(path),
        (Some(_), Some(_)) => {
            Err(CliError::Config("give either --preset or --config, not both".into()))
        }
        (None, None) => Err(CliError::Config("one of --preset or --config is required".into())),
    }
}
