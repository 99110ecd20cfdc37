use std::path::{Path, PathBuf};

use gridcast::ensemble::{EnsembleConfig, ResponseKind, HORIZONS};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Failure;

pub const SEED_VAR: &str = "GRIDCAST_SEED";

/// Interaction pool used by the command-line driver unless configured.
pub const CLI_POOL_SIZE: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
    pub response: String,
    pub kind: ResponseKind,
    /// Horizons reported by `train` and `evaluate`.
    pub horizons: Vec<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub ensemble: EnsembleConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mut ensemble = EnsembleConfig::default();
        ensemble.recipe.pool_size = CLI_POOL_SIZE;
        Self {
            data: None,
            schema: None,
            response: "intensity".into(),
            kind: ResponseKind::Average,
            horizons: (1..=HORIZONS).collect(),
            seed: 42,
            output: None,
            ensemble,
        }
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<(), Failure> {
        if self.horizons.is_empty() {
            return Err(Failure::config("horizon set is empty"));
        }
        if let Some(h) = self.horizons.iter().find(|h| **h == 0 || **h > HORIZONS) {
            return Err(Failure::config(format!("horizon {h} is outside 1..=24")));
        }
        self.ensemble
            .horizon_plan(self.kind)
            .map_err(|e| Failure::lib("ensemble", e))?;
        Ok(())
    }

    /// SHA-256 of the settings that determine the fitted models; paths are excluded.
    pub fn hash(&self) -> String {
        let pipeline = RunConfig {
            data: None,
            schema: None,
            output: None,
            ..self.clone()
        };
        let text = serde_json::to_string(&pipeline).expect("config serialises");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn schema_path(&self) -> Result<PathBuf, Failure> {
        match (&self.schema, &self.data) {
            (Some(s), _) => Ok(s.clone()),
            (None, Some(d)) => Ok(d.with_file_name(gridcast::synth::SCHEMA_FILE)),
            (None, None) => Err(Failure::config("no data file given (use --data or `data` in the config)")),
        }
    }
}

/// Loads `path` (or the defaults), applies `--set` overrides and finally the
/// seed from the environment.
pub fn resolve<T>(path: Option<&Path>, sets: &[String], seed_key: &str) -> Result<T, Failure>
where
    T: Serialize + DeserializeOwned + Default,
{
    let mut value = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::config(format!("cannot read config {}: {e}", p.display())))?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| Failure::config(format!("malformed JSON in config {}: {e}", p.display())))?;
            // round trip through the type so defaults fill every key --set may address
            let typed: T = serde_json::from_value(v)
                .map_err(|e| Failure::config(format!("config {}: {e}", p.display())))?;
            serde_json::to_value(typed).expect("config serialises")
        }
        None => serde_json::to_value(T::default()).expect("config serialises"),
    };
    for s in sets {
        apply_set(&mut value, s)?;
    }
    if let Ok(seed) = std::env::var(SEED_VAR) {
        let seed: u64 = seed
            .trim()
            .parse()
            .map_err(|_| Failure::config(format!("{SEED_VAR}=`{seed}` is not an unsigned 64-bit integer")))?;
        value[seed_key] = Value::from(seed);
    }
    let typed: T =
        serde_json::from_value(value).map_err(|e| Failure::config(format!("invalid configuration: {e}")))?;
    let kept = serde_json::to_value(&typed).expect("config serialises");
    for s in sets {
        let key = s.split_once('=').map_or(s.as_str(), |(k, _)| k).trim();
        if kept.pointer(&format!("/{}", key.replace('.', "/"))).is_none() {
            return Err(Failure::config(format!("--set: unknown key `{key}`")));
        }
    }
    Ok(typed)
}

/// Applies `a.b.c=value`. The value is read as JSON when it parses, as a
/// string otherwise. Every key but the last must already exist.
pub fn apply_set(root: &mut Value, assignment: &str) -> Result<(), Failure> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Failure::config(format!("--set `{assignment}` is not key=value")))?;
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, parents) = parts.split_last().expect("split yields one part");
    let mut node = root;
    for p in parents {
        node = node
            .get_mut(*p)
            .filter(|v| v.is_object())
            .ok_or_else(|| Failure::config(format!("--set: unknown key `{key}`")))?;
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Failure::config(format!("--set: `{key}` does not name a setting")))?;
    obj.insert(last.to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_overrides_nested_keys() {
        let mut v = serde_json::to_value(RunConfig::default()).unwrap();
        apply_set(&mut v, "ensemble.recipe.pool_size=9").unwrap();
        apply_set(&mut v, "kind=marginal").unwrap();
        apply_set(&mut v, "ensemble.plan=1-24:ensemble").unwrap();
        let c: RunConfig = serde_json::from_value(v.clone()).unwrap();
        assert_eq!(c.ensemble.recipe.pool_size, 9);
        assert_eq!(c.kind, ResponseKind::Marginal);
        assert_eq!(c.ensemble.plan.as_deref(), Some("1-24:ensemble"));
        assert!(apply_set(&mut v, "nope.pool_size=1").is_err());
        assert!(apply_set(&mut v, "missing_equals").is_err());
    }

    #[test]
    fn hash_ignores_paths() {
        let a = RunConfig::default();
        let b = RunConfig {
            data: Some("x.csv".into()),
            output: Some("out".into()),
            ..RunConfig::default()
        };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig {
            seed: 7,
            ..RunConfig::default()
        };
        assert_ne!(a.hash(), c.hash());
    }
}
