//! Run configuration files and their merge with command-line flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{CliError, CliResult};

pub const CONFIG_SCHEMA: u64 = 1;

/// Top-level keys besides the command sections.
const GLOBAL_KEYS: [&str; 3] = ["schema", "seed", "jobs"];
const COMMANDS: [&str; 8] = ["kernel", "model", "chain", "bounds", "simulate", "lightcone", "supersonic", "modes"];

/// A parsed configuration file: global settings plus raw command sections.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    sections: Map<String, Value>,
}

#[derive(Deserialize)]
struct Globals {
    schema: Option<u64>,
    seed: Option<u64>,
    jobs: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
        let Value::Object(mut map) = value else {
            return Err(CliError::Usage("config at /: expected an object".into()));
        };
        for key in map.keys() {
            if !GLOBAL_KEYS.contains(&key.as_str()) && !COMMANDS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!(
                    "config at /{key}: unknown key (schema {CONFIG_SCHEMA} allows {} and command sections {})",
                    GLOBAL_KEYS.join(", "),
                    COMMANDS.join(", ")
                )));
            }
        }
        let globals = Map::from_iter(GLOBAL_KEYS.iter().filter_map(|k| map.remove(*k).map(|v| (k.to_string(), v))));
        let g: Globals = serde_json::from_value(Value::Object(globals))
            .map_err(|e| CliError::Usage(format!("config at /: {e}")))?;
        match g.schema {
            Some(CONFIG_SCHEMA) => {}
            Some(s) => return Err(CliError::Usage(format!("config at /schema: unsupported schema {s}, expected {CONFIG_SCHEMA}"))),
            None => return Err(CliError::Usage("config at /schema: missing schema version".into())),
        }
        Ok(Self { seed: g.seed, jobs: g.jobs, sections: map })
    }

    fn section(&self, path: &[&str]) -> CliResult<Option<Map<String, Value>>> {
        let mut node = match self.sections.get(path[0]) {
            Some(v) => v,
            None => return Ok(None),
        };
        for key in &path[1..] {
            match node.get(*key) {
                Some(v) => node = v,
                None => return Ok(None),
            }
        }
        match node {
            Value::Object(m) => Ok(Some(m.clone())),
            _ => Err(CliError::Usage(format!("config at /{}: expected an object", path.join("/")))),
        }
    }
}

fn strip_unset(value: Value) -> Map<String, Value> {
    let Value::Object(map) = value else { return Map::new() };
    map.into_iter()
        .filter(|(_, v)| match v {
            Value::Null | Value::Bool(false) => false,
            Value::Array(a) => !a.is_empty(),
            _ => true,
        })
        .collect()
}

/// Allowed keys of `T`, read off its default serialization.
fn allowed_keys<T: Default + Serialize>() -> Vec<String> {
    match serde_json::to_value(T::default()) {
        Ok(Value::Object(m)) => m.keys().cloned().collect(),
        _ => Vec::new(),
    }
}

/// Checks `layer` against the fields of `T`.
fn check_keys<T: Default + Serialize>(layer: &Map<String, Value>, pointer: &str) -> CliResult<()> {
    let allowed = allowed_keys::<T>();
    if let Some(bad) = layer.keys().find(|k| !allowed.contains(k)) {
        return Err(CliError::Usage(format!("config at {pointer}/{bad}: unknown key (allowed: {})", allowed.join(", "))));
    }
    Ok(())
}

/// Overlays, lowest priority first: the config section at `path`, an optional
/// parameter file, then the flags that were actually given.
pub fn merge<T>(cli: &T, config: Option<&RunConfig>, path: &[&str], params: Option<&Path>) -> CliResult<T>
where
    T: Default + Serialize + DeserializeOwned,
{
    let pointer = format!("/{}", path.join("/"));
    let mut merged = Map::new();
    if let Some(section) = config.map(|c| c.section(path)).transpose()?.flatten() {
        check_keys::<T>(&section, &pointer)?;
        merged.extend(section);
    }
    if let Some(p) = params {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
        let layer = match serde_json::from_str(&text) {
            Ok(Value::Object(m)) => m,
            Ok(_) => return Err(CliError::Usage(format!("{}: expected an object", p.display()))),
            Err(e) => return Err(CliError::Usage(format!("{}: {e}", p.display()))),
        };
        check_keys::<T>(&layer, &p.display().to_string())?;
        merged.extend(layer);
    }
    let flags = serde_json::to_value(cli).map_err(|e| CliError::Usage(e.to_string()))?;
    merged.extend(strip_unset(flags));
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("config at {pointer}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::{KernelTvArgs, LightconeArgs};

    #[test]
    fn flags_override_file_values() {
        let cfg = RunConfig::parse(r#"{"schema": 1, "seed": 4, "lightcone": {"l": "0..2", "fock": 3}}"#).unwrap();
        assert_eq!(cfg.seed, Some(4));
        let mut cli = LightconeArgs::default();
        cli.dynamics.fock = Some(5);
        let args: LightconeArgs = merge(&cli, Some(&cfg), &["lightcone"], None).unwrap();
        assert_eq!(args.l.as_deref(), Some("0..2"));
        assert_eq!(args.dynamics.fock, Some(5));
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_pointer() {
        let cfg = RunConfig::parse(r#"{"schema": 1, "kernel": {"tv": {"inn": "k.json"}}}"#).unwrap();
        let err = merge(&KernelTvArgs::default(), Some(&cfg), &["kernel", "tv"], None).unwrap_err();
        assert!(matches!(&err, CliError::Usage(m) if m.contains("/kernel/tv/inn")), "{err}");
        assert!(RunConfig::parse(r#"{"schema": 1, "colour": 1}"#).is_err());
        assert!(RunConfig::parse(r#"{"schema": 2}"#).is_err());
        assert!(RunConfig::parse(r#"{"lightcone": {}}"#).is_err());
    }
}
