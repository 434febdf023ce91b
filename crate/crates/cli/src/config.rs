//! Layering of a JSON config file under the command-line flags.
//!
//! A config file is a JSON object. Top-level keys apply to every
//! subcommand; an object stored under a subcommand name (`"fig2": {...}`)
//! applies to that subcommand only and wins over the top level. Flags given
//! on the command line win over both. Keys use the snake_case field names
//! (`t_over_l`, `trotter_steps`, ...).

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub const SUBCOMMANDS: [&str; 6] = ["target", "witness", "sample", "fig2", "robust", "fit"];

pub fn load(path: Option<&Path>) -> Result<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text =
        fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    match serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?
    {
        Value::Object(map) => Ok(map),
        _ => bail!("config {} must hold a JSON object", path.display()),
    }
}

/// Config values for `section`, without the other subcommands' sections.
pub fn section(config: &Map<String, Value>, section: &str) -> Map<String, Value> {
    let mut merged: Map<String, Value> = config
        .iter()
        .filter(|(k, _)| !SUBCOMMANDS.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if let Some(Value::Object(own)) = config.get(section) {
        merged.extend(own.clone());
    }
    merged
}

/// Overlay the flags that were actually given (non-null after
/// serialization) on `base` and decode the result.
pub fn resolve<C: Serialize, T: DeserializeOwned>(base: &Map<String, Value>, cli: &C) -> Result<T> {
    let mut merged = base.clone();
    if let Value::Object(flags) = serde_json::to_value(cli)? {
        merged.extend(flags.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(Value::Object(merged)).context("invalid configuration value")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;
    use serde_json::json;

    #[derive(Serialize, Deserialize, Default)]
    #[serde(default)]
    struct Opts {
        seed: Option<u64>,
        epsilon: Option<f64>,
        ls: Option<Vec<usize>>,
    }

    fn object(v: Value) -> Map<String, Value> {
        match v {
            Value::Object(m) => m,
            _ => unreachable!(),
        }
    }

    #[test]
    fn precedence() {
        let config = object(json!({
            "seed": 1, "epsilon": 0.5, "ls": [4, 8],
            "fig2": {"epsilon": 0.25},
            "sample": {"seed": 9}
        }));
        let base = section(&config, "fig2");
        let cli = Opts {
            seed: Some(3),
            ..Opts::default()
        };
        let got: Opts = resolve(&base, &cli).unwrap();
        assert_eq!(got.seed, Some(3));
        assert_eq!(got.epsilon, Some(0.25));
        assert_eq!(got.ls, Some(vec![4, 8]));
        assert!(!base.contains_key("sample"));
    }

    #[test]
    fn bad_types_are_reported() {
        let base = object(json!({"seed": "seven"}));
        assert!(resolve::<_, Opts>(&base, &Opts::default()).is_err());
    }
}
