//! Option values from a JSON config file, merged under the command line.

use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::error::{usage, CliResult};

pub fn load(path: &Path) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(usage(format!("config {} must hold a JSON object", path.display()))),
        Err(e) => Err(usage(format!("config {}: {e}", path.display()))),
    }
}

/// Id of the argument of `cmd` named `key`, by id or long flag.
pub fn arg_id(cmd: &Command, key: &str) -> Option<String> {
    let dashed = key.replace('_', "-");
    cmd.get_arguments()
        .find(|a| a.get_id() == key || a.get_long() == Some(key) || a.get_long() == Some(dashed.as_str()))
        .map(|a| a.get_id().to_string())
}

pub fn from_command_line(matches: &ArgMatches, id: &str) -> bool {
    matches!(matches.try_get_raw(id), Ok(Some(_))) && matches.value_source(id) == Some(ValueSource::CommandLine)
}

/// Replace every field of `args` named in `config` unless it was given on the
/// command line. Keys for global options (`config`, `jobs`) are skipped.
pub fn merge<T: Serialize + DeserializeOwned>(
    args: T,
    cmd: &Command,
    matches: &ArgMatches,
    config: &Map<String, Value>,
) -> CliResult<T> {
    let mut value = serde_json::to_value(&args).map_err(|e| usage(e.to_string()))?;
    let fields = value.as_object_mut().expect("arguments serialize to an object");
    for (key, v) in config {
        if key == "config" || key == "jobs" {
            continue;
        }
        let id = arg_id(cmd, key)
            .filter(|id| fields.contains_key(id))
            .ok_or_else(|| usage(format!("unknown option {key:?} in config for '{}'", cmd.get_name())))?;
        if !from_command_line(matches, &id) {
            fields.insert(id, v.clone());
        }
    }
    serde_json::from_value(value).map_err(|e| usage(format!("config for '{}': {e}", cmd.get_name())))
}

fn flatten(v: Value) -> Result<Option<String>, String> {
    match v {
        Value::Null => Ok(None),
        Value::String(s) => Ok(Some(s)),
        Value::Number(n) => Ok(Some(n.to_string())),
        Value::Array(items) => {
            let parts = items
                .into_iter()
                .map(|x| flatten(x).map(|s| s.unwrap_or_default()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Some(parts.join(",")))
        }
        other => Err(format!("expected a string, number or list, got {other}")),
    }
}

/// Accepts a string, a number or a list (joined with commas).
pub fn text<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    flatten(Value::deserialize(d)?)
        .map_err(serde::de::Error::custom)?
        .ok_or_else(|| serde::de::Error::custom("missing value"))
}

pub fn opt_text<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    flatten(Value::deserialize(d)?).map_err(serde::de::Error::custom)
}
