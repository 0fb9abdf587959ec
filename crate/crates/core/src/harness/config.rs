//! TOML run configuration with dotted-key overrides.
//!
//! ```toml
//! basis_size = 1024
//! horizon = 1000
//! observe_top_k = 6
//! edge_guard = "warn"
//!
//! [interaction]
//! kind = "all-to-all"
//! strength = 0.05
//!
//! [resonance]
//! period = 12.0
//! r = 1
//! s = 1
//! detuning = 0.0
//!
//! [rotors.1]
//! tau = 1
//! kick_strength = 4.0
//! kick_phase = 0.1
//! ```
//!
//! Omitted keys fall back to the two-rotor reference. A `[rotors.*]`
//! section replaces the reference rotor list as a whole.

use std::path::Path;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::model::{RotorParams, SystemConfig};

const TOP_KEYS: &[&str] = &["basis_size", "horizon", "observe_top_k", "edge_guard"];
const INTERACTION_KEYS: &[&str] = &["kind", "strength"];
const RESONANCE_KEYS: &[&str] = &["period", "r", "s", "detuning"];
const ROTOR_KEYS: &[&str] = &["tau", "kick_strength", "kick_phase"];

/// Parse an override value as a TOML literal, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("key just written"),
        Err(_) => Value::String(raw.to_string()),
    }
}

/// Split `key=value`.
pub fn parse_override(spec: &str) -> Result<(String, Value)> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::Config(format!("override `{spec}` has an empty key")));
    }
    Ok((key.to_string(), parse_value(value.trim())))
}

fn check_keys(table: &Table, allowed: &[&str], section: &str) -> Result<()> {
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key `{section}{key}`")));
        }
    }
    Ok(())
}

fn section<'a>(table: &'a mut Table, name: &str) -> Result<&'a mut Table> {
    table
        .entry(name)
        .or_insert_with(|| Value::Table(Table::new()))
        .as_table_mut()
        .ok_or_else(|| Error::Config(format!("`{name}` must be a table")))
}

/// Set `value` at a dotted path, creating intermediate tables.
pub fn set_dotted(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("malformed key `{key}`")));
    }
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        cur = section(cur, part)?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn rotor_table(rotor: &RotorParams) -> Table {
    let mut t = Table::new();
    t.insert("tau".into(), Value::Integer(rotor.tau as i64));
    t.insert("kick_strength".into(), Value::Float(rotor.kick_strength));
    t.insert("kick_phase".into(), Value::Float(rotor.kick_phase));
    t
}

/// The config in file layout, rotors under `[rotors.1]`, `[rotors.2]`, ...
pub fn to_table(config: &SystemConfig) -> Result<Table> {
    let mut table = Table::try_from(config).map_err(|e| Error::Config(e.to_string()))?;
    let mut rotors = Table::new();
    for (i, rotor) in config.rotors.iter().enumerate() {
        rotors.insert((i + 1).to_string(), Value::Table(rotor_table(rotor)));
    }
    table.insert("rotors".into(), Value::Table(rotors));
    Ok(table)
}

pub fn to_toml_string(config: &SystemConfig) -> Result<String> {
    toml::to_string(&to_table(config)?).map_err(|e| Error::Config(e.to_string()))
}

/// Lay a file-layout table over the reference, still in file layout.
pub fn merge_over_reference(file: Table) -> Result<Table> {
    check_keys(
        &file,
        &[TOP_KEYS, &["interaction", "resonance", "rotors"]].concat(),
        "",
    )?;
    let mut merged = to_table(&SystemConfig::reference_two_rotor())?;
    for (key, value) in file {
        match (key.as_str(), value) {
            ("interaction" | "resonance", Value::Table(sub)) => {
                let allowed = if key == "interaction" { INTERACTION_KEYS } else { RESONANCE_KEYS };
                check_keys(&sub, allowed, &format!("{key}."))?;
                let target = section(&mut merged, &key)?;
                target.extend(sub);
            }
            ("rotors", Value::Table(sub)) => {
                merged.insert("rotors".into(), Value::Table(sub));
            }
            ("interaction" | "resonance" | "rotors", _) => {
                return Err(Error::Config(format!("`{key}` must be a table")));
            }
            (_, value) => {
                merged.insert(key, value);
            }
        }
    }
    Ok(merged)
}

/// Deserialize a complete file-layout table.
pub fn from_table(mut merged: Table) -> Result<SystemConfig> {
    let rotors = merged
        .remove("rotors")
        .and_then(|v| match v {
            Value::Table(t) => Some(t),
            _ => None,
        })
        .unwrap_or_default();
    let mut indexed: Vec<(usize, Table)> = Vec::with_capacity(rotors.len());
    for (key, value) in rotors {
        let index: usize = key
            .parse()
            .map_err(|_| Error::Config(format!("rotor section `rotors.{key}` is not a number")))?;
        let Value::Table(t) = value else {
            return Err(Error::Config(format!("`rotors.{key}` must be a table")));
        };
        check_keys(&t, ROTOR_KEYS, &format!("rotors.{key}."))?;
        indexed.push((index, t));
    }
    indexed.sort_by_key(|(i, _)| *i);
    if indexed.iter().enumerate().any(|(pos, (i, _))| *i != pos + 1) {
        return Err(Error::Config(
            "rotor sections must be numbered 1, 2, ... without gaps".to_string(),
        ));
    }
    let rotor_values: Vec<Value> = indexed.into_iter().map(|(_, t)| Value::Table(t)).collect();
    merged.insert("rotors".into(), Value::Array(rotor_values));

    Value::Table(merged)
        .try_into::<SystemConfig>()
        .map_err(|e| Error::Config(e.to_string()))
}

/// Parse config text and apply `key=value` overrides in order.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<SystemConfig> {
    let file: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let mut table = merge_over_reference(file)?;
    apply_overrides(&mut table, overrides)?;
    from_table(table)
}

pub fn apply_overrides(table: &mut Table, overrides: &[String]) -> Result<()> {
    for spec in overrides {
        let (key, value) = parse_override(spec)?;
        set_dotted(table, &key, value)?;
    }
    // Re-check keys, since overrides may introduce new ones.
    merge_over_reference(std::mem::take(table)).map(|t| *table = t)
}

/// Read a config file, or start from the reference when `path` is `None`.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> Result<SystemConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_config(&text, overrides)
        }
        None => {
            let mut table = to_table(&SystemConfig::reference_two_rotor())?;
            apply_overrides(&mut table, overrides)?;
            from_table(table)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EdgeGuard, InteractionKind};

    #[test]
    fn reference_round_trip() {
        let config = SystemConfig::reference_three_rotor(InteractionKind::NearestNeighbor);
        let text = to_toml_string(&config).unwrap();
        assert!(text.contains("[rotors.3]"));
        assert_eq!(parse_config(&text, &[]).unwrap(), config);
    }

    #[test]
    fn empty_file_is_reference() {
        assert_eq!(parse_config("", &[]).unwrap(), SystemConfig::reference_two_rotor());
    }

    #[test]
    fn dotted_overrides() {
        let overrides = vec![
            "rotors.1.kick_strength=0".to_string(),
            "interaction.strength = 0.1".to_string(),
            "resonance.detuning=1e-4".to_string(),
            "horizon=7".to_string(),
            "edge_guard=off".to_string(),
            "interaction.kind=nearest-neighbor".to_string(),
        ];
        let c = parse_config("", &overrides).unwrap();
        assert_eq!(c.rotors[0].kick_strength, 0.0);
        assert_eq!(c.rotors[1].kick_strength, 5.0);
        assert_eq!(c.interaction.strength, 0.1);
        assert_eq!(c.interaction.kind, InteractionKind::NearestNeighbor);
        assert_eq!(c.resonance.detuning, 1e-4);
        assert_eq!(c.horizon, 7);
        assert_eq!(c.edge_guard, EdgeGuard::Off);
    }

    #[test]
    fn file_rotors_replace_reference() {
        let text = "basis_size = 16\n[rotors.1]\ntau = 3\nkick_strength = 1.0\nkick_phase = 0.0\n";
        let c = parse_config(text, &[]).unwrap();
        assert_eq!(c.rotors, vec![RotorParams::new(3, 1.0, 0.0)]);
        assert_eq!(c.basis_size, 16);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_config("bogus = 1", &[]), Err(Error::Config(_))));
        assert!(matches!(parse_config("[resonance]\nperiodd = 1", &[]), Err(Error::Config(_))));
        let gap = "[rotors.1]\ntau=1\nkick_strength=0.0\nkick_phase=0.0\n[rotors.3]\ntau=2\nkick_strength=0.0\nkick_phase=0.0\n";
        assert!(matches!(parse_config(gap, &[]), Err(Error::Config(_))));
        assert!(matches!(parse_config("", &["horizon".into()]), Err(Error::Config(_))));
        assert!(matches!(parse_config("horizon = \"x\"", &[]), Err(Error::Config(_))));
    }
}
