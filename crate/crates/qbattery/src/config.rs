//! Flat `key = value` configuration files.
//!
//! The format is a plain UTF-8 text file: one `key = value` pair per line,
//! `#` starts a comment (full-line or trailing), blank lines are ignored.
//! Values are decimal numbers except where a schema says otherwise. Unknown
//! and duplicate keys are errors; every diagnostic carries its line number.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::scalar::Real;

/// One parsed `key = value` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    /// 1-based source line.
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Split config text into entries, rejecting malformed and duplicate lines.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.split_once('#') {
            Some((before, _)) => before,
            None => raw,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, got `{stripped}`"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config {
                line,
                message: "empty key".into(),
            });
        }
        if value.is_empty() {
            return Err(Error::Config {
                line,
                message: format!("key `{key}` has no value"),
            });
        }
        if !seen.insert(key.clone()) {
            return Err(Error::Config {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        entries.push(Entry { line, key, value });
    }
    Ok(entries)
}

/// Parse a decimal number, reporting the offending line and key on failure.
pub fn parse_number<T: Real>(entry_key: &str, value: &str, line: usize) -> Result<T> {
    let parsed: f64 = value.parse().map_err(|_| Error::Config {
        line,
        message: format!("key `{entry_key}`: `{value}` is not a number"),
    })?;
    Ok(T::of(parsed))
}

/// Assign one field of [`SystemParams`] by key name.
pub fn set_system_param<T: Real>(
    params: &mut SystemParams<T>,
    key: &str,
    value: &str,
    line: usize,
) -> Result<()> {
    let v = parse_number(key, value, line)?;
    match key {
        "delta_a" => params.delta_a = v,
        "delta_b" => params.delta_b = v,
        "delta_c" => params.delta_c = v,
        "g_a" => params.g_a = v,
        "g_b" => params.g_b = v,
        "j" => params.j = v,
        "phi" => params.phi = v,
        "epsilon" => params.epsilon = v,
        "kappa_a" => params.kappa_a = v,
        "kappa_b" => params.kappa_b = v,
        "gamma_m" => params.gamma_m = v,
        "omega_a" => params.omega_a = v,
        "omega_b" => params.omega_b = v,
        _ => {
            return Err(Error::UnknownKey {
                line,
                key: key.to_string(),
            })
        }
    }
    Ok(())
}

/// Load [`SystemParams`] from config text. Unset keys keep the
/// [`SystemParams::zeroed`] defaults (zero rates, unit frequencies), so a
/// usable file must at least set `gamma_m`.
pub fn system_params_from_str<T: Real>(text: &str) -> Result<SystemParams<T>> {
    let mut params = SystemParams::zeroed();
    for entry in parse_entries(text)? {
        set_system_param(&mut params, &entry.key, &entry.value, entry.line)?;
    }
    params.checked()
}
