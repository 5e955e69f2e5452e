//! `key = value` config files. Each key names a long flag; a flag given on the
//! command line wins over the same key in the file.
//!
//! ```text
//! # protocol run
//! seed = 7
//! rho = -1,0,1
//! alignment = isochronous
//! records = true
//! ```

use std::ffi::OsString;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
}

pub fn parse_config(text: &str) -> Result<Vec<ConfigEntry>, CliError> {
    let mut out: Vec<ConfigEntry> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Usage(format!(
                "config line {}: invalid key {key:?}",
                lineno + 1
            )));
        }
        if out.iter().any(|e| e.key == key) {
            return Err(CliError::Usage(format!("config key {key:?} repeated")));
        }
        out.push(ConfigEntry {
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

fn flag_present(args: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_eq = format!("{flag}=");
    args.iter().any(|a| {
        a.to_str()
            .is_some_and(|s| s == flag || s.starts_with(&with_eq))
    })
}

/// Path given by `--config`, if any.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Appends config entries as flags unless the command line already sets them.
/// `true`/`false` values toggle switches.
pub fn merge_config(args: Vec<OsString>, entries: &[ConfigEntry]) -> Vec<OsString> {
    let mut merged = args.clone();
    for e in entries {
        if flag_present(&args, &e.key) {
            continue;
        }
        match e.value.as_str() {
            "true" => merged.push(format!("--{}", e.key).into()),
            "false" => {}
            v => merged.push(format!("--{}={v}", e.key).into()),
        }
    }
    merged
}

pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| {
        CliError::Usage(format!("cannot read config {}: {e}", path.to_string_lossy()))
    })?;
    Ok(merge_config(args, &parse_config(&text)?))
}
