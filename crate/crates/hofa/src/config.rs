//! Configuration precedence: command-line flags, then `HOFA_*` environment
//! variables, then a `key = value` config file. Lower layers are merged by
//! appending the corresponding flags to the argument list before parsing.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::{ArgAction, Command};

use crate::error::{CliError, CliResult};
use crate::io::read_text;

/// `key = value` lines; `#` starts a comment; keys use `-` or `_`.
pub fn parse_config(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("config line {}: expected key = value", i + 1)))?;
        let v = v.trim().trim_matches('"').to_string();
        out.insert(normalize(k.trim()), v);
    }
    Ok(out)
}

fn normalize(key: &str) -> String {
    key.to_ascii_lowercase().replace('_', "-")
}

fn env_name(long: &str) -> String {
    format!("HOFA_{}", long.to_ascii_uppercase().replace('-', "_"))
}

/// Long names given on the command line, with aliases resolved.
fn given(args: &[OsString], cmd: &Command) -> Vec<String> {
    args.iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .filter_map(|a| {
            cmd.get_arguments()
                .find(|arg| arg.get_long_and_visible_aliases().is_some_and(|names| names.contains(&a.as_str())))
                .and_then(|arg| arg.get_long())
                .map(str::to_string)
        })
        .collect()
}

/// Appends flags from the environment and the config file for every long
/// option of the chosen subcommand (and the global ones) not set on the
/// command line. Config keys that no subcommand accepts are rejected.
pub fn merge_layers(
    args: Vec<OsString>,
    root: &Command,
    env: &dyn Fn(&str) -> Option<String>,
) -> CliResult<Vec<OsString>> {
    let sub_name = args.iter().skip(1).filter_map(|a| a.to_str()).find(|a| root.find_subcommand(a).is_some());
    let Some(sub_name) = sub_name.map(str::to_string) else {
        return Ok(args);
    };
    let sub = root.find_subcommand(&sub_name).unwrap();
    let config_path = args
        .iter()
        .filter_map(|a| a.to_str())
        .enumerate()
        .find_map(|(i, a)| {
            if a == "--config" {
                args.get(i + 1).and_then(|v| v.to_str()).map(str::to_string)
            } else {
                a.strip_prefix("--config=").map(str::to_string)
            }
        })
        .or_else(|| env("HOFA_CONFIG"));
    let file = match &config_path {
        Some(p) => parse_config(&read_text(Path::new(p))?)?,
        None => BTreeMap::new(),
    };
    let known: Vec<String> = root
        .get_arguments()
        .chain(root.get_subcommands().flat_map(|s| s.get_arguments()))
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();
    if let Some(bad) = file.keys().find(|k| !known.contains(k)) {
        return Err(CliError::Input(format!("config key `{bad}` is not an option of any subcommand")));
    }
    let mut present = given(&args, sub);
    present.extend(given(&args, root));
    let mut out = args;
    for arg in root.get_arguments().chain(sub.get_arguments()) {
        let Some(long) = arg.get_long() else { continue };
        if long == "config" || present.iter().any(|p| p == long) {
            continue;
        }
        let Some(value) = env(&env_name(long)).or_else(|| file.get(long).cloned()) else { continue };
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" | "1" | "yes" => out.push(format!("--{long}").into()),
                "false" | "0" | "no" => {}
                _ => return Err(CliError::Input(format!("`{long}` expects true or false, got `{value}`"))),
            },
            _ => {
                out.push(format!("--{long}").into());
                out.push(value.into());
            }
        }
    }
    Ok(out)
}
