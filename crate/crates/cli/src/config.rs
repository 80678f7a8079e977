//! `--config` manifests: `key = value` lines merged under the explicit flags.

use std::ffi::OsString;
use std::fs;

use clap::Command;

#[derive(Debug)]
pub enum ConfigError {
    Io(String),
    Syntax(String),
}

fn parse(text: &str, path: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax(format!("{path}:{}: expected key = value", no + 1)));
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        let val = v.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(ConfigError::Syntax(format!("{path}:{}: empty key", no + 1)));
        }
        out.push((key, val));
    }
    Ok(out)
}

// value of `--config` in the raw arguments, if any
fn config_path(args: &[OsString]) -> Option<String> {
    let mut it = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned());
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            return it.next();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn given(args: &[OsString], key: &str) -> bool {
    let flag = format!("--{key}");
    let prefix = format!("--{key}=");
    args.iter().any(|a| {
        let a = a.to_string_lossy();
        a == flag.as_str() || a.starts_with(&prefix)
    })
}

/// Returns `args` with every config entry not already given on the command
/// line spliced in right after the subcommand name.
pub fn merge(cmd: &Command, args: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| ConfigError::Io(format!("{path}: {e}")))?;
    let entries = parse(&text, &path)?;

    let names: Vec<&str> = cmd.get_subcommands().map(|c| c.get_name()).collect();
    let Some(pos) = args.iter().position(|a| names.contains(&a.to_string_lossy().as_ref())) else {
        return Err(ConfigError::Syntax("a subcommand is required".into()));
    };
    let sub = cmd
        .get_subcommands()
        .find(|c| c.get_name() == args[pos].to_string_lossy())
        .expect("subcommand listed above");

    let mut injected = Vec::new();
    for (key, val) in entries {
        if key == "config" {
            continue;
        }
        let arg = sub.get_arguments().chain(cmd.get_arguments()).find(|a| a.get_long() == Some(key.as_str()));
        let Some(arg) = arg else {
            return Err(ConfigError::Syntax(format!(
                "{path}: key {key:?} is not an option of `{}`",
                sub.get_name()
            )));
        };
        if given(&args, &key) {
            continue;
        }
        if arg.get_action().takes_values() {
            injected.push(OsString::from(format!("--{key}={val}")));
        } else {
            match val.as_str() {
                "true" | "yes" | "1" => injected.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" => {}
                other => {
                    return Err(ConfigError::Syntax(format!(
                        "{path}: {key} expects true or false, got {other:?}"
                    )))
                }
            }
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_underscores() {
        let kv = parse("# run\n s_range = 0.3:0.6:2\n\nseed=7\n", "m").unwrap();
        assert_eq!(kv, vec![("s-range".into(), "0.3:0.6:2".into()), ("seed".into(), "7".into())]);
        assert!(parse("nonsense\n", "m").is_err());
    }
}
