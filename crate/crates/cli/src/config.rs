//! `key = value` defaults files. Each key names a long flag; entries are
//! appended as arguments unless the flag is already present, so anything
//! typed on the command line wins.

use std::ffi::OsString;

use crate::CliError;

/// Pulls `--config FILE` out of the raw arguments (without consuming it —
/// clap still sees and validates it) and appends the file's entries.
pub fn apply_config_file(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = find_config_value(&args)? else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Config(format!("cannot read config file {path}: {e}")))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!(
                "{path}:{}: expected `key = value`, got `{line}`",
                lineno + 1
            )));
        };
        let flag = format!("--{}", key.trim().replace('_', "-"));
        if flag == "--" {
            return Err(CliError::Config(format!("{path}:{}: empty key", lineno + 1)));
        }
        if !has_flag(&args, &flag) {
            args.push(flag.into());
            args.push(value.trim().to_string().into());
        }
    }
    Ok(args)
}

fn find_config_value(args: &[OsString]) -> Result<Option<String>, CliError> {
    for (i, arg) in args.iter().enumerate() {
        let Some(s) = arg.to_str() else { continue };
        if s == "--config" {
            let Some(v) = args.get(i + 1).and_then(|v| v.to_str()) else {
                return Err(CliError::Config("--config needs a file path".into()));
            };
            return Ok(Some(v.to_string()));
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Ok(Some(v.to_string()));
        }
    }
    Ok(None)
}

fn has_flag(args: &[OsString], flag: &str) -> bool {
    args.iter().any(|a| {
        a.to_str()
            .is_some_and(|s| s == flag || s.strip_prefix(flag).is_some_and(|r| r.starts_with('=')))
    })
}
