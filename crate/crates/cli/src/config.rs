//! `--config FILE`: plain `key = value` lines merged into the argument list.
//! Flags given on the command line win over the file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use crate::CliError;

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn flag_present(args: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let with_eq = format!("--{key}=");
    args.iter().any(|a| {
        let a = a.to_string_lossy();
        a == long || a.starts_with(&with_eq)
    })
}

/// Removes `--config FILE` from `args` and appends every file entry whose
/// flag is not already present. Boolean entries (`true`/`false`) become bare
/// flags or are dropped.
pub fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(pos) = args.iter().position(|a| {
        let a = a.to_string_lossy();
        a == "--config" || a.starts_with("--config=")
    }) else {
        return Ok(args);
    };
    let flag = args.remove(pos).to_string_lossy().into_owned();
    let path = match flag.strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => {
            if pos >= args.len() {
                return Err(CliError::Usage("--config needs a file argument".into()));
            }
            args.remove(pos).to_string_lossy().into_owned()
        }
    };
    let entries = read_config(Path::new(&path))?;
    for (key, value) in entries {
        if flag_present(&args, &key) {
            continue;
        }
        match value.as_str() {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_merges() {
        let cfg = parse_config("k = 12\n# comment\nN=5 # trailing\n\n").unwrap();
        assert_eq!(cfg["k"], "12");
        assert_eq!(cfg["N"], "5");
        assert!(parse_config("nonsense").is_err());
    }

    #[test]
    fn command_line_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "k = 16\nN = 3\nstrict = true\n").unwrap();
        let args: Vec<OsString> = ["heckesum", "dim", "--config", path.to_str().unwrap(), "--k", "12"]
            .iter()
            .map(OsString::from)
            .collect();
        let merged: Vec<String> = merge_config(args).unwrap().into_iter().map(|a| a.into_string().unwrap()).collect();
        assert_eq!(merged, ["heckesum", "dim", "--k", "12", "--N", "3", "--strict"]);
    }
}
