//! `--config FILE` support.
//!
//! Keys mirror long flags (`clique_size` or `clique-size`). Top-level
//! scalars apply to every subcommand; a table named after the subcommand
//! (`[simulate]`, `[walks.hypercube]`) applies to that subcommand only.
//! The resulting flags are spliced in right after the subcommand name, so
//! any flag given on the command line later overrides them.

use std::ffi::OsString;
use std::path::Path;

use toml::{Table, Value};

use crate::cli::SUBCOMMANDS;

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Index just past the subcommand tokens, and the subcommand path.
fn subcommand_end(args: &[OsString]) -> Option<(usize, Vec<String>)> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if s == "--config" {
            i += 2;
            continue;
        }
        if SUBCOMMANDS.contains(&s.as_ref()) {
            let mut path = vec![s.to_string()];
            if s == "walks" {
                if let Some(next) = args.get(i + 1) {
                    path.push(next.to_string_lossy().to_string());
                    return Some((i + 2, path));
                }
            }
            return Some((i + 1, path));
        }
        i += 1;
    }
    None
}

fn scalar(value: &Value) -> Result<Option<String>, String> {
    Ok(match value {
        Value::String(s) => Some(s.clone()),
        Value::Integer(i) => Some(i.to_string()),
        Value::Float(f) => Some(f.to_string()),
        Value::Boolean(_) => None,
        Value::Array(items) => {
            let parts = items
                .iter()
                .map(|v| scalar(v)?.ok_or_else(|| "arrays may not hold booleans".to_string()))
                .collect::<Result<Vec<_>, _>>()?;
            Some(parts.join(","))
        }
        other => return Err(format!("unsupported value {other}")),
    })
}

fn flags_from(table: &Table, out: &mut Vec<OsString>) -> Result<(), String> {
    for (key, value) in table {
        if value.is_table() || key == "config" || key == "json" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match (value, scalar(value)?) {
            (Value::Boolean(true), _) => out.push(flag.into()),
            (Value::Boolean(false), _) => {}
            (_, Some(v)) => {
                out.push(flag.into());
                out.push(v.into());
            }
            (_, None) => {}
        }
    }
    Ok(())
}

/// Expand `--config FILE` into explicit flags.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some((end, subcommand)) = subcommand_end(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    let table: Table = text.parse().map_err(|e| format!("parsing {}: {e}", path.display()))?;
    let mut injected = Vec::new();
    flags_from(&table, &mut injected)?;
    let mut section = Some(&table);
    for name in &subcommand {
        section = section.and_then(|t| t.get(name.as_str())).and_then(Value::as_table);
    }
    if let Some(section) = section {
        flags_from(section, &mut injected)?;
    }
    let mut out = args[..end].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[end..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn splices_after_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.toml");
        std::fs::write(
            &file,
            "seed = 4\n[walks.hypercube]\nn = 3\nexact = true\n[simulate]\ntrials = 9\n",
        )
        .unwrap();
        let args = os(&[
            "schelling",
            "--config",
            file.to_str().unwrap(),
            "walks",
            "hypercube",
            "--n",
            "5",
        ]);
        let out = expand(args).unwrap();
        let text: Vec<String> = out.iter().map(|s| s.to_string_lossy().to_string()).collect();
        assert_eq!(&text[3..5], &["walks", "hypercube"]);
        let tail = &text[5..];
        assert!(tail.windows(2).any(|w| w == ["--seed", "4"]));
        assert!(tail.windows(2).any(|w| w == ["--n", "3"]));
        assert!(tail.contains(&"--exact".to_string()));
        assert!(!tail.contains(&"--trials".to_string()));
        assert_eq!(&tail[tail.len() - 2..], &["--n", "5"]);
    }

    #[test]
    fn no_config_is_identity() {
        let args = os(&["schelling", "oracle", "--tau", "1/2"]);
        assert_eq!(expand(args.clone()).unwrap(), args);
    }
}
