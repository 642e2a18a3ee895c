//! Loading experiment configs with command-line overrides applied on top.

use std::fs;
use std::path::{Path, PathBuf};

use bbnet::protocol::ExperimentConfig;
use toml::{Table, Value};

use crate::failure::Failure;
use crate::ConfigArgs;

/// The merged config and the directory relative graph paths resolve against.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base_dir: Option<PathBuf>,
}

/// Flag > file > default. `seed` wins over any seed in the file.
pub fn load(args: &ConfigArgs, seed: Option<u64>) -> Result<Loaded, Failure> {
    let mut table = Table::try_from(ExperimentConfig::default()).map_err(|e| Failure::Runtime(e.to_string()))?;
    let mut base_dir = None;
    if let Some(path) = &args.config {
        let text =
            fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: Table = text.parse().map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        merge(&mut table, file);
        base_dir = path.parent().map(Path::to_path_buf);
    }
    for o in &args.overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("override {o:?} is not KEY=VALUE")))?;
        set(&mut table, key.trim(), parse_value(value.trim()))?;
    }
    let flags = [
        ("machine.max_len", args.max_len.map(|v| Value::Integer(v.into()))),
        ("machine.step_limit", args.step_limit.and_then(|v| i64::try_from(v).ok()).map(Value::Integer)),
        ("run.mappings", args.mappings.map(|v| Value::Integer(v.into()))),
        ("run.trials", args.trials.map(|v| Value::Integer(v.into()))),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            set(&mut table, key, v)?;
        }
    }
    let mut config: ExperimentConfig = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Failure::Config(e.to_string()))?;
    if seed.is_some() {
        config.seed = seed;
    }
    Ok(Loaded { config, base_dir })
}

/// A TOML literal when it parses as one, otherwise a bare string.
fn parse_value(text: &str) -> Value {
    format!("v = {text}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(text.to_string()))
}

/// Deep merge. A table whose `kind` tag differs replaces the old one, so a
/// variant never inherits another variant's fields.
fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) if same_kind(b, &o) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn same_kind(a: &Table, b: &Table) -> bool {
    match (a.get("kind"), b.get("kind")) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    }
}

fn set(table: &mut Table, key: &str, value: Value) -> Result<(), Failure> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| Failure::Config(format!("empty key in {key:?}")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Failure::Config(format!("{key}: {p} is not a table")))?;
    }
    match (cur.get_mut(last), value) {
        (Some(Value::Table(b)), Value::Table(o)) if same_kind(b, &o) => merge(b, o),
        (_, v) => {
            cur.insert(last.to_string(), v);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(config: Option<PathBuf>, overrides: &[&str]) -> ConfigArgs {
        ConfigArgs {
            config,
            overrides: overrides.iter().map(|s| s.to_string()).collect(),
            max_len: None,
            step_limit: None,
            mappings: None,
            trials: None,
        }
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "seed = 5\n[run]\nmappings = 3\n[machine]\nmax_len = 12\n").unwrap();
        let mut a = args(Some(path), &["graph.n=32"]);
        a.mappings = Some(7);
        let l = load(&a, Some(9)).unwrap();
        assert_eq!(l.config.seed, Some(9));
        assert_eq!(l.config.run.mappings, 7);
        assert_eq!(l.config.machine.max_len, 12);
        assert_eq!(l.config.run.trials, 1);
        match l.config.graph {
            bbnet::protocol::GraphSource::Ba { n, m, .. } => assert_eq!((n, m), (32, 3)),
            _ => panic!("expected a BA source"),
        }
    }

    #[test]
    fn variant_tables_replace_rather_than_merge() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        fs::write(&path, "[graph]\nkind = \"file\"\npath = \"g.txt\"\n[schedule]\nbudget = { kind = \"diameter\" }\n").unwrap();
        let l = load(&args(Some(path), &[]), None).unwrap();
        assert!(matches!(l.config.graph, bbnet::protocol::GraphSource::File { .. }));
        assert_eq!(l.config.schedule.budget, bbnet::protocol::BudgetFn::Diameter { offset: 0 });
        assert_eq!(l.base_dir.as_deref(), Some(dir.path()));
    }

    #[test]
    fn bad_override_is_a_config_error() {
        assert!(matches!(load(&args(None, &["nokey"]), None), Err(Failure::Config(_))));
        assert!(matches!(load(&args(None, &["run.bogus=1"]), None), Err(Failure::Config(_))));
    }

    #[test]
    fn string_values_fall_back_to_bare_text() {
        assert_eq!(parse_value("literal"), Value::String("literal".into()));
        assert_eq!(parse_value("3"), Value::Integer(3));
    }
}
