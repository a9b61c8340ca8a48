//! Data files, the manifest describing them, and the provenance record.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Resolved;
use crate::failure::Failure;

/// A CSV column and its unit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Column {
    pub name: &'static str,
    pub unit: &'static str,
}

pub const fn col(name: &'static str, unit: &'static str) -> Column {
    Column { name, unit }
}

#[derive(Debug, Serialize)]
struct Entry {
    file: String,
    format: &'static str,
    description: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    columns: Vec<Column>,
}

/// Shortest round-trip decimal; infinities as `inf` / `-inf`, NaN as `NaN`.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Collects the files one subcommand writes into its output directory.
pub struct Artifacts {
    dir: PathBuf,
    entries: Vec<Entry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Artifacts { dir: dir.to_path_buf(), entries: Vec::new() })
    }

    pub fn csv(
        &mut self,
        name: &str,
        description: &str,
        columns: &[Column],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), Failure> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(columns.iter().map(|c| c.name))?;
        for r in rows {
            debug_assert_eq!(r.len(), columns.len());
            w.write_record(&r)?;
        }
        w.flush()?;
        self.entries.push(Entry {
            file: name.to_string(),
            format: "csv",
            description: description.to_string(),
            columns: columns.to_vec(),
        });
        Ok(())
    }

    pub fn json(&mut self, name: &str, description: &str, value: &impl Serialize) -> Result<(), Failure> {
        write_json(&self.dir.join(name), value)?;
        self.entries.push(Entry { file: name.to_string(), format: "json", description: description.to_string(), columns: vec![] });
        Ok(())
    }

    /// Writes `manifest.json` and `provenance.json`.
    pub fn finish(self, subcommand: &str, resolved: Option<&Resolved>) -> Result<(), Failure> {
        let hash = resolved.map(|r| r.hash.clone());
        write_json(
            &self.dir.join("manifest.json"),
            &json!({ "subcommand": subcommand, "config_hash": hash, "files": self.entries }),
        )?;
        let (config, sources) = match resolved {
            Some(r) => {
                let sources: serde_json::Map<String, Value> =
                    r.fields.iter().map(|f| (f.path.clone(), json!(f.source))).collect();
                (r.canonical.clone(), Value::Object(sources))
            }
            None => (Value::Null, Value::Null),
        };
        write_json(
            &self.dir.join("provenance.json"),
            &json!({
                "tool": "netlq",
                "version": env!("CARGO_PKG_VERSION"),
                "subcommand": subcommand,
                "seed": resolved.map(|r| r.file.experiment.seed),
                "config_hash": hash,
                "config": config,
                "sources": sources,
            }),
        )
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))
}
