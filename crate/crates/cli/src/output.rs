//! Artifact writing. Every file carries the schema version and the resolved
//! configuration; nothing time- or host-dependent is written, so exact runs
//! reproduce byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, SCHEMA};
use crate::error::CliError;

pub struct ArtifactWriter {
    dir: PathBuf,
    command: &'static str,
    config: RunConfig,
    hash: String,
    written: Vec<String>,
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl ArtifactWriter {
    pub fn new(command: &'static str, config: &RunConfig) -> Result<Self, CliError> {
        let dir = config.output_dir.clone();
        fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("cannot create {}", dir.display()), e))?;
        Ok(ArtifactWriter {
            dir,
            command,
            config: config.clone(),
            hash: config.hash(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn envelope(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": self.hash,
            "config": self.config,
        })
    }

    /// CSV with `#` comment lines holding the envelope, then a header row.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut text = String::new();
        text.push_str(&format!(
            "# schema={SCHEMA} command={} config_hash={} seed={}\n",
            self.command, self.hash, self.config.seed
        ));
        text.push_str(&format!("# config={}\n", serde_json::to_string(&self.config)?));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let body = w.into_inner().map_err(|e| CliError::io("cannot flush CSV", e.into_error()))?;
        text.push_str(std::str::from_utf8(&body).expect("CSV of UTF-8 fields"));
        self.write(name, &path, text)
    }

    /// JSON document `{envelope…, "result": value}`.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut doc = self.envelope();
        doc["result"] = serde_json::to_value(value)?;
        let path = self.dir.join(name);
        self.write(name, &path, serde_json::to_string_pretty(&doc)? + "\n")
    }

    fn write(&mut self, name: &str, path: &Path, text: String) -> Result<PathBuf, CliError> {
        fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))?;
        self.written.push(name.to_string());
        Ok(path.to_path_buf())
    }

    /// Run manifest listing every artifact; `extra` adds command-specific fields.
    pub fn finish(mut self, extra: Value) -> Result<PathBuf, CliError> {
        let mut doc = self.envelope();
        doc["seed"] = json!(self.config.seed);
        doc["artifacts"] = json!(self.written);
        if let Value::Object(map) = extra {
            for (k, v) in map {
                doc[k] = v;
            }
        }
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        fs::write(&path, text).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))?;
        self.written.push("manifest.json".into());
        Ok(path)
    }
}
