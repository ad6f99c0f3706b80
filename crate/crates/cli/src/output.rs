use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::{Format, Output};
use crate::Failure;

pub const TOOL: &str = concat!("gridvuln ", env!("CARGO_PKG_VERSION"));

/// Configuration embedded in every output, in insertion order.
#[derive(Debug, Clone)]
pub struct RunInfo {
    fields: Vec<(String, Value)>,
}

impl RunInfo {
    pub fn new(command: &str) -> Self {
        Self {
            fields: vec![("tool".into(), TOOL.into()), ("command".into(), command.into())],
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl Into<Value>) -> Self {
        self.fields.push((key.into(), value.into()));
        self
    }

    pub fn comment_lines(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.fields {
            let text = match value {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("# {key}: {text}\n"));
        }
        out
    }

    pub fn to_value(&self) -> Value {
        let map: Map<String, Value> = self
            .fields
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Value::Object(map)
    }
}

/// One output record: its CSV row and its JSON form.
pub struct Record {
    pub csv: String,
    pub json: Value,
}

impl Record {
    pub fn new(csv: String, item: &impl Serialize) -> Result<Self, Failure> {
        Ok(Self {
            csv,
            json: serde_json::to_value(item).map_err(gridvuln::Error::from)?,
        })
    }
}

/// Renders records as a commented CSV table or a JSON array, each element
/// carrying the run configuration under `run`.
pub fn render(run: &RunInfo, header: &str, records: &[Record], format: Format) -> Result<String, Failure> {
    match format {
        Format::Csv => {
            let mut out = run.comment_lines();
            out.push_str(header);
            out.push('\n');
            for r in records {
                out.push_str(&r.csv);
                if !r.csv.ends_with('\n') {
                    out.push('\n');
                }
            }
            Ok(out)
        }
        Format::Json => {
            let items: Vec<Value> = records
                .iter()
                .map(|r| {
                    let mut obj = match &r.json {
                        Value::Object(m) => m.clone(),
                        other => {
                            let mut m = Map::new();
                            m.insert("value".into(), other.clone());
                            m
                        }
                    };
                    obj.insert("run".into(), run.to_value());
                    Value::Object(obj)
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&items).map_err(gridvuln::Error::from)?;
            s.push('\n');
            Ok(s)
        }
    }
}

/// Writes to `<dir>/<name>.<ext>` or to stdout.
pub fn emit(output: &Output, name: &str, text: &str) -> Result<(), Failure> {
    emit_to(output.out.as_deref(), name, output.format, text)
}

pub fn emit_to(dir: Option<&Path>, name: &str, format: Format, text: &str) -> Result<(), Failure> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|source| open_error(dir, source))?;
            let path = dir.join(format!("{name}.{}", format.extension()));
            fs::write(&path, text).map_err(|source| open_error(&path, source))?;
            log::info!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(gridvuln::Error::from)?;
        }
    }
    Ok(())
}

fn open_error(path: &Path, source: std::io::Error) -> Failure {
    gridvuln::Error::Open {
        path: path.display().to_string(),
        source,
    }
    .into()
}
