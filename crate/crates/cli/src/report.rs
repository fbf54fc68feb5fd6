//! Output records in text or JSON-lines form, written once.

use std::io::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug)]
pub enum Format {
    Text,
    JsonLines,
}

#[derive(Clone, Debug)]
pub struct Record {
    kind: &'static str,
    fields: Vec<(&'static str, Value)>,
}

impl Record {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.fields.push((key, value.into()));
        self
    }
}

/// One command's output: parameters, per-item records and a summary.
#[derive(Clone, Debug)]
pub struct Report {
    command: &'static str,
    seed: u64,
    params: Vec<(&'static str, Value)>,
    records: Vec<Record>,
    summary: Vec<(&'static str, Value)>,
}

fn text_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Report {
    pub fn new(command: &'static str, seed: u64) -> Self {
        Self {
            command,
            seed,
            params: Vec::new(),
            records: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &'static str, value: impl Into<Value>) -> &mut Self {
        self.params.push((key, value.into()));
        self
    }

    pub fn record(&mut self, r: Record) -> &mut Self {
        self.records.push(r);
        self
    }

    pub fn summary(&mut self, key: &'static str, value: impl ToValue) -> &mut Self {
        self.summary.push((key, value.to_value()));
        self
    }

    fn head(&self, kind: &str) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("command".into(), self.command.into());
        m.insert("kind".into(), kind.into());
        m.insert("seed".into(), self.seed.into());
        for (k, v) in &self.params {
            m.insert((*k).into(), v.clone());
        }
        m
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::JsonLines => {
                for r in &self.records {
                    let mut m = self.head(r.kind);
                    for (k, v) in &r.fields {
                        m.insert((*k).into(), v.clone());
                    }
                    out.push_str(&Value::Object(m).to_string());
                    out.push('\n');
                }
                let mut m = self.head("summary");
                for (k, v) in &self.summary {
                    m.insert((*k).into(), v.clone());
                }
                out.push_str(&Value::Object(m).to_string());
                out.push('\n');
            }
            Format::Text => {
                out.push_str(&format!("{} seed {}", self.command, self.seed));
                for (k, v) in &self.params {
                    out.push_str(&format!(" {k} {}", text_value(v)));
                }
                out.push('\n');
                for r in &self.records {
                    out.push_str(r.kind);
                    let mut block = Vec::new();
                    for (k, v) in &r.fields {
                        let s = text_value(v);
                        if s.contains('\n') {
                            block.push(s);
                        } else {
                            out.push_str(&format!(" {k} {s}"));
                        }
                    }
                    out.push('\n');
                    for b in block {
                        for line in b.lines() {
                            out.push_str(&format!("  {line}\n"));
                        }
                    }
                }
                for (k, v) in &self.summary {
                    out.push_str(&format!("{k}: {}\n", text_value(v)));
                }
            }
        }
        out
    }
}

pub trait ToValue {
    fn to_value(&self) -> Value;
}

impl ToValue for &str {
    fn to_value(&self) -> Value {
        Value::String((*self).to_string())
    }
}

impl ToValue for &String {
    fn to_value(&self) -> Value {
        Value::String((*self).clone())
    }
}

impl ToValue for String {
    fn to_value(&self) -> Value {
        Value::String(self.clone())
    }
}

impl ToValue for bool {
    fn to_value(&self) -> Value {
        Value::Bool(*self)
    }
}

impl ToValue for usize {
    fn to_value(&self) -> Value {
        Value::from(*self)
    }
}

// big integers travel as strings
impl ToValue for num_bigint::BigInt {
    fn to_value(&self) -> Value {
        Value::String(self.to_string())
    }
}

/// Writes to `path` through a temporary file in the same directory, or to
/// stdout.
pub fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let io = |p: &Path, source| CliError::Io {
        path: p.to_path_buf(),
        source,
    };
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| io(Path::new("<stdout>"), e))?;
            stdout.flush().map_err(|e| io(Path::new("<stdout>"), e))
        }
        Some(p) => {
            let dir = p
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(p, e))?;
            tmp.write_all(text.as_bytes()).map_err(|e| io(p, e))?;
            tmp.persist(p).map_err(|e| io(p, e.error))?;
            Ok(())
        }
    }
}
