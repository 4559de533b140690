//! Rendering of command results as JSON, CSV or plain text.

use serde_json::{Map, Value};

use crate::CliError;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// What a command produced: a JSON record, or a table of rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Record(Map<String, Value>),
    Table { key: &'static str, rows: Vec<Map<String, Value>> },
    Scalar { key: &'static str, value: Value },
}

fn flatten_into(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_into(&key, x, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten_into(&format!("{prefix}.{i}"), x, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn flatten(m: &Map<String, Value>) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into("", &Value::Object(m.clone()), &mut out);
    out
}

fn csv_rows(rows: &[Map<String, Value>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        let header: Vec<String> = flatten(first).into_iter().map(|(k, _)| k).collect();
        w.write_record(&header).map_err(|e| CliError::Output(e.to_string()))?;
    }
    for r in rows {
        let values: Vec<String> = flatten(r).into_iter().map(|(_, v)| v).collect();
        w.write_record(&values).map_err(|e| CliError::Output(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

pub fn render(payload: &Payload, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let mut top = Map::new();
            top.insert("schema".into(), Value::String(SCHEMA_VERSION.into()));
            match payload {
                Payload::Record(m) => top.extend(m.clone()),
                Payload::Table { key, rows } => {
                    top.insert((*key).into(), Value::Array(rows.iter().cloned().map(Value::Object).collect()));
                }
                Payload::Scalar { key, value } => {
                    top.insert((*key).into(), value.clone());
                }
            }
            let mut s = serde_json::to_string_pretty(&Value::Object(top)).map_err(|e| CliError::Output(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => match payload {
            Payload::Record(m) => csv_rows(std::slice::from_ref(m)),
            Payload::Table { rows, .. } => csv_rows(rows),
            Payload::Scalar { key, value } => {
                let mut m = Map::new();
                m.insert((*key).into(), value.clone());
                csv_rows(&[m])
            }
        },
        Format::Text => match payload {
            Payload::Scalar { value, .. } => Ok(format!("{}\n", value)),
            Payload::Record(m) => Ok(flatten(m).into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()),
            Payload::Table { rows, .. } => Ok(rows
                .iter()
                .map(|r| flatten(r).into_iter().map(|(_, v)| v).collect::<Vec<_>>().join(" ") + "\n")
                .collect()),
        },
    }
}
