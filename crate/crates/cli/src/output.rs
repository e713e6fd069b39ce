//! Serialization shared by every subcommand.

use std::io::Write;

use serde_json::{Map, Value};

pub const SCHEMA: &str = "zl-1";

/// Rounds to 12 significant digits so output is stable across platforms.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().unwrap());
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn fmt_float(x: f64) -> String {
    let x = round12(x);
    if x.is_finite() {
        serde_json::Number::from_f64(x).map_or_else(|| x.to_string(), |n| n.to_string())
    } else {
        x.to_string()
    }
}

/// Rows for CSV output; every cell is already formatted.
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub struct Report {
    pub command: &'static str,
    pub body: Map<String, Value>,
    pub table: Option<Table>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            body: Map::new(),
            table: None,
        }
    }

    pub fn field(mut self, key: &str, value: impl serde::Serialize) -> Self {
        let v = serde_json::to_value(value).expect("report fields serialize");
        self.body.insert(key.to_string(), v);
        self
    }

    pub fn table(mut self, table: Table) -> Self {
        self.table = Some(table);
        self
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        map.insert("schema".into(), SCHEMA.into());
        map.insert("command".into(), self.command.into());
        for (k, v) in &self.body {
            map.insert(k.clone(), v.clone());
        }
        let mut v = Value::Object(map);
        round_value(&mut v);
        v
    }

    pub fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
        writeln!(out)
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> Result<(), String> {
        let table = self
            .table
            .as_ref()
            .ok_or_else(|| format!("`{}` has no tabular output", self.command))?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&table.headers).map_err(|e| e.to_string())?;
        for row in &table.rows {
            w.write_record(row).map_err(|e| e.to_string())?;
        }
        w.flush().map_err(|e| e.to_string())
    }
}
