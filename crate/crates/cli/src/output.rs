//! Table emission. CSV carries metadata as leading `#` lines; JSON is a
//! single object `{metadata, columns, rows}`. Numbers are written with 17
//! significant digits so every value round-trips.

use std::io::Write;

use cvqkd::sweeps::SweepResult;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub values: Vec<Option<f64>>,
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub metadata: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl From<SweepResult> for Table {
    fn from(r: SweepResult) -> Self {
        Table {
            metadata: r.metadata.into_iter().collect(),
            columns: r.columns,
            rows: r
                .rows
                .into_iter()
                .map(|row| Row {
                    values: row.values,
                    status: row.status.name().to_string(),
                })
                .collect(),
        }
    }
}

fn number(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        _ => String::new(),
    }
}

pub fn csv_bytes(table: &Table) -> Result<Vec<u8>, String> {
    let mut buf = Vec::new();
    for (key, value) in &table.metadata {
        writeln!(buf, "# {key}: {value}").map_err(|e| e.to_string())?;
    }
    let mut w = csv::Writer::from_writer(buf);
    let header = table.columns.iter().map(String::as_str).chain(["status"]);
    w.write_record(header).map_err(|e| e.to_string())?;
    for row in &table.rows {
        let mut record: Vec<String> = row.values.iter().map(|v| number(*v)).collect();
        record.push(row.status.clone());
        w.write_record(&record).map_err(|e| e.to_string())?;
    }
    w.into_inner().map_err(|e| e.to_string())
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, String> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| e.to_string())?;
    out.push(b'\n');
    Ok(out)
}

pub fn table_bytes(table: &Table, format: Format) -> Result<Vec<u8>, String> {
    match format {
        Format::Csv => csv_bytes(table),
        Format::Json => json_bytes(table),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        let mut metadata = Map::new();
        metadata.insert("figure".into(), Value::from("demo"));
        Table {
            metadata,
            columns: vec!["a".into(), "b".into()],
            rows: vec![
                Row {
                    values: vec![Some(0.1), Some(1.0 / 3.0)],
                    status: "ok".into(),
                },
                Row {
                    values: vec![Some(2.0), None],
                    status: "unbounded".into(),
                },
            ],
        }
    }

    #[test]
    fn csv_layout_round_trips() {
        let text = String::from_utf8(csv_bytes(&table()).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# figure: \"demo\"");
        assert_eq!(lines[1], "a,b,status");
        let third: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(third.to_bits(), (1.0f64 / 3.0).to_bits());
        assert_eq!(lines[3], "2.0000000000000000e0,,unbounded");
    }

    #[test]
    fn json_uses_null_for_missing() {
        let v: Value = serde_json::from_slice(&json_bytes(&table()).unwrap()).unwrap();
        assert_eq!(v["rows"][1]["values"][1], Value::Null);
        assert_eq!(v["columns"][0], "a");
    }
}
