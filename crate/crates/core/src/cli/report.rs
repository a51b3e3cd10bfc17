use std::fmt::Write as _;

use serde_json::{Map, Value};

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // Round through the printed form so both formats carry the same digits.
            Cell::Num(x) => match fmt_num(*x).parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                Some(n) => Value::Number(n),
                None => Value::String(fmt_num(*x)),
            },
            Cell::Int(n) => Value::from(*n),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string().to_lowercase()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    /// Resolved configuration, in a fixed order.
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<(String, Cell)>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# escape-lab {}", self.command).unwrap();
        for (k, v) in &self.config {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        if !self.summary.is_empty() {
            writeln!(out, "# summary").unwrap();
            for (k, v) in &self.summary {
                writeln!(out, "# {k} = {}", v.csv()).unwrap();
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut config = Map::new();
        config.insert("command".into(), Value::String(self.command.clone()));
        for (k, v) in &self.config {
            config.insert(k.clone(), Value::String(v.clone()));
        }
        let records: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert(c.clone(), v.json());
                }
                Value::Object(m)
            })
            .collect();
        let mut summary = Map::new();
        for (k, v) in &self.summary {
            summary.insert(k.clone(), v.json());
        }
        let mut doc = Map::new();
        doc.insert("config".into(), Value::Object(config));
        doc.insert("records".into(), Value::Array(records));
        doc.insert("summary".into(), Value::Object(summary));
        let mut s = serde_json::to_string_pretty(&Value::Object(doc)).unwrap();
        s.push('\n');
        s
    }
}

/// Columns of a CSV report, skipping `#` lines.
pub fn read_columns(text: &str, x_col: &str, y_col: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines.next().ok_or("no header row")?.split(',').map(str::trim).collect();
    let find = |name: &str| header.iter().position(|h| *h == name).ok_or(format!("no column `{name}`"));
    let (ix, iy) = (find(x_col)?, find(y_col)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| -> Result<f64, String> {
            cells
                .get(i)
                .ok_or(format!("row {} is short", k + 1))?
                .parse::<f64>()
                .map_err(|e| format!("row {}: {e}", k + 1))
        };
        xs.push(get(ix)?);
        ys.push(get(iy)?);
    }
    Ok((xs, ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_through_the_reader() {
        let r = Report {
            command: "escape-scan".into(),
            config: vec![("state".into(), "kinked-sine".into())],
            columns: vec!["dt".into(), "escape_total".into()],
            rows: vec![vec![1e-6.into(), 2.5e-7.into()], vec![1e-5.into(), 7.9e-6.into()]],
            summary: vec![("exponent".into(), 1.5.into())],
        };
        let csv = r.to_csv();
        assert!(csv.contains("1.00000000000e-6,2.50000000000e-7"));
        let (x, y) = read_columns(&csv, "dt", "escape_total").unwrap();
        assert_eq!(x, vec![1e-6, 1e-5]);
        assert_eq!(y, vec![2.5e-7, 7.9e-6]);
        assert!(read_columns(&csv, "dt", "nope").is_err());
        let json: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["records"][1]["escape_total"], 7.9e-6);
    }
}
