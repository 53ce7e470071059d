use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::config::Format;
use crate::error::{Error, Result};

/// A single table entry.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

/// Formats a float with 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{:.11e}", x + 0.0)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // Round through the 12-digit text so CSV and JSON agree exactly.
            Cell::Float(x) if x.is_finite() => json!(format_float(*x).parse::<f64>().unwrap_or(*x)),
            Cell::Float(_) | Cell::Empty => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

/// Result of one command: metadata lines followed by fixed-schema rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub command: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Ordered `(key, value)` header entries; values are JSON.
    pub header: Vec<(String, Value)>,
}

impl SweepTable {
    pub fn new(command: &str, columns: &[&'static str]) -> Self {
        SweepTable {
            command: command.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            header: vec![
                ("command".into(), json!(command)),
                ("version".into(), json!(env!("CARGO_PKG_VERSION"))),
            ],
        }
    }

    pub fn push_header(&mut self, key: &str, value: Value) {
        self.header.push((key.to_string(), value));
    }

    pub fn header_value(&self, key: &str) -> Option<&Value> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the schema");
        self.rows.push(row);
    }

    /// Column of a row by name.
    pub fn get(&self, row: usize, column: &str) -> Option<&Cell> {
        let j = self.columns.iter().position(|c| *c == column)?;
        self.rows.get(row).map(|r| &r[j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let header: Map<String, Value> = self.header.iter().cloned().collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({ "header": header, "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Serializes `table` to `path`, or to stdout when `path` is `None`.
pub fn write_table(table: &SweepTable, format: Format, path: Option<&Path>) -> Result<()> {
    let text = table.render(format);
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Parsed form of a CSV produced by [`SweepTable::to_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCsv {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedCsv {
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }
}

/// Reads back a CSV table. Quoted text cells are not supported.
pub fn parse_csv(text: &str) -> Result<ParsedCsv> {
    let mut header = Vec::new();
    let mut columns = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(h) = line.strip_prefix("# ") {
            let (k, v) = h.split_once(": ").unwrap_or((h, ""));
            header.push((k.to_string(), v.to_string()));
        } else if columns.is_none() {
            columns = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
        } else {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if Some(row.len()) != columns.as_ref().map(Vec::len) {
                return Err(Error::InvalidInput(format!("line {}: wrong number of cells", i + 1)));
            }
            rows.push(row);
        }
    }
    Ok(ParsedCsv {
        header,
        columns: columns.unwrap_or_default(),
        rows,
    })
}

/// Scatter plot of `(x, y)` points as a standalone SVG document.
pub fn scatter_svg(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let (w, h, pad) = (480.0, 360.0, 48.0);
    let range = |sel: fn(&(f64, f64)) -> f64| {
        let lo = points.iter().map(sel).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            let m = 0.05 * (hi - lo);
            (lo - m, hi + m)
        }
    };
    let (x0, x1) = range(|p| p.0);
    let (y0, y1) = range(|p| p.1);
    let sx = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{pad} {pad} V{} H{}" fill="none" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    for (v, x) in [(x0, pad), (x1, w - pad)] {
        let _ = writeln!(s, r#"<text x="{x}" y="{}" font-size="11" text-anchor="middle">{v:.4}</text>"#, h - pad + 16.0);
    }
    for (v, y) in [(y0, h - pad), (y1, pad)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" font-size="11" text-anchor="end">{v:.4}</text>"#, pad - 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{x_label}</text>"#, w / 2.0, h - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#,
        h / 2.0,
        h / 2.0
    );
    for &(x, y) in points {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, sx(x), sy(y));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepTable {
        let mut t = SweepTable::new("demo", &["x", "flag", "label"]);
        t.push_row(vec![Cell::Float(-0.48712345678901234), Cell::Bool(true), Cell::Text("a".into())]);
        t.push_row(vec![Cell::Float(1e-300), Cell::Bool(false), Cell::Empty]);
        t
    }

    #[test]
    fn floats_keep_twelve_digits() {
        assert_eq!(format_float(-0.48712345678901234), "-4.87123456789e-1");
        assert_eq!(format_float(0.0), "0.00000000000e0");
        let t = sample();
        let parsed = parse_csv(&t.to_csv()).unwrap();
        assert_eq!(parsed.columns, ["x", "flag", "label"]);
        assert_eq!(parsed.header[0], ("command".into(), "\"demo\"".into()));
        let x: f64 = parsed.rows[0][0].parse().unwrap();
        assert!((x - -0.48712345678901234).abs() <= 5e-12 * 0.49);
        assert_eq!(parsed.rows[1][2], "");
    }

    #[test]
    fn json_mirrors_columns() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["columns"], json!(["x", "flag", "label"]));
        assert_eq!(v["rows"][0]["flag"], json!(true));
        assert_eq!(v["rows"][1]["label"], Value::Null);
        assert_eq!(v["header"]["command"], json!("demo"));
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = SweepTable::new("demo", &["a"]);
        let csv = t.to_csv();
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1);
    }

    #[test]
    fn svg_has_one_marker_per_point() {
        let s = scatter_svg(&[(0.0, 1.0), (1.0, 2.0), (2.0, 2.5)], "x", "y");
        assert_eq!(s.matches("<circle").count(), 3);
        assert!(s.starts_with("<svg"));
    }
}
