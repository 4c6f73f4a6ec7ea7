//! Documents and their JSON / CSV renderings.
//!
//! Every real is printed with 17 significant digits so that both formats
//! round-trip to the same double. Non-finite values become JSON `null` and
//! empty CSV fields.

use serde_json::{Map, Number, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Null,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Null, Cell::Real)
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Real(v) => match format_real(*v) {
                Some(s) => Value::Number(s.parse::<Number>().expect("formatted real is a JSON number")),
                None => Value::Null,
            },
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Null => Value::Null,
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Real(v) => format_real(*v).unwrap_or_default(),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => csv_escape(s),
            Cell::Null => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// `d.dddddddddddddddde±x`, or `None` for NaN and infinities.
///
/// The exponent always carries its sign so that JSON and CSV spell every
/// number identically.
pub fn format_real(v: f64) -> Option<String> {
    if !v.is_finite() {
        return None;
    }
    let s = format!("{v:.16e}");
    Some(match s.split_once('e') {
        Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
        _ => s,
    })
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::to_csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

pub type Fields = Vec<(String, Cell)>;

/// Ordered key/value section. Tables nest under `tables`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Section {
    pub fields: Fields,
    pub tables: Vec<(String, Table)>,
}

impl Section {
    pub fn set(&mut self, key: &str, value: impl Into<Cell>) {
        self.fields.push((key.to_string(), value.into()));
    }

    pub fn table(&mut self, key: &str, table: Table) {
        self.tables.push((key.to_string(), table));
    }

    fn to_json(&self) -> Value {
        let mut obj = Map::new();
        for (k, v) in &self.fields {
            obj.insert(k.clone(), v.to_json());
        }
        for (k, t) in &self.tables {
            obj.insert(k.clone(), t.to_json());
        }
        Value::Object(obj)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub config: Section,
    pub results: Section,
    pub diagnostics: Section,
    /// Name of the table in `results` that the CSV rendering emits.
    pub primary: String,
}

impl Document {
    pub fn primary_table(&self) -> Option<&Table> {
        self.results.tables.iter().find(|(k, _)| *k == self.primary).map(|(_, t)| t)
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("config".into(), self.config.to_json());
        obj.insert("results".into(), self.results.to_json());
        obj.insert("diagnostics".into(), self.diagnostics.to_json());
        Value::Object(obj)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json()).expect("document serializes");
                s.push('\n');
                s
            }
            Format::Csv => self.primary_table().map(Table::to_csv).unwrap_or_default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_round_trip() {
        for v in [std::f64::consts::PI, 1e-300, -2.5e17, 0.1 + 0.2, f64::MIN_POSITIVE, 0.0] {
            let s = format_real(v).unwrap();
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let json = Cell::Real(v).to_json();
            assert_eq!(json.to_string(), s);
        }
        assert_eq!(format_real(1.0).unwrap(), "1.0000000000000000e+0");
        assert!(format_real(f64::NAN).is_none());
        assert_eq!(Cell::Real(f64::INFINITY).to_json(), Value::Null);
        assert_eq!(Cell::Real(f64::NAN).to_csv(), "");
    }

    #[test]
    fn csv_quotes_when_needed() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::from("x,y"), Cell::from("say \"hi\"")]);
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n");
    }

    #[test]
    fn json_has_three_sections_in_order() {
        let mut doc = Document { primary: "rows".into(), ..Document::default() };
        doc.config.set("mode", "solve");
        let mut t = Table::new(&["x"]);
        t.push(vec![Cell::Real(2.0)]);
        doc.results.table("rows", t);
        let v = doc.to_json();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["config", "results", "diagnostics"]);
        assert_eq!(v["results"]["rows"][0]["x"].to_string(), "2.0000000000000000e+0");
        assert_eq!(doc.render(Format::Csv), "x\n2.0000000000000000e+0\n");
    }
}
