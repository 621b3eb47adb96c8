//! CSV and JSON emission with a metadata header.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(x) => json!(fmt_num(*x)),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Nine significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap();
    let a = rounded.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Replaces the row list in JSON output when set.
    pub json: Option<Value>,
}

impl Report {
    pub fn table(columns: &[&str], rows: Vec<Vec<Cell>>) -> Self {
        Report {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows,
            json: None,
        }
    }

    /// A key/value table for CSV, the value itself for JSON.
    pub fn object(value: Value) -> Self {
        let rows = match &value {
            Value::Object(map) => map
                .iter()
                .map(|(k, v)| vec![Cell::Text(k.clone()), scalar(v)])
                .collect(),
            other => vec![vec![Cell::Text("value".into()), scalar(other)]],
        };
        Report {
            columns: vec!["key".into(), "value".into()],
            rows,
            json: Some(value),
        }
    }

    pub fn with_json(mut self, value: Value) -> Self {
        self.json = Some(value);
        self
    }

    pub fn render_csv(&self, meta: &Map<String, Value>) -> String {
        let mut out = String::new();
        for (k, v) in meta {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("# {k}: {text}\n"));
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

    pub fn render_json(&self, meta: &Map<String, Value>) -> String {
        let result = self.json.clone().unwrap_or_else(|| {
            Value::Array(
                self.rows
                    .iter()
                    .map(|row| Value::Object(self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect()))
                    .collect(),
            )
        });
        let doc = json!({ "metadata": meta, "result": result });
        let mut s = serde_json::to_string_pretty(&doc).unwrap();
        s.push('\n');
        s
    }
}

fn scalar(v: &Value) -> Cell {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Cell::Int(i),
            None => Cell::Num(n.as_f64().unwrap()),
        },
        Value::Bool(b) => Cell::Bool(*b),
        Value::String(s) => Cell::Text(s.clone()),
        Value::Null => Cell::Text(String::new()),
        other => Cell::Text(other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(fmt_num(0.48121182505960347), "0.481211825");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-2.5e-7), "-2.5e-7");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn csv_quoting_and_header() {
        let r = Report::table(&["a", "b"], vec![vec![Cell::from("x,y"), Cell::from(2usize)]]);
        let mut meta = Map::new();
        meta.insert("tool".into(), json!("gibbs"));
        assert_eq!(r.render_csv(&meta), "# tool: gibbs\na,b\n\"x,y\",2\n");
    }

    #[test]
    fn object_reports() {
        let r = Report::object(json!({"n": 3, "ok": true, "w": [1, 2]}));
        assert_eq!(r.rows.len(), 3);
        assert_eq!(r.rows[2][1], Cell::Text("[1,2]".into()));
    }
}
