//! Column tables written as CSV (17 significant digits) or JSON (one array per column).

use serde_json::{Map, Number, Value};

use crate::psp::PspDistribution;
use crate::sampler::EstimateReport;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) if v.is_nan() => "nan".into(),
            Cell::Real(v) if v.is_infinite() => if *v > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Real(v) => format!("{v:.16e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            // non-finite reals have no JSON number; they become null
            Cell::Real(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Bool(v) => Value::Bool(*v),
            Cell::Text(v) => Value::String(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Table) {
        assert_eq!(self.columns, other.columns);
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))
                .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV is UTF-8")
    }

    pub fn to_json(&self) -> String {
        let mut obj = Map::new();
        for (k, name) in self.columns.iter().enumerate() {
            let column = self.rows.iter().map(|r| r[k].json()).collect();
            obj.insert(name.clone(), Value::Array(column));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("JSON values");
        s.push('\n');
        s
    }
}

impl PspDistribution {
    /// Columns `twice_theta, theta, probability, log_weight`.
    pub fn table(&self) -> Table {
        let mut t = Table::new(["twice_theta", "theta", "probability", "log_weight"]);
        for e in &self.entries {
            t.push(vec![
                Cell::Int(e.theta.twice()),
                Cell::Real(e.theta.value()),
                Cell::Real(e.probability),
                Cell::Real(e.log_weight),
            ]);
        }
        t
    }
}

impl EstimateReport {
    /// Columns `twice_theta, theta, probability, stderr, n_samples, seed`.
    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "twice_theta",
            "theta",
            "probability",
            "stderr",
            "n_samples",
            "seed",
        ]);
        for e in &self.entries {
            t.push(vec![
                Cell::Int(e.theta.twice()),
                Cell::Real(e.theta.value()),
                Cell::Real(e.probability),
                Cell::Real(e.stderr),
                Cell::Int(self.n_samples as i64),
                Cell::Text(self.seed.to_string()),
            ]);
        }
        t
    }
}
