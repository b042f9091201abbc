use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `observed <= target + tolerance`
    AtMost,
    /// `observed >= target - tolerance`
    AtLeast,
    /// `|observed - target| <= tolerance`
    Near,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub observed: f64,
    pub relation: Relation,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Assertion {
    pub fn new(name: &str, observed: f64, relation: Relation, target: f64, tolerance: f64) -> Self {
        let passed = match relation {
            Relation::AtMost => observed <= target + tolerance,
            Relation::AtLeast => observed >= target - tolerance,
            Relation::Near => (observed - target).abs() <= tolerance,
        };
        Self {
            name: name.to_string(),
            observed,
            relation,
            target,
            tolerance,
            passed,
        }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Relation::Near, 1.0, 0.0)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub config: ExperimentConfig,
    pub metrics: serde_json::Map<String, serde_json::Value>,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    pub files: Vec<String>,
    pub duration_seconds: f64,
}

impl ExperimentReport {
    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    /// Floats use 17 significant digits in scientific notation.
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// A CSV file produced by an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(file_name: &str, header: &[&str]) -> Self {
        Self {
            file_name: file_name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv_bytes(&self) -> csv::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let bytes = self.to_csv_bytes().map_err(std::io::Error::other)?;
        std::fs::write(dir.join(&self.file_name), bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assertion_relations() {
        assert!(Assertion::new("a", 1.0, Relation::AtMost, 1.0, 0.0).passed);
        assert!(!Assertion::new("a", 1.1, Relation::AtMost, 1.0, 0.05).passed);
        assert!(Assertion::new("a", 0.96, Relation::AtLeast, 1.0, 0.05).passed);
        assert!(!Assertion::new("a", 0.5, Relation::Near, 0.4, 0.05).passed);
        assert!(!Assertion::flag("a", false).passed);
        assert!(!Assertion::new("nan", f64::NAN, Relation::AtMost, 1.0, 0.0).passed);
    }

    #[test]
    fn csv_formatting_is_fixed() {
        let mut t = Table::new("x.csv", &["mode", "value", "oracle", "ok"]);
        t.push(vec![3usize.into(), 0.1f64.into(), None.into(), true.into()]);
        let s = String::from_utf8(t.to_csv_bytes().unwrap()).unwrap();
        assert_eq!(s, "mode,value,oracle,ok\n3,1.0000000000000001e-1,,true\n");
    }
}
