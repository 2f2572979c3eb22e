//! Experiment reports and their JSON / CSV renderings.
//!
//! A report is a typed table plus a list of assertions. JSON keeps rationals
//! as `"p/q"` strings and round-trips exactly; CSV renders them as decimals
//! with 12 significant digits next to an exactness column.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::rational::{format_decimal, format_pq, parse_rational, Rational};

/// Column and cell types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Rational,
    Real,
    Int,
    Bool,
    Text,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Rational(Rational),
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Rational(q) => f.write_str(&format_pq(q)),
            Cell::Real(x) => f.write_str(&format_real(*x)),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl Cell {
    pub fn kind(&self) -> CellKind {
        match self {
            Cell::Rational(_) => CellKind::Rational,
            Cell::Real(_) => CellKind::Real,
            Cell::Int(_) => CellKind::Int,
            Cell::Bool(_) => CellKind::Bool,
            Cell::Text(_) => CellKind::Text,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Rational(q) => Value::String(format_pq(q)),
            Cell::Real(x) if x.is_finite() => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
            Cell::Real(x) => Value::String(x.to_string()),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }

    fn from_json(kind: CellKind, value: &Value) -> Result<Cell> {
        let bad = || Error::Schema { pointer: String::new(), message: format!("expected a {kind:?} cell, got {value}") };
        Ok(match (kind, value) {
            (CellKind::Rational, Value::String(s)) => Cell::Rational(parse_rational(s)?),
            (CellKind::Real, Value::Number(n)) => Cell::Real(n.as_f64().ok_or_else(bad)?),
            (CellKind::Real, Value::String(s)) => Cell::Real(s.parse().map_err(|_| bad())?),
            (CellKind::Int, Value::Number(n)) => Cell::Int(n.as_i64().ok_or_else(bad)?),
            (CellKind::Bool, Value::Bool(b)) => Cell::Bool(*b),
            (CellKind::Text, Value::String(s)) => Cell::Text(s.clone()),
            _ => return Err(bad()),
        })
    }

    /// CSV fields: one field, or two (`value, exactness`) for rationals.
    fn csv_fields(&self) -> Vec<String> {
        match self {
            Cell::Rational(q) => {
                let (text, exact) = format_decimal(q);
                let flag = if exact { "exact-serialization" } else { "inexact-serialization" };
                vec![text, flag.to_string()]
            }
            Cell::Real(x) => vec![format_real(*x)],
            Cell::Int(i) => vec![i.to_string()],
            Cell::Bool(b) => vec![b.to_string()],
            Cell::Text(s) => vec![csv_escape(s)],
        }
    }
}

impl From<Rational> for Cell {
    fn from(q: Rational) -> Self {
        Cell::Rational(q)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
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

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

fn format_real(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let text = format!("{:.*e}", 11, x);
    let value: f64 = text.parse().expect("formatted float parses");
    let plain = value.to_string();
    if plain.len() <= 20 {
        plain
    } else {
        text
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: CellKind,
}

/// An asserted relation `lhs relation rhs` with both sides recorded.
#[derive(Clone, Debug, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub lhs: Cell,
    pub relation: String,
    pub rhs: Cell,
    pub passed: bool,
}

impl Assertion {
    pub fn new(name: impl Into<String>, lhs: impl Into<Cell>, relation: &str, rhs: impl Into<Cell>, passed: bool) -> Self {
        Assertion { name: name.into(), lhs: lhs.into(), relation: relation.to_string(), rhs: rhs.into(), passed }
    }

    /// `lhs <= rhs` on rationals.
    pub fn le(name: impl Into<String>, lhs: Rational, rhs: Rational) -> Self {
        Assertion::new(name, lhs, "<=", rhs, lhs <= rhs)
    }

    /// `lhs == rhs` on rationals.
    pub fn eq(name: impl Into<String>, lhs: Rational, rhs: Rational) -> Self {
        Assertion::new(name, lhs, "==", rhs, lhs == rhs)
    }

    /// A boolean check recorded as `value == true`.
    pub fn holds(name: impl Into<String>, value: bool) -> Self {
        Assertion::new(name, value, "==", true, value)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub kind: String,
    /// Echo of the resolved inputs.
    pub inputs: Value,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    /// Only present when requested, so that reports stay byte-identical.
    pub wall_time_ms: Option<u64>,
}

impl ExperimentReport {
    pub fn new(kind: &str, inputs: Value, columns: &[(&str, CellKind)]) -> Self {
        ExperimentReport {
            kind: kind.to_string(),
            inputs,
            columns: columns.iter().map(|(n, k)| Column { name: n.to_string(), kind: *k }).collect(),
            rows: Vec::new(),
            assertions: Vec::new(),
            notes: Vec::new(),
            wall_time_ms: None,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        debug_assert!(row.iter().zip(&self.columns).all(|(c, col)| c.kind() == col.kind));
        self.rows.push(row);
    }

    pub fn assert(&mut self, assertion: Assertion) {
        self.assertions.push(assertion);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    /// Appends another report's rows, assertions and notes. Columns must match.
    pub fn absorb(&mut self, other: ExperimentReport) {
        debug_assert_eq!(self.columns, other.columns);
        self.rows.extend(other.rows);
        self.assertions.extend(other.assertions);
        self.notes.extend(other.notes);
    }

    pub fn to_json_value(&self) -> Value {
        let mut out = Map::new();
        out.insert("kind".into(), Value::String(self.kind.clone()));
        out.insert("inputs".into(), self.inputs.clone());
        out.insert("columns".into(), serde_json::to_value(&self.columns).expect("columns serialize"));
        let results = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    obj.insert(col.name.clone(), cell.to_json());
                }
                Value::Object(obj)
            })
            .collect();
        out.insert("results".into(), Value::Array(results));
        let assertions = self
            .assertions
            .iter()
            .map(|a| {
                let mut obj = Map::new();
                obj.insert("name".into(), Value::String(a.name.clone()));
                obj.insert("lhs_type".into(), serde_json::to_value(a.lhs.kind()).expect("kind serializes"));
                obj.insert("lhs".into(), a.lhs.to_json());
                obj.insert("relation".into(), Value::String(a.relation.clone()));
                obj.insert("rhs_type".into(), serde_json::to_value(a.rhs.kind()).expect("kind serializes"));
                obj.insert("rhs".into(), a.rhs.to_json());
                obj.insert("passed".into(), Value::Bool(a.passed));
                Value::Object(obj)
            })
            .collect();
        out.insert("assertions".into(), Value::Array(assertions));
        out.insert("notes".into(), Value::Array(self.notes.iter().cloned().map(Value::String).collect()));
        out.insert("passed".into(), Value::Bool(self.passed()));
        if let Some(ms) = self.wall_time_ms {
            out.insert("wall_time_ms".into(), Value::from(ms));
        }
        Value::Object(out)
    }

    pub fn from_json_value(value: &Value) -> Result<ExperimentReport> {
        let schema = |pointer: &str, message: &str| Error::Schema { pointer: pointer.to_string(), message: message.to_string() };
        let obj = value.as_object().ok_or_else(|| schema("", "report must be an object"))?;
        let text = |key: &str| obj.get(key).and_then(Value::as_str).map(str::to_string).ok_or_else(|| schema(&format!("/{key}"), "missing string"));
        let kind = text("kind")?;
        let inputs = obj.get("inputs").cloned().unwrap_or(Value::Null);
        let columns: Vec<Column> = serde_json::from_value(obj.get("columns").cloned().unwrap_or(Value::Array(vec![])))
            .map_err(|e| schema("/columns", &e.to_string()))?;
        let mut rows = Vec::new();
        for (i, row) in obj.get("results").and_then(Value::as_array).ok_or_else(|| schema("/results", "missing array"))?.iter().enumerate() {
            let mut cells = Vec::new();
            for col in &columns {
                let pointer = format!("/results/{i}/{}", col.name);
                let v = row.get(&col.name).ok_or_else(|| schema(&pointer, "missing field"))?;
                cells.push(Cell::from_json(col.kind, v).map_err(|e| schema(&pointer, &e.to_string()))?);
            }
            rows.push(cells);
        }
        let mut assertions = Vec::new();
        for (i, a) in obj.get("assertions").and_then(Value::as_array).ok_or_else(|| schema("/assertions", "missing array"))?.iter().enumerate() {
            let pointer = format!("/assertions/{i}");
            let get = |k: &str| a.get(k).ok_or_else(|| schema(&format!("{pointer}/{k}"), "missing field"));
            let kind_of = |k: &str| -> Result<CellKind> {
                serde_json::from_value(get(k)?.clone()).map_err(|e| schema(&format!("{pointer}/{k}"), &e.to_string()))
            };
            assertions.push(Assertion {
                name: get("name")?.as_str().unwrap_or_default().to_string(),
                lhs: Cell::from_json(kind_of("lhs_type")?, get("lhs")?)?,
                relation: get("relation")?.as_str().unwrap_or_default().to_string(),
                rhs: Cell::from_json(kind_of("rhs_type")?, get("rhs")?)?,
                passed: get("passed")?.as_bool().ok_or_else(|| schema(&format!("{pointer}/passed"), "expected a bool"))?,
            });
        }
        let notes = obj
            .get("notes")
            .and_then(Value::as_array)
            .map(|n| n.iter().filter_map(Value::as_str).map(str::to_string).collect())
            .unwrap_or_default();
        let wall_time_ms = obj.get("wall_time_ms").and_then(Value::as_u64);
        Ok(ExperimentReport { kind, inputs, columns, rows, assertions, notes, wall_time_ms })
    }
}

/// Output format for [`emit`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(Error::ParameterOutOfRange(format!("unknown format `{other}`"))),
        }
    }
}

/// Renders the report. CSV carries only the table; every rational column is
/// followed by `<name>_exactness`.
pub fn emit(report: &ExperimentReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(&report.to_json_value()).expect("report serializes");
            bytes.push(b'\n');
            bytes
        }
        Format::Csv => {
            let mut out = String::new();
            let header: Vec<String> = report
                .columns
                .iter()
                .flat_map(|c| match c.kind {
                    CellKind::Rational => vec![c.name.clone(), format!("{}_exactness", c.name)],
                    _ => vec![c.name.clone()],
                })
                .collect();
            writeln!(out, "{}", header.join(",")).expect("writing to a string");
            for row in &report.rows {
                let fields: Vec<String> = row.iter().flat_map(Cell::csv_fields).collect();
                writeln!(out, "{}", fields.join(",")).expect("writing to a string");
            }
            out.into_bytes()
        }
    }
}

/// Parses a JSON rendering back into a report.
pub fn parse_json(bytes: &[u8]) -> Result<ExperimentReport> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| Error::Schema { pointer: String::new(), message: e.to_string() })?;
    ExperimentReport::from_json_value(&value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new(
            "density",
            serde_json::json!({"level": 3}),
            &[("lower", CellKind::Rational), ("value", CellKind::Real), ("exact", CellKind::Bool), ("method", CellKind::Text)],
        );
        r.push_row(vec![Rational::new(1, 3).into(), 0.1.into(), true.into(), "exact-coset".into()]);
        r.assert(Assertion::le("third below half", Rational::new(1, 3), Rational::new(1, 2)));
        r.note("n");
        r
    }

    #[test]
    fn third_renders_in_both_formats() {
        let r = sample();
        let json = String::from_utf8(emit(&r, Format::Json)).unwrap();
        assert!(json.contains("\"lower\": \"1/3\""));
        let csv = String::from_utf8(emit(&r, Format::Csv)).unwrap();
        assert_eq!(
            csv,
            "lower,lower_exactness,value,exact,method\n0.333333333333,inexact-serialization,0.1,true,exact-coset\n"
        );
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        assert_eq!(parse_json(&emit(&r, Format::Json)).unwrap(), r);
        let mut timed = r.clone();
        timed.wall_time_ms = Some(12);
        assert_eq!(parse_json(&emit(&timed, Format::Json)).unwrap(), timed);
    }

    #[test]
    fn empty_report() {
        let r = ExperimentReport::new("path", Value::Null, &[("s", CellKind::Rational), ("ok", CellKind::Bool)]);
        assert_eq!(String::from_utf8(emit(&r, Format::Csv)).unwrap(), "s,s_exactness,ok\n");
        let json: Value = serde_json::from_slice(&emit(&r, Format::Json)).unwrap();
        assert_eq!(json["results"], Value::Array(vec![]));
        assert!(r.passed());
    }

    #[test]
    fn reals_keep_twelve_digits() {
        assert_eq!(format_real(0.1), "0.1");
        assert_eq!(format_real(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_real(76626.8558139512), "76626.855814");
    }
}
