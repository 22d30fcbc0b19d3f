//! Rendering of result tables as CSV, JSON lines or aligned text.

use gqads_core::analysis::exact::to_f64;
use gqads_core::analysis::figures::{format_exact, Cell};
use gqads_core::analysis::Table;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{Map, Value};

use crate::args::Format;

pub fn table(header: &[&str], rows: Vec<Vec<Cell>>) -> Table {
    Table {
        header: header.iter().map(|h| h.to_string()).collect(),
        rows,
    }
}

pub fn int(v: impl Into<i128>) -> Cell {
    Cell::Int(v.into())
}

pub fn float(v: f64) -> Cell {
    Cell::Float(v)
}

pub fn exact(q: &BigRational) -> Cell {
    Cell::Exact(q.clone())
}

pub fn ratio(num: u64, den: u64) -> Cell {
    Cell::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

pub fn text(s: impl Into<String>) -> Cell {
    Cell::Text(s.into())
}

/// Quotes an argument only when a POSIX shell would split or expand it.
pub fn shell_quote(arg: &str) -> String {
    let plain = !arg.is_empty()
        && arg
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "-_./:=,+@%".contains(c));
    if plain {
        arg.to_string()
    } else {
        format!("'{}'", arg.replace('\'', r"'\''"))
    }
}

/// The resolved command line, echoed before any result.
pub fn config_line(format: Format, args: &[String]) -> String {
    let cmd = std::iter::once("gqads".to_string())
        .chain(args.iter().map(|a| shell_quote(a)))
        .collect::<Vec<_>>()
        .join(" ");
    match format {
        Format::Jsonl => {
            let mut m = Map::new();
            m.insert("config".into(), Value::String(cmd));
            format!("{}\n", Value::Object(m))
        }
        _ => format!("# {cmd}\n"),
    }
}

pub fn render(format: Format, exact: bool, tables: &[Table]) -> String {
    match format {
        Format::Csv => tables
            .iter()
            .map(|t| t.to_csv(exact))
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Jsonl => tables.iter().map(|t| jsonl(t, exact)).collect(),
        Format::Pretty => tables
            .iter()
            .map(|t| pretty(t, exact))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

fn json_float(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or_else(|| Value::String(v.to_string()), Value::Number)
}

fn jsonl(t: &Table, exact: bool) -> String {
    let mut out = String::new();
    for row in &t.rows {
        let mut m = Map::new();
        for (h, c) in t.header.iter().zip(row) {
            match c {
                Cell::Int(v) => {
                    let v = i64::try_from(*v).map_or_else(|_| Value::String(v.to_string()), Value::from);
                    m.insert(h.clone(), v);
                }
                Cell::Float(v) => {
                    m.insert(h.clone(), json_float(*v));
                }
                Cell::Exact(q) => {
                    m.insert(h.clone(), json_float(to_f64(q)));
                    if exact {
                        m.insert(format!("{h}_exact"), Value::String(format!("{}/{}", q.numer(), q.denom())));
                    }
                }
                Cell::Text(s) => {
                    m.insert(h.clone(), Value::String(s.clone()));
                }
            }
        }
        out.push_str(&Value::Object(m).to_string());
        out.push('\n');
    }
    out
}

fn pretty_cell(c: &Cell, exact: bool) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) if v.is_finite() && (v.abs() >= 1e-3 && v.abs() < 1e6 || *v == 0.0) => {
            let s = format!("{v:.6}");
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        }
        Cell::Float(v) => format!("{v:.6e}"),
        Cell::Exact(q) if exact => format!("{} ({}/{})", format_exact(q, 7), q.numer(), q.denom()),
        Cell::Exact(q) if q.is_integer() => q.numer().to_string(),
        Cell::Exact(q) => format_exact(q, 7),
        Cell::Text(s) => s.clone(),
    }
}

/// One `key value` line per column for a single row, aligned columns
/// otherwise.
fn pretty(t: &Table, exact: bool) -> String {
    let cells: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| r.iter().map(|c| pretty_cell(c, exact)).collect())
        .collect();
    let mut out = String::new();
    if cells.len() == 1 {
        let w = t.header.iter().map(String::len).max().unwrap_or(0);
        for (h, v) in t.header.iter().zip(&cells[0]) {
            out.push_str(&format!("{h:<w$}  {v}\n"));
        }
        return out;
    }
    let widths: Vec<usize> = (0..t.header.len())
        .map(|i| {
            cells
                .iter()
                .map(|r| r[i].len())
                .chain(std::iter::once(t.header[i].len()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |vals: Vec<&str>| {
        let parts: Vec<String> = vals
            .iter()
            .zip(&widths)
            .map(|(v, &w)| format!("{v:<w$}"))
            .collect();
        format!("{}\n", parts.join("  ").trim_end())
    };
    out.push_str(&line(t.header.iter().map(String::as_str).collect()));
    for r in &cells {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}
