//! CSV and JSON emission with a fixed number format.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::CliResult;

/// A CSV cell.
#[derive(Debug, Clone, Copy)]
pub enum Cell<'a> {
    Num(f64),
    Int(i64),
    Text(&'a str),
}

impl From<f64> for Cell<'_> {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell<'_> {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl<'a> From<&'a str> for Cell<'a> {
    fn from(v: &'a str) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits, `inf`/`-inf`/`nan` for non-finite values.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub struct Csv {
    comments: Vec<String>,
    header: String,
    rows: String,
}

impl Csv {
    /// Starts a table whose first line records the config.
    pub fn new<C: Serialize>(config: &C, header: &[&str]) -> Self {
        let cfg = serde_json::to_string(config).expect("config serializes");
        Self {
            comments: vec![format!("config: {cfg}")],
            header: header.join(","),
            rows: String::new(),
        }
    }

    /// Extra comment line, placed above the header.
    pub fn comment(&mut self, text: &str) {
        self.comments.push(text.to_string());
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.rows.push(',');
            }
            match *c {
                Cell::Num(v) => self.rows.push_str(&fmt_num(v)),
                Cell::Int(v) => write!(self.rows, "{v}").unwrap(),
                Cell::Text(s) => self.rows.push_str(s),
            }
        }
        self.rows.push('\n');
    }

    pub fn finish(self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            writeln!(out, "# {c}").unwrap();
        }
        writeln!(out, "{}", self.header).unwrap();
        out.push_str(&self.rows);
        out
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r?,
            }
        }
    }
    Ok(())
}
