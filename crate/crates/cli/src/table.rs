//! CSV output with `#` provenance lines.
//!
//! Every file starts with the command, the seed and the complete
//! configuration between `# config-begin` and `# config-end`, so that
//! [`extract_config`] recovers the run that produced it. The output path is
//! left out: where a file is written does not change its contents.

use std::fmt::Write as _;

use crate::config::RunConfig;
use crate::CliError;

const BEGIN: &str = "# config-begin";
const END: &str = "# config-end";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Float(v) => write!(out, "{v:.16e}"),
            Cell::Int(v) => write!(out, "{v}"),
            Cell::Bool(v) => write!(out, "{v}"),
            Cell::Text(s) => write!(out, "{s}"),
            Cell::Empty => Ok(()),
        }
        .expect("writing to a String cannot fail");
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
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

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// `key = value` lines written after the configuration block.
    pub notes: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table {
            header,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<Cell>) {
        self.notes.push((key.to_string(), value.into()));
    }

    pub fn note_value(&self, key: &str) -> Option<&Cell> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        let mut out = String::new();
        writeln!(out, "# jcir {}", cfg.command.name()).unwrap();
        writeln!(out, "# seed = {}", cfg.seed).unwrap();
        writeln!(out, "{BEGIN}").unwrap();
        let recorded = RunConfig {
            output: None,
            ..cfg.clone()
        };
        for line in recorded.to_toml().lines() {
            if line.is_empty() {
                writeln!(out, "#").unwrap();
            } else {
                writeln!(out, "# {line}").unwrap();
            }
        }
        writeln!(out, "{END}").unwrap();
        for (key, value) in &self.notes {
            write!(out, "# {key} = ").unwrap();
            value.render(&mut out);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }
}

/// Recovers the configuration embedded in a CSV written by [`Table::render`].
pub fn extract_config(csv: &str) -> Result<RunConfig, CliError> {
    let mut lines = csv.lines().skip_while(|l| *l != BEGIN);
    if lines.next().is_none() {
        return Err(CliError::Config("no embedded configuration block".to_string()));
    }
    let mut text = String::new();
    for line in lines {
        if line == END {
            return crate::config::parse_config(&text);
        }
        let body = line
            .strip_prefix("# ")
            .or_else(|| line.strip_prefix('#'))
            .ok_or_else(|| CliError::Config(format!("unexpected line in configuration block: {line}")))?;
        text.push_str(body);
        text.push('\n');
    }
    Err(CliError::Config("unterminated configuration block".to_string()))
}
