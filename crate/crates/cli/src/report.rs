//! Run reports and the three output modes.

use std::io::{self, Write};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

/// Stable exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const INCONCLUSIVE: i32 = 10;
    pub const BUDGET: i32 = 20;
    pub const VERIFICATION: i32 = 30;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Jsonl,
    Table,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: Value,
    pub status: String,
    pub exit_code: i32,
    pub results: Value,
    pub timing: Timing,
    pub tool_version: String,
    /// Provenance lines of every fixture read.
    pub provenance: Vec<String>,
}

/// What a command hands back before it is wrapped in a [`RunReport`].
pub struct Outcome {
    pub status: &'static str,
    pub exit_code: i32,
    pub results: Value,
    pub provenance: Vec<String>,
    /// Header and rows for `--format table`.
    pub table: Table,
    /// Rows for `--format jsonl`; the whole report when empty.
    pub lines: Vec<Value>,
}

#[derive(Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    fn render(&self) -> String {
        let cols = self.header.len();
        let mut width: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for r in &self.rows {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: Vec<&str>| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{c:<w$}", w = width[i]))
                .collect();
            parts.join("  ").trim_end().to_string()
        };
        let mut out = vec![line(self.header.clone())];
        out.push(line(width.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
        for r in &self.rows {
            out.push(line(r.iter().take(cols).map(String::as_str).collect()));
        }
        out.join("\n")
    }
}

impl Outcome {
    pub fn new(status: &'static str, exit_code: i32, results: Value) -> Self {
        Outcome { status, exit_code, results, provenance: Vec::new(), table: Table::default(), lines: Vec::new() }
    }

    pub fn with_table(mut self, table: Table) -> Self {
        self.table = table;
        self
    }

    pub fn with_lines(mut self, lines: Vec<Value>) -> Self {
        self.lines = lines;
        self
    }
}

pub fn emit(command: &str, parameters: Value, outcome: Outcome, elapsed: Duration, format: Format) -> io::Result<i32> {
    let report = RunReport {
        command: command.to_string(),
        parameters,
        status: outcome.status.to_string(),
        exit_code: outcome.exit_code,
        results: outcome.results,
        timing: Timing { elapsed_ms: elapsed.as_secs_f64() * 1e3 },
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        provenance: outcome.provenance,
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Format::Jsonl if outcome.lines.is_empty() => writeln!(out, "{}", serde_json::to_string(&report)?)?,
        Format::Jsonl => {
            for l in &outcome.lines {
                writeln!(out, "{}", serde_json::to_string(l)?)?;
            }
        }
        Format::Table => {
            if outcome.table.header.is_empty() {
                writeln!(out, "{}", serde_json::to_string_pretty(&report.results)?)?;
            } else {
                writeln!(out, "{}", outcome.table.render())?;
            }
            writeln!(out, "status: {} (exit {})", report.status, report.exit_code)?;
            for p in &report.provenance {
                writeln!(out, "provenance: {p}")?;
            }
        }
    }
    Ok(report.exit_code)
}
