//! The run report and its three renderings.

use std::io::{self, Write};
use std::time::Duration;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Plain,
}

/// Rows for CSV output.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<const N: usize>(
        header: [&'static str; N],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Self {
        Table {
            header: header.to_vec(),
            rows: rows.into_iter().collect(),
        }
    }
}

/// What a subcommand hands back before timing is attached.
pub struct Outcome {
    pub params: Value,
    pub result: Value,
    pub discrepancies: Vec<Value>,
    pub table: Table,
    pub plain: String,
}

#[derive(Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub params: Value,
    pub result: Value,
    pub discrepancies: Vec<Value>,
    pub elapsed_ms: u64,
    pub version: &'static str,
    #[serde(skip)]
    table: Table,
    #[serde(skip)]
    plain: String,
}

impl RunReport {
    pub fn new(command: &'static str, o: Outcome, elapsed: Duration) -> Self {
        RunReport {
            command,
            params: o.params,
            result: o.result,
            discrepancies: o.discrepancies,
            elapsed_ms: elapsed.as_millis() as u64,
            version: env!("CARGO_PKG_VERSION"),
            table: o.table,
            plain: o.plain,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }

    pub fn emit(&self, format: Format, out: &mut impl Write) -> io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, self)?;
                writeln!(out)
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.table.header)?;
                for row in &self.table.rows {
                    w.write_record(row)?;
                }
                w.flush()
            }
            Format::Plain => {
                writeln!(out, "{}", self.plain.trim_end())?;
                writeln!(
                    out,
                    "{}: {} discrepancies, {} ms",
                    self.command,
                    self.discrepancies.len(),
                    self.elapsed_ms
                )
            }
        }
    }
}
