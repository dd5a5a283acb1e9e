//! CSV emission with a provenance header: tool version, subcommand, seed,
//! a hash of the effective configuration, and the configuration itself as
//! commented TOML — enough to reproduce the run from the artifact alone.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

/// A finished experiment: column names plus stringified rows.
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn write_all(
    w: &mut impl Write,
    subcommand: &str,
    seed: u64,
    effective_toml: &str,
    table: &Table,
) -> io::Result<()> {
    let digest = Sha256::digest(effective_toml.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    writeln!(w, "# nevai {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(w, "# subcommand: {subcommand}")?;
    writeln!(w, "# seed: {seed}")?;
    writeln!(w, "# config-sha256: {hex}")?;
    writeln!(w, "# config-begin")?;
    for line in effective_toml.lines() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "# config-end")?;
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// Writes the artifact to `path`, or to stdout when `path` is `None`.
pub fn write(
    path: Option<&Path>,
    subcommand: &str,
    seed: u64,
    effective_toml: &str,
    table: &Table,
) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write_all(&mut w, subcommand, seed, effective_toml, table)
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_all(&mut w, subcommand, seed, effective_toml, table)
        }
    }
}
