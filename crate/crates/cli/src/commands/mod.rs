//! The four subcommands. Each returns the reports it produced together with
//! the list of failed checks; writing files and choosing the exit code is
//! left to the caller.

pub mod algebra;
pub mod oracle;
pub mod prolong;
pub mod verify;

use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::error::{CliError, CliResult};
use crate::report::{ensure_dir, write_csv, Report};

/// A CSV table: header and rows of preformatted cells.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub struct Outcome {
    pub reports: Vec<(String, Report)>,
    pub tables: Vec<(String, Table)>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn new(reports: Vec<(String, Report)>, failures: Vec<String>) -> Self {
        Outcome {
            reports,
            tables: Vec::new(),
            failures,
        }
    }

    /// Writes every artifact in the requested formats.
    pub fn write(&self, dir: &Path, formats: &[Format]) -> CliResult<Vec<PathBuf>> {
        ensure_dir(dir)?;
        let mut written = Vec::new();
        if formats.contains(&Format::Json) {
            for (name, r) in &self.reports {
                written.push(r.write(dir, name)?);
            }
        }
        if formats.contains(&Format::Csv) {
            for (name, t) in &self.tables {
                let path = dir.join(name);
                write_csv(&path, &t.header, &t.rows)?;
                written.push(path);
            }
        }
        Ok(written)
    }

    /// Checks that failed turn into an invariant error after the reports
    /// are on disk.
    pub fn into_result(self) -> CliResult<()> {
        if self.failures.is_empty() {
            Ok(())
        } else {
            Err(CliError::Invariant(self.failures.join("; ")))
        }
    }
}
