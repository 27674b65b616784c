//! Result tables and their CSV serialization.
//!
//! Every experiment emits one CSV file: a `#`-prefixed metadata block
//! (key = value lines, insertion-ordered) followed by a fixed header row
//! and data rows. Apart from the `wall_clock_unix` field the full text is a
//! deterministic function of config and seed.

use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone, Default)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub metadata: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        ResultTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    /// Standard metadata header shared by all experiments.
    pub fn standard_meta(&mut self, experiment: &str, config_hash: u64, master_seed: u64) {
        self.meta("tool", "chebgreeks");
        self.meta("version", env!("CARGO_PKG_VERSION"));
        self.meta("experiment", experiment);
        self.meta("config_hash", format!("{config_hash:016x}"));
        self.meta("master_seed", master_seed);
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.meta("wall_clock_unix", now);
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_csv())?;
        Ok(())
    }
}

/// Shortest-round-trip decimal form; NaN cells serialize as "NaN".
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Drops the wall-clock metadata line so two runs can be compared for
/// byte-identity.
pub fn strip_wall_clock(csv: &str) -> String {
    csv.lines()
        .filter(|l| !l.starts_with("# wall_clock_unix"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = ResultTable::new(&["a", "b"]);
        t.meta("tool", "chebgreeks");
        t.meta("wall_clock_unix", 12345);
        t.push_row(vec![fmt_f64(1.5), fmt_f64(f64::NAN)]);
        let csv = t.to_csv();
        assert_eq!(
            csv,
            "# tool = chebgreeks\n# wall_clock_unix = 12345\na,b\n1.5,NaN\n"
        );
        assert_eq!(
            strip_wall_clock(&csv),
            "# tool = chebgreeks\na,b\n1.5,NaN"
        );
    }

    #[test]
    fn float_formatting_round_trips() {
        for &v in &[0.1, 18.021271320613817, 1e-300, -3.5e17] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
