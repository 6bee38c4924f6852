//! CSV tables and gnuplot scripts for probe output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::grid::csv::fmt_real;

/// A named table of real columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.to_string(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| fmt_real(*v)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Script plotting every column against the first, log-log if `log`.
    pub fn gnuplot_script(&self, csv_path: &str, log: bool) -> String {
        let mut s = String::new();
        s.push_str("set datafile separator ','\nset key autotitle columnhead\n");
        s.push_str(&format!("set xlabel '{}'\n", self.columns.first().map(String::as_str).unwrap_or("")));
        if log {
            s.push_str("set logscale xy\n");
        }
        s.push_str(&format!("set title '{}'\n", self.name));
        let series: Vec<String> =
            (2..=self.columns.len()).map(|k| format!("'{csv_path}' using 1:{k} with linespoints")).collect();
        s.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
        s
    }

    /// Writes `<dir>/probes/<name>.csv` and `<dir>/plots/<name>.gp`.
    pub fn emit(&self, dir: &Path, log: bool) -> Result<PathBuf> {
        let probes = dir.join("probes");
        let plots = dir.join("plots");
        fs::create_dir_all(&probes)?;
        fs::create_dir_all(&plots)?;
        let csv = probes.join(format!("{}.csv", self.name));
        let mut f = fs::File::create(&csv)?;
        self.write_csv(&mut f)?;
        let script = self.gnuplot_script(&format!("../probes/{}.csv", self.name), log);
        fs::write(plots.join(format!("{}.gp", self.name)), script)?;
        Ok(csv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_script() {
        let mut t = Table::new("fit", &["h", "alpha"]);
        t.push(vec![0.1, 0.5]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("h,alpha\n"));
        let gp = t.gnuplot_script("fit.csv", true);
        assert!(gp.contains("logscale") && gp.contains("using 1:2"));
    }
}
