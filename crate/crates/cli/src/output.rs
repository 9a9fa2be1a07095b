//! CSV and SVG emission with atomic file replacement.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ocp_core::harness::{format_real, LdpTable};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(i64),
}

impl Cell {
    fn as_f64(self) -> f64 {
        match self {
            Cell::Real(v) => v,
            Cell::Int(v) => v as f64,
        }
    }
}

/// Named columns of numbers, ready for CSV or SVG output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl DataTable {
    pub fn new(columns: &[&str]) -> Self {
        DataTable { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push_reals(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&v| Cell::Real(v)).collect());
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row
                .iter()
                .map(|c| match *c {
                    Cell::Real(v) => format_real(v),
                    Cell::Int(v) => v.to_string(),
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Line chart of every other column against the first.
    pub fn to_svg(&self, title: &str) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const M: f64 = 50.0;
        const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
        let xs: Vec<f64> = self.rows.iter().map(|r| r[0].as_f64()).collect();
        let finite = |v: &f64| v.is_finite();
        let ys: Vec<f64> = self.rows.iter().flat_map(|r| r[1..].iter().map(|c| c.as_f64())).filter(finite).collect();
        let range = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if lo == hi {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = range(&xs.iter().copied().filter(finite).collect::<Vec<_>>());
        let (y0, y1) = range(&ys);
        let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title));
        let _ = writeln!(
            s,
            r#"<path d="M{M} {} L{M} {} L{} {}" fill="none" stroke="black"/>"#,
            M,
            H - M,
            W - M,
            H - M
        );
        let _ = writeln!(s, r#"<text x="{M}" y="{}" font-size="11">{}</text>"#, H - M + 15.0, short(x0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#, W - M, H - M + 15.0, short(x1));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#, M - 4.0, H - M, short(y0));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#, M - 4.0, M + 4.0, short(y1));
        let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(&self.columns[0]));
        for (k, name) in self.columns.iter().enumerate().skip(1) {
            let color = COLORS[(k - 1) % COLORS.len()];
            let pts: Vec<String> = self
                .rows
                .iter()
                .map(|r| (r[0].as_f64(), r[k].as_f64()))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
                W - M - 120.0,
                M + 14.0 * k as f64,
                escape(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

impl From<&LdpTable> for DataTable {
    fn from(t: &LdpTable) -> Self {
        let columns = t.column_names();
        let data: Vec<Vec<f64>> = columns.iter().map(|c| t.column(c).unwrap_or_default()).collect();
        let rows = (0..t.rows.len()).map(|i| data.iter().map(|col| Cell::Real(col[i])).collect()).collect();
        DataTable { columns, rows }
    }
}

fn short(v: f64) -> String {
    format!("{v:.4}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Write `contents` to `path` through a temporary file in the same
/// directory, then rename over the target.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::Run(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

/// Emit a table as CSV to `out` (or stdout) and optionally as SVG.
pub fn emit(table: &DataTable, out: Option<&Path>, svg: Option<&Path>, title: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, &table.to_csv())?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(table.to_csv().as_bytes())
                .map_err(|e| CliError::Run(format!("cannot write to stdout: {e}")))?;
        }
    }
    if let Some(path) = svg {
        write_atomic(path, &table.to_svg(title))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn csv_layout() {
        let mut t = DataTable::new(&["x", "y"]);
        assert_eq!(t.to_csv(), "x,y\n");
        t.push(vec![Cell::Int(3), Cell::Real(0.1)]);
        assert_eq!(t.to_csv(), "x,y\n3,1.0000000000000001e-1\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let mut t = DataTable::new(&["x", "a", "b"]);
        t.push_reals(&[0.0, 1.0, 2.0]);
        t.push_reals(&[1.0, 0.5, f64::NAN]);
        let svg = t.to_svg("demo <1>");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("demo &lt;1&gt;"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "b\n");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
        assert!(write_atomic(&dir.path().join("missing/t.csv"), "x").is_err());
    }
}
