//! CSV emission with fixed formatting: 12 significant digits, '.' decimal
//! separator and '\n' line endings.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(b as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Appended to the output file stem when a command writes several tables.
    pub suffix: Option<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            suffix: None,
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_suffix(mut self, suffix: impl Into<String>) -> Self {
        self.suffix = Some(suffix.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, config: &Value) -> String {
        let mut out = String::new();
        writeln!(out, "# config {}", serde_json::to_string(config).expect("config serializes")).unwrap();
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                match cell {
                    Cell::Num(x) => write!(out, "{x:.11e}").unwrap(),
                    Cell::Int(n) => write!(out, "{n}").unwrap(),
                    Cell::Text(s) => out.push_str(s),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// `fig5.csv` with suffix `a` becomes `fig5_a.csv`.
pub fn suffixed(path: &Path, suffix: Option<&str>) -> PathBuf {
    let Some(suffix) = suffix else {
        return path.to_path_buf();
    };
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

/// Column label for a numeric parameter, e.g. `T_eps0.1`.
pub fn label(prefix: &str, x: f64) -> String {
    format!("{prefix}{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_number_format() {
        let mut t = Table::new(["x", "n", "s"]);
        t.push(vec![0.1.into(), 3usize.into(), "eps".into()]);
        t.push(vec![(-2.5e-7).into(), 0usize.into(), "ref".into()]);
        let s = t.render(&serde_json::json!({"a": 1}));
        assert_eq!(
            s,
            "# config {\"a\":1}\nx,n,s\n1.00000000000e-1,3,eps\n-2.50000000000e-7,0,ref\n"
        );
    }

    #[test]
    fn suffix_paths() {
        assert_eq!(suffixed(Path::new("out/fig5.csv"), Some("a")), PathBuf::from("out/fig5_a.csv"));
        assert_eq!(suffixed(Path::new("fig5"), Some("b")), PathBuf::from("fig5_b"));
        assert_eq!(suffixed(Path::new("x.csv"), None), PathBuf::from("x.csv"));
        assert_eq!(label("T_eps", 0.1), "T_eps0.1");
        assert_eq!(label("T_eps", 1.0), "T_eps1");
    }
}
