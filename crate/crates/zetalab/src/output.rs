//! Result tables and their CSV / JSON renderings.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Value as Json};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("expected csv or json, got {other}")),
        }
    }
}

impl std::fmt::Display for Format {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u128),
    B(bool),
    S(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v as u128)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::U(v as u128)
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::U(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::B(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits, lossless for `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) => format_float(*v),
            Cell::I(v) => v.to_string(),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Cell::F(v) if v.is_finite() => Json::from(*v),
            Cell::F(v) => Json::String(format_float(*v)),
            Cell::I(v) => Json::from(*v),
            Cell::U(v) => match u64::try_from(*v) {
                Ok(u) => Json::from(u),
                Err(_) => Json::String(v.to_string()),
            },
            Cell::B(v) => Json::Bool(*v),
            Cell::S(s) => Json::String(s.clone()),
            Cell::Empty => Json::Null,
        }
    }
}

/// One command's output.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub config: Vec<(String, String)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    /// A checked property failed; the run exits with status 2.
    pub violation: bool,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Report {
            config: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
            violation: false,
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn warn(&mut self, text: impl Into<String>) {
        self.warnings.push(text.into());
    }

    fn config_line(&self) -> String {
        self.config
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config: {}", self.config_line());
        for n in &self.notes {
            let _ = writeln!(out, "# note: {n}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "# warning: {w}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let config: Map<String, Json> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), Json::String(v.clone())))
            .collect();
        let rows: Vec<Json> = self
            .rows
            .iter()
            .map(|r| {
                Json::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect(),
                )
            })
            .collect();
        let mut top = Map::new();
        top.insert("config".into(), Json::Object(config));
        top.insert("columns".into(), Json::from(self.columns.clone()));
        top.insert("rows".into(), Json::Array(rows));
        top.insert("notes".into(), Json::from(self.notes.clone()));
        top.insert("warnings".into(), Json::from(self.warnings.clone()));
        let mut s = serde_json::to_string_pretty(&Json::Object(top)).expect("json values serialize");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Writes `body` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, body: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("output path {} has no file name", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| -> std::io::Result<()> {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::Io(format!("writing {}: {e}", path.display())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new(&["a", "b", "c"]);
        r.config = vec![("x".into(), "2".into()), ("seed".into(), "0".into())];
        r.row(vec![Cell::F(0.1), Cell::U(32), Cell::S("p,q".into())]);
        r.row(vec![Cell::F(f64::INFINITY), Cell::B(true), Cell::Empty]);
        r.note("probe");
        r
    }

    #[test]
    fn csv_layout() {
        let csv = sample().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# config: x=2 seed=0");
        assert_eq!(lines[1], "# note: probe");
        assert_eq!(lines[2], "a,b,c");
        assert_eq!(lines[3], "1.0000000000000001e-1,32,\"p,q\"");
        assert_eq!(lines[4], "inf,true,");
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 2.0] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_layout() {
        let j: Json = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(j["config"]["x"], "2");
        assert_eq!(j["rows"][0]["b"], 32);
        assert_eq!(j["rows"][1]["a"], "inf");
        assert_eq!(j["rows"][1]["c"], Json::Null);
        assert_eq!(j["notes"][0], "probe");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        write_atomic(&p, "one\n").unwrap();
        write_atomic(&p, "two\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
