use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::config::{Command, ExperimentConfig};
use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

/// One asserted property of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Values of a grid function, paired with their nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub node_label: String,
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

/// Residual per iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub name: String,
    pub iteration: Vec<usize>,
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    pub steps: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub command: Command,
    pub config: ExperimentConfig,
    pub status: Status,
    pub verdicts: Vec<Verdict>,
    /// Command-specific scalars and nested results.
    pub outputs: serde_json::Value,
    pub series: Vec<Series>,
    pub histories: Vec<History>,
    pub tables: Vec<Table>,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
    /// The only field allowed to differ between runs of one config.
    pub timing: Timing,
}

impl RunReport {
    pub fn new(config: ExperimentConfig) -> Self {
        RunReport {
            schema_version: SCHEMA_VERSION,
            tool: ToolInfo {
                name: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
            },
            command: config.command,
            config,
            status: Status::Pass,
            verdicts: Vec::new(),
            outputs: serde_json::Value::Object(Default::default()),
            series: Vec::new(),
            histories: Vec::new(),
            tables: Vec::new(),
            errors: Vec::new(),
            warnings: Vec::new(),
            timing: Timing::default(),
        }
    }

    pub fn verdict(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.verdicts.push(Verdict {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn history(&mut self, name: impl Into<String>, residual: &[f64]) {
        self.histories.push(History {
            name: name.into(),
            iteration: (0..residual.len()).collect(),
            residual: residual.to_vec(),
        });
    }

    pub fn output(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(map) = &mut self.outputs {
            map.insert(key.to_string(), v);
        }
    }

    /// Status from errors and verdicts: any error wins, then any failure.
    pub fn finalize(&mut self) {
        self.status = if !self.errors.is_empty() {
            Status::Error
        } else if self.verdicts.iter().any(|v| !v.pass) {
            Status::Fail
        } else {
            Status::Pass
        };
    }
}

/// Pretty JSON with every float written to 17 significant digits.
struct SignificantDigits(PrettyFormatter<'static>);

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json(report: &RunReport) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits(PrettyFormatter::new()));
    report.serialize(&mut ser).expect("report serializes");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.16e}")
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(e.into()))?;
    w.write_record(header).map_err(|e| io_err(e.into()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io_err(e.into()))?;
    }
    w.flush().map_err(io_err)
}

/// Writes `report.json` and, if requested, one CSV per series, history and
/// table. Returns the paths written.
pub fn write_report(report: &RunReport, dir: &Path, tables: bool) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    let path = dir.join(REPORT_FILE);
    fs::write(&path, to_json(report)).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    if !tables {
        return Ok(written);
    }
    for s in &report.series {
        let path = dir.join(format!("series_{}.csv", file_stem(&s.name)));
        let rows = s.nodes.iter().zip(&s.values).map(|(x, y)| vec![number(*x), number(*y)]);
        write_csv(&path, &[&s.node_label, &s.name], rows)?;
        written.push(path);
    }
    for h in &report.histories {
        let path = dir.join(format!("history_{}.csv", file_stem(&h.name)));
        let rows = h
            .iteration
            .iter()
            .zip(&h.residual)
            .map(|(i, r)| vec![i.to_string(), number(*r)]);
        write_csv(&path, &["iteration", "residual"], rows)?;
        written.push(path);
    }
    for t in &report.tables {
        let path = dir.join(format!("table_{}.csv", file_stem(&t.name)));
        let header: Vec<&str> = t.columns.iter().map(String::as_str).collect();
        let rows = t.rows.iter().map(|r| r.iter().map(|v| number(*v)).collect());
        write_csv(&path, &header, rows)?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_report(path: &Path) -> Result<RunReport, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
