use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use maglab::identity::IdentityReport;

use crate::CliError;

/// One checked assertion. `residual` and `tolerance` are on the same scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub battery: String,
    pub anchor: String,
    pub case: String,
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Row {
    pub fn new(battery: &crate::batteries::Battery, case: impl Into<String>, name: impl Into<String>) -> RowBuilder {
        RowBuilder {
            row: Row {
                battery: battery.name.into(),
                anchor: battery.anchor.into(),
                case: case.into(),
                name: name.into(),
                residual: f64::NAN,
                tolerance: f64::NAN,
                pass: false,
                note: None,
            },
        }
    }
}

pub struct RowBuilder {
    row: Row,
}

impl RowBuilder {
    /// Passes iff `residual <= tolerance`.
    pub fn at_most(mut self, residual: f64, tolerance: f64) -> Row {
        self.row.residual = residual;
        self.row.tolerance = tolerance;
        self.row.pass = residual <= tolerance;
        self.row
    }

    /// Relative residual of an identity report against its own tolerance.
    pub fn identity(mut self, r: &IdentityReport) -> Row {
        self.row.residual = r.rel_residual;
        self.row.tolerance = r.tolerance.value;
        self.row.pass = r.pass;
        self
            .note(format!("left {:.12e}, right {:.12e}", r.left, r.right))
    }

    /// Boolean check with residual 0 on success, 1 on failure.
    pub fn holds(mut self, ok: bool) -> Row {
        self.row.residual = if ok { 0.0 } else { 1.0 };
        self.row.tolerance = 0.0;
        self.row.pass = ok;
        self.row
    }

    /// A computation that could not be carried out.
    pub fn error(mut self, e: impl std::fmt::Display) -> Row {
        self.row.note = Some(e.to_string());
        self.row
    }

    fn note(mut self, note: String) -> Row {
        self.row.note = Some(note);
        self.row
    }
}

/// A CSV table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

/// Fixed formatting for table cells; `None` is written empty.
pub fn num(x: impl Into<Option<f64>>) -> String {
    match x.into() {
        Some(v) => format!("{v:.15e}"),
        None => String::new(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn extend(&mut self, other: Outcome) {
        self.rows.extend(other.rows);
        self.tables.extend(other.tables);
    }
}

#[derive(Serialize)]
struct Report<'a> {
    command: &'a str,
    config_sha256: &'a str,
    pass: bool,
    rows: &'a [Row],
}

#[derive(Serialize)]
struct FileEntry {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_sha256: &'a str,
    cli_version: &'a str,
    core_version: &'a str,
    config: &'a str,
    files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `report.json`, one CSV per table and `manifest.json` into
/// `<root>/<command>-<hash prefix>` and returns that directory.
pub fn write_run(root: &Path, command: &str, config_toml: &str, outcome: &Outcome) -> Result<PathBuf, CliError> {
    let hash = sha256_hex(format!("{command}\n{config_toml}").as_bytes());
    let dir = root.join(format!("{command}-{}", &hash[..12]));
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let mut put = |name: String, bytes: Vec<u8>| -> Result<(), CliError> {
        fs::write(dir.join(&name), &bytes)?;
        files.push(FileEntry { sha256: sha256_hex(&bytes), name });
        Ok(())
    };
    let report = Report { command, config_sha256: &hash, pass: outcome.pass(), rows: &outcome.rows };
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    put("report.json".into(), json)?;
    for t in &outcome.tables {
        put(format!("{}.csv", t.name), t.to_csv()?)?;
    }
    let manifest = Manifest {
        command,
        config_sha256: &hash,
        cli_version: env!("CARGO_PKG_VERSION"),
        core_version: maglab::VERSION,
        config: config_toml,
        files,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    fs::write(dir.join("manifest.json"), json)?;
    Ok(dir)
}
