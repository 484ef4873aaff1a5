use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

#[derive(Serialize)]
pub struct Versions {
    pub hbvp: &'static str,
    #[serde(rename = "hbvp-cli")]
    pub cli: &'static str,
}

pub const VERSIONS: Versions = Versions { hbvp: hbvp::VERSION, cli: env!("CARGO_PKG_VERSION") };

#[derive(Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub command: &'a str,
    pub config: &'a C,
    pub versions: Versions,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub passed: bool,
    pub result: &'a R,
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(hbvp::Error::from)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("output");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(|e| hbvp::Error::from(e).into())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(hbvp::Error::from)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Round-trip formatting with 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// CSV table with a `# command seed=N` comment line ahead of the header.
pub struct Table {
    comment: String,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(command: &str, seed: u64, header: &[&str]) -> Result<Self, CliError> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).map_err(csv_error)?;
        Ok(Table { comment: format!("# hbvp {command} seed={seed}\n"), writer })
    }

    pub fn row(&mut self, values: &[f64]) -> Result<(), CliError> {
        self.writer.write_record(values.iter().map(|&v| num(v))).map_err(csv_error)
    }

    pub fn save(self, path: &Path) -> Result<(), CliError> {
        let body = self.writer.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        let mut bytes = self.comment.into_bytes();
        bytes.extend_from_slice(&body);
        write_atomic(path, &bytes)
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}
