use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::CliError;
use crate::run::Table;

/// Marks the start of the echoed config in a CSV header.
pub const CONFIG_MARKER: &str = "# [resolved config]";
pub const TIMESTAMP_KEY: &str = "# generated_at_unix = ";

pub fn version() -> String {
    format!("nfepm {} (git {})", env!("CARGO_PKG_VERSION"), env!("NFEPM_GIT_REV"))
}

/// Header lines: version, timestamp, the caller's provenance lines, then
/// the config echo with every line commented out.
pub fn header(provenance: &[String], config_toml: &str) -> Vec<String> {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut h = vec![format!("# {}", version()), format!("{TIMESTAMP_KEY}{now}")];
    h.extend(provenance.iter().map(|l| format!("# {l}")));
    h.push(CONFIG_MARKER.to_string());
    h.extend(config_toml.lines().map(|l| if l.is_empty() { "#".to_string() } else { format!("# {l}") }));
    h
}

pub fn write_csv(dir: &Path, name: &str, header: &[String], table: &Table) -> Result<PathBuf, CliError> {
    let io = |path: &Path| {
        let p = path.display().to_string();
        move |source| CliError::Io { path: p, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(name);
    let mut f = File::create(&path).map_err(io(&path))?;
    for l in header {
        writeln!(f, "{l}").map_err(io(&path))?;
    }
    let mut w = csv::Writer::from_writer(f);
    let csv_err = |e: csv::Error| CliError::Io { path: path.display().to_string(), source: std::io::Error::other(e) };
    w.write_record(&table.columns).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.render())).map_err(csv_err)?;
    }
    w.flush().map_err(io(&path))?;
    Ok(path)
}
