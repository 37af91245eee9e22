//! Config-driven experiment runner behind the `minami` binary.

pub mod config;
pub mod experiments;
pub mod output;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use config::{ConfigError, Format, Overrides};
use experiments::RunError;
use output::Record;

/// Default output directory when neither `--out` nor `runtime.out` is set.
pub const OUT_DIR_ENV: &str = "MINAMI_LAB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "results";

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Numerical(RunError),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "configuration error: {e}"),
            CliError::Numerical(e) => write!(f, "numerical fault: {e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

/// Where the records went and what they say.
#[derive(Debug)]
pub struct Summary {
    /// `None` when written to standard output.
    pub path: Option<PathBuf>,
    pub records: Vec<Record>,
}

impl Summary {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failed()).count()
    }

    /// 0 when every verdict passed (or there are none), 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures() > 0 {
            1
        } else {
            0
        }
    }
}

fn destination(out: Option<PathBuf>, out_dir: &Path, file_name: &str) -> Option<PathBuf> {
    match out {
        Some(p) if p.as_os_str() == "-" => None,
        Some(p) if p.is_dir() => Some(p.join(file_name)),
        Some(p) => Some(p),
        None => Some(out_dir.join(file_name)),
    }
}

/// Loads, validates and runs one experiment, then writes its records.
pub fn execute(config_path: Option<&Path>, overrides: &Overrides, out_dir: &Path) -> Result<Summary, CliError> {
    let raw = match config_path {
        Some(p) => config::load(p).map_err(CliError::Config)?,
        None => config::Config::default(),
    };
    let resolved = config::resolve(raw, overrides).map_err(CliError::Config)?;
    let records = experiments::run(&resolved).map_err(CliError::Numerical)?;

    let file_name = format!(
        "{}-seed{}.{}",
        resolved.experiment.kind().as_str(),
        resolved.seed,
        resolved.format.extension()
    );
    let path = destination(resolved.out.clone(), out_dir, &file_name);
    let write = |w: Box<dyn std::io::Write>| match resolved.format {
        Format::JsonLines => output::write_json_lines(w, &records),
        Format::Csv => output::write_csv(w, &records),
    };
    match &path {
        None => write(Box::new(std::io::stdout().lock())),
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            }
            let file = File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            write(Box::new(BufWriter::new(file)))
        }
    }
    .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(Summary { path, records })
}
