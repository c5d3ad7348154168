//! Run configuration: flags override `SMQ_*` environment variables, which
//! override the optional TOML file, which overrides the defaults.

use crate::CliError;
use serde::Deserialize;
use smq_core::process::ProcessClass;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Which functions a table run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selector {
    Id(u64),
    All,
    Npn,
}

impl FromStr for Selector {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "all" => Ok(Self::All),
            "npn" => Ok(Self::Npn),
            _ => s
                .parse()
                .map(Self::Id)
                .map_err(|_| CliError::Usage(format!("selector must be 'all', 'npn' or an id, got '{s}'"))),
        }
    }
}

/// Values as they appear in a config file; every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<usize>,
    pub classes: Option<Vec<String>>,
    pub select: Option<String>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub max_denominator: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub t: usize,
    pub classes: Vec<ProcessClass>,
    pub select: Selector,
    pub tol: f64,
    pub max_iters: usize,
    pub max_denominator: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 4,
            t: 2,
            classes: vec![ProcessClass::Fo, ProcessClass::Gen],
            select: Selector::Npn,
            tol: 1e-6,
            max_iters: 50_000,
            max_denominator: 1_000_000,
            workers: 1,
            out_dir: PathBuf::from("smq-out"),
        }
    }
}

/// Command-line values after clap has folded in the environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub t: Option<usize>,
    pub classes: Option<String>,
    pub select: Option<String>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub max_denominator: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

pub fn parse_classes(s: &str) -> Result<Vec<ProcessClass>, CliError> {
    s.split(',')
        .map(|c| c.trim().parse::<ProcessClass>().map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

impl RunConfig {
    pub fn resolve(over: &Overrides, file: Option<&FileConfig>) -> Result<Self, CliError> {
        let d = Self::default();
        let empty = FileConfig::default();
        let file = file.unwrap_or(&empty);
        let classes = match (&over.classes, &file.classes) {
            (Some(s), _) => parse_classes(s)?,
            (None, Some(v)) => parse_classes(&v.join(","))?,
            (None, None) => d.classes,
        };
        let select = match over.select.as_ref().or(file.select.as_ref()) {
            Some(s) => s.parse()?,
            None => d.select,
        };
        let cfg = Self {
            n: over.n.or(file.n).unwrap_or(d.n),
            t: over.t.or(file.t).unwrap_or(d.t),
            classes,
            select,
            tol: over.tol.or(file.tol).unwrap_or(d.tol),
            max_iters: over.max_iters.or(file.max_iters).unwrap_or(d.max_iters),
            max_denominator: over.max_denominator.or(file.max_denominator).unwrap_or(d.max_denominator),
            workers: over.workers.or(file.workers).unwrap_or(d.workers),
            out_dir: over.out_dir.clone().or(file.out_dir.clone()).unwrap_or(d.out_dir),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 || self.n > 6 {
            return Err(CliError::Usage(format!("n must be in 1..=6, got {}", self.n)));
        }
        if self.t == 0 {
            return Err(CliError::Usage("T must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Usage("workers must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Usage(format!("tolerance must be positive, got {}", self.tol)));
        }
        if let Selector::Id(id) = self.select {
            if self.n < 6 && id >= 1u64 << (1u32 << self.n) {
                return Err(CliError::Usage(format!("id {id} is out of range for n = {}", self.n)));
            }
        }
        if self.classes.is_empty() {
            return Err(CliError::Usage("no classes selected".into()));
        }
        Ok(())
    }
}
