use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

use crate::args::Global;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Check(String),
}

impl From<toric_core::Error> for Failure {
    fn from(e: toric_core::Error) -> Self {
        use toric_core::Error as E;
        match e {
            E::NoConvergence { .. } | E::Stagnation { .. } | E::LinearSolve(_) | E::Disconnected { .. } => {
                Failure::Check(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

pub type Outcome = Result<bool, Failure>;

pub fn input_err(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

/// Attaches the offending file name to a load error.
pub fn in_file(path: &Path) -> impl Fn(toric_core::Error) -> Failure + '_ {
    move |e| Failure::Input(format!("{}: {e}", path.display()))
}

pub struct Sink {
    out: Option<PathBuf>,
}

impl Sink {
    pub fn new(g: &Global) -> Result<Self, Failure> {
        if let Some(dir) = &g.out {
            fs::create_dir_all(dir).map_err(|e| input_err(format!("{}: {e}", dir.display())))?;
        }
        Ok(Self { out: g.out.clone() })
    }

    pub fn has_dir(&self) -> bool {
        self.out.is_some()
    }

    /// Pretty JSON to `DIR/name` or stdout.
    pub fn json(&self, name: &str, value: &Value) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).expect("json values serialize");
        text.push('\n');
        self.text(name, &text)
    }

    pub fn text(&self, name: &str, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(dir) => {
                let path = dir.join(name);
                fs::write(&path, text).map_err(|e| input_err(format!("{}: {e}", path.display())))
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .map_err(|e| input_err(format!("stdout: {e}")))
            }
        }
    }

    /// Writes only with an output directory; returns whether it did.
    pub fn file_only(&self, name: &str, bytes: &[u8]) -> Result<bool, Failure> {
        let Some(dir) = &self.out else { return Ok(false) };
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        Ok(true)
    }
}
