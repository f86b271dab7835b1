#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Command-line front end for `quadcc-core`: configuration and solution
//! records, the sweep table, and the six commands.
//!
//! Every command is a pure function from parsed flags to an [`Output`]; only
//! [`Output::emit`] touches the filesystem or the standard streams, so runs
//! with equal flags produce byte-identical files.

pub mod cli;
pub mod commands;
pub mod records;

use std::io::{self, Write};
use std::path::{Path, PathBuf};

pub use cli::{Cli, Command};

/// Process exit status. Ordered by severity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Exit {
    Ok = 0,
    /// Non-convergence or another numerical failure.
    Failure = 1,
    InvalidInput = 2,
    /// A converged result violates one of the proven properties.
    WitnessFailure = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub exit: Exit,
    pub body: String,
    /// Manifest for formats that cannot embed one (CSV).
    pub sidecar: Option<String>,
    /// Human-readable notes for the diagnostic stream.
    pub messages: Vec<String>,
    pub destination: Option<PathBuf>,
}

impl Output {
    pub fn to(destination: Option<PathBuf>) -> Self {
        Self { exit: Exit::Ok, body: String::new(), sidecar: None, messages: Vec::new(), destination }
    }

    pub fn body(mut self, body: String) -> Self {
        self.body = body;
        self
    }

    pub fn fail(mut self, exit: Exit, message: String) -> Self {
        self.exit = exit;
        self.messages.push(message);
        self
    }

    /// `<out>.manifest.toml` next to the output file.
    pub fn sidecar_path(path: &Path) -> PathBuf {
        let mut name = path.as_os_str().to_owned();
        name.push(".manifest.toml");
        PathBuf::from(name)
    }

    pub fn emit(&self) -> io::Result<()> {
        match &self.destination {
            Some(path) if !self.body.is_empty() => {
                std::fs::write(path, &self.body)?;
                if let Some(manifest) = &self.sidecar {
                    std::fs::write(Self::sidecar_path(path), manifest)?;
                }
            }
            Some(_) => {}
            None => {
                io::stdout().write_all(self.body.as_bytes())?;
                if let Some(manifest) = &self.sidecar {
                    io::stderr().write_all(manifest.as_bytes())?;
                }
            }
        }
        let mut err = io::stderr().lock();
        for m in &self.messages {
            writeln!(err, "quadcc: {m}")?;
        }
        Ok(())
    }
}

pub fn run(command: &Command) -> Output {
    match command {
        Command::Solve(a) => commands::solve(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::CheckIdentities(a) => commands::check_identities(a),
        Command::Classify(a) => commands::classify_input(a),
        Command::Oracle(a) => commands::oracle(a),
        Command::VerifyTheorems(a) => commands::verify_theorems(a),
    }
}
