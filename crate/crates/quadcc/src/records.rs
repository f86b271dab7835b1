//! Text records read and written by the commands.
//!
//! Configuration, solution, oracle and report records are TOML. Floats are
//! written in shortest round-trip form, so every value reads back bit for bit.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use quadcc_core::classify::CheckReport;
use quadcc_core::solver::CCSolution;
use quadcc_core::{PlanarConfiguration, SquaredDistanceVector};
use serde::{Deserialize, Serialize};

/// Provenance of one command invocation, embedded in every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub tool_version: String,
    /// Supplied by the caller; never read from the clock.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, timestamp: &str) -> Self {
        Self {
            command: command.to_owned(),
            parameters: BTreeMap::new(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: timestamp.to_owned(),
        }
    }

    pub fn param(mut self, flag: &str, value: impl fmt::Display) -> Self {
        self.parameters.insert(flag.to_owned(), value.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub masses: [f64; 4],
    pub positions: [[f64; 2]; 4],
}

#[derive(Debug)]
pub enum RecordError {
    Io(std::io::Error),
    Parse(toml::de::Error),
    Invalid(quadcc_core::Error),
}

impl fmt::Display for RecordError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "cannot read configuration: {e}"),
            Self::Parse(e) => write!(f, "malformed configuration record: {e}"),
            Self::Invalid(e) => write!(f, "invalid configuration: {e}"),
        }
    }
}

impl std::error::Error for RecordError {}

impl ConfigurationRecord {
    pub fn from_configuration(label: Option<String>, cfg: &PlanarConfiguration) -> Self {
        Self { label, masses: *cfg.masses(), positions: *cfg.positions() }
    }

    pub fn to_configuration(&self) -> Result<PlanarConfiguration, quadcc_core::Error> {
        PlanarConfiguration::new(self.positions, self.masses)
    }

    /// Parse a record; unknown fields (as in solution or oracle records) are ignored.
    pub fn parse(text: &str) -> Result<Self, RecordError> {
        toml::from_str(text).map_err(RecordError::Parse)
    }

    pub fn read(path: &Path) -> Result<(Self, PlanarConfiguration), RecordError> {
        let text = std::fs::read_to_string(path).map_err(RecordError::Io)?;
        let rec = Self::parse(&text)?;
        let cfg = rec.to_configuration().map_err(RecordError::Invalid)?;
        Ok((rec, cfg))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub passed: bool,
    pub margin: f64,
}

pub fn check_map(reports: &[CheckReport]) -> BTreeMap<String, CheckRecord> {
    reports.iter().map(|r| (r.name.to_owned(), CheckRecord { passed: r.passed, margin: r.margin })).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    /// Largest relative difference of the distance ratios `x / a`.
    pub ratio_difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub masses: [f64; 4],
    pub positions: [[f64; 2]; 4],
    pub alpha: f64,
    pub method: String,
    /// `a, b, c, d, e, f`
    pub sdv: [f64; 6],
    pub areas: [f64; 4],
    pub nu: f64,
    pub mu: f64,
    pub lambda_cc: f64,
    pub class: String,
    pub iterations: usize,
    pub residuals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<CrossCheck>,
    pub diagnostics: BTreeMap<String, CheckRecord>,
    pub manifest: RunManifest,
}

impl SolutionRecord {
    pub fn new(alpha: f64, method: &str, sol: &CCSolution, diagnostics: &[CheckReport], manifest: RunManifest) -> Self {
        let residuals = BTreeMap::from([
            ("dziobek".to_owned(), sol.residual_dziobek),
            ("position".to_owned(), sol.residual_position),
        ]);
        Self {
            label: Some(format!("{} alpha={alpha}", sol.geometry_class.label)),
            masses: *sol.configuration.masses(),
            positions: *sol.configuration.positions(),
            alpha,
            method: method.to_owned(),
            sdv: sol.sdv.to_array(),
            areas: sol.areas.0,
            nu: sol.multipliers.nu,
            mu: sol.multipliers.mu,
            lambda_cc: sol.lambda_cc(),
            class: sol.geometry_class.label.as_str().to_owned(),
            iterations: sol.iterations,
            residuals,
            cross_check: None,
            diagnostics: check_map(diagnostics),
            manifest,
        }
    }
}

/// Output of the brute-force trapezoid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub label: String,
    pub masses: [f64; 4],
    pub positions: [[f64; 2]; 4],
    pub alpha: f64,
    pub s: f64,
    pub h: f64,
    /// Squared distances with base `a = 4`.
    pub sdv: [f64; 6],
    pub brackets: usize,
    pub manifest: RunManifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub worst: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub samples: usize,
    pub passed: bool,
    pub identities: BTreeMap<String, IdentityRow>,
    pub manifest: RunManifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub label: String,
    pub convexity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub margins: BTreeMap<String, f64>,
    pub manifest: RunManifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremRecord {
    pub alpha: f64,
    pub constraint: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_residual: Option<f64>,
    /// `|b − e| / a`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal_gap: Option<f64>,
    /// `|c − d| / a`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lateral_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdv: Option<[f64; 6]>,
    pub checks: BTreeMap<String, CheckRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremBundle {
    pub passed: bool,
    pub results: Vec<TheoremRecord>,
    pub manifest: RunManifest,
}

/// One row of the sweep table. Columns and their order are fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub e: Option<f64>,
    pub f: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub d3: Option<f64>,
    pub d4: Option<f64>,
    pub nu: Option<f64>,
    pub mu: Option<f64>,
    pub lambda_cc: Option<f64>,
    pub residual_pos: Option<f64>,
    pub residual_dzb: Option<f64>,
    pub iters: Option<usize>,
    pub class: String,
    pub status: String,
}

pub const SWEEP_COLUMNS: [&str; 19] = [
    "alpha",
    "a",
    "b",
    "c",
    "d",
    "e",
    "f",
    "d1",
    "d2",
    "d3",
    "d4",
    "nu",
    "mu",
    "lambda_cc",
    "residual_pos",
    "residual_dzb",
    "iters",
    "class",
    "status",
];

impl SweepRow {
    /// Distances are written in the gauge `a = 1`.
    pub fn solved(alpha: f64, sol: &CCSolution, status: &str) -> Self {
        let SquaredDistanceVector { a, b, c, d, e, f } = sol.sdv.normalized();
        let [d1, d2, d3, d4] = sol.areas.0;
        Self {
            alpha,
            a: Some(a),
            b: Some(b),
            c: Some(c),
            d: Some(d),
            e: Some(e),
            f: Some(f),
            d1: Some(d1),
            d2: Some(d2),
            d3: Some(d3),
            d4: Some(d4),
            nu: Some(sol.multipliers.nu),
            mu: Some(sol.multipliers.mu),
            lambda_cc: Some(sol.lambda_cc()),
            residual_pos: Some(sol.residual_position),
            residual_dzb: Some(sol.residual_dziobek),
            iters: Some(sol.iterations),
            class: sol.geometry_class.label.as_str().to_owned(),
            status: status.to_owned(),
        }
    }

    pub fn failed(alpha: f64, status: &str) -> Self {
        Self {
            alpha,
            a: None,
            b: None,
            c: None,
            d: None,
            e: None,
            f: None,
            d1: None,
            d2: None,
            d3: None,
            d4: None,
            nu: None,
            mu: None,
            lambda_cc: None,
            residual_pos: None,
            residual_dzb: None,
            iters: None,
            class: String::new(),
            status: status.to_owned(),
        }
    }
}

/// Header plus rows, LF line endings.
pub fn write_sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("writing to memory");
    }
    if rows.is_empty() {
        w.write_record(SWEEP_COLUMNS).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
}

pub fn read_sweep_csv(text: &str) -> Result<Vec<SweepRow>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

pub fn to_toml<T: Serialize>(value: &T) -> String {
    toml::to_string(value).expect("records serialize to TOML")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn configuration_round_trip_is_exact() {
        let rec = ConfigurationRecord {
            label: Some("odd".into()),
            masses: [1.0, 1.0, 0.1 + 0.2, 1e-300],
            positions: [[0.1, -2.5e-17], [1.0 / 3.0, 7.0], [f64::MAX, 1.0], [-0.0, 5e-324]],
        };
        let back = ConfigurationRecord::parse(&to_toml(&rec)).unwrap();
        for (x, y) in rec.positions.iter().flatten().zip(back.positions.iter().flatten()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(rec.masses.map(f64::to_bits), back.masses.map(f64::to_bits));
        assert_eq!(back.label.as_deref(), Some("odd"));
    }

    #[test]
    fn label_is_optional() {
        let rec = ConfigurationRecord::parse("masses = [1, 1, 1, 1]\npositions = [[0, 0], [1, 0], [1, 1], [0, 1]]\n");
        // Integer literals are exact reals.
        assert_eq!(rec.unwrap().positions[2], [1.0, 1.0]);
        let rec = ConfigurationRecord::parse(
            "masses = [1.0, 1.0, 1.0, 1.0]\npositions = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]\n",
        )
        .unwrap();
        assert!(rec.label.is_none());
        assert!(rec.to_configuration().is_ok());
    }

    #[test]
    fn empty_sweep_still_has_header() {
        let text = write_sweep_csv(&[]);
        assert_eq!(text.trim_end(), SWEEP_COLUMNS.join(","));
    }

    #[test]
    fn failed_rows_have_empty_cells() {
        let text = write_sweep_csv(&[SweepRow::failed(0.5, "non_convergence")]);
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line, "0.5,,,,,,,,,,,,,,,,,,non_convergence");
        assert_eq!(read_sweep_csv(&text).unwrap()[0].status, "non_convergence");
    }
}
