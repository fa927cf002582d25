//! CSV report tables: LF line endings, reals with 17 significant digits,
//! and the literal tokens `inf` and `resonant` for non-finite entries.

use std::path::Path;

use crate::diophantine::{Condition, DiophantineReport, SmallDivisorTable, RESONANCE_TOLERANCE};
use crate::error::{Error, Result};
use crate::evolution::{DecayReport, SolveReport};
use crate::spectral::{EigenDecomposition, WeylFit};

pub const RESONANT: &str = "resonant";
pub const INFINITY: &str = "inf";

/// Header plus string records; every record has the header's width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "record width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(bytes);
        let header = r
            .headers()
            .map_err(|e| Error::Format(e.to_string()))?
            .iter()
            .map(String::from)
            .collect();
        let rows = r
            .records()
            .map(|rec| {
                rec.map(|r| r.iter().map(String::from).collect())
                    .map_err(|e| Error::Format(e.to_string()))
            })
            .collect::<Result<_>>()?;
        Ok(Self { header, rows })
    }
}

/// Round-trippable decimal form of a real: `{:.16e}`, or `inf`/`-inf`.
pub fn format_real(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { INFINITY.to_string() } else { format!("-{INFINITY}") }
    } else {
        format!("{x:.16e}")
    }
}

/// Inverse of [`format_real`]; `resonant` and blanks are not numbers.
pub fn parse_real(s: &str) -> Option<f64> {
    match s {
        INFINITY => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

pub fn write_csv(table: &CsvTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, table.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    CsvTable::from_bytes(&bytes)
}

pub fn eigenvalues_table(eig: &EigenDecomposition) -> CsvTable {
    let mut t = CsvTable::new(&["j", "lambda"]);
    for (j, &l) in eig.eigenvalues().iter().enumerate() {
        t.push(vec![(j + 1).to_string(), format_real(l)]);
    }
    t
}

/// Values over the fit window together with the fitted law.
pub fn weyl_table(lambdas: &[f64], fit: &WeylFit, logcorrected: bool) -> CsvTable {
    let mut t = CsvTable::new(&["j", "lambda", "fit"]);
    for j in fit.j_lo..=fit.j_hi.min(lambdas.len()) {
        t.push(vec![
            j.to_string(),
            format_real(lambdas[j - 1]),
            format_real(fit.fitted(j, logcorrected)),
        ]);
    }
    t
}

/// One `C(ε)` record per tested `ε`, then the witness trail of each `ε`.
pub fn diophantine_table(report: &DiophantineReport) -> CsvTable {
    let mut t = CsvTable::new(&["epsilon", "C", "j", "tau", "gap"]);
    for e in &report.epsilons {
        t.push(vec![
            format_real(e.epsilon),
            format_real(e.constant),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    for e in &report.epsilons {
        for (w, _) in &e.trail {
            let gap = if report.condition == Condition::A && w.gap <= RESONANCE_TOLERANCE {
                RESONANT.to_string()
            } else {
                format_real(w.gap)
            };
            t.push(vec![format_real(e.epsilon), String::new(), w.j.to_string(), w.tau.to_string(), gap]);
        }
    }
    t
}

pub fn smalldiv_table(table: &SmallDivisorTable) -> CsvTable {
    let cell = |v: Option<f64>| v.map_or_else(|| RESONANT.to_string(), format_real);
    let mut t = CsvTable::new(&["j", "theta", "gamma"]);
    for (j, (th, ga)) in table.theta.iter().zip(&table.gamma).enumerate() {
        t.push(vec![(j + 1).to_string(), cell(*th), cell(*ga)]);
    }
    t
}

/// Per-mode method and residual; `admissibility` holds the resonant
/// component for modes in the resonant set and is blank otherwise.
pub fn solve_table(report: &SolveReport) -> CsvTable {
    let mut t = CsvTable::new(&["j", "method", "residual", "admissibility"]);
    for (idx, (method, residual)) in report.methods.iter().zip(&report.residuals).enumerate() {
        let j = idx + 1;
        let adm = report
            .admissibility
            .iter()
            .find(|a| a.j == j)
            .map_or_else(String::new, |a| format_real(a.residual));
        t.push(vec![j.to_string(), method.label().to_string(), format_real(*residual), adm]);
    }
    t
}

pub fn decay_table(report: &DecayReport) -> CsvTable {
    let mut t = CsvTable::new(&["gamma", "slope", "ci_low", "ci_high", "verdict"]);
    for s in &report.slopes {
        t.push(vec![
            s.gamma.to_string(),
            format_real(s.slope),
            format_real(s.ci_low),
            format_real(s.ci_high),
            report.verdict.label().to_string(),
        ]);
    }
    t
}
