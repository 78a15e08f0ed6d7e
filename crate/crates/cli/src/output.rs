//! Report envelopes and the CSV view of each report.

use serde::Serialize;

use crate::config::{Format, GridSpec, RunConfig};
use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// Flat table used for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Shortest text that parses back to the same float.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub trait Report: Serialize {
    fn table(&self) -> Table;
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    kappa: f64,
    m0: f64,
    seed: u64,
    grid: GridSpec,
    exponent_convention: &'a str,
    massterm: &'a str,
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    schema: u32,
    command: &'static str,
    config: ConfigEcho<'a>,
    result: &'a R,
}

pub fn render<R: Report>(cfg: &RunConfig, report: &R) -> Result<String, CliError> {
    match cfg.format {
        Format::Csv => report.table().to_csv(),
        Format::Json => {
            let env = Envelope {
                schema: SCHEMA,
                command: cfg.scenario.name(),
                config: ConfigEcho {
                    kappa: cfg.kappa,
                    m0: cfg.m0,
                    seed: cfg.seed,
                    grid: cfg.grid,
                    exponent_convention: match cfg.exponent_convention {
                        kappa_core::clusters::ExponentConvention::Half => "half",
                        kappa_core::clusters::ExponentConvention::Full => "full",
                    },
                    massterm: match cfg.massterm {
                        kappa_core::starprod::MassTerm::On => "on",
                        kappa_core::starprod::MassTerm::Off => "off",
                    },
                },
                result: report,
            };
            let mut s = serde_json::to_string_pretty(&env)?;
            s.push('\n');
            Ok(s)
        }
    }
}
