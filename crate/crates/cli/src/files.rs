//! Input-file schemas.
//!
//! Count file (CSV, header required):
//!   label,n1,n2,n3,n23,window_ns,accidental
//!
//! For the qudit pipeline the label encodes what was measured:
//!   h:<stage>:<mode>   per-mode heralding run (encoder = decoder = mode)
//!   q:<stage>:<mode>   population run (encoder = full qudit, decoder = mode)
//!   qf:<stage>         full-qudit projection on both encoder and decoder
//!   g2:<stage>         anti-correlation run
//! with <stage> one of `before` / `after`. For plain storage-efficiency
//! reduction the convention `before:<mode>` / `after:<mode>` pairs rows.
//!
//! Tomography file (CSV, header required):
//!   basis_label,counts,exposure

use std::collections::BTreeMap;
use std::path::Path;

use qir_core::counts::CountRecord;
use qir_core::tomography::{BasisLabel, ProjectiveMeasurement};

use crate::errors::CliError;

pub const COUNT_HEADER: [&str; 7] = ["label", "n1", "n2", "n3", "n23", "window_ns", "accidental"];
pub const TOMO_HEADER: [&str; 3] = ["basis_label", "counts", "exposure"];

/// A parsed count row with its 1-based line number for diagnostics.
#[derive(Debug, Clone)]
pub struct CountLine {
    pub line: u64,
    pub record: CountRecord,
}

pub fn parse_count_file(path: &Path, text: &str) -> Result<Vec<CountLine>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    check_header(path, &mut reader, &COUNT_HEADER)?;

    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| csv_error(path, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != COUNT_HEADER.len() {
            return Err(CliError::parse(
                path,
                Some(line),
                format!("expected {} fields, found {}", COUNT_HEADER.len(), record.len()),
            ));
        }
        let field = |i: usize| record.get(i).unwrap_or_default();
        let parse_u64 = |i: usize| -> Result<u64, CliError> {
            field(i).parse().map_err(|_| {
                CliError::parse(
                    path,
                    Some(line),
                    format!("{} = {:?} is not a nonnegative integer", COUNT_HEADER[i], field(i)),
                )
            })
        };
        let window_ns: f64 = field(5).parse().map_err(|_| {
            CliError::parse(
                path,
                Some(line),
                format!("window_ns = {:?} is not a number", field(5)),
            )
        })?;
        let record = CountRecord::new(
            field(0),
            parse_u64(1)?,
            parse_u64(2)?,
            parse_u64(3)?,
            parse_u64(4)?,
            window_ns,
            parse_u64(6)?,
        )
        .map_err(|e| CliError::parse(path, Some(line), e.to_string()))?;
        rows.push(CountLine { line, record });
    }
    Ok(rows)
}

pub fn parse_tomo_file(path: &Path, text: &str) -> Result<Vec<ProjectiveMeasurement>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    check_header(path, &mut reader, &TOMO_HEADER)?;

    let mut measurements = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| csv_error(path, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != TOMO_HEADER.len() {
            return Err(CliError::parse(
                path,
                Some(line),
                format!("expected {} fields, found {}", TOMO_HEADER.len(), record.len()),
            ));
        }
        let label: BasisLabel = record
            .get(0)
            .unwrap_or_default()
            .parse()
            .map_err(|e| CliError::parse(path, Some(line), format!("{e}")))?;
        let counts: u64 = record.get(1).unwrap_or_default().parse().map_err(|_| {
            CliError::parse(path, Some(line), "counts is not a nonnegative integer")
        })?;
        let exposure: f64 = record
            .get(2)
            .unwrap_or_default()
            .parse()
            .map_err(|_| CliError::parse(path, Some(line), "exposure is not a number"))?;
        measurements.push(
            ProjectiveMeasurement::from_label(label, counts, exposure)
                .map_err(|e| CliError::parse(path, Some(line), e.to_string()))?,
        );
    }
    Ok(measurements)
}

fn check_header<R: std::io::Read>(
    path: &Path,
    reader: &mut csv::Reader<R>,
    expected: &[&str],
) -> Result<(), CliError> {
    let headers = reader
        .headers()
        .map_err(|e| csv_error(path, &e))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    if headers != expected {
        return Err(CliError::parse(
            path,
            Some(1),
            format!("header must be {:?}, found {:?}", expected.join(","), headers.join(",")),
        ));
    }
    Ok(())
}

fn csv_error(path: &Path, e: &csv::Error) -> CliError {
    let line = match e.kind() {
        csv::ErrorKind::Utf8 { pos, .. } => pos.as_ref().map(|p| p.line()),
        csv::ErrorKind::UnequalLengths { pos, .. } => pos.as_ref().map(|p| p.line()),
        csv::ErrorKind::Deserialize { pos, .. } => pos.as_ref().map(|p| p.line()),
        _ => None,
    };
    CliError::parse(path, line, e.to_string())
}

/// Which side of the memory a qudit-pipeline record belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StageTag {
    Before,
    After,
}

impl StageTag {
    pub fn as_str(self) -> &'static str {
        match self {
            StageTag::Before => "before",
            StageTag::After => "after",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "before" => Some(StageTag::Before),
            "after" => Some(StageTag::After),
            _ => None,
        }
    }
}

/// What a qudit-pipeline count record measured.
#[derive(Debug, Clone)]
pub enum QuditLabel {
    Heralding(StageTag, String),
    Population(StageTag, String),
    FullQudit(StageTag),
    AntiCorrelation(StageTag),
}

/// Parses the `h:/q:/qf:/g2:` label grammar.
pub fn parse_qudit_label(label: &str) -> Option<QuditLabel> {
    let parts: Vec<&str> = label.split(':').collect();
    match parts.as_slice() {
        ["h", stage, mode] => Some(QuditLabel::Heralding(StageTag::parse(stage)?, mode.to_string())),
        ["q", stage, mode] => {
            Some(QuditLabel::Population(StageTag::parse(stage)?, mode.to_string()))
        }
        ["qf", stage] => Some(QuditLabel::FullQudit(StageTag::parse(stage)?)),
        ["g2", stage] => Some(QuditLabel::AntiCorrelation(StageTag::parse(stage)?)),
        _ => None,
    }
}

/// Collected per-stage qudit measurements, keyed by mode label.
#[derive(Debug, Default, Clone)]
pub struct QuditStage {
    pub heralding: BTreeMap<String, f64>,
    pub population: BTreeMap<String, f64>,
    pub q_f: Option<f64>,
    pub g2: Option<f64>,
}
