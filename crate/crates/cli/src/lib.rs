//! Batch commands behind the `unital` binary: run the full search and
//! classification, build a single construction, or verify a record file.

pub mod records;

use std::path::{Path, PathBuf};

use thiserror::Error;
use unital_core::classify::{Classifier, InvariantError};
use unital_core::constructions::{andre_spread, cyclic_spread, regular_spread, ConstructionError, RulingChoice, Spread, SpreadError};
use unital_core::group::GroupError;
use unital_core::search::{generate_starters, run_search, SearchError, SearchOptions, DEFAULT_STARTER_LIMIT};
use unital_core::{FieldError, FieldSpec, FieldTable, UnitalGeometry, UnitaryGroup};

use records::{parse_header, parse_records, summary_csv, summary_rows, summary_text, write_records, SpreadRecord};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl CliError {
    /// 1 for invariant violations, 2 for everything attributable to the configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub field: FieldSpec,
    pub starter_limit: usize,
    pub workers: usize,
    pub records_out: Option<PathBuf>,
    pub summary_out: Option<PathBuf>,
    pub csv_out: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    pub stop_after: Option<usize>,
}

impl RunConfig {
    pub fn new(field: FieldSpec) -> Self {
        RunConfig {
            field,
            starter_limit: DEFAULT_STARTER_LIMIT,
            workers: 1,
            records_out: None,
            summary_out: None,
            csv_out: None,
            checkpoint: None,
            resume: false,
            stop_after: None,
        }
    }

    pub fn preset(q: u32) -> Result<Self, CliError> {
        let spec = FieldSpec::preset(q).ok_or_else(|| CliError::Config(format!("no preset for q = {q}")))?;
        Ok(Self::new(spec))
    }
}

/// Geometry and group for a field, the shared starting point of every command.
pub fn setup(spec: &FieldSpec) -> Result<(UnitalGeometry, UnitaryGroup), CliError> {
    let geom = UnitalGeometry::build(FieldTable::build(spec.clone())?);
    let group = UnitaryGroup::build(&geom)?;
    Ok((geom, group))
}

fn write_file(path: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    if let Some(p) = path {
        std::fs::write(p, contents)?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub starters: usize,
    pub starters_done: usize,
    pub spreads_found: usize,
    pub records: Vec<SpreadRecord>,
    /// Record file contents; empty while the search is incomplete.
    pub records_text: String,
    pub summary_text: String,
    pub summary_csv: String,
}

impl SearchReport {
    pub fn is_complete(&self) -> bool {
        self.starters_done == self.starters
    }
}

pub fn cmd_search(config: &RunConfig) -> Result<SearchReport, CliError> {
    let (geom, group) = setup(&config.field)?;
    let starters = generate_starters(&geom, &group, config.starter_limit);
    let options = SearchOptions {
        workers: config.workers,
        checkpoint: config.checkpoint.clone(),
        resume: config.resume,
        stop_after: config.stop_after,
    };
    let outcome = run_search(&geom, &starters, &options)?;
    let spreads = outcome.spreads();
    let mut report = SearchReport {
        starters: starters.len(),
        starters_done: outcome.completed(),
        spreads_found: spreads.len(),
        records: Vec::new(),
        records_text: String::new(),
        summary_text: format!("search incomplete: {} of {} starters done\n", outcome.completed(), starters.len()),
        summary_csv: String::new(),
    };
    if !outcome.is_complete() {
        return Ok(report);
    }
    let classifier = Classifier::new(&geom, &group);
    let classes = classifier.reduce(&spreads);
    for c in &classes {
        c.invariants.check_identities(geom.q()).map_err(|e| CliError::Invariant(e.to_string()))?;
    }
    report.records = classes.iter().map(|c| SpreadRecord::from_class(&geom, c)).collect();
    let rows = summary_rows(&geom, &report.records);
    report.records_text = write_records(&geom, &report.records);
    report.summary_text = summary_text(&rows);
    report.summary_csv = summary_csv(&rows);
    write_file(&config.records_out, &report.records_text)?;
    write_file(&config.summary_out, &report.summary_text)?;
    write_file(&config.csv_out, &report.summary_csv)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstructRequest {
    /// Centre given as a point token `(a,b,c)`; defaults to `(1,0,0)`.
    Regular { center: Option<String> },
    Cyclic,
    /// Ruling choice such as `3=V,1=H,2=D`.
    Andre { choice: String },
}

#[derive(Debug, Clone)]
pub enum ConstructOutcome {
    Built { record: SpreadRecord, text: String },
    /// The requested construction has no instance for this field.
    Nonexistent { reason: String },
}

pub fn cmd_construct(config: &RunConfig, request: &ConstructRequest) -> Result<ConstructOutcome, CliError> {
    let (geom, group) = setup(&config.field)?;
    let spread = match request {
        ConstructRequest::Regular { center } => {
            let p = match center {
                Some(tok) => geom.parse_triple(tok).map_err(|e| CliError::Config(e.to_string()))?,
                None => geom.id_of(&[unital_core::FieldElement::ONE, unital_core::FieldElement::ZERO, unital_core::FieldElement::ZERO]).expect("point"),
            };
            regular_spread(&geom, p)?
        }
        ConstructRequest::Cyclic => match cyclic_spread(&geom, &group) {
            Some(s) => s,
            None => {
                let reason = if geom.q() % 2 == 1 {
                    format!("no cyclic spread exists for odd q = {}", geom.q())
                } else {
                    format!("no cyclic spread found for q = {}", geom.q())
                };
                return Ok(ConstructOutcome::Nonexistent { reason });
            }
        },
        ConstructRequest::Andre { choice } => {
            let c = RulingChoice::parse(geom.field(), choice).map_err(|e| CliError::Config(format!("ruling choice: {e}")))?;
            andre_spread(&geom, &c)?
        }
    };
    let classified = Classifier::new(&geom, &group).classify(&spread);
    let record = SpreadRecord::from_class(&geom, &classified);
    let text = write_records(&geom, std::slice::from_ref(&record));
    write_file(&config.records_out, &text)?;
    Ok(ConstructOutcome::Built { record, text })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    /// 1-based record index, 0 for problems before the first record.
    pub record: usize,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub records: usize,
    pub failure: Option<VerifyFailure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn describe_spread_error(geom: &UnitalGeometry, e: &SpreadError) -> String {
    let tok = |s: u32| records::format_line(geom, s);
    match e {
        SpreadError::WrongSize { expected, got } => format!("partition incomplete: {got} lines, expected {expected}"),
        SpreadError::Overlap(a, b) => format!("blocks of {} and {} overlap", tok(*a), tok(*b)),
        SpreadError::Duplicate(s) => format!("line {} listed twice", tok(*s)),
        SpreadError::NotSecant(s) => format!("line id {s} is not a secant"),
    }
}

pub fn cmd_verify(path: &Path) -> Result<VerifyReport, CliError> {
    let text = std::fs::read_to_string(path)?;
    let fail = |record: usize, line: usize, message: String| {
        Ok(VerifyReport { records: record.saturating_sub(1), failure: Some(VerifyFailure { record, line, message }) })
    };
    let spec = match parse_header(&text) {
        Ok(s) => s,
        Err(e) => return fail(0, 1, e.to_string()),
    };
    let (geom, group) = match setup(&spec) {
        Ok(x) => x,
        Err(e) => return fail(0, 1, e.to_string()),
    };
    let raw = match parse_records(&text, &geom) {
        Ok(r) => r,
        Err(records::RecordError::Syntax { line, msg }) => return fail(0, line, msg),
    };
    let classifier = Classifier::new(&geom, &group);
    for (i, r) in raw.iter().enumerate() {
        let idx = i + 1;
        if r.q != geom.q() {
            return fail(idx, r.line, format!("record q = {} but the header field has q = {}", r.q, geom.q()));
        }
        let to_secants = |ids: &[u32]| -> Result<Vec<u32>, String> {
            ids.iter()
                .map(|&l| geom.secant_of_line(l).ok_or_else(|| format!("non-secant line {}", geom.format_triple(l))))
                .collect()
        };
        let lines = match to_secants(&r.lines) {
            Ok(l) => l,
            Err(m) => return fail(idx, r.line + 1, m),
        };
        let spread = match Spread::new(&geom, lines) {
            Ok(s) => s,
            Err(e) => return fail(idx, r.line + 1, describe_spread_error(&geom, &e)),
        };
        let delta = match to_secants(&r.delta) {
            Ok(d) => d,
            Err(m) => return fail(idx, r.line + 2, m),
        };
        match records::delta_decode(&geom, &delta) {
            Ok(s) if s == spread => {}
            _ => return fail(idx, r.line + 2, "delta does not reproduce the line list".into()),
        }
        if let Err(e) = r.invariants.check_identities(geom.q()) {
            return fail(idx, r.line + 3, format!("recorded invariants: {e}"));
        }
        let c = classifier.classify(&spread);
        let inv_check: Result<(), InvariantError> = c.invariants.check_identities(geom.q());
        if let Err(e) = inv_check {
            return fail(idx, r.line, e.to_string());
        }
        if c.invariants.stabilizer_order != r.invariants.stabilizer_order {
            return fail(idx, r.line + 3, format!("|G| is {}, record says {}", c.invariants.stabilizer_order, r.invariants.stabilizer_order));
        }
        if c.invariants.orbit_structure != r.invariants.orbit_structure {
            return fail(idx, r.line + 4, "orbit structure differs".into());
        }
        if c.invariants.type_vector != r.invariants.type_vector {
            return fail(idx, r.line + 5, "type vector differs".into());
        }
        if c.kind != r.kind {
            return fail(idx, r.line + 6, format!("kind is {}, record says {}", c.kind, r.kind));
        }
    }
    Ok(VerifyReport { records: raw.len(), failure: None })
}
