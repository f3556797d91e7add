//! Detection of input problems that lead table-to-text models into factual
//! errors. Nothing here mutates a table.

pub mod atomic;
pub mod leaders;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::extract::header_context;
use crate::rules::{Limits, Rules};
use crate::table::{ensure_valid, CellRef, Grid, SourceTable, Violation};

pub use atomic::{detect_non_atomic, is_number_lexeme, AtomicRecord};
pub use leaders::{identify_leader_order, LeaderOrderReport, LeaderScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    SingleRecordNonAtomic,
    MultiRecordNonAtomic,
    ComplexTableType,
    InsufficientInput,
    LongerTable,
    PoliticsSymbolHeader,
    LeaderNameListHazard,
}

impl Problem {
    pub const ALL: [Problem; 7] = [
        Problem::SingleRecordNonAtomic,
        Problem::MultiRecordNonAtomic,
        Problem::ComplexTableType,
        Problem::InsufficientInput,
        Problem::LongerTable,
        Problem::PoliticsSymbolHeader,
        Problem::LeaderNameListHazard,
    ];

    /// The label used for this problem type in annotated corpora.
    pub fn label(self) -> &'static str {
        match self {
            Problem::SingleRecordNonAtomic => "Single record lacking atomicity",
            Problem::MultiRecordNonAtomic => "Multiple records lacking atomicity",
            Problem::ComplexTableType => "Complex table type",
            Problem::InsufficientInput => "Insufficient input",
            Problem::LongerTable => "Longer input",
            Problem::PoliticsSymbolHeader => "ToTTo specific",
            Problem::LeaderNameListHazard => "List of Leader names",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        let l = label.trim();
        Self::ALL.into_iter().find(|p| {
            p.label().eq_ignore_ascii_case(l)
                || serde_json::to_value(p).ok().and_then(|v| v.as_str().map(|s| s == l)) == Some(true)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Table,
    Cell(CellRef),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub problem: Problem,
    pub location: Location,
    /// Which detector produced the finding.
    pub check: String,
    pub message: String,
    #[serde(default)]
    pub evidence: Vec<String>,
}

impl Diagnostic {
    fn new(problem: Problem, location: Location, check: &str, message: String, evidence: Vec<String>) -> Self {
        Self {
            problem,
            location,
            check: check.to_string(),
            message,
            evidence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeVerdict {
    pub manageable: bool,
    pub rows: usize,
    pub cols: usize,
    pub limits: (usize, usize),
}

/// Compares the raw grid size, header rows included, against the limits.
pub fn check_size(table: &SourceTable, limits: Limits) -> SizeVerdict {
    let rows = table.rows.len();
    let cols = table.grid().width();
    SizeVerdict {
        manageable: rows <= limits.max_rows && cols <= limits.max_cols,
        rows,
        cols,
        limits: (limits.max_rows, limits.max_cols),
    }
}

/// Rows that hold data: below the header block and not band rows.
pub(crate) fn data_rows(table: &SourceTable) -> Vec<usize> {
    let hc = table.header_row_count();
    (hc..table.rows.len())
        .filter(|&r| !table.is_full_width_row(r) || hc == 0 && r == 0)
        .collect()
}

/// A row whose highlighted cells cannot be verbalized without more cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowGap {
    pub row: usize,
    pub missing: Vec<CellRef>,
}

struct RowRoles {
    identity: Vec<CellRef>,
    numeric: Vec<CellRef>,
}

fn row_roles(table: &SourceTable, grid: &Grid, row: usize, rules: &Rules) -> RowRoles {
    let mut roles = RowRoles {
        identity: Vec::new(),
        numeric: Vec::new(),
    };
    for (c, cell) in table.rows[row].iter().enumerate() {
        if cell.is_header || cell.value.trim().is_empty() {
            continue;
        }
        let at = CellRef::new(row, c);
        let (col_headers, _) = header_context(table, grid, at);
        if col_headers.iter().any(|h| rules.roles.is_identity(h)) {
            roles.identity.push(at);
        } else if col_headers.iter().any(|h| rules.roles.is_numeric(h)) && is_number_lexeme(&cell.value) {
            roles.numeric.push(at);
        }
    }
    roles
}

/// Finds, per active row, the identity cells and the numeric companion that
/// the highlight mask leaves out. A row is active when it has a highlighted
/// identity or numeric cell.
pub fn missing_cells(table: &SourceTable, rules: &Rules) -> Vec<RowGap> {
    let grid = table.grid();
    let rows = data_rows(table);
    let roles: Vec<(usize, RowRoles)> = rows.iter().map(|&r| (r, row_roles(table, &grid, r, rules))).collect();
    let lit = |at: &CellRef| table.cell(*at).is_some_and(|c| c.highlighted);

    let mut gaps = Vec::new();
    for (row, rr) in &roles {
        let active = rr.identity.iter().any(lit) || rr.numeric.iter().any(lit);
        if !active {
            continue;
        }
        let mut missing: Vec<CellRef> = rr.identity.iter().filter(|at| !lit(at)).copied().collect();
        if !rr.numeric.is_empty() && !rr.numeric.iter().any(lit) {
            let score = |at: &CellRef| {
                let col = grid.origin(*at).first_col;
                let elsewhere = roles
                    .iter()
                    .filter(|(r, _)| r != row)
                    .flat_map(|(_, o)| o.numeric.iter())
                    .filter(|o| grid.origin(**o).first_col == col && lit(o))
                    .count();
                let (headers, _) = header_context(table, &grid, *at);
                let percent = headers.iter().any(|h| h.contains('%'));
                (elsewhere, percent, std::cmp::Reverse(col))
            };
            if let Some(best) = rr.numeric.iter().max_by_key(|at| score(at)) {
                missing.push(*best);
            }
        }
        if !missing.is_empty() {
            missing.sort();
            gaps.push(RowGap { row: *row, missing });
        }
    }
    gaps
}

pub fn detect_insufficient(table: &SourceTable, rules: &Rules) -> Vec<Diagnostic> {
    missing_cells(table, rules)
        .into_iter()
        .map(|gap| {
            let evidence: Vec<String> = gap
                .missing
                .iter()
                .filter_map(|at| table.cell(*at))
                .map(|c| c.value.trim().to_string())
                .collect();
            Diagnostic::new(
                Problem::InsufficientInput,
                Location::Cell(gap.missing[0]),
                "insufficient_input",
                format!(
                    "row {}: {} cell(s) needed to state the highlighted result are not highlighted",
                    gap.row,
                    evidence.len()
                ),
                evidence,
            )
        })
        .collect()
}

/// Non-atomic data cells, labelled single- or multi-record.
pub fn detect_non_atomic_cells(table: &SourceTable, rules: &Rules) -> Vec<Diagnostic> {
    table
        .cells()
        .filter(|(_, c)| !c.is_header)
        .filter_map(|(at, cell)| {
            let records = detect_non_atomic(cell, &rules.split);
            let problem = match records.len() {
                0 => return None,
                1 => Problem::SingleRecordNonAtomic,
                _ => Problem::MultiRecordNonAtomic,
            };
            Some(Diagnostic::new(
                problem,
                Location::Cell(at),
                "non_atomic",
                format!("cell packs {} record(s) with embedded fields", records.len()),
                records.iter().map(AtomicRecord::render).collect(),
            ))
        })
        .collect()
}

/// Bare symbol headers, headers with a configured rename, and abbreviated
/// party names in party columns.
pub fn detect_symbol_headers(table: &SourceTable, rules: &Rules) -> Vec<Diagnostic> {
    let grid = table.grid();
    let mut out = Vec::new();
    for (at, cell) in table.cells() {
        let value = cell.value.trim();
        if cell.is_header {
            if rules.symbols.is_symbol(value) {
                out.push(Diagnostic::new(
                    Problem::PoliticsSymbolHeader,
                    Location::Cell(at),
                    "symbol_header",
                    format!("header `{value}` does not say whether it is a change in vote share or in seats"),
                    vec![value.to_string()],
                ));
            } else if let Some(to) = rules.headers.rename_for(value) {
                out.push(Diagnostic::new(
                    Problem::PoliticsSymbolHeader,
                    Location::Cell(at),
                    "header_rename",
                    format!("header `{value}` should read `{to}`"),
                    vec![value.to_string(), to.to_string()],
                ));
            }
        } else if let Some(full) = rules.symbols.expand_party(value) {
            let (headers, _) = header_context(table, &grid, at);
            if headers.iter().any(|h| rules.roles.is_party(h)) {
                out.push(Diagnostic::new(
                    Problem::PoliticsSymbolHeader,
                    Location::Cell(at),
                    "party_abbreviation",
                    format!("party `{value}` is abbreviated"),
                    vec![value.to_string(), full.to_string()],
                ));
            }
        }
    }
    out
}

fn is_sentence_end(token: &str, rules: &Rules) -> bool {
    token.ends_with('.')
        && token.chars().filter(|c| c.is_alphabetic()).count() >= 3
        && !rules
            .complex
            .abbreviations
            .iter()
            .any(|a| a.eq_ignore_ascii_case(token))
}

fn has_verb(token: &str, rules: &Rules) -> bool {
    let word = token
        .trim_matches(|c: char| !c.is_alphanumeric() && c != '-')
        .to_lowercase();
    rules.complex.verbs.iter().any(|v| v.eq_ignore_ascii_case(&word))
}

/// Whether a cell narrates a result as prose rather than holding a value.
pub fn is_complex_value(value: &str, rules: &Rules) -> bool {
    let tokens: Vec<&str> = value.split_whitespace().collect();
    tokens.len() >= rules.complex.min_words
        && tokens
            .iter()
            .any(|t| is_sentence_end(t, rules) || has_verb(t, rules))
}

pub fn detect_complex(table: &SourceTable, rules: &Rules) -> Vec<Diagnostic> {
    table
        .cells()
        .filter(|(_, c)| !c.is_header && is_complex_value(&c.value, rules))
        .map(|(at, c)| {
            Diagnostic::new(
                Problem::ComplexTableType,
                Location::Cell(at),
                "complex_cell",
                "cell states the result as a sentence".to_string(),
                vec![c.value.trim().to_string()],
            )
        })
        .collect()
}

/// Band rows below the header block.
pub fn band_rows(table: &SourceTable) -> Vec<usize> {
    let start = table.header_row_count().max(1);
    (start..table.rows.len())
        .filter(|&r| table.is_full_width_row(r))
        .collect()
}

/// Band rows between data rows and grouped column headers stacked over
/// several header rows.
pub fn detect_nested_headers(table: &SourceTable) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let hc = table.header_row_count();
    let width = table.grid().width();
    let grouped: Vec<String> = table.rows[..hc]
        .iter()
        .flatten()
        .filter(|c| c.col_span > 1 && c.col_span < width)
        .map(|c| c.value.trim().to_string())
        .collect();
    if hc >= 2 && !grouped.is_empty() {
        out.push(Diagnostic::new(
            Problem::LongerTable,
            Location::Table,
            "nested_header",
            format!("column headers are nested over {hc} header rows"),
            grouped,
        ));
    }
    for r in band_rows(table) {
        let value = table.rows[r][0].value.trim().to_string();
        out.push(Diagnostic::new(
            Problem::LongerTable,
            Location::Cell(CellRef::new(r, 0)),
            "nested_header",
            format!("row {r} is a band spanning the whole table"),
            vec![value],
        ));
    }
    out
}

fn detect_size(verdict: &SizeVerdict) -> Vec<Diagnostic> {
    if verdict.manageable {
        return Vec::new();
    }
    vec![Diagnostic::new(
        Problem::LongerTable,
        Location::Table,
        "size",
        format!(
            "table is {}x{}, above the {}x{} limit",
            verdict.rows, verdict.cols, verdict.limits.0, verdict.limits.1
        ),
        Vec::new(),
    )]
}

fn detect_leader_hazard(report: &LeaderOrderReport) -> Vec<Diagnostic> {
    let Some(leader) = &report.leader_from_title else {
        return Vec::new();
    };
    if !report.row_leaders().iter().any(|n| n != leader) {
        return Vec::new();
    }
    vec![Diagnostic::new(
        Problem::LeaderNameListHazard,
        Location::Table,
        "leader_order",
        format!("page title names `{leader}` while the table lists other leaders"),
        report.recorded_data.clone(),
    )]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_id: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
    pub size: SizeVerdict,
    pub leaders: LeaderOrderReport,
    pub leader_data: String,
    /// Non-fatal validation findings, such as a headerless table.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub validation: Vec<Violation>,
    pub histogram: BTreeMap<Problem, usize>,
}

impl DiagnosticReport {
    pub fn has(&self, problem: Problem) -> bool {
        self.diagnostics.iter().any(|d| d.problem == problem)
    }

    pub fn count(&self, problem: Problem) -> usize {
        self.histogram.get(&problem).copied().unwrap_or(0)
    }
}

/// Puts diagnostics in canonical order: table-level first, then row-major.
pub fn sort_diagnostics(diagnostics: &mut [Diagnostic]) {
    diagnostics.sort_by(|a, b| {
        (a.location, a.problem, &a.check, &a.message, &a.evidence)
            .cmp(&(b.location, b.problem, &b.check, &b.message, &b.evidence))
    });
}

/// Runs every detector over a table.
pub fn lint(table: &SourceTable, rules: &Rules) -> Result<DiagnosticReport> {
    let validation = ensure_valid(table)?;
    let size = check_size(table, rules.limits);
    let leaders = identify_leader_order(table, &table.page_title, rules);

    let mut diagnostics = Vec::new();
    diagnostics.extend(detect_size(&size));
    diagnostics.extend(detect_leader_hazard(&leaders));
    diagnostics.extend(detect_non_atomic_cells(table, rules));
    diagnostics.extend(detect_complex(table, rules));
    diagnostics.extend(detect_insufficient(table, rules));
    diagnostics.extend(detect_nested_headers(table));
    diagnostics.extend(detect_symbol_headers(table, rules));
    sort_diagnostics(&mut diagnostics);

    let mut histogram = BTreeMap::new();
    for d in &diagnostics {
        *histogram.entry(d.problem).or_insert(0) += 1;
    }
    Ok(DiagnosticReport {
        table_id: table.table_id.clone(),
        leader_data: leaders.leader_data(),
        diagnostics,
        size,
        leaders,
        validation: validation.violations,
        histogram,
    })
}
