//! The fix pipeline: size gate, leader analysis, then non-atomic splits,
//! header updates, missing highlights and symbol replacement, each step
//! recorded as edits.

pub mod edit;
mod split;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{band_rows, check_size, identify_leader_order, is_number_lexeme, missing_cells, LeaderOrderReport};
use crate::error::Result;
use crate::extract::header_context;
use crate::rules::Rules;
use crate::table::{ensure_valid, Cell, CellRef, SourceTable};

pub use edit::{apply_edits, Edit, EditKind, Editor};

pub const REJECTION_MESSAGE: &str = "Please simplify the tabular data with fewer records";

/// The outcome of a single fix step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixOutcome {
    pub table: SourceTable,
    pub corrections_made: bool,
    pub edits: Vec<Edit>,
}

impl From<Editor> for FixOutcome {
    fn from(ed: Editor) -> Self {
        Self {
            corrections_made: !ed.edits.is_empty(),
            table: ed.table,
            edits: ed.edits,
        }
    }
}

fn run_step(table: &SourceTable, rules: &Rules, step: fn(&mut Editor, &Rules)) -> FixOutcome {
    let mut ed = Editor::new(table.clone());
    step(&mut ed, rules);
    ed.into()
}

/// Splits cells that pack several candidate records into one row per kept
/// record, with party and vote columns appended to the table.
pub fn split_non_atomic(table: &SourceTable, rules: &Rules) -> Result<FixOutcome> {
    ensure_valid(table)?;
    Ok(run_step(table, rules, split::split_in))
}

/// Applies header renames and folds band rows into a trailing column.
pub fn update_headers(table: &SourceTable, rules: &Rules) -> FixOutcome {
    run_step(table, rules, update_headers_in)
}

/// Highlights the cells that the highlighted ones cannot be stated without.
pub fn add_missing_highlights(table: &SourceTable, rules: &Rules) -> FixOutcome {
    run_step(table, rules, add_missing_highlights_in)
}

/// Replaces bare symbol headers with phrases and expands abbreviated party
/// names.
pub fn replace_symbols(table: &SourceTable, rules: &Rules) -> FixOutcome {
    run_step(table, rules, replace_symbols_in)
}

fn update_headers_in(ed: &mut Editor, rules: &Rules) {
    let renames: Vec<(CellRef, String)> = ed
        .table
        .cells()
        .filter(|(_, c)| c.is_header)
        .filter_map(|(at, c)| rules.headers.rename_for(&c.value).map(|to| (at, to.to_string())))
        .collect();
    for (at, to) in renames {
        ed.set_value(EditKind::RenameHeader, at, &to);
    }

    let bands = band_rows(&ed.table);
    if bands.is_empty() {
        return;
    }
    let Some(hc) = split::add_header_cells(ed, std::slice::from_ref(&rules.headers.band_column), false) else {
        return;
    };
    let mut current = String::new();
    for r in hc..ed.table.rows.len() {
        if bands.contains(&r) {
            current = ed.table.rows[r][0].value.trim().to_string();
        } else {
            ed.append_cell(r, Cell::data(current.clone()));
        }
    }
    for &r in bands.iter().rev() {
        ed.remove_row(EditKind::FlattenBand, r);
    }
}

fn add_missing_highlights_in(ed: &mut Editor, rules: &Rules) {
    for gap in missing_cells(&ed.table, rules) {
        for at in gap.missing {
            ed.highlight(at);
        }
    }
}

/// Whether the values under a header read as percentages rather than
/// counts.
fn column_is_percent(table: &SourceTable, header: CellRef) -> bool {
    let grid = table.grid();
    let col = grid.origin(header).first_col;
    (header.row + 1..grid.n_rows())
        .filter_map(|r| grid.at(r, col))
        .filter_map(|at| table.cell(at))
        .filter(|c| !c.is_header)
        .map(|c| c.value.trim())
        .any(|v| v.contains('%') || (is_number_lexeme(v) && v.contains('.')))
}

fn replace_symbols_in(ed: &mut Editor, rules: &Rules) {
    let grid = ed.table.grid();
    let mut changes = Vec::new();
    for (at, cell) in ed.table.cells() {
        if cell.is_header {
            if rules.symbols.is_symbol(&cell.value) {
                let phrase = if column_is_percent(&ed.table, at) {
                    &rules.symbols.percent_phrase
                } else {
                    &rules.symbols.count_phrase
                };
                changes.push((EditKind::ReplaceSymbol, at, phrase.clone()));
            }
        } else if let Some(full) = rules.symbols.expand_party(&cell.value) {
            let (headers, _) = header_context(&ed.table, &grid, at);
            if headers.iter().any(|h| rules.roles.is_party(h)) {
                changes.push((EditKind::ExpandAbbreviation, at, full.to_string()));
            }
        }
    }
    for (kind, at, value) in changes {
        ed.set_value(kind, at, &value);
    }
}

/// Keeps the header rows and the first and last data rows that fit the row
/// limit. Returns `false` when the table cannot be trimmed that way.
fn truncate_in(ed: &mut Editor, rules: &Rules) -> bool {
    let limits = rules.limits;
    let verdict = check_size(&ed.table, limits);
    if verdict.cols > limits.max_cols {
        return false;
    }
    let hc = ed.table.header_row_count();
    if hc >= limits.max_rows {
        return false;
    }
    let budget = limits.max_rows - hc;
    let n = ed.table.rows.len();
    let head = hc + budget.div_ceil(2);
    let tail = n - budget / 2;
    let grid = ed.table.grid();
    if (head..tail).any(|r| grid.row_has_vertical_span(r)) {
        return false;
    }
    for r in (head..tail).rev() {
        ed.remove_row(EditKind::TruncateRows, r);
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionResult {
    pub table: SourceTable,
    pub corrections_made: bool,
    pub leader_data: LeaderOrderReport,
    pub edits: Vec<Edit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected: Option<String>,
}

/// Runs the whole pipeline. An oversized table is returned untouched with
/// the rejection message unless truncation is enabled in the rules.
pub fn correct(table: &SourceTable, title: &str, rules: &Rules) -> Result<CorrectionResult> {
    ensure_valid(table)?;
    let leader_data = identify_leader_order(table, title, rules);
    let mut ed = Editor::new(table.clone());

    if !check_size(table, rules.limits).manageable
        && !(rules.limits.truncate && truncate_in(&mut ed, rules))
    {
        return Ok(CorrectionResult {
            table: table.clone(),
            corrections_made: false,
            leader_data,
            edits: Vec::new(),
            rejected: Some(REJECTION_MESSAGE.to_string()),
        });
    }

    split::split_in(&mut ed, rules);
    update_headers_in(&mut ed, rules);
    add_missing_highlights_in(&mut ed, rules);
    replace_symbols_in(&mut ed, rules);

    Ok(CorrectionResult {
        corrections_made: !ed.edits.is_empty(),
        table: ed.table,
        leader_data,
        edits: ed.edits,
        rejected: None,
    })
}
