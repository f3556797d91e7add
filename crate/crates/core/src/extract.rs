//! Projection of a source table and its highlight mask into linearized form.

use crate::error::Result;
use crate::linearized::{LinearizedCell, LinearizedInput};
use crate::table::{ensure_valid, CellRef, Grid, SourceTable};

/// Header cells covering a cell's columns, outermost first, and header
/// cells to its left, left to right. Empty header values are skipped.
pub fn header_context(table: &SourceTable, grid: &Grid, at: CellRef) -> (Vec<String>, Vec<String>) {
    let origin = grid.origin(at);
    let mut seen: Vec<CellRef> = Vec::new();
    let mut take = |r: CellRef, out: &mut Vec<String>| {
        if r == at || seen.contains(&r) {
            return;
        }
        seen.push(r);
        if let Some(cell) = table.cell(r) {
            let value = cell.value.trim();
            if cell.is_header && !value.is_empty() {
                out.push(value.to_string());
            }
        }
    };

    let mut col_headers = Vec::new();
    for row in 0..at.row {
        for col in origin.first_col..origin.first_col + origin.col_span {
            if let Some(r) = grid.at(row, col) {
                take(r, &mut col_headers);
            }
        }
    }
    let mut row_headers = Vec::new();
    for col in 0..origin.first_col {
        if let Some(r) = grid.at(at.row, col) {
            take(r, &mut row_headers);
        }
    }
    (col_headers, row_headers)
}

/// Builds the model input from every highlighted data cell, in reading order.
pub fn extract_highlighted(table: &SourceTable) -> Result<LinearizedInput> {
    ensure_valid(table)?;
    Ok(extract_unchecked(table))
}

pub(crate) fn extract_unchecked(table: &SourceTable) -> LinearizedInput {
    let grid = table.grid();
    let cells = table
        .cells()
        .filter(|(_, c)| c.highlighted && !c.is_header)
        .map(|(at, c)| {
            let (col_headers, row_headers) = header_context(table, &grid, at);
            LinearizedCell {
                value: c.value.trim().to_string(),
                col_headers,
                row_headers,
            }
        })
        .collect();
    let section = table.section_title.trim();
    LinearizedInput {
        page_title: table.page_title.trim().to_string(),
        section_title: (!section.is_empty()).then(|| section.to_string()),
        cells,
    }
}
