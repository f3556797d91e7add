//! Splitting non-atomic cells into one row per record and one column per
//! field.

use std::collections::BTreeMap;

use crate::correction::edit::{EditKind, Editor};
use crate::diagnostics::{data_rows, detect_non_atomic, AtomicRecord};
use crate::rules::Rules;
use crate::table::{Cell, CellRef, SourceTable};

/// Adds header cells for new trailing columns. Full-width rows grow to
/// cover them, except band rows when `widen_bands` is false. Returns the
/// header row count of the table before the change, or `None`, leaving
/// the table untouched, when there is no header row to label the columns.
pub(crate) fn add_header_cells(ed: &mut Editor, names: &[String], widen_bands: bool) -> Option<usize> {
    let t = &ed.table;
    let hc = t.header_row_count();
    let label_row = (0..hc).find(|&r| !t.is_full_width_row(r))?;
    let new_width = t.grid().width() + names.len();
    let wide: Vec<usize> = (0..t.rows.len())
        .filter(|&r| t.is_full_width_row(r) && (r < hc || widen_bands))
        .collect();
    for r in wide {
        ed.set_col_span(CellRef::new(r, 0), new_width);
    }
    for name in names {
        ed.append_cell(label_row, Cell::header(name.clone()).with_row_span(hc - label_row));
    }
    Some(hc)
}

struct Target {
    col: usize,
    records: Vec<AtomicRecord>,
    highlighted: bool,
}

/// Non-atomic cells in one grid column that can be split: data cells of
/// width one, in rows not crossed by a vertical span.
fn find_targets(table: &SourceTable, rules: &Rules) -> BTreeMap<usize, Target> {
    let grid = table.grid();
    let mut by_column: BTreeMap<usize, BTreeMap<usize, Target>> = BTreeMap::new();
    let mut first: Option<(CellRef, usize)> = None;
    for r in data_rows(table) {
        if grid.row_has_vertical_span(r) {
            continue;
        }
        for (c, cell) in table.rows[r].iter().enumerate() {
            if cell.col_span != 1 {
                continue;
            }
            let records = detect_non_atomic(cell, &rules.split);
            if records.is_empty() {
                continue;
            }
            let at = CellRef::new(r, c);
            let gcol = grid.origin(at).first_col;
            first.get_or_insert((at, gcol));
            by_column.entry(gcol).or_default().entry(r).or_insert(Target {
                col: c,
                records,
                highlighted: cell.highlighted,
            });
        }
    }
    first
        .and_then(|(_, gcol)| by_column.remove(&gcol))
        .unwrap_or_default()
}

fn split_column(ed: &mut Editor, targets: BTreeMap<usize, Target>, rules: &Rules) -> bool {
    let cfg = &rules.split;
    let records = || targets.values().flat_map(|t| t.records.iter());
    let with_qualifier = records().any(|r| !r.qualifier.is_empty());
    let with_number = records().any(|r| !r.number.is_empty());
    let percent = records().any(|r| r.number.ends_with('%'));

    let mut names = Vec::new();
    if with_qualifier {
        names.push(cfg.qualifier_header.clone());
    }
    if with_number {
        names.push(if percent { cfg.percent_header.clone() } else { cfg.count_header.clone() });
    }
    let Some(hc) = add_header_cells(ed, &names, true) else {
        return false;
    };

    let fields = |r: &AtomicRecord, lit: bool| -> Vec<Cell> {
        let mut cells = Vec::new();
        let mut field = |v: &str| {
            let mut cell = Cell::data(v);
            cell.highlighted = lit && !v.is_empty();
            cells.push(cell);
        };
        if with_qualifier {
            field(&r.qualifier);
        }
        if with_number {
            field(&r.number);
        }
        cells
    };

    let original_rows = ed.table.rows.len();
    let mut offset = 0;
    for orig in hc..original_rows {
        let row = orig + offset;
        if ed.table.is_full_width_row(row) {
            continue;
        }
        let Some(target) = targets.get(&orig) else {
            for _ in &names {
                ed.append_cell(row, Cell::data(""));
            }
            continue;
        };
        let keep = cfg.cap().unwrap_or(usize::MAX).min(target.records.len());
        let (kept, dropped) = target.records.split_at(keep);
        let at = CellRef::new(row, target.col);

        ed.set_value(EditKind::SplitCell, at, &kept[0].name);
        for cell in fields(&kept[0], target.highlighted) {
            ed.append_cell(row, cell);
        }
        for record in dropped {
            ed.note_dropped(at, record.render());
        }
        for (k, record) in kept.iter().enumerate().skip(1) {
            let mut copy = ed.table.rows[row].clone();
            copy[target.col].value = record.name.clone();
            let tail = copy.len() - names.len();
            copy.truncate(tail);
            copy.extend(fields(record, target.highlighted));
            ed.insert_row(row + k, copy);
        }
        offset += kept.len() - 1;
    }
    true
}

/// Splits every splittable non-atomic cell, one grid column at a time.
pub(crate) fn split_in(ed: &mut Editor, rules: &Rules) {
    // Each pass removes the non-atomic cells of one column; the bound only
    // guards against a rules file that makes split output non-atomic again.
    let limit = ed.table.grid().width() + 1;
    for _ in 0..limit {
        let targets = find_targets(&ed.table, rules);
        if targets.is_empty() || !split_column(ed, targets, rules) {
            break;
        }
    }
}
