//! The edit trail: every mutation made by a fix, recorded so that replaying
//! the list on the original table reproduces the corrected one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Cell, CellRef, Row, SourceTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditKind {
    /// Cell text replaced by the first record's name.
    SplitCell,
    /// Cell inserted into a row; `after` holds the cell as JSON.
    AddColumn,
    RenameHeader,
    /// Band row removed; `before` holds the row as JSON.
    FlattenBand,
    /// `highlighted` set on a cell.
    AddHighlight,
    ReplaceSymbol,
    ExpandAbbreviation,
    /// Row removed by the size limit; `before` holds the row as JSON.
    TruncateRows,
    /// Row inserted for a further record; `after` holds the row as JSON.
    DuplicateRow,
    /// Record beyond the cap, not carried into the table. Replay ignores it.
    DropRecord,
    /// `col_span` of a full-width cell grown to cover new columns.
    WidenSpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub kind: EditKind,
    /// Position in the table as it stood just before this edit.
    pub location: CellRef,
    pub before: String,
    pub after: String,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("table values serialize")
}

fn replay_err(index: usize, message: impl Into<String>) -> Error {
    Error::Replay {
        index,
        message: message.into(),
    }
}

/// Mutates a table and records each change.
#[derive(Debug, Clone)]
pub struct Editor {
    pub table: SourceTable,
    pub edits: Vec<Edit>,
}

impl Editor {
    pub fn new(table: SourceTable) -> Self {
        Self {
            table,
            edits: Vec::new(),
        }
    }

    fn push(&mut self, kind: EditKind, location: CellRef, before: String, after: String) {
        debug_assert_ne!(before, after);
        self.edits.push(Edit {
            kind,
            location,
            before,
            after,
        });
    }

    pub fn set_value(&mut self, kind: EditKind, at: CellRef, value: &str) {
        let cell = self.table.cell_mut(at).expect("edit targets an existing cell");
        if cell.value == value {
            return;
        }
        let before = std::mem::replace(&mut cell.value, value.to_string());
        self.push(kind, at, before, value.to_string());
    }

    pub fn highlight(&mut self, at: CellRef) {
        let cell = self.table.cell_mut(at).expect("edit targets an existing cell");
        if cell.highlighted {
            return;
        }
        cell.highlighted = true;
        self.push(EditKind::AddHighlight, at, "false".into(), "true".into());
    }

    pub fn set_col_span(&mut self, at: CellRef, span: usize) {
        let cell = self.table.cell_mut(at).expect("edit targets an existing cell");
        if cell.col_span == span {
            return;
        }
        let before = std::mem::replace(&mut cell.col_span, span);
        self.push(EditKind::WidenSpan, at, before.to_string(), span.to_string());
    }

    /// Appends a cell to the end of a row.
    pub fn append_cell(&mut self, row: usize, cell: Cell) {
        let at = CellRef::new(row, self.table.rows[row].len());
        let after = to_json(&cell);
        self.table.rows[row].push(cell);
        self.push(EditKind::AddColumn, at, String::new(), after);
    }

    pub fn insert_row(&mut self, index: usize, row: Row) {
        let after = to_json(&row);
        self.table.rows.insert(index, row);
        self.push(EditKind::DuplicateRow, CellRef::new(index, 0), String::new(), after);
    }

    pub fn remove_row(&mut self, kind: EditKind, index: usize) {
        let row = self.table.rows.remove(index);
        self.push(kind, CellRef::new(index, 0), to_json(&row), String::new());
    }

    pub fn note_dropped(&mut self, at: CellRef, record: String) {
        self.push(EditKind::DropRecord, at, record, String::new());
    }

    pub fn mark(&self) -> usize {
        self.edits.len()
    }
}

fn cell_at(table: &mut SourceTable, at: CellRef, index: usize) -> Result<&mut Cell> {
    table
        .cell_mut(at)
        .ok_or_else(|| replay_err(index, format!("no cell at ({}, {})", at.row, at.col)))
}

fn apply_one(table: &mut SourceTable, edit: &Edit, index: usize) -> Result<()> {
    let at = edit.location;
    match edit.kind {
        EditKind::SplitCell
        | EditKind::RenameHeader
        | EditKind::ReplaceSymbol
        | EditKind::ExpandAbbreviation => {
            let cell = cell_at(table, at, index)?;
            if cell.value != edit.before {
                return Err(replay_err(
                    index,
                    format!("expected `{}`, found `{}`", edit.before, cell.value),
                ));
            }
            cell.value = edit.after.clone();
        }
        EditKind::AddHighlight => cell_at(table, at, index)?.highlighted = true,
        EditKind::WidenSpan => {
            let span = edit
                .after
                .parse()
                .map_err(|_| replay_err(index, format!("bad span `{}`", edit.after)))?;
            cell_at(table, at, index)?.col_span = span;
        }
        EditKind::AddColumn => {
            let cell: Cell =
                serde_json::from_str(&edit.after).map_err(|e| replay_err(index, e.to_string()))?;
            let row = table
                .rows
                .get_mut(at.row)
                .ok_or_else(|| replay_err(index, format!("no row {}", at.row)))?;
            if at.col > row.len() {
                return Err(replay_err(index, format!("column {} past row end", at.col)));
            }
            row.insert(at.col, cell);
        }
        EditKind::DuplicateRow => {
            let row: Row =
                serde_json::from_str(&edit.after).map_err(|e| replay_err(index, e.to_string()))?;
            if at.row > table.rows.len() {
                return Err(replay_err(index, format!("row {} past table end", at.row)));
            }
            table.rows.insert(at.row, row);
        }
        EditKind::FlattenBand | EditKind::TruncateRows => {
            if at.row >= table.rows.len() {
                return Err(replay_err(index, format!("no row {}", at.row)));
            }
            let removed = table.rows.remove(at.row);
            if to_json(&removed) != edit.before {
                return Err(replay_err(index, "removed row differs from the recorded one"));
            }
        }
        EditKind::DropRecord => {}
    }
    Ok(())
}

/// Replays an edit list on a table.
pub fn apply_edits(table: &SourceTable, edits: &[Edit]) -> Result<SourceTable> {
    let mut out = table.clone();
    for (i, edit) in edits.iter().enumerate() {
        apply_one(&mut out, edit, i)?;
    }
    Ok(out)
}
