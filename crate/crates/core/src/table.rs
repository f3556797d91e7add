//! Full-table source representation, span expansion and structural validation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> usize {
    1
}

fn is_one(v: &usize) -> bool {
    *v == 1
}

fn is_false(v: &bool) -> bool {
    !*v
}

/// A single table cell as it appears in the source document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub value: String,
    #[serde(default, skip_serializing_if = "is_false")]
    pub is_header: bool,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub col_span: usize,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub row_span: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub highlighted: bool,
}

impl Cell {
    pub fn data(value: impl Into<String>) -> Self {
        Self {
            value: value.into(),
            is_header: false,
            col_span: 1,
            row_span: 1,
            highlighted: false,
        }
    }

    pub fn header(value: impl Into<String>) -> Self {
        Self {
            is_header: true,
            ..Self::data(value)
        }
    }

    pub fn highlighted(mut self) -> Self {
        self.highlighted = true;
        self
    }

    pub fn with_col_span(mut self, span: usize) -> Self {
        self.col_span = span;
        self
    }

    pub fn with_row_span(mut self, span: usize) -> Self {
        self.row_span = span;
        self
    }
}

pub type Row = Vec<Cell>;

/// A Wikipedia-style table: page metadata, rows of cells with header flags,
/// spans, and the highlight mask.
///
/// Rows follow HTML layout rules: a cell covered by a `row_span` from an
/// earlier row is not repeated in the later row's cell list.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SourceTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_id: Option<String>,
    pub page_title: String,
    #[serde(default)]
    pub section_title: String,
    pub rows: Vec<Row>,
}

/// Position of a cell by row index and index within that row's cell list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellRef {
    pub row: usize,
    pub col: usize,
}

impl CellRef {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// The span-expanded layout of a table. Every slot names the cell that
/// occupies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    slots: Vec<Vec<Option<CellRef>>>,
    origins: Vec<Vec<Origin>>,
}

/// Where a source cell landed in the expanded grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Origin {
    pub first_col: usize,
    pub col_span: usize,
    pub row_span: usize,
}

impl Grid {
    /// Lays out the table using HTML placement rules. Spans are clamped to
    /// at least 1 and row spans are clipped at the last row; `validate`
    /// reports both conditions.
    pub fn expand(table: &SourceTable) -> Self {
        let n_rows = table.rows.len();
        let mut slots: Vec<Vec<Option<CellRef>>> = vec![Vec::new(); n_rows];
        let mut origins = Vec::with_capacity(n_rows);
        for (r, row) in table.rows.iter().enumerate() {
            let mut row_origins = Vec::with_capacity(row.len());
            let mut col = 0;
            for (i, cell) in row.iter().enumerate() {
                while slots[r].get(col).copied().flatten().is_some() {
                    col += 1;
                }
                let cs = cell.col_span.max(1);
                let rs = cell.row_span.max(1).min(n_rows - r);
                for line in &mut slots[r..r + rs] {
                    if line.len() < col + cs {
                        line.resize(col + cs, None);
                    }
                    for slot in &mut line[col..col + cs] {
                        if slot.is_none() {
                            *slot = Some(CellRef::new(r, i));
                        }
                    }
                }
                row_origins.push(Origin {
                    first_col: col,
                    col_span: cs,
                    row_span: rs,
                });
                col += cs;
            }
            origins.push(row_origins);
        }
        Self { slots, origins }
    }

    pub fn n_rows(&self) -> usize {
        self.slots.len()
    }

    /// Effective width of each row: the number of occupied slots.
    pub fn row_widths(&self) -> Vec<usize> {
        self.slots
            .iter()
            .map(|line| line.iter().filter(|s| s.is_some()).count())
            .collect()
    }

    /// Width of the grid (the widest row).
    pub fn width(&self) -> usize {
        self.slots.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn at(&self, row: usize, col: usize) -> Option<CellRef> {
        self.slots.get(row).and_then(|l| l.get(col)).copied().flatten()
    }

    pub fn origin(&self, cell: CellRef) -> Origin {
        self.origins[cell.row][cell.col]
    }

    pub fn slots(&self) -> &[Vec<Option<CellRef>>] {
        &self.slots
    }

    /// Whether any cell occupying this row starts in an earlier row or
    /// extends into a later one.
    pub fn row_has_vertical_span(&self, row: usize) -> bool {
        self.slots[row].iter().flatten().any(|c| {
            let o = self.origin(*c);
            c.row != row || o.row_span > 1
        })
    }
}

impl SourceTable {
    pub fn cell(&self, at: CellRef) -> Option<&Cell> {
        self.rows.get(at.row).and_then(|r| r.get(at.col))
    }

    pub fn cell_mut(&mut self, at: CellRef) -> Option<&mut Cell> {
        self.rows.get_mut(at.row).and_then(|r| r.get_mut(at.col))
    }

    pub fn grid(&self) -> Grid {
        Grid::expand(self)
    }

    /// Iterates all cells in reading order.
    pub fn cells(&self) -> impl Iterator<Item = (CellRef, &Cell)> {
        self.rows.iter().enumerate().flat_map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(move |(c, cell)| (CellRef::new(r, c), cell))
        })
    }

    /// Number of leading rows made up entirely of header cells. A full-width
    /// single-cell row ends the block once a multi-cell header row has been
    /// seen: it is a band introducing the data below, not a caption.
    pub fn header_row_count(&self) -> usize {
        let width = self.grid().width();
        let mut seen_columns = false;
        let mut count = 0;
        for row in &self.rows {
            if row.is_empty() || !row.iter().all(|c| c.is_header) {
                break;
            }
            if is_full_width_single(row, width) {
                if seen_columns {
                    break;
                }
            } else {
                seen_columns = true;
            }
            count += 1;
        }
        count
    }

    /// Rows consisting of one cell spanning the whole grid (width ≥ 2).
    pub fn is_full_width_row(&self, row: usize) -> bool {
        let width = self.grid().width();
        self.rows.get(row).is_some_and(|r| is_full_width_single(r, width))
    }

    pub fn has_headers(&self) -> bool {
        self.cells().any(|(_, c)| c.is_header)
    }
}

pub(crate) fn is_full_width_single(row: &[Cell], width: usize) -> bool {
    width >= 2 && row.len() == 1 && row[0].col_span == width
}

/// Reads one source table from its JSON document form.
pub fn parse_source_table(document: &str) -> Result<SourceTable> {
    let de = &mut serde_json::Deserializer::from_str(document);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationCode {
    RaggedGrid,
    SpanOverflow,
    EmptyValue,
    NoHeaders,
    UnbalancedTags,
}

impl ViolationCode {
    /// `NoHeaders` marks a headerless table; such tables are still usable.
    pub fn is_fatal(self) -> bool {
        !matches!(self, ViolationCode::NoHeaders)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationLocation {
    Table,
    Cell(CellRef),
    Row(usize),
    Offset(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub location: ViolationLocation,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    /// True when no violation prevents the table from being processed.
    pub fn is_usable(&self) -> bool {
        self.violations.iter().all(|v| !v.code.is_fatal())
    }

    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn fatal(&self) -> impl Iterator<Item = &Violation> {
        self.violations.iter().filter(|v| v.code.is_fatal())
    }
}

/// Checks every structural invariant of a source table. Pure; errors are
/// reported as data.
pub fn validate(table: &SourceTable) -> ValidationReport {
    let mut violations = Vec::new();
    let n_rows = table.rows.len();

    for (r, row) in table.rows.iter().enumerate() {
        if row.is_empty() {
            violations.push(Violation {
                code: ViolationCode::EmptyValue,
                location: ViolationLocation::Row(r),
                message: format!("row {r} has no cells"),
            });
        }
        for (c, cell) in row.iter().enumerate() {
            let at = ViolationLocation::Cell(CellRef::new(r, c));
            if cell.col_span == 0 || cell.row_span == 0 {
                violations.push(Violation {
                    code: ViolationCode::SpanOverflow,
                    location: at,
                    message: format!(
                        "cell ({r}, {c}) has a zero span (col_span {}, row_span {})",
                        cell.col_span, cell.row_span
                    ),
                });
            } else if r + cell.row_span > n_rows {
                violations.push(Violation {
                    code: ViolationCode::SpanOverflow,
                    location: at,
                    message: format!(
                        "cell ({r}, {c}) row_span {} extends past the last row",
                        cell.row_span
                    ),
                });
            }
        }
    }

    let grid = table.grid();
    let widths = grid.row_widths();
    if let Some(&expected) = widths.first() {
        for (r, &w) in widths.iter().enumerate() {
            if w != expected {
                violations.push(Violation {
                    code: ViolationCode::RaggedGrid,
                    location: ViolationLocation::Row(r),
                    message: format!(
                        "row {r} spans {w} effective columns, row 0 spans {expected}"
                    ),
                });
            }
        }
    }

    if !table.has_headers() {
        violations.push(Violation {
            code: ViolationCode::NoHeaders,
            location: ViolationLocation::Table,
            message: "table has no header cells".to_string(),
        });
    }

    ValidationReport { violations }
}

/// Fails with `InvalidTable` when `validate` finds a fatal violation.
pub fn ensure_valid(table: &SourceTable) -> Result<ValidationReport> {
    let report = validate(table);
    if report.is_usable() {
        Ok(report)
    } else {
        Err(Error::InvalidTable(report.fatal().cloned().collect()))
    }
}
