//! Property generators shared by the integration tests.

use proptest::prelude::*;
use regex::Regex;

use tablint::{Cell, LinearizedCell, LinearizedInput, SourceTable};

/// Normalized text that cannot be mistaken for a tag. `<` and `>` still
/// occur, just never as `<name>` or `</name>`.
pub fn text(max: usize) -> impl Strategy<Value = String> {
    let tag = Regex::new(r"</?[A-Za-z_]+>").unwrap();
    proptest::string::string_regex(&format!("[A-Za-z0-9 .,%()±'<>/éł-]{{0,{max}}}"))
        .unwrap()
        .prop_map(|s| s.split_whitespace().collect::<Vec<_>>().join(" "))
        .prop_filter("tag-like text", move |s| !tag.is_match(s))
}

pub fn header() -> impl Strategy<Value = String> {
    text(10).prop_filter("headers are non-empty", |s| !s.is_empty())
}

pub fn cell() -> impl Strategy<Value = LinearizedCell> {
    (text(16), prop::collection::vec(header(), 0..3), prop::collection::vec(header(), 0..3)).prop_map(
        |(value, col_headers, row_headers)| LinearizedCell {
            value,
            col_headers,
            row_headers,
        },
    )
}

prop_compose! {
    pub fn input()(
        page_title in text(24),
        section_title in prop::option::of(text(16)),
        cells in prop::collection::vec(cell(), 0..6),
    ) -> LinearizedInput {
        LinearizedInput { page_title, section_title, cells }
    }
}

// Generated election tables: a header row, optional band rows and data rows
// whose cells may pack several candidate records.

const NAMES: [&str; 6] = ["Ada Byron", "Tom Reed", "Mary Jones", "Li Wei", "Sam Hill", "Rosa Parks"];
const PARTIES: [&str; 4] = ["Republican", "Democratic", "Libertarian", "Green"];

pub fn record() -> impl Strategy<Value = String> {
    (prop::sample::select(&NAMES[..]), prop::sample::select(&PARTIES[..]), 1u32..999, any::<bool>()).prop_map(
        |(n, p, v, pct)| {
            if pct {
                format!("{n} ({p}) {}.{}%", v / 10, v % 10)
            } else {
                format!("{n} ({p}) {v}")
            }
        },
    )
}

pub fn candidates_cell() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(&NAMES[..]).prop_map(String::from),
        prop::collection::vec(record(), 1..5).prop_map(|r| r.join(" ")),
    ]
}

#[derive(Debug, Clone)]
pub enum GenRow {
    Band(String),
    Data { state: String, cand: String, hl: (bool, bool) },
}

pub fn gen_row() -> impl Strategy<Value = GenRow> {
    prop_oneof![
        1 => "[A-Z][a-z]{2,8} terms".prop_map(GenRow::Band),
        4 => ("[A-Z][a-z]{3,8}", candidates_cell(), any::<(bool, bool)>())
            .prop_map(|(state, cand, hl)| GenRow::Data { state, cand, hl }),
    ]
}

pub fn election_table() -> impl Strategy<Value = SourceTable> {
    (prop::collection::vec(gen_row(), 1..7), prop::sample::select(&["Candidates", "Candidate", "Subject"][..]))
        .prop_map(|(rows, header)| {
            let mut out = vec![vec![Cell::header("State"), Cell::header(header)]];
            for row in rows {
                out.push(match row {
                    GenRow::Band(v) => vec![Cell::header(v).with_col_span(2)],
                    GenRow::Data { state, cand, hl } => {
                        let mut s = Cell::data(state);
                        let mut c = Cell::data(cand);
                        s.highlighted = hl.0;
                        c.highlighted = hl.1;
                        vec![s, c]
                    }
                });
            }
            SourceTable {
                page_title: "Generated elections".into(),
                rows: out,
                ..Default::default()
            }
        })
}
