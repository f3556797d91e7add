//! Fixture loading shared by the integration tests.

#![allow(dead_code)]

pub mod gen;

use std::path::PathBuf;

use tablint::{parse_source_table, SourceTable};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn tables() -> Vec<SourceTable> {
    fixture_text("tables.jsonl")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_source_table(l).expect("fixture table parses"))
        .collect()
}

pub fn table(id: &str) -> SourceTable {
    tables()
        .into_iter()
        .find(|t| t.table_id.as_deref() == Some(id))
        .unwrap_or_else(|| panic!("no fixture table `{id}`"))
}

pub fn linearized_corpus() -> Vec<String> {
    fixture_text("linearized.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect()
}

pub fn values(t: &SourceTable) -> Vec<Vec<&str>> {
    t.rows.iter().map(|r| r.iter().map(|c| c.value.as_str()).collect()).collect()
}
