//! Recognition of cells that pack several name/qualifier/number records.

use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::rules::SplitConfig;
use crate::table::Cell;

static NUMBER: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^[+\-−]?(\d{1,3}(,\d{3})+|\d+)([.,]\d+)?%?$").expect("valid number pattern")
});

/// A number as written in a cell: optional sign, thousands separators,
/// decimal point or comma, optional trailing `%`.
pub fn is_number_lexeme(s: &str) -> bool {
    NUMBER.is_match(s.trim())
}

/// One logical record recovered from a non-atomic cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomicRecord {
    pub name: String,
    #[serde(default)]
    pub qualifier: String,
    #[serde(default)]
    pub number: String,
}

impl AtomicRecord {
    fn fields(&self) -> usize {
        usize::from(!self.qualifier.is_empty()) + usize::from(!self.number.is_empty())
    }

    /// The record written back as cell text.
    pub fn render(&self) -> String {
        let mut out = self.name.clone();
        if !self.qualifier.is_empty() {
            out.push_str(&format!(" ({})", self.qualifier));
        }
        if !self.number.is_empty() {
            out.push(' ');
            out.push_str(&self.number);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece<'a> {
    Word(&'a str),
    Group(&'a str),
}

/// Splits on whitespace, keeping each parenthesized group as one piece.
fn pieces(text: &str) -> Option<Vec<Piece<'_>>> {
    let mut out = Vec::new();
    let mut rest = text.trim_start();
    while !rest.is_empty() {
        if let Some(inner) = rest.strip_prefix('(') {
            let close = inner.find(')')?;
            out.push(Piece::Group(inner[..close].trim()));
            rest = inner[close + 1..].trim_start();
        } else {
            let end = rest
                .find(|c: char| c.is_whitespace() || c == '(')
                .unwrap_or(rest.len());
            out.push(Piece::Word(&rest[..end]));
            rest = rest[end..].trim_start();
        }
    }
    Some(out)
}

fn is_name_word(w: &str) -> bool {
    w.chars().any(char::is_alphabetic) && !w.chars().any(|c| c.is_ascii_digit()) && !w.contains(')')
}

fn parse_records(text: &str, config: &SplitConfig) -> Option<Vec<AtomicRecord>> {
    let mut records: Vec<AtomicRecord> = Vec::new();
    let mut name: Vec<String> = Vec::new();
    let mut qualifier: Option<String> = None;

    let close = |records: &mut Vec<AtomicRecord>, name: &mut Vec<String>, q: &mut Option<String>, n: String| {
        records.push(AtomicRecord {
            name: name.join(" "),
            qualifier: q.take().unwrap_or_default(),
            number: n,
        });
        name.clear();
    };

    for piece in pieces(text)? {
        match piece {
            Piece::Group(inner) if config.is_ignored_qualifier(inner) && qualifier.is_none() => {
                if name.is_empty() {
                    return None;
                }
                name.push(format!("({inner})"));
            }
            Piece::Group(inner) => {
                if name.is_empty() || qualifier.is_some() || inner.is_empty() {
                    return None;
                }
                qualifier = Some(inner.to_string());
            }
            Piece::Word("%") => {
                let last = records.last_mut().filter(|r| {
                    name.is_empty() && qualifier.is_none() && !r.number.is_empty() && !r.number.ends_with('%')
                })?;
                last.number.push('%');
            }
            Piece::Word(w) if is_number_lexeme(w) => {
                if name.is_empty() {
                    return None;
                }
                close(&mut records, &mut name, &mut qualifier, w.to_string());
            }
            Piece::Word(w) if is_name_word(w) => {
                if qualifier.is_some() {
                    close(&mut records, &mut name, &mut qualifier, String::new());
                }
                name.push(w.to_string());
            }
            Piece::Word(_) => return None,
        }
    }
    if !name.is_empty() {
        close(&mut records, &mut name, &mut qualifier, String::new());
    }
    Some(records)
}

/// Parses a data cell into the records it packs together. Returns two or
/// more records for a multi-record cell, one record when a single name
/// carries embedded party or number fields, and nothing for an atomic cell.
pub fn detect_non_atomic(cell: &Cell, config: &SplitConfig) -> Vec<AtomicRecord> {
    if cell.is_header {
        return Vec::new();
    }
    let Some(records) = parse_records(&cell.value, config) else {
        return Vec::new();
    };
    match records.len() {
        0 => Vec::new(),
        1 if records[0].fields() >= 1 => records,
        1 => Vec::new(),
        _ if records.iter().all(|r| r.fields() >= 1) => records,
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn detect(s: &str) -> Vec<AtomicRecord> {
        detect_non_atomic(&Cell::data(s), &SplitConfig::default())
    }

    fn rec(name: &str, qualifier: &str, number: &str) -> AtomicRecord {
        AtomicRecord {
            name: name.into(),
            qualifier: qualifier.into(),
            number: number.into(),
        }
    }

    #[test]
    fn alaska_candidates_cell() {
        let got = detect(
            "Dan Sullivan (Republican) 48.0% Mark Begich (Democratic) 45.8%  Mark Fish (Libertarian) 3.7% Ted Gianoutsos (Independent) 2.0%",
        );
        assert_eq!(got.len(), 4);
        assert_eq!(got[0], rec("Dan Sullivan", "Republican", "48.0%"));
        assert_eq!(got[3], rec("Ted Gianoutsos", "Independent", "2.0%"));
    }

    #[test]
    fn atomic_values() {
        for s in ["Dan Sullivan", "48.32%", "134,996", "March 4, 1915", "IL-18", "", "Referendum failed No",
            "Eleanor Holmes Norton (inc.)", "Incumbent lost renomination. New senator elected. Democratic gain."]
        {
            assert!(detect(s).is_empty(), "{s}");
        }
    }

    #[test]
    fn two_short_records() {
        assert_eq!(detect("A (X) 10.0% B (Y) 20.0%"), vec![rec("A", "X", "10.0%"), rec("B", "Y", "20.0%")]);
    }

    #[test]
    fn single_record_with_fields() {
        assert_eq!(detect("Dan Sullivan (Republican) 48.0%"), vec![rec("Dan Sullivan", "Republican", "48.0%")]);
        assert_eq!(detect("Dan Sullivan (Republican)"), vec![rec("Dan Sullivan", "Republican", "")]);
    }

    #[test]
    fn qualifier_only_records_and_detached_percent() {
        assert_eq!(
            detect("Edwin S. Johnson (Democratic) Charles H. Burke (Republican)"),
            vec![rec("Edwin S. Johnson", "Democratic", ""), rec("Charles H. Burke", "Republican", "")]
        );
        assert_eq!(detect("A (X) 8,90 % B (Y) 1,234"), vec![rec("A", "X", "8,90%"), rec("B", "Y", "1,234")]);
    }

    #[test]
    fn incumbent_marker_stays_with_name() {
        assert_eq!(
            detect("Jane Roe (inc.) (Democratic) 51% John Doe (Republican) 49%")[0],
            rec("Jane Roe (inc.)", "Democratic", "51%")
        );
    }

    #[test]
    fn number_lexemes() {
        for s in ["48.0%", "134,996", "8,90", "-11.5", "+3", "90.00", "7"] {
            assert!(is_number_lexeme(s), "{s}");
        }
        for s in ["4,", "IL-18", "1,23,4", "%", "1.2.3"] {
            assert!(!is_number_lexeme(s), "{s}");
        }
    }
}
