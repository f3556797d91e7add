//! Where leader names appear: in the page title, in the table rows, or
//! nowhere.

use serde::{Deserialize, Serialize};

use crate::diagnostics::atomic::detect_non_atomic;
use crate::extract::header_context;
use crate::rules::Rules;
use crate::table::SourceTable;

pub const NOT_IN_TITLE: &str = "Leader name not in title";
pub const NOT_IN_TABLE: &str = "Leader name not in table";
pub const LEADER_DATA_PREFIX: &str = "Leader Data: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderScenario {
    TitleLeaderFound,
    LeaderNotInTitle,
    LeaderNotInTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderOrderReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leader_from_title: Option<String>,
    pub recorded_data: Vec<String>,
    pub scenario: LeaderScenario,
}

impl LeaderOrderReport {
    /// Names found in the rows, without the title leader or sentinel.
    pub fn row_leaders(&self) -> &[String] {
        match self.scenario {
            LeaderScenario::LeaderNotInTable => &[],
            _ => &self.recorded_data[1..],
        }
    }

    /// The report in its "Leader Data: [...]" text form.
    pub fn leader_data(&self) -> String {
        let items: Vec<String> = self.recorded_data.iter().map(|s| format!("{s:?}")).collect();
        format!("{LEADER_DATA_PREFIX}[{}]", items.join(", "))
    }
}

/// Strips trailing footnote marks and the parenthetical asides that follow
/// a name, e.g. "Eleanor Holmes Norton (inc.)*".
fn bare_name(value: &str) -> String {
    let mut s = value.trim().trim_end_matches(['*', '†', '‡']).trim();
    while let Some(open) = s.rfind(" (") {
        if !s.ends_with(')') {
            break;
        }
        s = s[..open].trim_end();
    }
    s.trim_end_matches(['*', '†', '‡']).trim().to_string()
}

/// Two to five capitalized words, no digits, none of them a stopword.
pub fn looks_like_person(text: &str, rules: &Rules) -> bool {
    let words: Vec<&str> = text.split_whitespace().collect();
    if !(2..=5).contains(&words.len()) {
        return false;
    }
    words.iter().all(|w| {
        let core = w.trim_matches(|c: char| !c.is_alphanumeric());
        core.chars().next().is_some_and(char::is_uppercase)
            && !w.chars().any(|c| c.is_ascii_digit())
            && !rules.names.is_stopword(core)
    })
}

pub fn leader_from_title(title: &str, rules: &Rules) -> Option<String> {
    let name = bare_name(title);
    if name.is_empty() {
        return None;
    }
    (rules.names.is_known(&name) || looks_like_person(&name, rules)).then_some(name)
}

/// Leader names found in the data cells, in reading order. A cell counts
/// when it matches the known-name list, when it sits in a person column and
/// looks like a name, or when it packs several candidate records.
pub fn leaders_in_rows(table: &SourceTable, rules: &Rules) -> Vec<String> {
    let grid = table.grid();
    let headerless = !table.has_headers();
    let mut names = Vec::new();
    for (at, cell) in table.cells().filter(|(_, c)| !c.is_header) {
        let name = bare_name(&cell.value);
        if name.is_empty() {
            continue;
        }
        if rules.names.is_known(&name) {
            names.push(name);
            continue;
        }
        let records = detect_non_atomic(cell, &rules.split);
        if records.len() >= 2 {
            names.extend(records.into_iter().map(|r| bare_name(&r.name)));
            continue;
        }
        let (col_headers, _) = header_context(table, &grid, at);
        let person_column = col_headers.iter().any(|h| rules.roles.is_person(h));
        if (person_column || headerless) && looks_like_person(&name, rules) {
            names.push(name);
        }
    }
    names
}

pub fn identify_leader_order(table: &SourceTable, title: &str, rules: &Rules) -> LeaderOrderReport {
    let from_title = leader_from_title(title, rules);
    let from_rows = leaders_in_rows(table, rules);
    match (from_title, from_rows.is_empty()) {
        (Some(leader), _) => {
            let mut recorded = vec![leader.clone()];
            recorded.extend(from_rows);
            LeaderOrderReport {
                leader_from_title: Some(leader),
                recorded_data: recorded,
                scenario: LeaderScenario::TitleLeaderFound,
            }
        }
        (None, false) => {
            let mut recorded = vec![NOT_IN_TITLE.to_string()];
            recorded.extend(from_rows);
            LeaderOrderReport {
                leader_from_title: None,
                recorded_data: recorded,
                scenario: LeaderScenario::LeaderNotInTitle,
            }
        }
        (None, true) => LeaderOrderReport {
            leader_from_title: None,
            recorded_data: vec![NOT_IN_TABLE.to_string()],
            scenario: LeaderScenario::LeaderNotInTable,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::Cell;

    fn table(rows: Vec<Vec<Cell>>) -> SourceTable {
        SourceTable {
            page_title: String::new(),
            rows,
            ..Default::default()
        }
    }

    #[test]
    fn title_leader_comes_first() {
        let t = table(vec![
            vec![Cell::header("Party"), Cell::header("Candidate"), Cell::header("% Votes")],
            vec![Cell::data("Democratic"), Cell::data("Josh Newman"), Cell::data("50.4")],
            vec![Cell::data("Republican"), Cell::data("Ling Ling Chang"), Cell::data("49.6")],
        ]);
        let r = identify_leader_order(&t, "Ling Ling Chang", &Rules::default());
        assert_eq!(r.scenario, LeaderScenario::TitleLeaderFound);
        assert_eq!(r.recorded_data, vec!["Ling Ling Chang", "Josh Newman", "Ling Ling Chang"]);
    }

    #[test]
    fn no_names_anywhere() {
        let t = table(vec![vec![Cell::header("Choice")], vec![Cell::data("Yes")]]);
        let r = identify_leader_order(&t, "Minnesota Amendment 2", &Rules::default());
        assert_eq!(r.scenario, LeaderScenario::LeaderNotInTable);
        assert_eq!(r.recorded_data, vec![NOT_IN_TABLE]);
        assert!(r.leader_from_title.is_none());
    }

    #[test]
    fn lexicon_names_without_title_leader() {
        let mut rules = Rules::default();
        rules.names.known = vec!["a".into(), "b".into(), "c".into()];
        let t = table(vec![
            vec![Cell::header("x")],
            vec![Cell::data("a")],
            vec![Cell::data("b")],
            vec![Cell::data("c")],
        ]);
        let r = identify_leader_order(&t, "1996 election", &rules);
        assert_eq!(r.recorded_data, vec![NOT_IN_TITLE, "a", "b", "c"]);
        assert_eq!(r.leader_data(), r#"Leader Data: ["Leader name not in title", "a", "b", "c"]"#);
    }

    #[test]
    fn names_ignore_markers_and_places() {
        let t = table(vec![
            vec![Cell::header("State"), Cell::header("Candidate")],
            vec![Cell::data("South Dakota"), Cell::data("Eleanor Holmes Norton (inc.)*")],
        ]);
        assert_eq!(leaders_in_rows(&t, &Rules::default()), vec!["Eleanor Holmes Norton"]);
    }

    #[test]
    fn titles_with_years_or_parties_are_not_names() {
        let rules = Rules::default();
        assert!(leader_from_title("2014 United States Senate elections", &rules).is_none());
        assert!(leader_from_title("Liberal Democrat", &rules).is_none());
        assert_eq!(leader_from_title("Chuck DeVore", &rules).as_deref(), Some("Chuck DeVore"));
        assert_eq!(leader_from_title("John Smith (politician)", &rules).as_deref(), Some("John Smith"));
    }
}
