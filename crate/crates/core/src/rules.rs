//! Lexicons and thresholds that drive detection and correction, loadable
//! from a versioned TOML rules file.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RULES_VERSION: u32 = 1;

/// The rules file shipped with the crate; identical to `Rules::default()`.
pub const DEFAULT_RULES_TOML: &str = include_str!("../rules/default.toml");

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Rules {
    pub version: u32,
    pub limits: Limits,
    pub split: SplitConfig,
    pub complex: ComplexConfig,
    pub roles: RoleLexicon,
    pub names: NameLexicon,
    pub headers: HeaderRules,
    pub symbols: SymbolRules,
    pub templates: Vec<TemplateDef>,
}

impl Default for Rules {
    fn default() -> Self {
        Self {
            version: RULES_VERSION,
            limits: Limits::default(),
            split: SplitConfig::default(),
            complex: ComplexConfig::default(),
            roles: RoleLexicon::default(),
            names: NameLexicon::default(),
            headers: HeaderRules::default(),
            symbols: SymbolRules::default(),
            templates: Vec::new(),
        }
    }
}

impl Rules {
    /// Parses a rules file. Sections and keys left out keep their defaults;
    /// the `version` key is mandatory.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Rules(e.to_string()))?;
        match raw.get("version") {
            Some(toml::Value::Integer(v)) if *v == RULES_VERSION as i64 => {}
            Some(toml::Value::Integer(v)) => {
                return Err(Error::UnsupportedVersion(u32::try_from(*v).unwrap_or(u32::MAX)))
            }
            Some(_) => return Err(Error::Rules("`version` must be an integer".into())),
            None => return Err(Error::Rules("missing `version` key".into())),
        }
        let rules: Rules = toml::from_str(text).map_err(|e| Error::Rules(e.to_string()))?;
        rules.check()?;
        Ok(rules)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Rules(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Rejects limits that would make every table fail the size gate.
    pub fn check(&self) -> Result<()> {
        if self.limits.max_rows == 0 || self.limits.max_cols == 0 {
            return Err(Error::Rules("size limits must be positive".into()));
        }
        if self.complex.min_words == 0 {
            return Err(Error::Rules("complex.min_words must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    pub max_rows: usize,
    pub max_cols: usize,
    /// Trim oversized tables to their first and last data rows instead of
    /// rejecting them.
    pub truncate: bool,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_rows: 20,
            max_cols: 10,
            truncate: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Records kept per non-atomic cell; 0 keeps every record.
    pub max_records: usize,
    pub qualifier_header: String,
    /// Header for the number column when any split number carries `%`.
    pub percent_header: String,
    pub count_header: String,
    /// Parenthesized markers that belong to the name, such as "(inc.)".
    pub ignored_qualifiers: Vec<String>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            max_records: 2,
            qualifier_header: "Party".into(),
            percent_header: "% votes".into(),
            count_header: "Votes".into(),
            ignored_qualifiers: strings(&["inc.", "inc", "incumbent", "i"]),
        }
    }
}

impl SplitConfig {
    pub fn cap(&self) -> Option<usize> {
        (self.max_records > 0).then_some(self.max_records)
    }

    pub fn is_ignored_qualifier(&self, q: &str) -> bool {
        let q = q.trim();
        self.ignored_qualifiers.iter().any(|i| i.eq_ignore_ascii_case(q))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexConfig {
    pub min_words: usize,
    /// Word stems that mark a result narrated as a sentence.
    pub verbs: Vec<String>,
    /// Period-terminated tokens that do not end a sentence.
    pub abbreviations: Vec<String>,
}

impl Default for ComplexConfig {
    fn default() -> Self {
        Self {
            min_words: 6,
            verbs: strings(&[
                "elected", "re-elected", "reelected", "lost", "won", "defeated", "retired",
                "resigned", "died", "appointed", "gain", "hold", "renomination", "unopposed",
            ]),
            abbreviations: strings(&["inc.", "jr.", "sr.", "st.", "dr.", "mr.", "mrs.", "etc."]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoleLexicon {
    /// Headers of columns that say who or what a row is about.
    pub identity: Vec<String>,
    /// Headers of numeric result columns, matched exactly.
    pub numeric: Vec<String>,
    /// Substrings that mark a numeric result header.
    pub numeric_markers: Vec<String>,
    /// Headers of party columns, where abbreviations are expanded.
    pub party: Vec<String>,
    /// Headers of columns holding person names.
    pub person: Vec<String>,
}

impl Default for RoleLexicon {
    fn default() -> Self {
        Self {
            identity: strings(&[
                "candidate", "candidates", "party", "choice", "state", "opponent", "nominee",
            ]),
            numeric: strings(&[
                "votes", "%", "% votes", "vote %", "percentage", "seats", "±", "+/-", "swing",
                "margin", "share",
            ]),
            numeric_markers: strings(&["%", "±", "vote"]),
            party: strings(&["party"]),
            person: strings(&[
                "candidate", "candidates", "subject", "opponent", "nominee", "representative",
                "senator", "member", "name", "leader",
            ]),
        }
    }
}

fn header_key(h: &str) -> String {
    h.trim().to_lowercase()
}

impl RoleLexicon {
    pub fn is_identity(&self, header: &str) -> bool {
        let h = header_key(header);
        self.identity.iter().any(|i| header_key(i) == h)
    }

    pub fn is_numeric(&self, header: &str) -> bool {
        let h = header_key(header);
        self.numeric.iter().any(|n| header_key(n) == h)
            || self.numeric_markers.iter().any(|m| h.contains(&header_key(m)))
    }

    pub fn is_party(&self, header: &str) -> bool {
        let h = header_key(header);
        self.party.iter().any(|p| header_key(p) == h)
    }

    pub fn is_person(&self, header: &str) -> bool {
        let h = header_key(header);
        self.person.iter().any(|p| header_key(p) == h)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NameLexicon {
    /// Names always recognized as leaders.
    pub known: Vec<String>,
    /// Capitalized words that never occur in a person's name.
    pub stopwords: Vec<String>,
}

impl Default for NameLexicon {
    fn default() -> Self {
        Self {
            known: Vec::new(),
            stopwords: strings(&[
                "United", "States", "Senate", "House", "Party", "Democratic", "Republican",
                "Amendment", "Referendum", "Liberal", "Democrat", "Democrats", "Conservative",
                "Labour", "Federalist", "Independent", "Libertarian", "Green", "Congress",
                "District", "Governor", "Election", "Elections", "Results", "List", "Total",
                "Turnout", "Majority", "Yes", "No", "Vacant", "Others",
            ]),
        }
    }
}

impl NameLexicon {
    pub fn is_known(&self, name: &str) -> bool {
        self.known.iter().any(|k| k.trim() == name.trim())
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.iter().any(|s| s.eq_ignore_ascii_case(word))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rename {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeaderRules {
    /// Header of the column that receives flattened band-row text.
    pub band_column: String,
    pub renames: Vec<Rename>,
}

impl Default for HeaderRules {
    fn default() -> Self {
        Self {
            band_column: "Term details".into(),
            renames: vec![Rename {
                from: "Subject".into(),
                to: "Candidate".into(),
            }],
        }
    }
}

impl HeaderRules {
    pub fn rename_for(&self, header: &str) -> Option<&str> {
        let h = header.trim();
        self.renames
            .iter()
            .find(|r| r.from.trim() == h)
            .map(|r| r.to.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolRules {
    /// Header values that are bare symbols.
    pub symbols: Vec<String>,
    /// Replacement when the column holds percentages.
    pub percent_phrase: String,
    /// Replacement when the column holds counts.
    pub count_phrase: String,
    pub party_abbreviations: BTreeMap<String, String>,
}

impl Default for SymbolRules {
    fn default() -> Self {
        let parties = [
            ("R", "Republican"),
            ("D", "Democratic"),
            ("Dem", "Democratic"),
            ("Rep", "Republican"),
            ("DFL", "Democratic-Farmer-Labor"),
            ("Lab", "Labour"),
            ("Con", "Conservative"),
            ("LD", "Liberal Democrats"),
            ("Lib Dem", "Liberal Democrats"),
            ("SNP", "Scottish National Party"),
            ("Ind", "Independent"),
            ("Lib", "Libertarian"),
            ("Grn", "Green"),
        ];
        Self {
            symbols: strings(&["±", "+/-", "+/−", "+/–"]),
            percent_phrase: "± % difference with previous election".into(),
            count_phrase: "± seats compared to the previous election".into(),
            party_abbreviations: parties
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl SymbolRules {
    pub fn is_symbol(&self, header: &str) -> bool {
        let h = header.trim();
        self.symbols.iter().any(|s| s == h)
    }

    pub fn expand_party(&self, value: &str) -> Option<&str> {
        self.party_abbreviations.get(value.trim()).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateDef {
    pub id: String,
    pub body: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_file_matches_defaults() {
        assert_eq!(Rules::from_toml_str(DEFAULT_RULES_TOML).unwrap(), Rules::default());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let r = Rules::from_toml_str("version = 1\n[limits]\nmax_rows = 5\n").unwrap();
        assert_eq!(r.limits.max_rows, 5);
        assert_eq!(r.limits.max_cols, 10);
        assert_eq!(r.split.max_records, 2);
    }

    #[test]
    fn unknown_version_is_rejected() {
        assert!(matches!(
            Rules::from_toml_str("version = 2"),
            Err(Error::UnsupportedVersion(2))
        ));
        assert!(matches!(Rules::from_toml_str("[limits]\nmax_rows = 3"), Err(Error::Rules(_))));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Rules::from_toml_str("version = 1\n[limits]\nmax_rowz = 3").is_err());
    }

    #[test]
    fn zero_limits_are_rejected() {
        assert!(Rules::from_toml_str("version = 1\n[limits]\nmax_rows = 0").is_err());
    }

    #[test]
    fn role_matching() {
        let roles = RoleLexicon::default();
        assert!(roles.is_identity(" Candidates "));
        assert!(roles.is_numeric("% Votes"));
        assert!(roles.is_numeric("±"));
        assert!(!roles.is_numeric("Seniority date"));
        assert!(roles.is_party("Party"));
    }
}
