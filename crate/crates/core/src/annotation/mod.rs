//! Error annotations over model outputs: the category taxonomy, corpus
//! loading and validation, sample classification and count arithmetic.

pub mod agreement;
pub mod summary;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::diagnostics::Problem;
use crate::error::{Error, Result};

pub use agreement::{
    confusion_matrix, fleiss_kappa, ConfusionMatrix, ConfusionRow, Label, LabeledItem, RatingMatrix,
};
pub use summary::{summarize, GroupSummary, Grouping, PhaseSummary, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ErrorCategory {
    Word,
    Name,
    DateDimension,
    Number,
    Other,
    Context,
    Addition,
    NonEnglish,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 8] = [
        ErrorCategory::Word,
        ErrorCategory::Name,
        ErrorCategory::DateDimension,
        ErrorCategory::Number,
        ErrorCategory::Other,
        ErrorCategory::Context,
        ErrorCategory::Addition,
        ErrorCategory::NonEnglish,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Word => "WORD",
            ErrorCategory::Name => "NAME",
            ErrorCategory::DateDimension => "DATE_DIMENSION",
            ErrorCategory::Number => "NUMBER",
            ErrorCategory::Other => "OTHER",
            ErrorCategory::Context => "CONTEXT",
            ErrorCategory::Addition => "ADDITION",
            ErrorCategory::NonEnglish => "NON_ENGLISH",
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown error category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for ErrorCategory {
    type Err = UnknownCategory;

    /// Accepts the canonical names plus the short and hyphenated spellings
    /// seen in some annotation exports (`DATE_DIM`, `NON-ENGLISH`).
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace(['-', ' '], "_");
        let category = match key.as_str() {
            "WORD" => ErrorCategory::Word,
            "NAME" => ErrorCategory::Name,
            "DATE_DIMENSION" | "DATE_DIM" => ErrorCategory::DateDimension,
            "NUMBER" => ErrorCategory::Number,
            "OTHER" => ErrorCategory::Other,
            "CONTEXT" => ErrorCategory::Context,
            "ADDITION" => ErrorCategory::Addition,
            "NON_ENGLISH" => ErrorCategory::NonEnglish,
            _ => return Err(UnknownCategory(s.to_string())),
        };
        Ok(category)
    }
}

impl Serialize for ErrorCategory {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ErrorCategory {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A marked substring of a model output. Offsets are bytes into the text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSpan {
    pub start: usize,
    pub end: usize,
    pub category: ErrorCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    #[serde(alias = "Before")]
    Before,
    #[serde(alias = "After")]
    After,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Before => "Before",
            Phase::After => "After",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedSample {
    pub sample_id: String,
    pub model_id: String,
    pub phase: Phase,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        serialize_with = "ser_problem",
        deserialize_with = "de_problem"
    )]
    pub problem_type: Option<Problem>,
    pub text: String,
    #[serde(default)]
    pub spans: Vec<ErrorSpan>,
    #[serde(default)]
    pub omission: bool,
}

fn ser_problem<S: Serializer>(p: &Option<Problem>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match p {
        Some(p) => s.serialize_str(p.label()),
        None => s.serialize_none(),
    }
}

fn de_problem<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Problem>, D::Error> {
    let Some(label) = Option::<String>::deserialize(d)? else {
        return Ok(None);
    };
    Problem::from_label(&label)
        .map(Some)
        .ok_or_else(|| serde::de::Error::custom(format!("unknown problem type `{label}`")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleClass {
    NoError,
    Omissions,
    Errors,
}

impl SampleClass {
    pub const ALL: [SampleClass; 3] = [SampleClass::NoError, SampleClass::Omissions, SampleClass::Errors];

    pub fn label(self) -> &'static str {
        match self {
            SampleClass::NoError => "No Error",
            SampleClass::Omissions => "Omissions",
            SampleClass::Errors => "Errors",
        }
    }
}

/// A sample with any error span is an error even when it also omits
/// content; omission alone is its own class.
pub fn classify_sample(sample: &AnnotatedSample) -> SampleClass {
    if !sample.spans.is_empty() {
        SampleClass::Errors
    } else if sample.omission {
        SampleClass::Omissions
    } else {
        SampleClass::NoError
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    OutOfRange { span: usize, start: usize, end: usize },
    Overlap { first: usize, second: usize },
    NotCharBoundary { span: usize, offset: usize },
    UnknownCategory { span: usize, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationViolation {
    pub sample_id: String,
    /// 1-based line in the corpus file, when the sample came from one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for AnnotationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        write!(f, "sample {}: ", self.sample_id)?;
        match &self.kind {
            ViolationKind::OutOfRange { span, start, end } => {
                write!(f, "span {span} ({start}, {end}) is out of range")
            }
            ViolationKind::Overlap { first, second } => write!(f, "spans {first} and {second} overlap"),
            ViolationKind::NotCharBoundary { span, offset } => {
                write!(f, "span {span} offset {offset} splits a character")
            }
            ViolationKind::UnknownCategory { span, value } => {
                write!(f, "span {span} has unknown category `{value}`")
            }
        }
    }
}

/// Checks spans against the sample text. Spans may be listed in any order.
pub fn validate_annotations(sample: &AnnotatedSample) -> Vec<AnnotationViolation> {
    let mut kinds = Vec::new();
    let len = sample.text.len();
    let mut in_range = Vec::new();
    for (i, span) in sample.spans.iter().enumerate() {
        if span.start >= span.end || span.end > len {
            kinds.push(ViolationKind::OutOfRange {
                span: i,
                start: span.start,
                end: span.end,
            });
            continue;
        }
        let mut aligned = true;
        for offset in [span.start, span.end] {
            if !sample.text.is_char_boundary(offset) {
                kinds.push(ViolationKind::NotCharBoundary { span: i, offset });
                aligned = false;
            }
        }
        if aligned {
            in_range.push(i);
        }
    }
    in_range.sort_by_key(|&i| (sample.spans[i].start, i));
    for pair in in_range.windows(2) {
        let (a, b) = (&sample.spans[pair[0]], &sample.spans[pair[1]]);
        if b.start < a.end {
            kinds.push(ViolationKind::Overlap {
                first: pair[0].min(pair[1]),
                second: pair[0].max(pair[1]),
            });
        }
    }
    kinds
        .into_iter()
        .map(|kind| AnnotationViolation {
            sample_id: sample.sample_id.clone(),
            line: None,
            kind,
        })
        .collect()
}

/// First line of an annotation corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusHeader {
    pub version: u32,
    /// Encoding of the sample texts, which span offsets index into.
    pub encoding: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl Default for CorpusHeader {
    fn default() -> Self {
        Self {
            version: 1,
            encoding: "utf-8".into(),
            description: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub header: CorpusHeader,
    pub samples: Vec<AnnotatedSample>,
}

/// A parsed corpus plus the samples that failed validation, which are
/// left out of `corpus.samples`.
#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub violations: Vec<AnnotationViolation>,
}

impl LoadedCorpus {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn parse_header(line: &str, lineno: usize) -> Result<CorpusHeader> {
    let header: CorpusHeader = serde_json::from_str(line)
        .map_err(|e| Error::Annotation(format!("line {lineno}: bad corpus header: {e}")))?;
    if header.version != 1 {
        return Err(Error::Annotation(format!(
            "line {lineno}: unsupported corpus version {}",
            header.version
        )));
    }
    let enc = header.encoding.to_ascii_lowercase();
    if enc != "utf-8" && enc != "utf8" {
        return Err(Error::Annotation(format!(
            "line {lineno}: unsupported text encoding `{}`",
            header.encoding
        )));
    }
    Ok(header)
}

/// Category strings that do not name one of the eight categories. They are
/// reported as violations rather than as a malformed line.
fn unknown_categories(value: &serde_json::Value) -> Vec<(usize, String)> {
    let Some(spans) = value.get("spans").and_then(|s| s.as_array()) else {
        return Vec::new();
    };
    spans
        .iter()
        .enumerate()
        .filter_map(|(i, span)| {
            let c = span.get("category")?.as_str()?;
            c.parse::<ErrorCategory>().is_err().then(|| (i, c.to_string()))
        })
        .collect()
}

/// Parses a line-delimited corpus: a header record declaring the text
/// encoding, then one `AnnotatedSample` per line. Blank lines are skipped.
/// Malformed records are an error; span problems are collected as
/// violations.
pub fn parse_corpus(text: &str) -> Result<LoadedCorpus> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let Some((first_no, first)) = lines.next() else {
        return Ok(LoadedCorpus::default());
    };
    let header = parse_header(first, first_no)?;

    let mut out = LoadedCorpus {
        corpus: Corpus {
            header,
            samples: Vec::new(),
        },
        violations: Vec::new(),
    };
    for (lineno, line) in lines {
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| Error::Annotation(format!("line {lineno}: {e}")))?;
        let unknown = unknown_categories(&value);
        if !unknown.is_empty() {
            let sample_id = value
                .get("sample_id")
                .and_then(|v| v.as_str())
                .unwrap_or_default()
                .to_string();
            out.violations.extend(unknown.into_iter().map(|(span, value)| AnnotationViolation {
                sample_id: sample_id.clone(),
                line: Some(lineno),
                kind: ViolationKind::UnknownCategory { span, value },
            }));
            continue;
        }
        let sample: AnnotatedSample = serde_path_to_error::deserialize(value).map_err(|e| {
            Error::Annotation(format!("line {lineno}: at `{}`: {}", e.path(), e.inner()))
        })?;
        let found = validate_annotations(&sample);
        if found.is_empty() {
            out.corpus.samples.push(sample);
        } else {
            out.violations.extend(found.into_iter().map(|mut v| {
                v.line = Some(lineno);
                v
            }));
        }
    }
    Ok(out)
}

/// Writes a corpus in the format read by `parse_corpus`.
pub fn render_corpus(corpus: &Corpus) -> String {
    let mut out = serde_json::to_string(&corpus.header).expect("header serializes");
    out.push('\n');
    for sample in &corpus.samples {
        out.push_str(&serde_json::to_string(sample).expect("sample serializes"));
        out.push('\n');
    }
    out
}

/// Span counts per category; every category is present, possibly at zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryCounts(pub BTreeMap<ErrorCategory, usize>);

impl Default for CategoryCounts {
    fn default() -> Self {
        Self(ErrorCategory::ALL.into_iter().map(|c| (c, 0)).collect())
    }
}

impl CategoryCounts {
    pub fn get(&self, category: ErrorCategory) -> usize {
        self.0.get(&category).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn add_sample(&mut self, sample: &AnnotatedSample) {
        for span in &sample.spans {
            *self.0.entry(span.category).or_insert(0) += 1;
        }
    }
}

/// Counts error spans, not samples, over the samples matching the filter.
pub fn category_counts(corpus: &[AnnotatedSample], filter: Option<(&str, Phase)>) -> CategoryCounts {
    let mut counts = CategoryCounts::default();
    for sample in corpus {
        if filter.is_none_or(|(model, phase)| sample.model_id == model && sample.phase == phase) {
            counts.add_sample(sample);
        }
    }
    counts
}

/// Number of samples in each class; all three classes are present.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassCounts(pub BTreeMap<SampleClass, usize>);

impl Default for ClassCounts {
    fn default() -> Self {
        Self(SampleClass::ALL.into_iter().map(|c| (c, 0)).collect())
    }
}

impl ClassCounts {
    pub fn get(&self, class: SampleClass) -> usize {
        self.0.get(&class).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn add(&mut self, sample: &AnnotatedSample) {
        *self.0.entry(classify_sample(sample)).or_insert(0) += 1;
    }

    /// Share of a class as a whole percent, rounded half-up. `None` for an
    /// empty tally.
    pub fn percent(&self, class: SampleClass) -> Option<i64> {
        let total = self.total();
        (total > 0).then(|| round_half_up(100 * self.get(class) as i64, total as i64))
    }
}

pub fn class_counts(corpus: &[AnnotatedSample], filter: Option<(&str, Phase)>) -> ClassCounts {
    let mut counts = ClassCounts::default();
    for sample in corpus {
        if filter.is_none_or(|(model, phase)| sample.model_id == model && sample.phase == phase) {
            counts.add(sample);
        }
    }
    counts
}

/// `num / den` rounded to the nearest integer, halves away from negative
/// infinity. `den` must be positive.
fn round_half_up(num: i64, den: i64) -> i64 {
    (2 * num + den).div_euclid(2 * den)
}

/// Percentage drop from `before` to `after`, rounded half-up. Negative when
/// the count grew.
pub fn error_reduction(before_total: usize, after_total: usize) -> Result<i64> {
    if before_total == 0 {
        return Err(Error::DivisionByZero);
    }
    let b = before_total as i64;
    Ok(round_half_up(100 * (b - after_total as i64), b))
}
