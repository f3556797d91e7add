//! Agreement between annotators: the confusion layout against a reference
//! annotator and Fleiss' kappa.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ErrorCategory, UnknownCategory};
use crate::error::{Error, Result};

/// What one annotator chose for an item: an error category, or no error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Error(ErrorCategory),
    NoError,
}

impl Label {
    pub fn all() -> impl Iterator<Item = Label> {
        ErrorCategory::ALL.into_iter().map(Label::Error).chain([Label::NoError])
    }

    /// Column of this label in a rating matrix built by `RatingMatrix::from_items`.
    pub fn index(self) -> usize {
        match self {
            Label::Error(c) => ErrorCategory::ALL.iter().position(|&x| x == c).expect("listed"),
            Label::NoError => ErrorCategory::ALL.len(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Error(c) => c.fmt(f),
            Label::NoError => f.write_str("NO_ERROR"),
        }
    }
}

impl FromStr for Label {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace(['-', ' '], "_");
        if key == "NO_ERROR" || key == "NONE" {
            return Ok(Label::NoError);
        }
        s.parse().map(Label::Error)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One annotated item with a label from each annotator. The first label
/// belongs to the reference annotator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabeledItem {
    pub item_id: String,
    pub labels: Vec<Label>,
}

fn check_arity(items: &[LabeledItem], raters: usize) -> Result<()> {
    match items.iter().find(|i| i.labels.len() != raters) {
        Some(item) => Err(Error::ArityMismatch {
            item: item.item_id.clone(),
            expected: raters,
            found: item.labels.len(),
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionRow {
    /// The reference annotator's label.
    pub label: Label,
    /// Items where every annotator chose `label`.
    pub all_agree: usize,
    /// For each other label, how many times a non-reference annotator
    /// chose it instead.
    pub disagreements: BTreeMap<Label, usize>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub raters: usize,
    pub rows: Vec<ConfusionRow>,
}

/// Rows are keyed by the reference label. A unanimous item adds one to
/// `all_agree`; otherwise each dissenting annotator adds one to the column
/// of the label they chose. `total` is the row sum.
pub fn confusion_matrix(items: &[LabeledItem], raters: usize) -> Result<ConfusionMatrix> {
    if raters < 2 {
        return Err(Error::RatingMatrix(format!("need at least two raters, got {raters}")));
    }
    check_arity(items, raters)?;
    let mut rows: Vec<ConfusionRow> = Label::all()
        .map(|label| ConfusionRow {
            label,
            all_agree: 0,
            disagreements: Label::all().map(|l| (l, 0)).collect(),
            total: 0,
        })
        .collect();
    for item in items {
        let reference = item.labels[0];
        let row = &mut rows[reference.index()];
        if item.labels.iter().all(|&l| l == reference) {
            row.all_agree += 1;
        } else {
            for &other in item.labels[1..].iter().filter(|&&l| l != reference) {
                *row.disagreements.entry(other).or_insert(0) += 1;
            }
        }
    }
    for row in &mut rows {
        row.total = row.all_agree + row.disagreements.values().sum::<usize>();
    }
    Ok(ConfusionMatrix { raters, rows })
}

impl ConfusionMatrix {
    pub fn row(&self, label: Label) -> &ConfusionRow {
        &self.rows[label.index()]
    }

    pub fn render_plain(&self) -> String {
        let mut header = vec!["ERROR".to_string(), "ALL AGREE".to_string()];
        header.extend(Label::all().map(|l| l.to_string()));
        header.push("TOTAL".into());
        let mut lines = vec![header];
        for row in &self.rows {
            let mut line = vec![row.label.to_string(), row.all_agree.to_string()];
            line.extend(row.disagreements.values().map(usize::to_string));
            line.push(row.total.to_string());
            lines.push(line);
        }
        let widths: Vec<usize> = (0..lines[0].len())
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in &lines {
            let cells: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    if c == 0 {
                        format!("{s:<w$}", w = widths[c])
                    } else {
                        format!("{s:>w$}", w = widths[c])
                    }
                })
                .collect();
            out.push_str(&cells.join("  "));
            out.push('\n');
        }
        out
    }
}

/// Items by categories: `counts[i][j]` annotators put item `i` in category
/// `j`. Every row sums to the number of raters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingMatrix {
    counts: Vec<Vec<u32>>,
    raters: u32,
}

impl RatingMatrix {
    pub fn new(counts: Vec<Vec<u32>>) -> Result<Self> {
        let first = counts
            .first()
            .ok_or_else(|| Error::RatingMatrix("no items".into()))?;
        let k = first.len();
        if k == 0 {
            return Err(Error::RatingMatrix("no categories".into()));
        }
        let raters: u32 = first.iter().sum();
        if raters < 2 {
            return Err(Error::RatingMatrix(format!("need at least two raters, got {raters}")));
        }
        for (i, row) in counts.iter().enumerate() {
            if row.len() != k {
                return Err(Error::RatingMatrix(format!(
                    "item {} has {} categories, expected {k}",
                    i + 1,
                    row.len()
                )));
            }
            let sum: u32 = row.iter().sum();
            if sum != raters {
                return Err(Error::RatingMatrix(format!(
                    "item {} has {sum} ratings, expected {raters}",
                    i + 1
                )));
            }
        }
        Ok(Self { counts, raters })
    }

    /// One column per `Label`, in `Label::all` order.
    pub fn from_items(items: &[LabeledItem], raters: usize) -> Result<Self> {
        check_arity(items, raters)?;
        let counts = items
            .iter()
            .map(|item| {
                let mut row = vec![0; Label::all().count()];
                for label in &item.labels {
                    row[label.index()] += 1;
                }
                row
            })
            .collect();
        Self::new(counts)
    }

    /// Reads one item per line, counts separated by commas, tabs or
    /// spaces. Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut counts = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .map(|f| {
                    f.parse::<u32>()
                        .map_err(|_| Error::RatingMatrix(format!("line {}: bad count `{f}`", i + 1)))
                })
                .collect::<Result<Vec<_>>>()?;
            counts.push(row);
        }
        Self::new(counts)
    }

    pub fn items(&self) -> usize {
        self.counts.len()
    }

    pub fn categories(&self) -> usize {
        self.counts[0].len()
    }

    pub fn raters(&self) -> u32 {
        self.raters
    }

    pub fn counts(&self) -> &[Vec<u32>] {
        &self.counts
    }

    /// Observed agreement: the mean over items of the share of agreeing
    /// rater pairs.
    pub fn observed_agreement(&self) -> f64 {
        let (num, den) = self.observed_parts();
        num as f64 / den as f64
    }

    fn observed_parts(&self) -> (u64, u64) {
        let n = self.raters as u64;
        let num: u64 = self
            .counts
            .iter()
            .flatten()
            .map(|&c| c as u64 * (c as u64).saturating_sub(1))
            .sum();
        (num, self.items() as u64 * n * (n - 1))
    }

    /// Chance agreement from the category marginals.
    pub fn expected_agreement(&self) -> f64 {
        let total = (self.items() as u64 * self.raters as u64) as f64;
        self.column_sums()
            .into_iter()
            .map(|s| {
                let p = s as f64 / total;
                p * p
            })
            .sum()
    }

    fn column_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.categories()];
        for row in &self.counts {
            for (s, &c) in sums.iter_mut().zip(row) {
                *s += c as u64;
            }
        }
        sums
    }
}

/// Fleiss' kappa, `(pa - pe) / (1 - pe)`. When every rating falls in one
/// category the chance agreement is 1 and kappa is taken as 1.
pub fn fleiss_kappa(matrix: &RatingMatrix) -> Result<f64> {
    let (num, den) = matrix.observed_parts();
    let total = matrix.items() as u64 * matrix.raters as u64;
    let single_category = matrix.column_sums().contains(&total);
    if num == den {
        return Ok(1.0);
    }
    if single_category {
        return Err(Error::DegenerateAgreement);
    }
    let pa = num as f64 / den as f64;
    let pe = matrix.expected_agreement();
    Ok((pa - pe) / (1.0 - pe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ErrorCategory::*;

    fn item(id: &str, labels: &[Label]) -> LabeledItem {
        LabeledItem {
            item_id: id.into(),
            labels: labels.to_vec(),
        }
    }

    const W: Label = Label::Error(Word);
    const C: Label = Label::Error(Context);
    const A: Label = Label::Error(Addition);

    #[test]
    fn unanimous_item_counts_as_all_agree() {
        let m = confusion_matrix(&[item("1", &[W, W, W])], 3).unwrap();
        assert_eq!(m.row(W).all_agree, 1);
        assert_eq!(m.row(W).total, 1);
    }

    #[test]
    fn dissenting_annotators_each_add_one() {
        let items = [item("1", &[W, C, C]), item("2", &[W, W, A]), item("3", &[Label::NoError, Label::NoError, Label::Error(Other)])];
        let m = confusion_matrix(&items, 3).unwrap();
        assert_eq!(m.row(W).disagreements[&C], 2);
        assert_eq!(m.row(W).disagreements[&A], 1);
        assert_eq!(m.row(W).all_agree, 0);
        assert_eq!(m.row(W).total, 3);
        assert_eq!(m.row(Label::NoError).disagreements[&Label::Error(Other)], 1);
        assert!(m.render_plain().starts_with("ERROR"));
    }

    #[test]
    fn missing_label_is_arity_mismatch() {
        let err = confusion_matrix(&[item("x", &[W, W])], 3).unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { expected: 3, found: 2, .. }));
    }

    #[test]
    fn perfect_agreement_is_one() {
        let m = RatingMatrix::new(vec![vec![3, 0], vec![0, 3], vec![3, 0]]).unwrap();
        assert_eq!(fleiss_kappa(&m).unwrap(), 1.0);
        let single = RatingMatrix::new(vec![vec![3, 0], vec![3, 0]]).unwrap();
        assert_eq!(fleiss_kappa(&single).unwrap(), 1.0);
    }

    #[test]
    fn textbook_value() {
        // Two items, two raters, one agreement and one split.
        // pa = (1 + 0) / 2, p = (3/4, 1/4), pe = 10/16.
        let m = RatingMatrix::new(vec![vec![2, 0], vec![1, 1]]).unwrap();
        let expected = (0.5 - 0.625) / (1.0 - 0.625);
        assert!((fleiss_kappa(&m).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn matrix_shape_errors() {
        assert!(RatingMatrix::new(vec![]).is_err());
        assert!(RatingMatrix::new(vec![vec![2, 1], vec![2, 0]]).is_err());
        assert!(RatingMatrix::new(vec![vec![1, 0]]).is_err());
        assert!(RatingMatrix::parse("1,2\n# c\n\n3 x\n").is_err());
        assert_eq!(RatingMatrix::parse("2,1\n0 3\n").unwrap().items(), 2);
    }

    #[test]
    fn label_spellings() {
        assert_eq!("NO ERROR".parse(), Ok(Label::NoError));
        assert_eq!("DATE_DIM".parse(), Ok(Label::Error(DateDimension)));
        assert_eq!(serde_json::to_string(&Label::NoError).unwrap(), "\"NO_ERROR\"");
    }
}
