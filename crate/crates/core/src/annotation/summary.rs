//! Per-model and per-problem-type summaries of an annotated corpus, with an
//! aligned plain-text rendering.

use serde::{Deserialize, Serialize};

use super::{error_reduction, AnnotatedSample, CategoryCounts, ClassCounts, ErrorCategory, Phase, SampleClass};
use crate::diagnostics::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grouping {
    ByModelPhase,
    ByProblemType,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub samples: usize,
    pub classes: ClassCounts,
    pub categories: CategoryCounts,
}

impl PhaseSummary {
    fn add(&mut self, sample: &AnnotatedSample) {
        self.samples += 1;
        self.classes.add(sample);
        self.categories.add_sample(sample);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem_type: Option<Problem>,
    pub before: PhaseSummary,
    pub after: PhaseSummary,
    /// Drop in error spans from before to after, in whole percent. Absent
    /// when either phase has no samples or there were no errors before.
    pub reduction: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub grouping: Grouping,
    pub groups: Vec<GroupSummary>,
}

/// Groups are ordered by the model's first appearance in the corpus, then
/// by problem type with unlabelled samples last.
pub fn summarize(corpus: &[AnnotatedSample], grouping: Grouping) -> Summary {
    let mut models: Vec<&str> = Vec::new();
    for s in corpus {
        if !models.contains(&s.model_id.as_str()) {
            models.push(&s.model_id);
        }
    }
    let key = |s: &AnnotatedSample| {
        let model = models.iter().position(|m| *m == s.model_id).expect("model seen");
        let problem = match grouping {
            Grouping::ByModelPhase => None,
            Grouping::ByProblemType => s.problem_type,
        };
        // `None` sorts last within a model.
        (model, problem.is_none(), problem)
    };

    let mut keyed: Vec<_> = corpus.iter().map(|s| (key(s), s)).collect();
    keyed.sort_by_key(|(k, _)| *k);

    let mut groups: Vec<GroupSummary> = Vec::new();
    let mut last = None;
    for (k, sample) in keyed {
        if last != Some(k) {
            last = Some(k);
            groups.push(GroupSummary {
                model_id: sample.model_id.clone(),
                problem_type: k.2,
                before: PhaseSummary::default(),
                after: PhaseSummary::default(),
                reduction: None,
            });
        }
        let group = groups.last_mut().expect("group pushed");
        match sample.phase {
            Phase::Before => group.before.add(sample),
            Phase::After => group.after.add(sample),
        }
    }
    for g in groups.iter_mut().filter(|g| g.before.samples > 0 && g.after.samples > 0) {
        g.reduction = error_reduction(g.before.categories.total(), g.after.categories.total()).ok();
    }
    Summary { grouping, groups }
}

/// Lays out rows as columns padded to a common width; the first column is
/// left-aligned, the rest right-aligned.
fn render_grid(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                line.push_str(&format!("{cell:<w$}", w = widths[0]));
            } else {
                line.push_str(&format!("  {cell:>w$}", w = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn reduction_cell(r: Option<i64>) -> String {
    r.map_or_else(|| "n/a".to_string(), |r| format!("{r}%"))
}

fn class_cell(phase: &PhaseSummary, class: SampleClass) -> String {
    match phase.classes.percent(class) {
        Some(pct) => format!("{} ({pct}%)", phase.classes.get(class)),
        None => "0".to_string(),
    }
}

fn render_by_model(summary: &Summary) -> String {
    let groups = &summary.groups;
    let mut header = vec!["Category".to_string()];
    for g in groups {
        header.push(format!("{} Before", g.model_id));
        header.push(format!("{} After", g.model_id));
    }
    let mut rows = vec![header];
    for cat in ErrorCategory::ALL {
        let mut row = vec![cat.to_string()];
        for g in groups {
            row.push(g.before.categories.get(cat).to_string());
            row.push(g.after.categories.get(cat).to_string());
        }
        rows.push(row);
    }
    let mut total = vec!["Total errors".to_string()];
    let mut reduction = vec!["Error reduction".to_string()];
    for g in groups {
        total.push(g.before.categories.total().to_string());
        total.push(g.after.categories.total().to_string());
        reduction.push(reduction_cell(g.reduction));
        reduction.push(String::new());
    }
    rows.push(total);
    rows.push(reduction);
    for class in SampleClass::ALL {
        let mut row = vec![class.label().to_string()];
        for g in groups {
            row.push(class_cell(&g.before, class));
            row.push(class_cell(&g.after, class));
        }
        rows.push(row);
    }
    let mut samples = vec!["Samples".to_string()];
    for g in groups {
        samples.push(g.before.samples.to_string());
        samples.push(g.after.samples.to_string());
    }
    rows.push(samples);
    render_grid(&rows)
}

fn render_by_problem(summary: &Summary) -> String {
    let mut out = String::new();
    let mut i = 0;
    while i < summary.groups.len() {
        let model = &summary.groups[i].model_id;
        let mut rows = vec![[
            "Problem type",
            "Before no error",
            "Before omissions",
            "Before errors",
            "After no error",
            "After omissions",
            "After errors",
        ]
        .map(String::from)
        .to_vec()];
        while i < summary.groups.len() && &summary.groups[i].model_id == model {
            let g = &summary.groups[i];
            let mut row = vec![g.problem_type.map_or("Unlabelled", Problem::label).to_string()];
            for phase in [&g.before, &g.after] {
                for class in SampleClass::ALL {
                    row.push(phase.classes.get(class).to_string());
                }
            }
            rows.push(row);
            i += 1;
        }
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("{model}\n"));
        out.push_str(&render_grid(&rows));
    }
    out
}

impl Summary {
    /// Plain-text tables: category counts, totals, reduction and sample
    /// classes per model, or class stacks per problem type.
    pub fn render_plain(&self) -> String {
        match self.grouping {
            Grouping::ByModelPhase => render_by_model(self),
            Grouping::ByProblemType => render_by_problem(self),
        }
    }

    pub fn group(&self, model_id: &str, problem_type: Option<Problem>) -> Option<&GroupSummary> {
        self.groups
            .iter()
            .find(|g| g.model_id == model_id && g.problem_type == problem_type)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::ErrorSpan;

    fn s(model: &str, phase: Phase, problem: Option<Problem>, errors: usize, omission: bool) -> AnnotatedSample {
        let text = "x ".repeat(errors.max(1));
        AnnotatedSample {
            sample_id: format!("{model}-{errors}"),
            model_id: model.into(),
            phase,
            problem_type: problem,
            text,
            spans: (0..errors)
                .map(|i| ErrorSpan {
                    start: 2 * i,
                    end: 2 * i + 1,
                    category: ErrorCategory::Word,
                    note: None,
                })
                .collect(),
            omission,
        }
    }

    #[test]
    fn groups_follow_corpus_order() {
        let corpus = vec![
            s("T5", Phase::Before, None, 4, false),
            s("L2", Phase::Before, None, 2, false),
            s("T5", Phase::After, None, 0, true),
            s("L2", Phase::After, None, 0, false),
            s("T5", Phase::After, None, 0, false),
        ];
        let sum = summarize(&corpus, Grouping::ByModelPhase);
        let names: Vec<_> = sum.groups.iter().map(|g| g.model_id.as_str()).collect();
        assert_eq!(names, ["T5", "L2"]);
        assert_eq!(sum.groups[0].reduction, Some(100));
        assert_eq!(sum.groups[0].after.classes.get(SampleClass::Omissions), 1);
        let text = sum.render_plain();
        assert!(text.contains("100%"));
        assert!(text.contains("1 (50%)"));
        let only_before = summarize(&corpus[..2], Grouping::ByModelPhase);
        assert_eq!(only_before.groups[0].reduction, None);
        assert!(text.lines().next().unwrap().starts_with("Category"));
    }

    #[test]
    fn problem_groups_put_unlabelled_last() {
        let corpus = vec![
            s("T5", Phase::Before, None, 1, false),
            s("T5", Phase::Before, Some(Problem::LongerTable), 1, false),
            s("T5", Phase::Before, Some(Problem::SingleRecordNonAtomic), 1, false),
        ];
        let sum = summarize(&corpus, Grouping::ByProblemType);
        let keys: Vec<_> = sum.groups.iter().map(|g| g.problem_type).collect();
        assert_eq!(keys, [Some(Problem::SingleRecordNonAtomic), Some(Problem::LongerTable), None]);
        assert!(sum.render_plain().contains("Unlabelled"));
    }

    #[test]
    fn empty_corpus() {
        let sum = summarize(&[], Grouping::ByModelPhase);
        assert!(sum.groups.is_empty());
        assert_eq!(sum.render_plain().lines().count(), 15);
    }
}
