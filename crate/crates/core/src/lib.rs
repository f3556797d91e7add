//! Linting, correction and linearization of Wikipedia-style tables for
//! table-to-text generation, plus error-annotation statistics over model
//! outputs.

pub mod annotation;
pub mod correction;
pub mod diagnostics;
pub mod error;
pub mod extract;
pub mod linearized;
pub mod prompts;
pub mod rules;
pub mod table;

pub use error::{Error, Result};
pub use extract::extract_highlighted;
pub use linearized::{
    parse_linearized, parse_linearized_bytes, render_linearized, LinearizedCell, LinearizedInput,
    ParseError,
};
pub use table::{parse_source_table, validate, Cell, CellRef, SourceTable, ValidationReport};
pub use annotation::{
    classify_sample, category_counts, error_reduction, fleiss_kappa, parse_corpus, summarize,
    validate_annotations, AnnotatedSample, ErrorCategory, ErrorSpan, RatingMatrix, SampleClass,
};
pub use correction::{apply_edits, correct, CorrectionResult, Edit};
pub use diagnostics::{lint, DiagnosticReport, Problem};
pub use prompts::{build_prompt, PromptTemplate, TemplateSet};
pub use rules::Rules;
