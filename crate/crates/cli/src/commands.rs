//! Subcommand implementations. Records are processed in parallel and
//! written back in input order.

use rayon::prelude::*;
use serde::Serialize;

use tablint::annotation::{
    confusion_matrix, fleiss_kappa, parse_corpus, summarize, ConfusionMatrix, Grouping, LabeledItem,
    RatingMatrix,
};
use tablint::diagnostics::{lint, DiagnosticReport, Location};
use tablint::linearized::{canonicalize, parse_linearized, parse_linearized_bytes, render_linearized};
use tablint::prompts::{build_prompt, TemplateSet};
use tablint::rules::Rules;
use tablint::{correct, extract_highlighted, parse_source_table, CorrectionResult, Error, LinearizedInput};

use crate::io::{read_lines, read_text, CliError, Line, Output};
use crate::{Cli, Command, Format, GroupBy, Status};

/// Exit status for a library error: bad data is a validation failure,
/// bad configuration or schema is fatal.
pub fn status_of(e: &Error) -> Status {
    match e {
        Error::InvalidTable(_)
        | Error::Parse(_)
        | Error::ArityMismatch { .. }
        | Error::RatingMatrix(_)
        | Error::DegenerateAgreement
        | Error::UnknownTemplate(_)
        | Error::DivisionByZero
        | Error::Replay { .. } => Status::Invalid,
        Error::Schema { .. }
        | Error::Rules(_)
        | Error::UnsupportedVersion(_)
        | Error::MissingPlaceholder(_)
        | Error::DuplicatePlaceholder(_)
        | Error::Annotation(_) => Status::Fatal,
    }
}

/// Result of one input record.
enum Outcome<T> {
    Done(T),
    Failed { status: Status, message: String },
}

impl<T> Outcome<T> {
    fn from_error(e: Error) -> Self {
        Outcome::Failed {
            status: status_of(&e),
            message: e.to_string(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Outcome::Failed {
            status: Status::Invalid,
            message: message.into(),
        }
    }
}

#[derive(Serialize)]
struct FailedRecord<'a> {
    line: usize,
    error: &'a str,
}

/// Writes records in order: successes through `emit`, failures as error
/// records (or a blank line in plain format) with a message on stderr.
fn emit_all<T>(
    out: &mut Output,
    format: Format,
    results: Vec<(usize, Outcome<T>)>,
    mut emit: impl FnMut(&mut Output, usize, &T) -> Result<Status, CliError>,
) -> Result<Status, CliError> {
    let mut status = Status::Ok;
    for (line, outcome) in results {
        let s = match outcome {
            Outcome::Done(value) => emit(out, line, &value)?,
            Outcome::Failed { status, message } => {
                eprintln!("line {line}: {message}");
                match format {
                    Format::Structured => out.json(&FailedRecord { line, error: &message })?,
                    Format::Plain => out.line("")?,
                }
                status
            }
        };
        status = status.max(s);
    }
    Ok(status)
}

fn par_map<T: Send>(lines: &[Line], f: impl Fn(&Line) -> Outcome<T> + Sync) -> Vec<(usize, Outcome<T>)> {
    lines.par_iter().map(|l| (l.number, f(l))).collect()
}

fn table_of(line: &Line) -> Result<tablint::SourceTable, Outcome<()>> {
    let text = line.text().map_err(|m| Outcome::Failed {
        status: Status::Fatal,
        message: m,
    })?;
    parse_source_table(text).map_err(Outcome::from_error)
}

fn retag<T>(o: Outcome<()>) -> Outcome<T> {
    match o {
        Outcome::Done(()) => unreachable!("only failures are retagged"),
        Outcome::Failed { status, message } => Outcome::Failed { status, message },
    }
}

pub fn dispatch(cli: &Cli, rules: &Rules, out: &mut Output) -> Result<Status, CliError> {
    match &cli.command {
        Command::Parse { input } => cmd_parse(&read_lines(input)?, cli.format, out),
        Command::Lint { input } => cmd_lint(&read_lines(input)?, rules, cli.format, out),
        Command::Fix { input } => cmd_fix(&read_lines(input)?, rules, cli.format, out),
        Command::Stats { input, group_by } => cmd_stats(&read_text(input)?, *group_by, cli.format, out),
        Command::Kappa { input, raters } => cmd_kappa(&read_text(input)?, *raters, cli.format, out),
        Command::Prompt {
            input,
            template,
            record,
        } => cmd_prompt(&read_lines(input)?, rules, template, *record, cli.format, out),
    }
    .or_else(|e| match e {
        CliError::Core(core) => {
            eprintln!("tablint: {core}");
            Ok(status_of(&core))
        }
        other => Err(other),
    })
}

fn cmd_parse(lines: &[Line], format: Format, out: &mut Output) -> Result<Status, CliError> {
    let results = par_map(lines, |line| {
        let parsed = match parse_linearized_bytes(&line.bytes) {
            Ok(p) => p,
            Err(e) => return Outcome::invalid(e.to_string()),
        };
        let rendered = render_linearized(&parsed);
        match parse_linearized(&rendered) {
            Ok(again) if again == canonicalize(&parsed) && render_linearized(&again) == rendered => {
                Outcome::Done((again, rendered))
            }
            Ok(_) => Outcome::invalid("round-trip mismatch"),
            Err(e) => Outcome::invalid(format!("rendered form does not parse: {e}")),
        }
    });
    emit_all(out, format, results, |out, _, (parsed, rendered)| {
        match format {
            Format::Structured => out.json(parsed)?,
            Format::Plain => out.line(rendered)?,
        }
        Ok(Status::Ok)
    })
}

fn location(loc: &Location) -> String {
    match loc {
        Location::Table => "table".into(),
        Location::Cell(at) => format!("r{}c{}", at.row, at.col),
    }
}

fn cmd_lint(lines: &[Line], rules: &Rules, format: Format, out: &mut Output) -> Result<Status, CliError> {
    let results = par_map(lines, |line| match table_of(line) {
        Ok(table) => lint(&table, rules).map_or_else(Outcome::from_error, Outcome::Done),
        Err(o) => retag(o),
    });
    emit_all(out, format, results, |out, line, report: &DiagnosticReport| {
        match format {
            Format::Structured => out.json(report)?,
            Format::Plain => {
                let id = report.table_id.as_deref().unwrap_or("-");
                for d in &report.diagnostics {
                    out.line(&format!(
                        "{line}\t{id}\t{}\t{}\t{}",
                        d.problem.label(),
                        location(&d.location),
                        d.message
                    ))?;
                }
            }
        }
        Ok(if report.diagnostics.is_empty() { Status::Ok } else { Status::Findings })
    })
}

#[derive(Serialize)]
struct FixRecord<'a> {
    line: usize,
    #[serde(flatten)]
    result: &'a CorrectionResult,
    linearized: &'a str,
}

fn cmd_fix(lines: &[Line], rules: &Rules, format: Format, out: &mut Output) -> Result<Status, CliError> {
    let results = par_map(lines, |line| {
        let table = match table_of(line) {
            Ok(t) => t,
            Err(o) => return retag(o),
        };
        let result = match correct(&table, &table.page_title, rules) {
            Ok(r) => r,
            Err(e) => return Outcome::from_error(e),
        };
        match extract_highlighted(&result.table) {
            Ok(input) => Outcome::Done((result, render_linearized(&input))),
            Err(e) => Outcome::from_error(e),
        }
    });
    emit_all(out, format, results, |out, line, (result, linearized)| {
        match format {
            Format::Structured => out.json(&FixRecord {
                line,
                result,
                linearized,
            })?,
            Format::Plain => out.line(linearized)?,
        }
        Ok(Status::Ok)
    })
}

fn cmd_stats(text: &str, group_by: GroupBy, format: Format, out: &mut Output) -> Result<Status, CliError> {
    let loaded = parse_corpus(text)?;
    for v in &loaded.violations {
        eprintln!("{v}");
    }
    let grouping = match group_by {
        GroupBy::ModelPhase => Grouping::ByModelPhase,
        GroupBy::ProblemType => Grouping::ByProblemType,
    };
    let summary = summarize(&loaded.corpus.samples, grouping);
    match format {
        Format::Structured => out.json(&summary)?,
        Format::Plain => out.text(&summary.render_plain())?,
    }
    Ok(if loaded.is_clean() { Status::Ok } else { Status::Invalid })
}

#[derive(Serialize)]
struct KappaReport {
    items: usize,
    raters: u32,
    categories: usize,
    observed_agreement: f64,
    expected_agreement: f64,
    kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    confusion: Option<ConfusionMatrix>,
}

fn parse_items(text: &str) -> Result<Vec<LabeledItem>, CliError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| CliError::Core(Error::Annotation(format!("line {}: {e}", i + 1))))
        })
        .collect()
}

fn cmd_kappa(text: &str, raters: Option<usize>, format: Format, out: &mut Output) -> Result<Status, CliError> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'));
    let (matrix, confusion) = if first.is_some_and(|l| l.starts_with('{')) {
        let items = parse_items(text)?;
        let n = raters.or_else(|| items.first().map(|i| i.labels.len())).unwrap_or(0);
        let confusion = confusion_matrix(&items, n)?;
        (RatingMatrix::from_items(&items, n)?, Some(confusion))
    } else {
        let matrix = RatingMatrix::parse(text)?;
        if let Some(n) = raters.filter(|&n| n != matrix.raters() as usize) {
            return Err(Error::RatingMatrix(format!("expected {n} raters, matrix has {}", matrix.raters())).into());
        }
        (matrix, None)
    };
    let report = KappaReport {
        items: matrix.items(),
        raters: matrix.raters(),
        categories: matrix.categories(),
        observed_agreement: matrix.observed_agreement(),
        expected_agreement: matrix.expected_agreement(),
        kappa: fleiss_kappa(&matrix)?,
        confusion,
    };
    match format {
        Format::Structured => out.json(&report)?,
        Format::Plain => {
            if let Some(c) = &report.confusion {
                out.text(&c.render_plain())?;
                out.line("")?;
            }
            out.line(&format!("items                {}", report.items))?;
            out.line(&format!("raters               {}", report.raters))?;
            out.line(&format!("observed agreement   {:.4}", report.observed_agreement))?;
            out.line(&format!("expected agreement   {:.4}", report.expected_agreement))?;
            out.line(&format!("Fleiss' kappa        {:.3}", report.kappa))?;
        }
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct PromptRecord<'a> {
    line: usize,
    template: String,
    prompt: &'a str,
}

/// A record is either a linearized string or, when it starts with `{`, a
/// source table whose highlighted cells are linearized first.
fn linearized_record(line: &Line) -> Result<LinearizedInput, Outcome<String>> {
    let text = line.text().map_err(Outcome::invalid)?;
    if text.trim_start().starts_with('{') {
        let table = parse_source_table(text).map_err(Outcome::from_error)?;
        extract_highlighted(&table).map_err(Outcome::from_error)
    } else {
        parse_linearized(text).map_err(|e| Outcome::from_error(e.into()))
    }
}

fn cmd_prompt(
    lines: &[Line],
    rules: &Rules,
    template: &str,
    record: Option<usize>,
    format: Format,
    out: &mut Output,
) -> Result<Status, CliError> {
    let templates = TemplateSet::from_rules(rules)?;
    let template = templates.require(template)?;
    let selected: Vec<Line> = match record {
        Some(n) => {
            let found: Vec<Line> = lines.iter().filter(|l| l.number == n).cloned().collect();
            if found.is_empty() {
                eprintln!("tablint: no record on line {n}");
                return Ok(Status::Invalid);
            }
            found
        }
        None => lines.to_vec(),
    };
    let results = par_map(&selected, |line| match linearized_record(line) {
        Ok(input) => Outcome::Done(build_prompt(template, &input)),
        Err(o) => o,
    });
    let id = template.id().to_string();
    emit_all(out, format, results, |out, line, prompt| {
        match format {
            Format::Structured => out.json(&PromptRecord {
                line,
                template: id.clone(),
                prompt,
            })?,
            Format::Plain => out.line(prompt)?,
        }
        Ok(Status::Ok)
    })
}
