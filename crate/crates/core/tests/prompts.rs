mod common;

use proptest::prelude::*;

use tablint::linearized::parse_linearized;
use tablint::prompts::{PromptTemplate, TemplateId, PLACEHOLDER};
use tablint::{build_prompt, render_linearized, Error, LinearizedCell, LinearizedInput};

const NORTON: &str = "<page_title> 1996 United States House of Representatives election </page_title> <table> \
     <cell> Eleanor Holmes Norton (inc.) <col_header> Candidate </col_header> </cell> \
     <cell> Republican <col_header> Party </col_header> </cell> \
     <cell> Sprague Simonds <col_header> Candidate </col_header> </cell> \
     <cell> 7.54 <col_header> % </col_header> </cell> </table>";

#[test]
fn generic_summary_wraps_the_linearization() {
    let input = parse_linearized(NORTON).unwrap();
    let p = build_prompt(&PromptTemplate::generic_summary(), &input);
    assert!(p.starts_with(
        "The task is to summarize the information from the given input table data into a single coherent sentence."
    ));
    assert!(p.ends_with(NORTON));
}

#[test]
fn election_fields_on_empty_table() {
    let input = LinearizedInput {
        page_title: "Empty".into(),
        section_title: None,
        cells: Vec::new(),
    };
    let p = build_prompt(&PromptTemplate::election_fields(), &input);
    assert!(p.starts_with("Given the input table data, the task is to:"));
    assert!(p.ends_with("Input table data: <page_title> Empty </page_title> <table> </table>"));
    assert!(!p.contains(PLACEHOLDER));
}

#[test]
fn placeholder_count_is_checked() {
    let id = || TemplateId::User("t".into());
    assert!(matches!(PromptTemplate::new(id(), "no slot"), Err(Error::MissingPlaceholder(_))));
    let twice = format!("{PLACEHOLDER} and {PLACEHOLDER}");
    assert!(matches!(PromptTemplate::new(id(), twice), Err(Error::DuplicatePlaceholder(_))));
}

#[test]
fn corpus_prompts_embed_each_line() {
    let t = PromptTemplate::election_fields();
    for line in common::linearized_corpus() {
        let p = build_prompt(&t, &parse_linearized(&line).unwrap());
        assert!(p.contains(&line));
        assert_eq!(p.len(), t.body().len() - PLACEHOLDER.len() + line.len());
    }
}

fn input() -> impl Strategy<Value = LinearizedInput> {
    let text = "[A-Za-z0-9%.]{1,8}( [A-Za-z0-9%.]{1,8}){0,2}";
    (
        text,
        prop::option::of(text),
        prop::collection::vec((text, prop::collection::vec(text, 0..2)), 0..4),
    )
        .prop_map(|(page_title, section_title, cells)| LinearizedInput {
            page_title,
            section_title,
            cells: cells
                .into_iter()
                .map(|(value, col_headers)| LinearizedCell {
                    value,
                    col_headers,
                    row_headers: Vec::new(),
                })
                .collect(),
        })
}

fn template() -> impl Strategy<Value = PromptTemplate> {
    prop_oneof![
        Just(PromptTemplate::election_fields()),
        Just(PromptTemplate::generic_summary()),
        ("[a-z ]{0,20}", "[a-z ]{0,20}")
            .prop_map(|(a, b)| PromptTemplate::new(TemplateId::User("u".into()), format!("{a}{PLACEHOLDER}{b}")).unwrap()),
    ]
}

proptest! {
    #[test]
    fn length_follows_from_parts(t in template(), x in input()) {
        let lin = render_linearized(&x);
        let p = build_prompt(&t, &x);
        prop_assert_eq!(p.len(), t.body().len() - PLACEHOLDER.len() + lin.len());
    }

    #[test]
    fn linearization_is_a_contiguous_substring(t in template(), x in input()) {
        let lin = render_linearized(&x);
        let p = build_prompt(&t, &x);
        let at = t.body().find(PLACEHOLDER).unwrap();
        prop_assert_eq!(&p[at..at + lin.len()], lin.as_str());
        prop_assert_eq!(&p[..at], &t.body()[..at]);
        prop_assert_eq!(&p[at + lin.len()..], &t.body()[at + PLACEHOLDER.len()..]);
    }

    #[test]
    fn distinct_inputs_give_distinct_prompts(t in template(), x in input(), y in input()) {
        let same_lin = render_linearized(&x) == render_linearized(&y);
        prop_assert_eq!(build_prompt(&t, &x) == build_prompt(&t, &y), same_lin);
    }
}
