//! Zero-shot prompt strings built around a linearized table.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearized::{render_linearized, LinearizedInput};
use crate::rules::Rules;

/// Marks where the linearized table goes in a template body.
pub const PLACEHOLDER: &str = "<Linearized table data>";

const ELECTION_FIELDS: &str = "Given the input table data, the task is to: \
(i). Identify the party name, candidate name, and the number of votes received by each candidate. \
(ii). Determine the winner based on the highest number of votes. \
Then, put together the gathered information from (i) and (ii) into a single coherent sentence. \
Input table data: <Linearized table data>";

const GENERIC_SUMMARY: &str = "The task is to summarize the information from the given input table data \
into a single coherent sentence. Use only the information mentioned in the input table data. \
Input table data is: <Linearized table data>";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    /// For corrected election tables with party, candidate and votes.
    ElectionFields,
    GenericSummary,
    User(String),
}

impl TemplateId {
    pub fn parse(id: &str) -> Self {
        match id {
            "election_fields" => TemplateId::ElectionFields,
            "generic_summary" => TemplateId::GenericSummary,
            other => TemplateId::User(other.to_string()),
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateId::ElectionFields => f.write_str("election_fields"),
            TemplateId::GenericSummary => f.write_str("generic_summary"),
            TemplateId::User(id) => f.write_str(id),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    id: TemplateId,
    body: String,
}

impl PromptTemplate {
    /// Fails unless the body holds exactly one placeholder.
    pub fn new(id: TemplateId, body: impl Into<String>) -> Result<Self> {
        let body = body.into();
        match body.matches(PLACEHOLDER).count() {
            0 => Err(Error::MissingPlaceholder(id.to_string())),
            1 => Ok(Self { id, body }),
            _ => Err(Error::DuplicatePlaceholder(id.to_string())),
        }
    }

    pub fn election_fields() -> Self {
        Self::new(TemplateId::ElectionFields, ELECTION_FIELDS).expect("built-in template is valid")
    }

    pub fn generic_summary() -> Self {
        Self::new(TemplateId::GenericSummary, GENERIC_SUMMARY).expect("built-in template is valid")
    }

    pub fn id(&self) -> &TemplateId {
        &self.id
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn fill(&self, linearized: &str) -> String {
        self.body.replacen(PLACEHOLDER, linearized, 1)
    }
}

pub fn build_prompt(template: &PromptTemplate, input: &LinearizedInput) -> String {
    template.fill(&render_linearized(input))
}

/// The built-in templates followed by those defined in a rules file.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    templates: Vec<PromptTemplate>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self {
            templates: vec![PromptTemplate::election_fields(), PromptTemplate::generic_summary()],
        }
    }
}

impl TemplateSet {
    pub fn from_rules(rules: &Rules) -> Result<Self> {
        let mut set = Self::default();
        for def in &rules.templates {
            let id = TemplateId::parse(&def.id);
            if set.get(&def.id).is_some() {
                return Err(Error::Rules(format!("template `{id}` is defined twice")));
            }
            set.templates.push(PromptTemplate::new(id, def.body.clone())?);
        }
        Ok(set)
    }

    pub fn get(&self, id: &str) -> Option<&PromptTemplate> {
        let id = TemplateId::parse(id);
        self.templates.iter().find(|t| t.id == id)
    }

    pub fn require(&self, id: &str) -> Result<&PromptTemplate> {
        self.get(id).ok_or_else(|| Error::UnknownTemplate(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &TemplateId> {
        self.templates.iter().map(|t| &t.id)
    }
}
