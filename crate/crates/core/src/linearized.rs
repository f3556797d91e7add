//! The tagged single-line form that table-to-text models consume:
//!
//! ```text
//! <page_title> … </page_title> [<section_title> … </section_title>]
//! <table> (<cell> value (<col_header> … </col_header> | <row_header> … </row_header>)* </cell>)* </table>
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearizedCell {
    pub value: String,
    #[serde(default)]
    pub col_headers: Vec<String>,
    #[serde(default)]
    pub row_headers: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearizedInput {
    pub page_title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section_title: Option<String>,
    pub cells: Vec<LinearizedCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    PageTitle,
    SectionTitle,
    Table,
    Cell,
    ColHeader,
    RowHeader,
}

impl Tag {
    pub fn name(self) -> &'static str {
        match self {
            Tag::PageTitle => "page_title",
            Tag::SectionTitle => "section_title",
            Tag::Table => "table",
            Tag::Cell => "cell",
            Tag::ColHeader => "col_header",
            Tag::RowHeader => "row_header",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "page_title" => Tag::PageTitle,
            "section_title" => Tag::SectionTitle,
            "table" => Tag::Table,
            "cell" => Tag::Cell,
            "col_header" => Tag::ColHeader,
            "row_header" => Tag::RowHeader,
            _ => return None,
        })
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected </{}>, found {found}", expected.name())]
    UnbalancedTags { expected: Tag, found: String },
    #[error("unknown tag <{0}>")]
    UnknownTag(String),
    #[error("{0} outside of <cell>")]
    HeaderOutsideCell(Tag),
    #[error("unexpected {0}")]
    UnexpectedTag(String),
    #[error("text outside of a value position")]
    StrayText,
    #[error("empty header")]
    EmptyHeader,
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token<'a> {
    Open(Tag),
    Close(Tag),
    Text(&'a str),
}

#[derive(Debug, Clone, Copy)]
struct Spanned<'a> {
    token: Token<'a>,
    offset: usize,
}

/// Recognizes `<name>` / `</name>` at the start of `s`, returning the tag
/// name, whether it closes, and its byte length. Anything else starting with
/// `<` is ordinary text.
fn scan_tag(s: &str) -> Option<(&str, bool, usize)> {
    let bytes = s.as_bytes();
    let mut i = 1;
    let closing = bytes.get(1) == Some(&b'/');
    if closing {
        i += 1;
    }
    let start = i;
    while i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
        i += 1;
    }
    if i == start || bytes.get(i) != Some(&b'>') {
        return None;
    }
    Some((&s[start..i], closing, i + 1))
}

fn tokenize(input: &str) -> Result<Vec<Spanned<'_>>, ParseError> {
    let mut tokens = Vec::new();
    let mut text_start = 0;
    let mut pos = 0;

    fn flush<'a>(tokens: &mut Vec<Spanned<'a>>, input: &'a str, from: usize, to: usize) {
        let raw = &input[from..to];
        let trimmed = raw.trim();
        if !trimmed.is_empty() {
            let lead = raw.len() - raw.trim_start().len();
            tokens.push(Spanned {
                token: Token::Text(trimmed),
                offset: from + lead,
            });
        }
    }

    while let Some(found) = input[pos..].find('<') {
        let at = pos + found;
        match scan_tag(&input[at..]) {
            Some((name, closing, len)) => {
                let tag = Tag::from_name(name).ok_or_else(|| ParseError {
                    offset: at,
                    kind: ParseErrorKind::UnknownTag(name.to_string()),
                })?;
                flush(&mut tokens, input, text_start, at);
                tokens.push(Spanned {
                    token: if closing { Token::Close(tag) } else { Token::Open(tag) },
                    offset: at,
                });
                pos = at + len;
                text_start = pos;
            }
            None => pos = at + 1,
        }
    }
    flush(&mut tokens, input, text_start, input.len());
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Spanned<'a>>,
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<Spanned<'a>> {
        self.tokens.get(self.pos).copied()
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn describe(t: Option<Spanned<'_>>) -> String {
        match t.map(|t| t.token) {
            None => "end of input".to_string(),
            Some(Token::Open(tag)) => tag.to_string(),
            Some(Token::Close(tag)) => format!("</{}>", tag.name()),
            Some(Token::Text(_)) => "text".to_string(),
        }
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind,
        }
    }

    fn unexpected(&self) -> ParseError {
        let next = self.peek();
        let kind = match next.map(|t| t.token) {
            Some(Token::Text(_)) => ParseErrorKind::StrayText,
            Some(Token::Open(tag @ (Tag::ColHeader | Tag::RowHeader))) => {
                ParseErrorKind::HeaderOutsideCell(tag)
            }
            _ => ParseErrorKind::UnexpectedTag(Self::describe(next)),
        };
        self.err(kind)
    }

    fn eat_open(&mut self, tag: Tag) -> bool {
        if matches!(self.peek().map(|t| t.token), Some(Token::Open(t)) if t == tag) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_open(&mut self, tag: Tag) -> Result<(), ParseError> {
        if self.eat_open(tag) {
            Ok(())
        } else {
            Err(self.unexpected())
        }
    }

    fn expect_close(&mut self, tag: Tag) -> Result<(), ParseError> {
        match self.peek().map(|t| t.token) {
            Some(Token::Close(t)) if t == tag => {
                self.pos += 1;
                Ok(())
            }
            Some(Token::Text(_)) => Err(self.err(ParseErrorKind::StrayText)),
            _ => Err(self.err(ParseErrorKind::UnbalancedTags {
                expected: tag,
                found: Self::describe(self.peek()),
            })),
        }
    }

    fn text(&mut self) -> &'a str {
        match self.peek().map(|t| t.token) {
            Some(Token::Text(s)) => {
                self.pos += 1;
                s
            }
            _ => "",
        }
    }

    fn header(&mut self, tag: Tag) -> Result<String, ParseError> {
        let offset = self.offset();
        self.pos += 1;
        let value = self.text();
        if value.is_empty() {
            return Err(ParseError {
                offset,
                kind: ParseErrorKind::EmptyHeader,
            });
        }
        self.expect_close(tag)?;
        Ok(value.to_string())
    }

    fn cell(&mut self) -> Result<LinearizedCell, ParseError> {
        let mut cell = LinearizedCell {
            value: self.text().to_string(),
            ..Default::default()
        };
        loop {
            match self.peek().map(|t| t.token) {
                Some(Token::Open(Tag::ColHeader)) => {
                    cell.col_headers.push(self.header(Tag::ColHeader)?)
                }
                Some(Token::Open(Tag::RowHeader)) => {
                    cell.row_headers.push(self.header(Tag::RowHeader)?)
                }
                _ => {
                    self.expect_close(Tag::Cell)?;
                    return Ok(cell);
                }
            }
        }
    }

    fn document(&mut self) -> Result<LinearizedInput, ParseError> {
        self.expect_open(Tag::PageTitle)?;
        let page_title = self.text().to_string();
        self.expect_close(Tag::PageTitle)?;

        let section_title = if self.eat_open(Tag::SectionTitle) {
            let s = self.text().to_string();
            self.expect_close(Tag::SectionTitle)?;
            Some(s)
        } else {
            None
        };

        self.expect_open(Tag::Table)?;
        let mut cells = Vec::new();
        loop {
            if self.eat_open(Tag::Cell) {
                cells.push(self.cell()?);
                continue;
            }
            match self.peek().map(|t| t.token) {
                Some(Token::Close(Tag::Table)) => {
                    self.pos += 1;
                    break;
                }
                None => {
                    return Err(self.err(ParseErrorKind::UnbalancedTags {
                        expected: Tag::Table,
                        found: "end of input".into(),
                    }))
                }
                _ => return Err(self.unexpected()),
            }
        }
        if self.peek().is_some() {
            return Err(self.unexpected());
        }
        Ok(LinearizedInput {
            page_title,
            section_title,
            cells,
        })
    }
}

/// Parses a linearized table string. Never panics; malformed input yields a
/// `ParseError` carrying the byte offset of the offending token.
pub fn parse_linearized(text: &str) -> Result<LinearizedInput, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    parser.document()
}

/// Byte-level entry point; invalid UTF-8 is reported at the first bad byte.
pub fn parse_linearized_bytes(bytes: &[u8]) -> Result<LinearizedInput, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(s) => parse_linearized(s),
        Err(e) => Err(ParseError {
            offset: e.valid_up_to(),
            kind: ParseErrorKind::InvalidUtf8,
        }),
    }
}

pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Renders the model-facing string: tags in grammar order, single spaces,
/// values trimmed with inner whitespace collapsed. Column headers precede
/// row headers inside each cell.
pub fn render_linearized(input: &LinearizedInput) -> String {
    let mut out: Vec<String> = Vec::new();
    let wrap = |out: &mut Vec<String>, tag: Tag, body: &str| {
        out.push(format!("<{}>", tag.name()));
        let body = normalize_whitespace(body);
        if !body.is_empty() {
            out.push(body);
        }
        out.push(format!("</{}>", tag.name()));
    };

    wrap(&mut out, Tag::PageTitle, &input.page_title);
    if let Some(section) = &input.section_title {
        wrap(&mut out, Tag::SectionTitle, section);
    }
    out.push("<table>".into());
    for cell in &input.cells {
        out.push("<cell>".into());
        let value = normalize_whitespace(&cell.value);
        if !value.is_empty() {
            out.push(value);
        }
        for h in &cell.col_headers {
            wrap(&mut out, Tag::ColHeader, h);
        }
        for h in &cell.row_headers {
            wrap(&mut out, Tag::RowHeader, h);
        }
        out.push("</cell>".into());
    }
    out.push("</table>".into());
    out.join(" ")
}

/// The token sequence of a linearized string with text whitespace
/// normalized; two strings are token-identical when these match.
pub fn token_stream(text: &str) -> Result<Vec<String>, ParseError> {
    Ok(tokenize(text)?
        .into_iter()
        .map(|t| match t.token {
            Token::Open(tag) => format!("<{}>", tag.name()),
            Token::Close(tag) => format!("</{}>", tag.name()),
            Token::Text(s) => normalize_whitespace(s),
        })
        .collect())
}

/// Normalizes every text value of an input the way rendering does.
pub fn canonicalize(input: &LinearizedInput) -> LinearizedInput {
    LinearizedInput {
        page_title: normalize_whitespace(&input.page_title),
        section_title: input.section_title.as_deref().map(normalize_whitespace),
        cells: input
            .cells
            .iter()
            .map(|c| LinearizedCell {
                value: normalize_whitespace(&c.value),
                col_headers: c.col_headers.iter().map(|h| normalize_whitespace(h)).collect(),
                row_headers: c.row_headers.iter().map(|h| normalize_whitespace(h)).collect(),
            })
            .collect(),
    }
}
