//! Analyzed-corpus files: tokens with candidate parses, grouped into
//! sentences.
//!
//! ```text
//! # comment
//! oysa<TAB>[[CAT CONN][ROOT oysa]]<TAB>[[CAT NOUN][ROOT oya]...]
//! koşa koşa<TAB>[[CAT VERB]...]<TAB># origin=collocation
//!
//! next<TAB>...
//! ```
//!
//! A blank line ends a sentence. A token line without parses is routed
//! through the unknown-word guesser.

mod collocation;
mod projection;

pub use collocation::{group_collocations, CollocationPattern, DupPredicate, TemplatePart};
pub use projection::ProjectedCorpus;

use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::featstruct::{hierarchize, linearize, parse_linear, FeatureStructure, CAT, ROOT};
use crate::unknown::SuffixLexicon;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Origin {
    #[default]
    Analyzer,
    Unknown,
    Collocation,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Analyzer => "analyzer",
            Origin::Unknown => "unknown",
            Origin::Collocation => "collocation",
        }
    }

    pub fn from_name(s: &str) -> Option<Origin> {
        match s {
            "analyzer" => Some(Origin::Analyzer),
            "unknown" => Some(Origin::Unknown),
            "collocation" => Some(Origin::Collocation),
            _ => None,
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A surface form with its remaining candidate parses.
///
/// `line` records where the token was read from and takes no part in
/// equality.
#[derive(Clone, Debug)]
pub struct Token {
    pub surface: String,
    pub parses: Vec<FeatureStructure>,
    pub origin: Origin,
    pub line: usize,
}

impl Token {
    /// Builds a token, dropping structurally duplicate parses.
    pub fn new(surface: impl Into<String>, parses: Vec<FeatureStructure>) -> Self {
        let mut token = Token {
            surface: surface.into(),
            parses: Vec::with_capacity(parses.len()),
            origin: Origin::Analyzer,
            line: 0,
        };
        for p in parses {
            if !token.parses.contains(&p) {
                token.parses.push(p);
            }
        }
        token
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn is_unambiguous(&self) -> bool {
        self.parses.len() == 1
    }

    pub fn unknown(surface: &str) -> Self {
        let parse = FeatureStructure::new().with(CAT, "UNKNOWN").with(ROOT, surface);
        Token::new(surface, vec![parse]).with_origin(Origin::Unknown)
    }
}

impl PartialEq for Token {
    fn eq(&self, other: &Self) -> bool {
        self.surface == other.surface && self.parses == other.parses && self.origin == other.origin
    }
}

impl Eq for Token {}

/// What sits at a window offset from a token.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Neighbor<'a> {
    Token(&'a Token),
    /// The first position past either end of the sentence.
    Boundary,
    /// Any position further out.
    Beyond,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn neighbor(&self, i: usize, offset: isize) -> Neighbor<'_> {
        let j = i as isize + offset;
        let n = self.tokens.len() as isize;
        if (0..n).contains(&j) {
            Neighbor::Token(&self.tokens[j as usize])
        } else if j == -1 || j == n {
            Neighbor::Boundary
        } else {
            Neighbor::Beyond
        }
    }

    pub fn parse_count(&self) -> usize {
        self.tokens.iter().map(|t| t.parses.len()).sum()
    }
}

/// Equality compares sentences only; `source` is informational.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub sentences: Vec<Sentence>,
    pub source: String,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.sentences == other.sentences
    }
}

impl Eq for Corpus {}

impl Corpus {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Corpus {
            sentences,
            source: String::new(),
        }
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn parse_count(&self) -> usize {
        self.sentences.iter().map(Sentence::parse_count).sum()
    }

    pub fn ambiguity(&self) -> f64 {
        let tokens = self.token_count();
        if tokens == 0 {
            0.0
        } else {
            self.parse_count() as f64 / tokens as f64
        }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }
}

/// A decoded corpus together with the warnings raised while reading it.
#[derive(Clone, Debug, Default)]
pub struct Decoded {
    pub corpus: Corpus,
    pub warnings: Vec<String>,
}

/// Reads the corpus format. Zero-parse tokens go through `lexicon` when one
/// is given; otherwise they receive a single `[CAT UNKNOWN][ROOT surface]`
/// parse and a warning.
pub fn decode_corpus(text: &str, source: &str, lexicon: Option<&SuffixLexicon>) -> Result<Decoded> {
    let mut out = Decoded {
        corpus: Corpus {
            sentences: Vec::new(),
            source: source.to_string(),
        },
        warnings: Vec::new(),
    };
    let mut current = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                out.corpus.sentences.push(Sentence::new(std::mem::take(&mut current)));
            }
            continue;
        }
        if line.trim_start().starts_with('#') {
            continue;
        }
        let token = decode_line(line, source, line_no, lexicon, &mut out.warnings)?;
        current.push(token);
    }
    if !current.is_empty() {
        out.corpus.sentences.push(Sentence::new(current));
    }
    for w in &out.warnings {
        log::warn!("{w}");
    }
    Ok(out)
}

fn decode_line(
    line: &str,
    source: &str,
    line_no: usize,
    lexicon: Option<&SuffixLexicon>,
    warnings: &mut Vec<String>,
) -> Result<Token> {
    let mut fields = line.split('\t');
    let surface = fields.next().unwrap_or("").trim();
    if surface.is_empty() {
        return Err(Error::at(
            Error::Format("token line has no surface form".into()),
            source,
            line_no,
        ));
    }
    let mut parses = Vec::new();
    let mut origin = Origin::Analyzer;
    let mut fields = fields.peekable();
    while let Some(field) = fields.next() {
        let field = field.trim();
        if field.is_empty() {
            continue;
        }
        if let Some(comment) = field.strip_prefix('#') {
            if fields.peek().is_some() {
                return Err(Error::at(
                    Error::Format("a '#' field must be the last on a token line".into()),
                    source,
                    line_no,
                ));
            }
            origin = parse_origin(comment).map_err(|e| Error::at(e, source, line_no))?;
            break;
        }
        let parse = parse_linear(field)
            .and_then(|p| hierarchize(&p))
            .map_err(|e| Error::at(e, source, line_no))?;
        parses.push(parse);
    }
    let before = parses.len();
    let mut token = Token::new(surface, parses).with_origin(origin);
    if token.parses.len() < before {
        warnings.push(format!("{source}:{line_no}: duplicate parses of '{surface}' merged"));
    }
    if token.parses.is_empty() {
        token = match lexicon {
            Some(lex) => Token::new(surface, lex.guess(surface)).with_origin(Origin::Unknown),
            None => {
                warnings.push(format!(
                    "{source}:{line_no}: '{surface}' has no parses and no suffix lexicon is loaded"
                ));
                Token::unknown(surface)
            }
        };
    }
    token.line = line_no;
    Ok(token)
}

fn parse_origin(comment: &str) -> Result<Origin> {
    let comment = comment.trim();
    match comment.strip_prefix("origin=") {
        Some(name) => Origin::from_name(name.trim())
            .ok_or_else(|| Error::Format(format!("unknown token origin '{}'", name.trim()))),
        None => Err(Error::Format(format!("unrecognized token annotation '#{comment}'"))),
    }
}

/// Writes the corpus format; non-analyzer tokens carry an origin annotation.
pub fn encode_corpus(c: &Corpus) -> String {
    let mut out = String::new();
    for (i, sentence) in c.sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for token in &sentence.tokens {
            out.push_str(&token.surface);
            for p in &token.parses {
                let _ = write!(out, "\t{}", linearize(p));
            }
            if token.origin != Origin::Analyzer {
                let _ = write!(out, "\t# origin={}", token.origin);
            }
            out.push('\n');
        }
    }
    out
}
