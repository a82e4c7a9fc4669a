//! The flat, analyzer-style parse notation and its conversion to
//! hierarchical structures.

use std::fmt;

use super::{FeatureStructure, Value, CAT, CONV, ROOT, STEM, SUFFIX};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry {
    Feature {
        name: String,
        value: String,
    },
    /// Category conversion: the derived level's category and the suffix label.
    Conv {
        cat: String,
        suffix: String,
    },
}

impl Entry {
    pub fn feature(name: &str, value: &str) -> Self {
        Entry::Feature {
            name: name.to_string(),
            value: value.to_string(),
        }
    }

    pub fn conv(cat: &str, suffix: &str) -> Self {
        Entry::Conv {
            cat: cat.to_string(),
            suffix: suffix.to_string(),
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Feature { name, value } => write!(f, "[{name} {value}]"),
            Entry::Conv { cat, suffix } => write!(f, "[{CONV} {cat} {suffix}]"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearParse {
    pub entries: Vec<Entry>,
}

impl LinearParse {
    pub fn new(entries: Vec<Entry>) -> Self {
        LinearParse { entries }
    }

    pub fn conv_count(&self) -> usize {
        self.entries.iter().filter(|e| matches!(e, Entry::Conv { .. })).count()
    }
}

impl fmt::Display for LinearParse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for e in &self.entries {
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}

#[derive(Debug, PartialEq)]
enum Tok<'a> {
    Open(usize),
    Close(usize),
    Word(usize, &'a str),
}

fn tokenize(text: &str) -> Vec<Tok<'_>> {
    let mut toks = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, ch)) = chars.next() {
        match ch {
            '[' => toks.push(Tok::Open(i)),
            ']' => toks.push(Tok::Close(i)),
            c if c.is_whitespace() => {}
            _ => {
                let mut end = i + ch.len_utf8();
                while let Some(&(j, c)) = chars.peek() {
                    if c == '[' || c == ']' || c.is_whitespace() {
                        break;
                    }
                    end = j + c.len_utf8();
                    chars.next();
                }
                toks.push(Tok::Word(i, &text[i..end]));
            }
        }
    }
    toks
}

fn is_feature_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

/// Parses `[[NAME VALUE][CONV CAT SUFFIX]...]`. Redundant outer bracket
/// pairs (`[[[CAT VERB]...]]`) are accepted.
pub fn parse_linear(text: &str) -> Result<LinearParse> {
    let toks = tokenize(text);
    let mut pos = 0;
    let mut entries = Vec::new();
    parse_list(&toks, &mut pos, &mut entries)?;
    if let Some(t) = toks.get(pos) {
        return Err(Error::Format(format!(
            "trailing input after parse at byte {}",
            tok_offset(t)
        )));
    }
    if entries.is_empty() {
        return Err(Error::Format("empty parse".into()));
    }
    Ok(LinearParse { entries })
}

fn tok_offset(t: &Tok<'_>) -> usize {
    match t {
        Tok::Open(i) | Tok::Close(i) | Tok::Word(i, _) => *i,
    }
}

fn parse_list(toks: &[Tok<'_>], pos: &mut usize, out: &mut Vec<Entry>) -> Result<()> {
    match toks.get(*pos) {
        Some(Tok::Open(_)) => *pos += 1,
        Some(t) => return Err(Error::Format(format!("expected '[' at byte {}", tok_offset(t)))),
        None => return Err(Error::Format("expected '[' but input ended".into())),
    }
    loop {
        match (toks.get(*pos), toks.get(*pos + 1)) {
            (Some(Tok::Close(_)), _) => {
                *pos += 1;
                return Ok(());
            }
            (Some(Tok::Open(_)), Some(Tok::Open(_))) => parse_list(toks, pos, out)?,
            (Some(Tok::Open(_)), Some(Tok::Word(..))) => out.push(parse_entry(toks, pos)?),
            (Some(t), _) => return Err(Error::Format(format!("expected an entry at byte {}", tok_offset(t)))),
            (None, _) => return Err(Error::Format("unbalanced '[' in parse".into())),
        }
    }
}

fn parse_entry(toks: &[Tok<'_>], pos: &mut usize) -> Result<Entry> {
    let start = tok_offset(&toks[*pos]);
    *pos += 1;
    let mut words = Vec::new();
    loop {
        match toks.get(*pos) {
            Some(Tok::Word(_, w)) => {
                words.push(*w);
                *pos += 1;
            }
            Some(Tok::Close(_)) => {
                *pos += 1;
                break;
            }
            Some(t) => {
                return Err(Error::Format(format!(
                    "unexpected '[' inside entry at byte {}",
                    tok_offset(t)
                )))
            }
            None => return Err(Error::Format(format!("unclosed entry at byte {start}"))),
        }
    }
    let name = words[0];
    if !is_feature_name(name) {
        return Err(Error::Format(format!("bad feature name '{name}' at byte {start}")));
    }
    if name == CONV {
        return match words[1..] {
            [cat, suffix] => Ok(Entry::conv(cat, suffix)),
            _ => Err(Error::Format(format!(
                "CONV entry at byte {start} needs a category and a suffix label"
            ))),
        };
    }
    match words[1..] {
        [value] => Ok(Entry::feature(name, value)),
        [] => Err(Error::Format(format!("entry '{name}' at byte {start} has no value"))),
        _ => Err(Error::Format(format!(
            "entry '{name}' at byte {start} has more than one value"
        ))),
    }
}

/// Builds the hierarchical structure: every `CONV` opens an outer level whose
/// `STEM` is everything built so far, so the features after the last
/// conversion end up at the top.
pub fn hierarchize(p: &LinearParse) -> Result<FeatureStructure> {
    let mut entries = p.entries.iter();
    match (entries.next(), entries.next()) {
        (Some(Entry::Feature { name: n1, .. }), Some(Entry::Feature { name: n2, .. })) if n1 == CAT && n2 == ROOT => {}
        _ => return Err(Error::Format("a parse must begin with CAT and ROOT entries".into())),
    }

    let mut level = FeatureStructure::new();
    // suffix label of the conversion that opened `level`, if any
    let mut opened_by: Option<(FeatureStructure, String)> = None;
    for entry in &p.entries {
        match entry {
            Entry::Feature { name, value } => {
                if name == STEM {
                    return Err(Error::Format("STEM cannot appear in a linear parse".into()));
                }
                if level.get(name).is_some() {
                    return Err(Error::Format(format!(
                        "feature {name} repeated within one derivation level"
                    )));
                }
                level.insert(name, value.as_str());
            }
            Entry::Conv { cat, suffix } => {
                let inner = close_level(level, opened_by.take())?;
                level = FeatureStructure::new().with(CAT, cat.as_str());
                opened_by = Some((inner, suffix.clone()));
            }
        }
    }
    close_level(level, opened_by)
}

fn close_level(mut level: FeatureStructure, opened_by: Option<(FeatureStructure, String)>) -> Result<FeatureStructure> {
    if let Some((stem, suffix)) = opened_by {
        if level.get(SUFFIX).is_some() {
            return Err(Error::Format(
                "SUFFIX is implied by CONV and cannot be given on a derived level".into(),
            ));
        }
        level.insert(STEM, stem);
        level.insert(SUFFIX, suffix.as_str());
    }
    Ok(level)
}

/// Inverse of [`hierarchize`].
pub fn linearize(fs: &FeatureStructure) -> LinearParse {
    let mut entries = Vec::new();
    push_level(fs, &mut entries);
    LinearParse { entries }
}

fn push_level(fs: &FeatureStructure, out: &mut Vec<Entry>) {
    match fs.stem() {
        Some(stem) => {
            push_level(stem, out);
            out.push(Entry::conv(
                fs.cat().unwrap_or("UNKNOWN"),
                fs.atom(SUFFIX).unwrap_or("NONE"),
            ));
            for (name, value) in fs.iter() {
                if name == CAT || name == STEM || name == SUFFIX {
                    continue;
                }
                if let Value::Atom(a) = value {
                    out.push(Entry::feature(name, a));
                }
            }
        }
        None => {
            for (name, value) in fs.iter() {
                if let Value::Atom(a) = value {
                    out.push(Entry::feature(name, a));
                }
            }
        }
    }
}
