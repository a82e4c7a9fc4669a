use std::fmt;

use super::{Origin, Sentence, Token};
use crate::error::{Error, Result};
use crate::featstruct::{
    hierarchize, linearize, parse_constraint, parse_linear, Entry, FeatureConstraint, FeatureStructure, LinearParse,
    ROOT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DupPredicate {
    None,
    /// Both matched parses share their innermost `ROOT`.
    EqualRoot,
    /// Same root, and the innermost `SENSE` values differ.
    EqualRootOppositeSense,
}

impl DupPredicate {
    pub fn name(self) -> &'static str {
        match self {
            DupPredicate::None => "none",
            DupPredicate::EqualRoot => "equal-root",
            DupPredicate::EqualRootOppositeSense => "equal-root-opposite-sense",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            DupPredicate::None,
            DupPredicate::EqualRoot,
            DupPredicate::EqualRootOppositeSense,
        ]
        .into_iter()
        .find(|p| p.name() == s)
    }

    pub fn holds(self, a: &FeatureStructure, b: &FeatureStructure) -> bool {
        match self {
            DupPredicate::None => true,
            DupPredicate::EqualRoot => a.base_root().is_some() && a.base_root() == b.base_root(),
            DupPredicate::EqualRootOppositeSense => {
                let (sa, sb) = (innermost(a).atom("SENSE"), innermost(b).atom("SENSE"));
                a.base_root().is_some() && a.base_root() == b.base_root() && sa.is_some() && sb.is_some() && sa != sb
            }
        }
    }
}

fn innermost(fs: &FeatureStructure) -> &FeatureStructure {
    match fs.stem() {
        Some(stem) => innermost(stem),
        None => fs,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TemplatePart {
    /// `@1` or `@2`: the entries of the matched parse at that position.
    Slot(usize),
    Entries(Vec<Entry>),
}

/// Two-token pattern whose match is coalesced into one token.
///
/// File line: `constraint TAB constraint TAB predicate TAB template`, e.g.
///
/// ```text
/// [cat:verb,tam1:opt]	[cat:verb,tam1:opt]	equal-root	@1 [CONV ADVERB DUP1][TYPE MANNER]
/// ```
#[allow(clippy::tabs_in_doc_comments)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollocationPattern {
    pub first: FeatureConstraint,
    pub second: FeatureConstraint,
    pub predicate: DupPredicate,
    pub output: Vec<TemplatePart>,
}

impl CollocationPattern {
    pub fn parse_file(text: &str, source: &str) -> Result<Vec<CollocationPattern>> {
        let mut out = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            out.push(Self::parse_line(line).map_err(|e| e.at(source, idx + 1))?);
        }
        Ok(out)
    }

    fn parse_line(line: &str) -> Result<CollocationPattern> {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [first, second, predicate, output] = fields[..] else {
            return Err(Error::Format(format!(
                "expected 4 tab-separated fields, found {}",
                fields.len()
            )));
        };
        let predicate = DupPredicate::from_name(predicate)
            .ok_or_else(|| Error::Format(format!("unknown predicate '{predicate}'")))?;
        let output = parse_template(output)?;
        match output.first() {
            Some(TemplatePart::Slot(_)) => {}
            Some(TemplatePart::Entries(e)) if matches!(e.as_slice(), [Entry::Feature { name: a, .. }, Entry::Feature { name: b, .. }, ..] if a == "CAT" && b == ROOT) =>
                {}
            _ => {
                return Err(Error::Format(
                    "output template must start with a slot or with CAT and ROOT".into(),
                ))
            }
        }
        Ok(CollocationPattern {
            first: parse_constraint(first).map_err(strip_location)?,
            second: parse_constraint(second).map_err(strip_location)?,
            predicate,
            output,
        })
    }

    /// The merged parse for a matching pair, if the pair matches.
    pub fn apply(&self, a: &FeatureStructure, b: &FeatureStructure) -> Option<FeatureStructure> {
        if !self.first.subsumes(a) || !self.second.subsumes(b) || !self.predicate.holds(a, b) {
            return None;
        }
        let mut entries = Vec::new();
        for part in &self.output {
            match part {
                TemplatePart::Slot(1) => entries.extend(linearize(a).entries),
                TemplatePart::Slot(_) => entries.extend(linearize(b).entries),
                TemplatePart::Entries(e) => entries.extend(e.iter().cloned()),
            }
        }
        match hierarchize(&LinearParse::new(entries)) {
            Ok(fs) => Some(fs),
            Err(e) => {
                log::warn!("collocation output is not a well-formed parse: {e}");
                None
            }
        }
    }
}

fn strip_location(e: Error) -> Error {
    match e {
        Error::Syntax { message, location } => {
            Error::Format(format!("{message} (column {})", location.column.unwrap_or(0)))
        }
        other => other,
    }
}

fn parse_template(text: &str) -> Result<Vec<TemplatePart>> {
    let mut parts = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '@' => {
                let mut digits = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    digits.push(d);
                    chars.next();
                }
                match digits.as_str() {
                    "1" => parts.push(TemplatePart::Slot(1)),
                    "2" => parts.push(TemplatePart::Slot(2)),
                    _ => return Err(Error::Format(format!("bad slot '@{digits}' (use @1 or @2)"))),
                }
            }
            '[' => {
                let mut depth = 1;
                let mut end = None;
                for (j, d) in chars.by_ref() {
                    match d {
                        '[' => depth += 1,
                        ']' => {
                            depth -= 1;
                            if depth == 0 {
                                end = Some(j);
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                let end = end.ok_or_else(|| Error::Format("unbalanced '[' in output template".into()))?;
                let entries = parse_linear(&format!("[{}]", &text[i..=end]))?.entries;
                match parts.last_mut() {
                    Some(TemplatePart::Entries(prev)) => prev.extend(entries),
                    _ => parts.push(TemplatePart::Entries(entries)),
                }
            }
            _ => return Err(Error::Format(format!("unexpected '{c}' in output template"))),
        }
    }
    if parts.is_empty() {
        return Err(Error::Format("empty output template".into()));
    }
    Ok(parts)
}

impl fmt::Display for CollocationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t", self.first, self.second, self.predicate.name())?;
        for (i, part) in self.output.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match part {
                TemplatePart::Slot(n) => write!(f, "@{n}")?,
                TemplatePart::Entries(e) => {
                    for entry in e {
                        write!(f, "{entry}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Greedy left-to-right scan; at each position patterns are tried in order
/// and the first matching parse pair wins. Matches never overlap.
pub fn group_collocations(s: &Sentence, patterns: &[CollocationPattern]) -> Sentence {
    let mut out = Vec::with_capacity(s.len());
    let mut i = 0;
    while i < s.len() {
        if i + 1 < s.len() {
            if let Some(parse) = find_match(&s.tokens[i], &s.tokens[i + 1], patterns) {
                let surface = format!("{} {}", s.tokens[i].surface, s.tokens[i + 1].surface);
                let mut token = Token::new(surface, vec![parse]).with_origin(Origin::Collocation);
                token.line = s.tokens[i].line;
                out.push(token);
                i += 2;
                continue;
            }
        }
        out.push(s.tokens[i].clone());
        i += 1;
    }
    Sentence::new(out)
}

fn find_match(a: &Token, b: &Token, patterns: &[CollocationPattern]) -> Option<FeatureStructure> {
    patterns.iter().find_map(|pat| {
        a.parses
            .iter()
            .find_map(|pa| b.parses.iter().find_map(|pb| pat.apply(pa, pb)))
    })
}
