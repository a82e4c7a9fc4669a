use std::fmt;

use super::{structure_subsumes, FeatureStructure, Value, ROOT, STEM};
use crate::error::Result;
use crate::text::{is_delimiter, Cursor};

/// A partial description of a parse. Every feature is optional; the empty
/// constraint subsumes every structure.
///
/// Textual form: `[cat:noun,case:acc,stem:[cat:verb]]`. Names are matched
/// case-insensitively. Unquoted values are upper-cased except under `root`,
/// whose values are lexical and kept as written; quoted values (`'2SG'`)
/// are always taken verbatim.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureConstraint(FeatureStructure);

impl FeatureConstraint {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_structure(fs: FeatureStructure) -> Self {
        FeatureConstraint(fs)
    }

    pub fn as_structure(&self) -> &FeatureStructure {
        &self.0
    }

    pub fn into_structure(self) -> FeatureStructure {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn subsumes(&self, f: &FeatureStructure) -> bool {
        structure_subsumes(&self.0, f)
    }

    /// Constraint-on-constraint subsumption: `self` is at least as general.
    pub fn generalizes(&self, other: &FeatureConstraint) -> bool {
        structure_subsumes(&self.0, &other.0)
    }

    pub(crate) fn parse_at(cur: &mut Cursor<'_>) -> Result<Self> {
        cur.expect('[')?;
        let mut fs = FeatureStructure::new();
        if cur.eat(']') {
            return Ok(FeatureConstraint(fs));
        }
        loop {
            let name = cur.ident()?.to_ascii_uppercase();
            if fs.get(&name).is_some() {
                return Err(cur.error(format!("feature '{name}' given twice")));
            }
            cur.expect(':')?;
            cur.skip_ws();
            match cur.peek() {
                Some('[') => {
                    if name != STEM {
                        return Err(cur.error(format!(
                            "only 'stem' may take a nested constraint, not '{}'",
                            name.to_lowercase()
                        )));
                    }
                    let inner = FeatureConstraint::parse_at(cur)?;
                    fs.insert(&name, inner.0);
                }
                Some('\'') => {
                    let v = cur.quoted()?;
                    fs.insert(&name, v);
                }
                _ => {
                    let v = cur.bare()?;
                    fs.insert(&name, normalize_bare(&name, v));
                }
            }
            if cur.eat(',') {
                continue;
            }
            cur.expect(']')?;
            return Ok(FeatureConstraint(fs));
        }
    }
}

fn normalize_bare(name: &str, value: &str) -> String {
    if name == ROOT {
        value.to_string()
    } else {
        value.to_uppercase()
    }
}

pub fn parse_constraint(text: &str) -> Result<FeatureConstraint> {
    let mut cur = Cursor::new(text, "<constraint>");
    let c = FeatureConstraint::parse_at(&mut cur)?;
    cur.skip_ws();
    if !cur.at_end() {
        return Err(cur.error("trailing input after constraint"));
    }
    Ok(c)
}

/// Renders a value so that reading it back under `name` yields it unchanged.
pub fn format_value(name: &str, value: &str) -> String {
    let bare_ok = !value.is_empty() && !value.chars().any(|c| c.is_whitespace() || is_delimiter(c) || c == '\\');
    if bare_ok {
        if name == ROOT {
            return value.to_string();
        }
        let lower = value.to_lowercase();
        if lower.to_uppercase() == value {
            return lower;
        }
    }
    let mut out = String::from("'");
    for c in value.chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

impl fmt::Display for FeatureConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (name, value)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:", name.to_lowercase())?;
            match value {
                Value::Atom(a) => f.write_str(&format_value(name, a))?,
                Value::Struct(inner) => write!(f, "{}", FeatureConstraint(inner.as_ref().clone()))?,
            }
        }
        f.write_str("]")
    }
}
