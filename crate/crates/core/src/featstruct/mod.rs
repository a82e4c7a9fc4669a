//! Feature structures, constraints, subsumption and projection.
//!
//! A morphological parse is held as a [`FeatureStructure`]: an ordered set of
//! uppercase feature names mapped to atomic symbols, with derivation levels
//! nested under the `STEM` feature. Equality is structural and ignores the
//! order in which features were inserted.

mod constraint;
mod linear;
mod template;

pub use constraint::{format_value, parse_constraint, FeatureConstraint};
pub use linear::{hierarchize, linearize, parse_linear, Entry, LinearParse};
pub use template::{CategoryTemplate, FeatureSet, Position, ProjectionTemplate, RelevanceMask};

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

pub const CAT: &str = "CAT";
pub const ROOT: &str = "ROOT";
pub const STEM: &str = "STEM";
pub const SUFFIX: &str = "SUFFIX";
pub const CONV: &str = "CONV";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Atom(String),
    /// Only legal under `STEM`.
    Struct(Box<FeatureStructure>),
}

impl Value {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Value::Atom(s) => Some(s),
            Value::Struct(_) => None,
        }
    }

    pub fn as_struct(&self) -> Option<&FeatureStructure> {
        match self {
            Value::Struct(fs) => Some(fs),
            Value::Atom(_) => None,
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Atom(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Atom(s)
    }
}

impl From<FeatureStructure> for Value {
    fn from(fs: FeatureStructure) -> Self {
        Value::Struct(Box::new(fs))
    }
}

/// One level of attribute-value pairs, possibly with a nested `STEM` level.
#[derive(Clone, Debug, Default)]
pub struct FeatureStructure {
    features: Vec<(String, Value)>,
}

impl FeatureStructure {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder form of [`FeatureStructure::insert`].
    pub fn with(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.insert(name, value);
        self
    }

    /// Sets `name` to `value`, replacing an existing entry in place.
    pub fn insert(&mut self, name: &str, value: impl Into<Value>) {
        let value = value.into();
        match self.features.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = value,
            None => self.features.push((name.to_string(), value)),
        }
    }

    pub fn remove(&mut self, name: &str) -> Option<Value> {
        let idx = self.features.iter().position(|(n, _)| n == name)?;
        Some(self.features.remove(idx).1)
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.features.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn atom(&self, name: &str) -> Option<&str> {
        self.get(name).and_then(Value::as_atom)
    }

    pub fn cat(&self) -> Option<&str> {
        self.atom(CAT)
    }

    pub fn stem(&self) -> Option<&FeatureStructure> {
        self.get(STEM).and_then(Value::as_struct)
    }

    /// Innermost `ROOT`, following the stem chain.
    pub fn base_root(&self) -> Option<&str> {
        match self.stem() {
            Some(stem) => stem.base_root(),
            None => self.atom(ROOT),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.features.iter().map(|(n, v)| (n.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Number of nested `STEM` levels below this one.
    pub fn depth(&self) -> usize {
        self.stem().map_or(0, |s| 1 + s.depth())
    }

    /// Deterministic serialization with features sorted by name at every
    /// level. Two structures have the same key iff they are structurally equal.
    pub fn canonical_key(&self) -> String {
        let mut out = String::new();
        self.write_key(&mut out);
        out
    }

    fn write_key(&self, out: &mut String) {
        let mut sorted: Vec<&(String, Value)> = self.features.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        out.push('(');
        for (i, (name, value)) in sorted.into_iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(name);
            out.push('=');
            match value {
                Value::Atom(a) => escape_atom(a, out),
                Value::Struct(fs) => fs.write_key(out),
            }
        }
        out.push(')');
    }

    fn sorted_features(&self) -> Vec<&(String, Value)> {
        let mut sorted: Vec<&(String, Value)> = self.features.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        sorted
    }
}

fn escape_atom(atom: &str, out: &mut String) {
    for ch in atom.chars() {
        if matches!(ch, '(' | ')' | '=' | '\\' | ' ') {
            out.push('\\');
        }
        out.push(ch);
    }
}

impl PartialEq for FeatureStructure {
    fn eq(&self, other: &Self) -> bool {
        self.features.len() == other.features.len()
            && self.features.iter().all(|(name, value)| other.get(name) == Some(value))
    }
}

impl Eq for FeatureStructure {}

impl Hash for FeatureStructure {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for (name, value) in self.sorted_features() {
            name.hash(state);
            value.hash(state);
        }
    }
}

impl PartialOrd for FeatureStructure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FeatureStructure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_key().cmp(&other.canonical_key())
    }
}

/// Displays the structure in the bracketed linear notation used by corpus files.
impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", linearize(self))
    }
}

/// Free-function form of the canonical serialization.
pub fn canonical_key(fs: &FeatureStructure) -> String {
    fs.canonical_key()
}

/// True iff every feature named in `c` is present in `f` with an equal
/// value, recursing through `STEM`.
pub fn subsumes(c: &FeatureConstraint, f: &FeatureStructure) -> bool {
    structure_subsumes(c.as_structure(), f)
}

pub(crate) fn structure_subsumes(general: &FeatureStructure, specific: &FeatureStructure) -> bool {
    general.iter().all(|(name, value)| match (value, specific.get(name)) {
        (Value::Atom(a), Some(Value::Atom(b))) => a == b,
        (Value::Struct(g), Some(Value::Struct(s))) => structure_subsumes(g, s),
        _ => false,
    })
}

/// Keeps, at each level, `CAT` plus the features the template lists for that
/// level's category; recurses into `STEM` only when the template says so.
pub fn project(f: &FeatureStructure, t: &ProjectionTemplate) -> FeatureStructure {
    let cat = f.cat().unwrap_or("");
    let tpl = t.for_category(cat);
    let mut out = FeatureStructure::new();
    for (name, value) in f.iter() {
        match value {
            Value::Struct(stem) if name == STEM => {
                if tpl.recurse_stem {
                    out.insert(name, project(stem, t));
                }
            }
            _ if name == CAT || tpl.keep.contains(name) => out.insert(name, value.clone()),
            _ => {}
        }
    }
    out
}
