use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{FeatureStructure, Value, CAT};
use crate::error::{Error, Location, Result};

/// A window position relative to the token being disambiguated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Position {
    Llc,
    Lc,
    Focus,
    Rc,
    Rrc,
}

impl Position {
    pub const ALL: [Position; 5] = [
        Position::Llc,
        Position::Lc,
        Position::Focus,
        Position::Rc,
        Position::Rrc,
    ];

    /// The four context positions in window order.
    pub const CONTEXT: [Position; 4] = [Position::Llc, Position::Lc, Position::Rc, Position::Rrc];

    pub fn offset(self) -> isize {
        match self {
            Position::Llc => -2,
            Position::Lc => -1,
            Position::Focus => 0,
            Position::Rc => 1,
            Position::Rrc => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Position::Llc => "llc",
            Position::Lc => "lc",
            Position::Focus => "focus",
            Position::Rc => "rc",
            Position::Rrc => "rrc",
        }
    }

    pub fn from_name(name: &str) -> Option<Position> {
        Position::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(name))
    }

    /// Index into a four-slot context array; `None` for the focus.
    pub fn context_index(self) -> Option<usize> {
        match self {
            Position::Llc => Some(0),
            Position::Lc => Some(1),
            Position::Focus => None,
            Position::Rc => Some(2),
            Position::Rrc => Some(3),
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeatureSet {
    All,
    Only(BTreeSet<String>),
}

impl FeatureSet {
    pub fn contains(&self, name: &str) -> bool {
        match self {
            FeatureSet::All => true,
            FeatureSet::Only(set) => set.contains(name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CategoryTemplate {
    pub keep: FeatureSet,
    pub recurse_stem: bool,
}

impl CategoryTemplate {
    pub fn cat_only() -> Self {
        CategoryTemplate {
            keep: FeatureSet::Only(BTreeSet::new()),
            recurse_stem: false,
        }
    }

    pub fn keep_all() -> Self {
        CategoryTemplate {
            keep: FeatureSet::All,
            recurse_stem: true,
        }
    }
}

/// Per-category choice of the features kept when projecting a parse.
///
/// File format, one category per line:
///
/// ```text
/// # category: features [+stem]
/// NOUN: AGR POSS CASE SUFFIX +stem
/// CONN: ROOT
/// *: AGR +stem
/// ```
///
/// `*` as the category declares the fallback for unlisted categories; `*`
/// as the feature list keeps everything. Without a declared fallback,
/// unlisted categories keep only `CAT`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionTemplate {
    by_cat: BTreeMap<String, CategoryTemplate>,
    default: CategoryTemplate,
}

impl Default for ProjectionTemplate {
    fn default() -> Self {
        ProjectionTemplate {
            by_cat: BTreeMap::new(),
            default: CategoryTemplate::cat_only(),
        }
    }
}

impl ProjectionTemplate {
    /// Keeps every feature at every level.
    pub fn identity() -> Self {
        ProjectionTemplate {
            by_cat: BTreeMap::new(),
            default: CategoryTemplate::keep_all(),
        }
    }

    pub fn with_category(mut self, cat: &str, keep: &[&str], recurse_stem: bool) -> Self {
        self.by_cat.insert(
            cat.to_string(),
            CategoryTemplate {
                keep: FeatureSet::Only(keep.iter().map(|s| s.to_string()).collect()),
                recurse_stem,
            },
        );
        self
    }

    pub fn with_default(mut self, default: CategoryTemplate) -> Self {
        self.default = default;
        self
    }

    pub fn for_category(&self, cat: &str) -> &CategoryTemplate {
        self.by_cat.get(cat).unwrap_or(&self.default)
    }

    pub fn is_identity(&self) -> bool {
        self.by_cat.values().all(|t| *t == CategoryTemplate::keep_all()) && self.default == CategoryTemplate::keep_all()
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut tpl = ProjectionTemplate::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let loc = || Location::new(source, idx + 1);
            let (cat, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::syntax(loc(), "expected 'CATEGORY: features'"))?;
            let cat = cat.trim();
            let mut keep = BTreeSet::new();
            let mut all = false;
            let mut recurse_stem = false;
            for word in rest.split_whitespace() {
                match word {
                    "+stem" => recurse_stem = true,
                    "*" => all = true,
                    w if is_legal_name(w) => {
                        keep.insert(w.to_string());
                    }
                    w => return Err(Error::syntax(loc(), format!("illegal feature name '{w}'"))),
                }
            }
            let entry = CategoryTemplate {
                keep: if all { FeatureSet::All } else { FeatureSet::Only(keep) },
                recurse_stem,
            };
            if cat == "*" {
                tpl.default = entry;
            } else if cat.is_empty() || cat.contains(char::is_whitespace) {
                return Err(Error::syntax(loc(), format!("bad category '{cat}'")));
            } else {
                tpl.by_cat.insert(cat.to_string(), entry);
            }
        }
        Ok(tpl)
    }
}

fn is_legal_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Features to drop, per window position, before a parse is used as a
/// context or target key.
///
/// File format: `lc: POSS` (one position per line; names from
/// `llc lc focus rc rrc`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelevanceMask {
    drop: [BTreeSet<String>; 5],
}

impl RelevanceMask {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_dropped(mut self, position: Position, names: &[&str]) -> Self {
        let slot = &mut self.drop[position as usize];
        slot.extend(names.iter().map(|s| s.to_string()));
        self
    }

    pub fn dropped(&self, position: Position) -> &BTreeSet<String> {
        &self.drop[position as usize]
    }

    /// Removes the position's dropped features at every level. `CAT` is
    /// never dropped.
    pub fn apply(&self, position: Position, fs: &FeatureStructure) -> FeatureStructure {
        let drop = self.dropped(position);
        if drop.is_empty() {
            return fs.clone();
        }
        strip(fs, drop)
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut mask = RelevanceMask::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let loc = || Location::new(source, idx + 1);
            let (pos, rest) = line
                .split_once(':')
                .ok_or_else(|| Error::syntax(loc(), "expected 'position: features'"))?;
            let pos = Position::from_name(pos.trim()).ok_or_else(|| {
                Error::syntax(
                    loc(),
                    format!("unknown position '{}' (use llc, lc, focus, rc, rrc)", pos.trim()),
                )
            })?;
            for word in rest.split_whitespace() {
                if !is_legal_name(word) {
                    return Err(Error::syntax(loc(), format!("illegal feature name '{word}'")));
                }
                if word == CAT {
                    return Err(Error::syntax(loc(), "CAT cannot be masked"));
                }
                mask.drop[pos as usize].insert(word.to_string());
            }
        }
        Ok(mask)
    }
}

fn strip(fs: &FeatureStructure, drop: &BTreeSet<String>) -> FeatureStructure {
    let mut out = FeatureStructure::new();
    for (name, value) in fs.iter() {
        if drop.contains(name) && name != CAT {
            continue;
        }
        match value {
            Value::Struct(inner) => out.insert(name, strip(inner, drop)),
            Value::Atom(_) => out.insert(name, value.clone()),
        }
    }
    out
}
