use std::collections::HashMap;
use std::fmt;

use crate::corpus::{Corpus, Sentence, Token};
use crate::featstruct::{FeatureConstraint, FeatureStructure, Position, RelevanceMask};
use crate::rules::{Action, ContextConstraint, Provenance, Rule, Shape};

/// Interned canonical key of a (projected, masked) parse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeyId(pub u32);

/// Interner from canonical keys to dense ids, keeping the structures.
#[derive(Clone, Debug, Default)]
pub struct KeySpace {
    ids: HashMap<String, KeyId>,
    structures: Vec<FeatureStructure>,
}

impl KeySpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, fs: FeatureStructure) -> KeyId {
        let key = fs.canonical_key();
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = KeyId(self.structures.len() as u32);
        self.ids.insert(key, id);
        self.structures.push(fs);
        id
    }

    pub fn get(&self, fs: &FeatureStructure) -> Option<KeyId> {
        self.ids.get(&fs.canonical_key()).copied()
    }

    pub fn structure(&self, id: KeyId) -> &FeatureStructure {
        &self.structures[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.structures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structures.is_empty()
    }
}

/// The keys one parse contributes at each window position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParseKeys {
    /// Indexed by `Position as usize`.
    pub at: [KeyId; 5],
    /// Stem of a derived form, masked for `rc`.
    pub stem_rc: Option<KeyId>,
    /// Stem of a derived form, masked for the focus.
    pub stem_focus: Option<KeyId>,
}

impl ParseKeys {
    pub fn compute(fs: &FeatureStructure, masks: &RelevanceMask, keys: &mut KeySpace) -> Self {
        let at = Position::ALL.map(|p| keys.intern(masks.apply(p, fs)));
        let stem_rc = fs.stem().map(|s| keys.intern(masks.apply(Position::Rc, s)));
        let stem_focus = fs.stem().map(|s| keys.intern(masks.apply(Position::Focus, s)));
        ParseKeys {
            at,
            stem_rc,
            stem_focus,
        }
    }

    pub fn focus(&self) -> KeyId {
        self.at[Position::Focus as usize]
    }
}

/// Per-parse keys of one token, parallel to `Token::parses`.
pub type TokenKeys = Vec<ParseKeys>;

pub fn sentence_keys(s: &Sentence, masks: &RelevanceMask, keys: &mut KeySpace) -> Vec<TokenKeys> {
    s.tokens.iter().map(|t| token_keys(t, masks, keys)).collect()
}

pub fn token_keys(t: &Token, masks: &RelevanceMask, keys: &mut KeySpace) -> TokenKeys {
    t.parses.iter().map(|p| ParseKeys::compute(p, masks, keys)).collect()
}

pub fn corpus_keys(c: &Corpus, masks: &RelevanceMask, keys: &mut KeySpace) -> Vec<Vec<TokenKeys>> {
    c.sentences.iter().map(|s| sentence_keys(s, masks, keys)).collect()
}

/// One slot of a context key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot(u32);

impl Slot {
    pub const ABSENT: Slot = Slot(u32::MAX);
    pub const BOUNDARY: Slot = Slot(u32::MAX - 1);

    pub fn key(k: KeyId) -> Slot {
        Slot(k.0)
    }

    pub fn as_key(self) -> Option<KeyId> {
        (self != Slot::ABSENT && self != Slot::BOUNDARY).then_some(KeyId(self.0))
    }
}

/// An unambiguous context: a shape and the keys at its positions. Stem
/// contexts share the representation of top-level ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextKey {
    pub shape: Shape,
    /// llc, lc, rc, rrc
    pub slots: [Slot; 4],
}

impl ContextKey {
    /// The context of token `k` for `shape`, if every position it uses holds
    /// an unambiguous token or the sentence boundary. With `via_stem`, `rc`
    /// contributes the stem of its parse and the context exists only for
    /// derived forms.
    pub fn around(view: &[TokenKeys], k: usize, shape: Shape, via_stem: bool) -> Option<ContextKey> {
        let n = view.len() as isize;
        let mut slots = [Slot::ABSENT; 4];
        for (idx, p) in Position::CONTEXT.into_iter().enumerate() {
            if !shape.positions()[idx] {
                continue;
            }
            let j = k as isize + p.offset();
            slots[idx] = if j == -1 || j == n {
                if via_stem && p == Position::Rc {
                    return None;
                }
                Slot::BOUNDARY
            } else if j < -1 || j > n {
                return None;
            } else {
                let [pk] = view[j as usize].as_slice() else {
                    return None;
                };
                if via_stem && p == Position::Rc {
                    Slot::key(pk.stem_rc?)
                } else {
                    Slot::key(pk.at[p as usize])
                }
            };
        }
        Some(ContextKey { shape, slots })
    }

    /// Every context of token `k` under `spec`. With stems enabled, shapes
    /// with `rc` and without `rrc` also yield the stem variant.
    pub fn all_around(view: &[TokenKeys], k: usize, spec: ContextSpec) -> Vec<ContextKey> {
        let mut out = Vec::new();
        for &shape in spec.shapes {
            if let Some(c) = ContextKey::around(view, k, shape, false) {
                out.push(c);
            }
            if spec.stems && has_stem_variant(shape) {
                if let Some(c) = ContextKey::around(view, k, shape, true) {
                    out.push(c);
                }
            }
        }
        out
    }

    pub fn to_rule(&self, action: Action, target: KeyId, keys: &KeySpace, provenance: Provenance) -> Rule {
        let mut r = Rule::new(
            action,
            FeatureConstraint::from_structure(keys.structure(target).clone()),
            provenance,
        );
        for (i, slot) in self.slots.iter().enumerate() {
            r.contexts[i] = match *slot {
                Slot::ABSENT => None,
                Slot::BOUNDARY => Some(ContextConstraint::Boundary),
                s => Some(ContextConstraint::Parse(FeatureConstraint::from_structure(
                    keys.structure(KeyId(s.0)).clone(),
                ))),
            };
        }
        r
    }
}

/// Which contexts a statistic looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContextSpec {
    pub shapes: &'static [Shape],
    /// Derived forms also count through their stem.
    pub stems: bool,
}

impl ContextSpec {
    pub const CHOOSE: ContextSpec = ContextSpec {
        shapes: &Shape::LEARNED,
        stems: true,
    };
    pub const DELETE: ContextSpec = ContextSpec {
        shapes: &[Shape::Both, Shape::Left, Shape::Right],
        stems: true,
    };
    pub const NEIGHBORS: ContextSpec = ContextSpec {
        shapes: &[Shape::Both, Shape::Left, Shape::Right],
        stems: false,
    };
}

pub fn has_stem_variant(shape: Shape) -> bool {
    let [_, _, rc, rrc] = shape.positions();
    rc && !rrc
}

impl fmt::Display for ContextKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.shape.name())?;
        for s in self.slots {
            match s {
                Slot::ABSENT => write!(f, " _")?,
                Slot::BOUNDARY => write!(f, " #")?,
                Slot(k) => write!(f, " {k}")?,
            }
        }
        Ok(())
    }
}

/// Distinct focus keys of a token, in parse order.
pub fn distinct_focus(tk: &TokenKeys) -> Vec<KeyId> {
    let mut out: Vec<KeyId> = Vec::with_capacity(tk.len());
    for pk in tk {
        if !out.contains(&pk.focus()) {
            out.push(pk.focus());
        }
    }
    out
}
