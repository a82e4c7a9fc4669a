use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};

use super::keys::{distinct_focus, ContextKey, ContextSpec, KeyId, KeySpace, TokenKeys};
use super::score::{score_counts, Counts, Score};

/// Occurrence tables over unambiguous tokens.
///
/// `count[P]` is the number of unambiguous tokens whose focus key is `P`
/// (derived forms also count their stem). `incontext[(C, P)]` is how often an
/// unambiguous `P` sits in the unambiguous context `C`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Tables {
    pub count: HashMap<KeyId, u32>,
    pub incontext: HashMap<(ContextKey, KeyId), u32>,
}

impl Tables {
    pub fn build(view: &[Vec<TokenKeys>], spec: ContextSpec) -> Self {
        let mut t = Tables::default();
        for s in view {
            for k in 0..s.len() {
                t.add_target(s, k, spec, 1);
            }
        }
        t
    }

    pub fn cnt(&self, p: KeyId) -> u32 {
        self.count.get(&p).copied().unwrap_or(0)
    }

    pub fn inc(&self, c: &ContextKey, p: KeyId) -> u32 {
        self.incontext.get(&(*c, p)).copied().unwrap_or(0)
    }

    pub fn counts(&self, c: &ContextKey, p: KeyId) -> Counts {
        Counts {
            inc: self.inc(c, p),
            cnt: self.cnt(p),
        }
    }

    /// Score of choosing `p` in context `c` over `competitors`.
    pub fn score(&self, c: &ContextKey, p: KeyId, competitors: impl IntoIterator<Item = KeyId>) -> Score {
        let comp: Vec<Counts> = competitors.into_iter().map(|q| self.counts(c, q)).collect();
        score_counts(self.counts(c, p), &comp)
    }

    /// Adds (`sign = 1`) or removes (`sign = -1`) what token `k` contributes.
    pub fn add_target(&mut self, s: &[TokenKeys], k: usize, spec: ContextSpec, sign: i32) {
        let [pk] = s[k].as_slice() else { return };
        bump(&mut self.count, pk.focus(), sign);
        if let Some(stem) = pk.stem_focus.filter(|_| spec.stems) {
            bump(&mut self.count, stem, sign);
        }
        for c in ContextKey::all_around(s, k, spec) {
            bump(&mut self.incontext, (c, pk.focus()), sign);
        }
    }

    /// Readable form, independent of interning.
    pub fn export(&self, keys: &KeySpace) -> (BTreeMap<String, u32>, BTreeMap<String, u32>) {
        let name = |k: KeyId| keys.structure(k).canonical_key();
        let count = self.count.iter().map(|(&k, &v)| (name(k), v)).collect();
        let incontext = self
            .incontext
            .iter()
            .map(|((c, p), &v)| {
                let slots: Vec<String> = c
                    .slots
                    .iter()
                    .map(|s| match s.as_key() {
                        Some(k) => name(k),
                        None if *s == super::keys::Slot::BOUNDARY => "#".into(),
                        None => "_".into(),
                    })
                    .collect();
                (format!("{} {} -> {}", c.shape.name(), slots.join(" "), name(*p)), v)
            })
            .collect();
        (count, incontext)
    }
}

/// Candidate choose rules: a context and a reading, with the competing
/// readings seen alongside it. Competitors are kept as a multiset so that
/// occurrences can be withdrawn; the scored set is their union.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Candidates {
    pub entries: HashMap<(ContextKey, KeyId), CandidateEntry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidateEntry {
    pub occurrences: u32,
    pub competitors: HashMap<KeyId, u32>,
}

impl Candidates {
    pub fn build(view: &[Vec<TokenKeys>], spec: ContextSpec) -> Self {
        let mut c = Candidates::default();
        for s in view {
            for k in 0..s.len() {
                c.add_target(s, k, spec, 1);
            }
        }
        c
    }

    pub fn add_target(&mut self, s: &[TokenKeys], k: usize, spec: ContextSpec, sign: i32) {
        if s[k].len() < 2 {
            return;
        }
        let readings = distinct_focus(&s[k]);
        if readings.len() < 2 {
            return;
        }
        for c in ContextKey::all_around(s, k, spec) {
            for &p in &readings {
                let key = (c, p);
                let e = self.entries.entry(key).or_default();
                e.occurrences = e
                    .occurrences
                    .checked_add_signed(sign)
                    .expect("candidate count underflow");
                for &q in readings.iter().filter(|&&q| q != p) {
                    bump(&mut e.competitors, q, sign);
                }
                if e.occurrences == 0 {
                    self.entries.remove(&key);
                }
            }
        }
    }
}

fn bump<K: std::hash::Hash + Eq>(m: &mut HashMap<K, u32>, k: K, sign: i32) {
    match m.entry(k) {
        Entry::Occupied(mut e) => {
            let v = e.get().checked_add_signed(sign).expect("table count underflow");
            if v == 0 {
                e.remove();
            } else {
                *e.get_mut() = v;
            }
        }
        Entry::Vacant(e) => {
            assert!(sign > 0, "table count underflow");
            e.insert(sign as u32);
        }
    }
}
