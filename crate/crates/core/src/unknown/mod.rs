//! Nominal analyses for words the analyzer does not know.
//!
//! Any non-empty prefix of the word may be the root; the rest must split
//! into a chain of suffix allomorphs whose classes follow the configured
//! order.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Location, Result};
use crate::featstruct::{hierarchize, Entry, FeatureStructure, LinearParse, CAT, ROOT};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attach {
    Vowel,
    Consonant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allomorph {
    pub surface: String,
    pub class: String,
    /// `(NAME, VALUE)` assignments in file order. `CONV` carries
    /// `CATEGORY:SUFFIX` and opens a new derivation level.
    pub effects: Vec<(String, String)>,
    /// What the preceding letter must be, if constrained.
    pub after: Option<Attach>,
}

/// `applies_to` vowels in a suffix must equal the vowel selected by the
/// last vowel of the preceding suffixes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonyRule {
    pub applies_to: Vec<char>,
    pub groups: Vec<(Vec<char>, char)>,
}

impl HarmonyRule {
    /// The vowel demanded after `previous`, if this rule constrains it.
    pub fn demand(&self, previous: char) -> Option<char> {
        self.groups
            .iter()
            .find(|(triggers, _)| triggers.contains(&previous))
            .map(|(_, v)| *v)
    }
}

/// Suffix allomorphs plus their morphotactic order.
///
/// ```text
/// %vowels aeıioöuü
/// %harmony ıiuü aı:ı ei:i ou:u öü:ü
/// PLURAL < POSS
/// lar<TAB>PLURAL<TAB>AGR=3PL
/// m<TAB>POSS<TAB>POSS=1SG<TAB>after=vowel
/// ```
#[derive(Clone, Debug, Default)]
pub struct SuffixLexicon {
    allomorphs: Vec<Allomorph>,
    edges: Vec<(String, String)>,
    before: BTreeSet<(String, String)>,
    vowels: Vec<char>,
    harmony: Vec<HarmonyRule>,
    harmony_enabled: bool,
}

const DEFAULTS: [(&str, &str); 3] = [("AGR", "3SG"), ("POSS", "NONE"), ("CASE", "NOM")];

impl SuffixLexicon {
    pub fn empty() -> Self {
        SuffixLexicon {
            harmony_enabled: true,
            ..Default::default()
        }
    }

    /// The bundled Turkish nominal configuration.
    pub fn turkish() -> Self {
        Self::parse(crate::data::TURKISH_SUFFIXES, "turkish_suffixes.txt").expect("bundled suffix lexicon is valid")
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut lex = SuffixLexicon::empty();
        for (idx, raw) in text.lines().enumerate() {
            let loc = || Location::new(source, idx + 1);
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("%vowels") {
                lex.vowels = rest.split_whitespace().flat_map(str::chars).collect();
            } else if let Some(rest) = line.strip_prefix("%harmony") {
                lex.harmony
                    .push(parse_harmony(rest).map_err(|m| Error::syntax(loc(), m))?);
            } else if line.starts_with('%') {
                return Err(Error::syntax(loc(), format!("unknown directive '{line}'")));
            } else if let Some((a, b)) = line.split_once('<').filter(|_| !line.contains('\t')) {
                let (a, b) = (a.trim(), b.trim());
                if a.is_empty() || b.is_empty() || b.contains('<') {
                    return Err(Error::syntax(loc(), "expected 'CLASS < CLASS'"));
                }
                lex.edges.push((a.to_string(), b.to_string()));
            } else {
                let a = parse_allomorph(line).map_err(|m| Error::syntax(loc(), m))?;
                lex.allomorphs.push(a);
            }
        }
        lex.close_order()?;
        Ok(lex)
    }

    fn close_order(&mut self) -> Result<()> {
        let mut before: BTreeSet<(String, String)> = self.edges.iter().cloned().collect();
        loop {
            let extra: Vec<(String, String)> = before
                .iter()
                .flat_map(|(a, b)| {
                    before
                        .iter()
                        .filter(move |(c, _)| c == b)
                        .map(move |(_, d)| (a.clone(), d.clone()))
                })
                .filter(|e| !before.contains(e))
                .collect();
            if extra.is_empty() {
                break;
            }
            before.extend(extra);
        }
        if let Some((a, _)) = before.iter().find(|(a, b)| a == b) {
            return Err(Error::Config(format!("suffix order has a cycle through {a}")));
        }
        self.before = before;
        Ok(())
    }

    pub fn allomorphs(&self) -> &[Allomorph] {
        &self.allomorphs
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn vowels(&self) -> &[char] {
        &self.vowels
    }

    pub fn harmony_rules(&self) -> &[HarmonyRule] {
        &self.harmony
    }

    pub fn harmony_enabled(&self) -> bool {
        self.harmony_enabled
    }

    pub fn set_harmony(&mut self, enabled: bool) {
        self.harmony_enabled = enabled;
    }

    /// True if suffixes of class `a` may be followed by class `b`.
    pub fn precedes(&self, a: &str, b: &str) -> bool {
        self.before.contains(&(a.to_string(), b.to_string()))
    }

    pub fn is_vowel(&self, c: char) -> bool {
        self.vowels.contains(&c)
    }

    /// Every nominal reading of `surface`, bare root first, then by
    /// decreasing root length. Never empty for a non-empty surface.
    pub fn guess(&self, surface: &str) -> Vec<FeatureStructure> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let cuts: Vec<usize> = surface
            .char_indices()
            .map(|(i, _)| i)
            .skip(1)
            .chain(std::iter::once(surface.len()))
            .collect();
        for &cut in cuts.iter().rev() {
            let (root, rest) = surface.split_at(cut);
            let mut chain = Vec::new();
            self.extend_chain(root, rest, &mut chain, &mut |chain| {
                let fs = build_reading(root, chain);
                if seen.insert(fs.canonical_key()) {
                    out.push(fs);
                }
            });
        }
        out
    }

    fn extend_chain<'a>(
        &'a self,
        root: &str,
        rest: &str,
        chain: &mut Vec<&'a Allomorph>,
        emit: &mut dyn FnMut(&[&Allomorph]),
    ) {
        if rest.is_empty() {
            emit(chain);
            return;
        }
        for a in &self.allomorphs {
            if rest.starts_with(a.surface.as_str()) && self.may_follow(root, chain, a) {
                chain.push(a);
                self.extend_chain(root, &rest[a.surface.len()..], chain, emit);
                chain.pop();
            }
        }
    }

    /// Checks order, attachment and harmony of `next` after `root · chain`.
    pub fn may_follow(&self, root: &str, chain: &[&Allomorph], next: &Allomorph) -> bool {
        if let Some(prev) = chain.last() {
            if !self.precedes(&prev.class, &next.class) {
                return false;
            }
        }
        if let Some(attach) = next.after {
            let last = chain.last().map_or(root, |a| a.surface.as_str()).chars().last();
            let is_vowel = last.is_some_and(|c| self.is_vowel(c));
            if is_vowel != (attach == Attach::Vowel) {
                return false;
            }
        }
        if self.harmony_enabled && !chain.is_empty() {
            let previous = chain
                .iter()
                .rev()
                .find_map(|a| a.surface.chars().rev().find(|&c| self.is_vowel(c)));
            let first = next.surface.chars().find(|&c| self.is_vowel(c));
            if let (Some(p), Some(v)) = (previous, first) {
                for rule in &self.harmony {
                    if rule.applies_to.contains(&v) {
                        if let Some(want) = rule.demand(p) {
                            if want != v {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }
}

/// The nominal structure for `root` followed by `chain`.
pub fn build_reading(root: &str, chain: &[&Allomorph]) -> FeatureStructure {
    let mut entries = vec![Entry::feature(CAT, "NOUN"), Entry::feature(ROOT, root)];
    let mut level: Vec<(String, String)> = DEFAULTS.iter().map(|(n, v)| (n.to_string(), v.to_string())).collect();
    for a in chain {
        for (name, value) in &a.effects {
            if name == "CONV" {
                flush(&mut entries, &mut level);
                let (cat, suffix) = value.split_once(':').unwrap_or((value, "NONE"));
                entries.push(Entry::conv(cat, suffix));
            } else {
                match level.iter_mut().find(|(n, _)| n == name) {
                    Some(slot) => slot.1 = value.clone(),
                    None => level.push((name.clone(), value.clone())),
                }
            }
        }
    }
    flush(&mut entries, &mut level);
    hierarchize(&LinearParse::new(entries)).expect("guessed readings are well-formed")
}

fn flush(entries: &mut Vec<Entry>, level: &mut Vec<(String, String)>) {
    entries.extend(level.drain(..).map(|(n, v)| Entry::feature(&n, &v)));
}

fn parse_harmony(rest: &str) -> std::result::Result<HarmonyRule, String> {
    let mut words = rest.split_whitespace();
    let applies_to: Vec<char> = words
        .next()
        .ok_or("'%harmony' needs the affected vowels")?
        .chars()
        .collect();
    let mut groups = Vec::new();
    for w in words {
        let (triggers, result) = w
            .split_once(':')
            .ok_or_else(|| format!("harmony group '{w}' must look like 'ou:u'"))?;
        let mut rc = result.chars();
        let (Some(r), None) = (rc.next(), rc.next()) else {
            return Err(format!("harmony group '{w}' must name exactly one vowel"));
        };
        groups.push((triggers.chars().collect(), r));
    }
    Ok(HarmonyRule { applies_to, groups })
}

fn parse_allomorph(line: &str) -> std::result::Result<Allomorph, String> {
    let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
    if !(3..=4).contains(&fields.len()) {
        return Err("expected 'surface TAB class TAB effects [TAB after=vowel|consonant]'".into());
    }
    let surface = fields[0];
    if surface.is_empty() || surface.contains(char::is_whitespace) {
        return Err("allomorph surface must be a non-empty word".into());
    }
    let class = fields[1];
    if class.is_empty() || class.contains(char::is_whitespace) || class.contains('<') {
        return Err(format!("bad suffix class '{class}'"));
    }
    let mut effects = Vec::new();
    for item in fields[2].split(|c: char| c == ',' || c.is_whitespace()) {
        if item.is_empty() {
            continue;
        }
        let (n, v) = item
            .split_once('=')
            .ok_or_else(|| format!("effect '{item}' must look like NAME=VALUE"))?;
        if n.is_empty()
            || !n
                .chars()
                .all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
        {
            return Err(format!("bad feature name '{n}'"));
        }
        if v.is_empty() {
            return Err(format!("effect '{item}' has no value"));
        }
        if n == "CONV" && !v.contains(':') {
            return Err(format!("CONV effect '{v}' must look like CATEGORY:SUFFIX"));
        }
        if n == CAT || n == ROOT {
            return Err(format!("a suffix cannot set {n}"));
        }
        effects.push((n.to_string(), v.to_string()));
    }
    let after = match fields.get(3) {
        None => None,
        Some(&"after=vowel") => Some(Attach::Vowel),
        Some(&"after=consonant") => Some(Attach::Consonant),
        Some(other) => return Err(format!("unknown condition '{other}'")),
    };
    Ok(Allomorph {
        surface: surface.to_string(),
        class: class.to_string(),
        effects,
        after,
    })
}
