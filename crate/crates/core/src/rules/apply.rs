use rayon::prelude::*;

use super::{Action, ContextConstraint, Rule};
use crate::corpus::{Corpus, Neighbor, Sentence, Token};
use crate::featstruct::{FeatureConstraint, Position};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchMode {
    /// Contexts may be ambiguous; matching context tokens are reduced to
    /// their matching parses together with the target.
    AnyParse,
    /// Contexts must hold exactly one parse. A derived form at `rc` also
    /// matches through its stem, one level down.
    Unambiguous,
}

/// Indices of the parses of `t` that satisfy `c` at position `p`, or `None`
/// when the position does not match.
pub fn match_position(c: &FeatureConstraint, t: &Token, p: Position, mode: MatchMode) -> Option<Vec<usize>> {
    match mode {
        MatchMode::Unambiguous => {
            let [parse] = t.parses.as_slice() else {
                return None;
            };
            let via_stem = p == Position::Rc && parse.stem().is_some_and(|s| c.subsumes(s));
            (c.subsumes(parse) || via_stem).then(|| vec![0])
        }
        MatchMode::AnyParse => {
            let hits: Vec<usize> = (0..t.parses.len()).filter(|&k| c.subsumes(&t.parses[k])).collect();
            (!hits.is_empty()).then_some(hits)
        }
    }
}

/// Applies `r` to token `i` if its context matches and its target picks out
/// a proper, non-empty subset of the token's parses. Returns whether the
/// sentence changed.
pub fn apply_rule_at(s: &mut Sentence, i: usize, r: &Rule, mode: MatchMode) -> bool {
    let mut reductions: Vec<(usize, Vec<usize>)> = Vec::new();
    for p in Position::CONTEXT {
        let Some(cc) = r.context(p) else { continue };
        match (s.neighbor(i, p.offset()), cc) {
            (Neighbor::Boundary, ContextConstraint::Boundary) => {}
            (Neighbor::Token(t), ContextConstraint::Parse(c)) => match match_position(c, t, p, mode) {
                None => return false,
                Some(keep) => {
                    if keep.len() < t.parses.len() {
                        reductions.push(((i as isize + p.offset()) as usize, keep));
                    }
                }
            },
            _ => return false,
        }
    }

    let token = &s.tokens[i];
    let hit: Vec<bool> = token.parses.iter().map(|f| r.target.subsumes(f)).collect();
    let hits = hit.iter().filter(|&&h| h).count();
    if hits == 0 || hits == token.parses.len() {
        return false;
    }
    let keep_hit = r.action == Action::Choose;
    let token = &mut s.tokens[i];
    let mut k = 0;
    token.parses.retain(|_| {
        let keep = hit[k] == keep_hit;
        k += 1;
        keep
    });
    for (j, keep) in reductions {
        let t = &mut s.tokens[j];
        t.parses = keep.into_iter().map(|k| t.parses[k].clone()).collect();
    }
    true
}

/// Sweeps the sentence left to right, trying every rule in order at each
/// position, until a sweep changes nothing. Returns the number of
/// applications.
pub fn run_sentence(s: &mut Sentence, rules: &[Rule], mode: MatchMode) -> usize {
    let mut applications = 0;
    loop {
        let mut changed = false;
        for i in 0..s.len() {
            for r in rules {
                if apply_rule_at(s, i, r, mode) {
                    applications += 1;
                    changed = true;
                }
            }
        }
        if !changed {
            return applications;
        }
    }
}

/// [`run_sentence`] over every sentence, in parallel.
pub fn run_pass(c: &mut Corpus, rules: &[Rule], mode: MatchMode) -> usize {
    if rules.is_empty() {
        return 0;
    }
    c.sentences.par_iter_mut().map(|s| run_sentence(s, rules, mode)).sum()
}
