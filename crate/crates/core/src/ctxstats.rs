//! Pruning by context statistics gathered on the text being disambiguated.

use std::collections::BTreeSet;

use crate::corpus::{Corpus, ProjectedCorpus};
use crate::error::{Error, Result};
use crate::featstruct::{ProjectionTemplate, RelevanceMask};
use crate::learner::{corpus_keys, distinct_focus, ContextKey, ContextSpec, KeyId, KeySpace, Tables, TokenKeys};
use crate::rules::Shape;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CtxStatsConfig {
    pub passes: usize,
    /// Weights of the (lc, rc), (lc) and (rc) contexts.
    pub weights: [f64; 3],
    pub fraction: f64,
}

impl Default for CtxStatsConfig {
    fn default() -> Self {
        CtxStatsConfig {
            passes: 3,
            weights: [0.5, 0.25, 0.25],
            fraction: 0.2,
        }
    }
}

impl CtxStatsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.passes == 0 {
            return Err(Error::Config("ctxstats.passes must be at least 1".into()));
        }
        if self.weights.iter().any(|w| w.is_nan() || *w < 0.0) || (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::Config(format!(
                "ctxstats.weights must be non-negative and sum to 1, got {:?}",
                self.weights
            )));
        }
        if !(0.0..1.0).contains(&self.fraction) {
            return Err(Error::Config(format!(
                "ctxstats.fraction must lie in [0, 1), got {}",
                self.fraction
            )));
        }
        Ok(())
    }
}

const SPEC: ContextSpec = ContextSpec::NEIGHBORS;

/// Projects `c` with `t`, scores the readings of every ambiguous token whose
/// immediate neighbors are unambiguous, and drops readings scoring below
/// `fraction` of the best one. Deletions take effect at once: later tokens in
/// the same pass see the updated tables. Surviving readings are mapped back
/// to the original parses.
pub fn prune_by_context_stats(
    c: &Corpus,
    cfg: &CtxStatsConfig,
    masks: &RelevanceMask,
    t: &ProjectionTemplate,
) -> Result<Corpus> {
    cfg.validate()?;
    if cfg.fraction == 0.0 {
        return Ok(c.clone());
    }
    let mut projected = ProjectedCorpus::new(c, t);
    let mut keys = KeySpace::new();
    let mut view = corpus_keys(&projected.corpus, masks, &mut keys);
    let mut tables = Tables::build(&view, SPEC);
    for pass in 0..cfg.passes {
        let mut deleted = 0;
        for (si, s) in view.iter_mut().enumerate() {
            for k in 0..s.len() {
                let doomed = doomed_readings(s, k, &tables, cfg);
                if doomed.is_empty() {
                    continue;
                }
                let old = s.clone();
                let token = &mut projected.corpus.sentences[si].tokens[k];
                let mut idx = 0;
                token.parses.retain(|_| {
                    let keep = !doomed.contains(&old[k][idx].focus());
                    idx += 1;
                    keep
                });
                s[k].retain(|pk| !doomed.contains(&pk.focus()));
                deleted += old[k].len() - s[k].len();
                let affected = k.saturating_sub(2)..=(k + 2).min(s.len() - 1);
                for j in affected.clone() {
                    tables.add_target(&old, j, SPEC, -1);
                }
                for j in affected {
                    tables.add_target(s, j, SPEC, 1);
                }
            }
        }
        log::debug!("context statistics pass {}: {deleted} readings removed", pass + 1);
    }
    Ok(projected.restore(c))
}

/// Readings of token `k` to delete under the current tables.
pub fn doomed_readings(s: &[TokenKeys], k: usize, tables: &Tables, cfg: &CtxStatsConfig) -> BTreeSet<KeyId> {
    let readings = distinct_focus(&s[k]);
    if readings.len() < 2 {
        return BTreeSet::new();
    }
    let scores = reading_scores(s, k, &readings, tables, cfg);
    let Some(scores) = scores else {
        return BTreeSet::new();
    };
    let max = scores.iter().copied().fold(0.0, f64::max);
    readings
        .into_iter()
        .zip(scores)
        .filter(|&(_, v)| v < cfg.fraction * max)
        .map(|(p, _)| p)
        .collect()
}

fn reading_scores(
    s: &[TokenKeys],
    k: usize,
    readings: &[KeyId],
    tables: &Tables,
    cfg: &CtxStatsConfig,
) -> Option<Vec<f64>> {
    let both = ContextKey::around(s, k, Shape::Both, false);
    let left = ContextKey::around(s, k, Shape::Left, false);
    let right = ContextKey::around(s, k, Shape::Right, false);
    let q = |c: &ContextKey, p: KeyId| match tables.cnt(p) {
        0 => 0.0,
        n => f64::from(tables.inc(c, p)) / f64::from(n),
    };
    let [wb, wl, wr] = cfg.weights;
    let score: Box<dyn Fn(KeyId) -> f64> = match (both, left, right) {
        (Some(b), Some(l), Some(r)) => Box::new(move |p| wb * q(&b, p) + wl * q(&l, p) + wr * q(&r, p)),
        (_, Some(l), None) => Box::new(move |p| q(&l, p)),
        (_, None, Some(r)) => Box::new(move |p| q(&r, p)),
        _ => return None,
    };
    Some(readings.iter().map(|&p| score(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{decode_corpus, Sentence, Token};
    use crate::featstruct::{hierarchize, parse_linear, FeatureStructure};

    fn fs(p: &str) -> FeatureStructure {
        hierarchize(&parse_linear(p).unwrap()).unwrap()
    }

    fn tok(parses: &[&str]) -> Token {
        Token::new("w", parses.iter().map(|p| fs(p)).collect())
    }

    const DET: &str = "[[CAT DET][ROOT bir]]";
    const NOUN: &str = "[[CAT NOUN][ROOT ev]]";
    const VERB: &str = "[[CAT VERB][ROOT ev]]";

    fn corpus() -> Corpus {
        let mut sentences = Vec::new();
        for _ in 0..8 {
            sentences.push(Sentence::new(vec![tok(&[DET]), tok(&[NOUN])]));
        }
        sentences.push(Sentence::new(vec![tok(&[DET]), tok(&[VERB])]));
        for _ in 0..8 {
            sentences.push(Sentence::new(vec![tok(&[VERB]), tok(&[VERB])]));
        }
        sentences.push(Sentence::new(vec![tok(&[DET]), tok(&[NOUN, VERB])]));
        Corpus::new(sentences)
    }

    #[test]
    fn weak_reading_is_removed() {
        // lc=det: noun 8/8, verb 1/17; rc=boundary: noun 8/8, verb 9/17.
        // both: noun 1, verb 1/17. Scores 1 and 3/17, below 0.2.
        let out = prune_by_context_stats(
            &corpus(),
            &CtxStatsConfig::default(),
            &RelevanceMask::none(),
            &ProjectionTemplate::default(),
        )
        .unwrap();
        assert_eq!(out.sentences.last().unwrap().tokens[1].parses, vec![fs(NOUN)]);
        assert_eq!(out.token_count(), corpus().token_count());
    }

    #[test]
    fn zero_fraction_is_identity() {
        let cfg = CtxStatsConfig {
            fraction: 0.0,
            ..Default::default()
        };
        let c = corpus();
        let out = prune_by_context_stats(&c, &cfg, &RelevanceMask::none(), &ProjectionTemplate::default()).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn no_evidence_leaves_tokens_alone() {
        let c = Corpus::new(vec![Sentence::new(vec![tok(&[NOUN, VERB]), tok(&[NOUN, VERB])])]);
        let out = prune_by_context_stats(
            &c,
            &CtxStatsConfig::default(),
            &RelevanceMask::none(),
            &ProjectionTemplate::default(),
        )
        .unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn weighted_sum_arithmetic() {
        // Scores 0.4 and 0.05 with the default fraction: 0.05 < 0.08.
        let cfg = CtxStatsConfig::default();
        let doomed: Vec<bool> = [0.4, 0.05].iter().map(|&v| v < cfg.fraction * 0.4f64).collect();
        assert_eq!(doomed, [false, true]);
    }

    #[test]
    fn config_is_checked() {
        assert!(CtxStatsConfig {
            passes: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(CtxStatsConfig {
            weights: [0.5, 0.5, 0.5],
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(CtxStatsConfig {
            fraction: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(CtxStatsConfig::default().validate().is_ok());
    }

    /// Rebuilds the tables from scratch before every token.
    fn brute_force(c: &Corpus, cfg: &CtxStatsConfig) -> Corpus {
        let mut c = c.clone();
        for _ in 0..cfg.passes {
            for si in 0..c.sentences.len() {
                for k in 0..c.sentences[si].len() {
                    let mut keys = KeySpace::new();
                    let view = corpus_keys(&c, &RelevanceMask::none(), &mut keys);
                    let tables = oracle_tables(&view);
                    let doomed = doomed_readings(&view[si], k, &tables, cfg);
                    let tk = &view[si][k];
                    let token = &mut c.sentences[si].tokens[k];
                    let mut i = 0;
                    token.parses.retain(|_| {
                        let keep = !doomed.contains(&tk[i].focus());
                        i += 1;
                        keep
                    });
                }
            }
        }
        c
    }

    /// Window enumeration written out directly.
    fn oracle_tables(view: &[Vec<TokenKeys>]) -> Tables {
        let mut t = Tables::default();
        for s in view {
            let n = s.len() as isize;
            let slot = |j: isize| -> Option<crate::learner::Slot> {
                if j == -1 || j == n {
                    Some(crate::learner::Slot::BOUNDARY)
                } else if s[j as usize].len() == 1 {
                    Some(crate::learner::Slot::key(s[j as usize][0].focus()))
                } else {
                    None
                }
            };
            for (k, tk) in s.iter().enumerate() {
                if tk.len() != 1 {
                    continue;
                }
                let p = tk[0].focus();
                *t.count.entry(p).or_default() += 1;
                let (l, r) = (slot(k as isize - 1), slot(k as isize + 1));
                let a = crate::learner::Slot::ABSENT;
                let mut add = |shape, slots| *t.incontext.entry((ContextKey { shape, slots }, p)).or_default() += 1;
                if let Some(l) = l {
                    add(Shape::Left, [a, l, a, a]);
                }
                if let Some(r) = r {
                    add(Shape::Right, [a, a, r, a]);
                }
                if let (Some(l), Some(r)) = (l, r) {
                    add(Shape::Both, [a, l, r, a]);
                }
            }
        }
        t
    }

    #[test]
    fn on_the_fly_matches_brute_force() {
        let text = "\
a\t[[CAT DET][ROOT a]]
b\t[[CAT NOUN][ROOT b]]\t[[CAT VERB][ROOT b]]
c\t[[CAT VERB][ROOT c]]\t[[CAT ADJ][ROOT c]]
d\t[[CAT NOUN][ROOT d]]

a\t[[CAT DET][ROOT a]]
b\t[[CAT NOUN][ROOT b]]
c\t[[CAT VERB][ROOT c]]

e\t[[CAT ADJ][ROOT e]]\t[[CAT NOUN][ROOT e]]
a\t[[CAT DET][ROOT a]]
b\t[[CAT NOUN][ROOT b]]
";
        let c = decode_corpus(text, "t", None).unwrap().corpus;
        assert_eq!(c.token_count(), 10);
        for fraction in [0.1, 0.2, 0.5, 0.9] {
            let cfg = CtxStatsConfig {
                passes: 1,
                fraction,
                ..Default::default()
            };
            let fast =
                prune_by_context_stats(&c, &cfg, &RelevanceMask::none(), &ProjectionTemplate::identity()).unwrap();
            assert_eq!(fast, brute_force(&c, &cfg), "fraction {fraction}");
        }
    }
}
