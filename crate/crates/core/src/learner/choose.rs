use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rayon::prelude::*;

use super::keys::{corpus_keys, ContextKey, ContextSpec, KeyId, KeySpace, ParseKeys, TokenKeys};
use super::score::Score;
use super::tables::{Candidates, Tables};
use super::ThresholdSchedule;
use crate::corpus::Corpus;
use crate::featstruct::{Position, RelevanceMask};
use crate::rules::{run_sentence, Action, LearnInfo, MatchMode, Provenance, Rule};

pub const NO_UNAMBIGUOUS_CONTEXTS: &str = "lack of sufficient unambiguous contexts";

#[derive(Clone, Debug, PartialEq)]
pub enum LearnEvent {
    Learned {
        iteration: usize,
        rank: u8,
        score: f64,
        /// Threshold of the rule's rank when it was selected.
        threshold: f64,
        changed: usize,
        rule: String,
    },
    /// The best candidate changed nothing and was set aside.
    Rejected {
        rule: String,
    },
    Damped {
        round: usize,
        thresholds: [f64; 4],
    },
    Stopped {
        reason: String,
    },
}

impl fmt::Display for LearnEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LearnEvent::Learned {
                iteration,
                rank,
                score,
                threshold,
                changed,
                rule,
            } => {
                write!(
                    f,
                    "iter={iteration} rank={rank} score={score} threshold={threshold} changed={changed} rule={rule}"
                )
            }
            LearnEvent::Rejected { rule } => write!(f, "rejected rule={rule}"),
            LearnEvent::Damped { round, thresholds: t } => {
                write!(f, "damp round={round} thresholds={},{},{},{}", t[0], t[1], t[2], t[3])
            }
            LearnEvent::Stopped { reason } => write!(f, "stop reason={reason}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Learned(Rule),
    Rejected(Rule),
    Damped([f64; 4]),
    Finished,
}

/// Greedy choose-rule learner over a projected corpus. Each step applies the
/// best qualifying candidate everywhere it matches and updates the tables
/// for the affected windows only.
pub struct ChooseLearner {
    corpus: Corpus,
    masks: RelevanceMask,
    keys: KeySpace,
    view: Vec<Vec<TokenKeys>>,
    tables: Tables,
    candidates: Candidates,
    schedule: ThresholdSchedule,
    thresholds: [f64; 4],
    blacklist: HashSet<(ContextKey, KeyId)>,
    rules: Vec<Rule>,
    log: Vec<LearnEvent>,
    damping_rounds: usize,
    finished: bool,
    diagnostic: Option<String>,
}

const SHAPES: ContextSpec = ContextSpec::CHOOSE;

impl ChooseLearner {
    pub fn new(corpus: Corpus, masks: RelevanceMask, schedule: ThresholdSchedule) -> Self {
        let mut keys = KeySpace::new();
        let view = corpus_keys(&corpus, &masks, &mut keys);
        let tables = Tables::build(&view, SHAPES);
        let candidates = Candidates::build(&view, SHAPES);
        let diagnostic = tables.count.is_empty().then(|| NO_UNAMBIGUOUS_CONTEXTS.to_string());
        if let Some(d) = &diagnostic {
            log::warn!("choose learning: {d}");
        }
        ChooseLearner {
            corpus,
            masks,
            keys,
            view,
            tables,
            candidates,
            thresholds: schedule.thresholds,
            schedule,
            blacklist: HashSet::new(),
            rules: Vec::new(),
            log: Vec::new(),
            damping_rounds: 0,
            finished: false,
            diagnostic,
        }
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn tables(&self) -> &Tables {
        &self.tables
    }

    pub fn candidates(&self) -> &Candidates {
        &self.candidates
    }

    pub fn keys(&self) -> &KeySpace {
        &self.keys
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn thresholds(&self) -> [f64; 4] {
        self.thresholds
    }

    /// Tables and candidates recomputed from the current corpus.
    pub fn rebuild(&self) -> (Tables, Candidates) {
        let mut keys = self.keys.clone();
        let view = corpus_keys(&self.corpus, &self.masks, &mut keys);
        (Tables::build(&view, SHAPES), Candidates::build(&view, SHAPES))
    }

    /// The best candidate of the most specific rank that reaches its
    /// threshold. Ties go to the rule whose text sorts first.
    pub fn select(&self) -> Option<(Rule, Score)> {
        let scored: Vec<(ContextKey, KeyId, u8, Score)> = self
            .candidates
            .entries
            .par_iter()
            .filter(|(key, _)| !self.blacklist.contains(key))
            .map(|((c, p), e)| {
                let rank = c.shape.rank().expect("learned shapes are ranked");
                (*c, *p, rank, self.tables.score(c, *p, e.competitors.keys().copied()))
            })
            .collect();
        let mut best: [Option<Score>; 4] = [None; 4];
        for (_, _, rank, s) in &scored {
            let b = &mut best[*rank as usize - 1];
            if b.is_none_or(|b| *s > b) {
                *b = Some(*s);
            }
        }
        let rank =
            (1..=4u8).find(|&r| best[r as usize - 1].is_some_and(|s| s.at_least(self.thresholds[r as usize - 1])))?;
        let top = best[rank as usize - 1]?;
        scored
            .iter()
            .filter(|(_, _, r, s)| *r == rank && *s == top)
            .map(|(c, p, _, s)| (self.to_rule(c, *p), *s))
            .min_by(|a, b| a.0.record().cmp(&b.0.record()))
    }

    fn to_rule(&self, c: &ContextKey, p: KeyId) -> Rule {
        c.to_rule(Action::Choose, p, &self.keys, Provenance::LearnedChoose)
    }

    pub fn step(&mut self) -> Step {
        if self.finished {
            return Step::Finished;
        }
        if self.diagnostic.is_some() {
            return self.finish(NO_UNAMBIGUOUS_CONTEXTS.to_string());
        }
        match self.select() {
            Some((mut rule, score)) => {
                let changed = self.apply(&rule);
                if changed == 0 {
                    let key = self.key_of(&rule);
                    self.blacklist.insert(key);
                    self.log.push(LearnEvent::Rejected { rule: rule.record() });
                    return Step::Rejected(rule);
                }
                let iteration = self.rules.len() + 1;
                rule.info = Some(LearnInfo {
                    iteration,
                    score: score.value(),
                });
                self.log.push(LearnEvent::Learned {
                    iteration,
                    rank: rule.rank().unwrap_or(0),
                    score: score.value(),
                    threshold: rule.rank().map_or(0.0, |r| self.thresholds[r as usize - 1]),
                    changed,
                    rule: rule.record(),
                });
                log::debug!("learned {rule} score={score}");
                self.rules.push(rule.clone());
                Step::Learned(rule)
            }
            None => {
                for t in &mut self.thresholds {
                    *t *= self.schedule.damping;
                }
                self.damping_rounds += 1;
                self.log.push(LearnEvent::Damped {
                    round: self.damping_rounds,
                    thresholds: self.thresholds,
                });
                if self.thresholds[0] < self.schedule.stop_limit {
                    let reason = format!(
                        "rank-1 threshold {} below stop limit {}",
                        self.thresholds[0], self.schedule.stop_limit
                    );
                    return self.finish(reason);
                }
                Step::Damped(self.thresholds)
            }
        }
    }

    fn finish(&mut self, reason: String) -> Step {
        self.finished = true;
        self.log.push(LearnEvent::Stopped { reason });
        Step::Finished
    }

    fn key_of(&self, rule: &Rule) -> (ContextKey, KeyId) {
        let lookup = |fs| self.keys.get(fs).expect("rule built from interned keys");
        let slots = std::array::from_fn(|i| match &rule.contexts[i] {
            None => super::keys::Slot::ABSENT,
            Some(crate::rules::ContextConstraint::Boundary) => super::keys::Slot::BOUNDARY,
            Some(crate::rules::ContextConstraint::Parse(c)) => super::keys::Slot::key(lookup(c.as_structure())),
        });
        (
            ContextKey {
                shape: rule.shape(),
                slots,
            },
            lookup(rule.target.as_structure()),
        )
    }

    /// Applies `rule` across the corpus, then brings every sentence it changed
    /// back to a fixpoint of all rules learned so far, and updates tables and
    /// candidates. Returns the number of tokens that lost readings.
    fn apply(&mut self, rule: &Rule) -> usize {
        let masks = &self.masks;
        let keys = &self.keys;
        let single = std::slice::from_ref(rule);
        let mut all = self.rules.clone();
        all.push(rule.clone());
        let updates: Vec<(usize, Vec<TokenKeys>, BTreeSet<usize>, usize)> = self
            .corpus
            .sentences
            .par_iter_mut()
            .zip(self.view.par_iter_mut())
            .enumerate()
            .filter_map(|(si, (s, v))| {
                let before: Vec<usize> = s.tokens.iter().map(|t| t.parses.len()).collect();
                if run_sentence(s, single, MatchMode::Unambiguous) == 0 {
                    return None;
                }
                run_sentence(s, &all, MatchMode::Unambiguous);
                let old = v.clone();
                let mut affected = BTreeSet::new();
                let mut changed = 0;
                for (k, t) in s.tokens.iter().enumerate() {
                    if t.parses.len() == before[k] {
                        continue;
                    }
                    changed += 1;
                    v[k] = t.parses.iter().map(|p| lookup_keys(p, masks, keys)).collect();
                    affected.extend(k.saturating_sub(2)..=(k + 2).min(s.tokens.len() - 1));
                }
                Some((si, old, affected, changed))
            })
            .collect();
        let mut total = 0;
        for (si, old, affected, changed) in updates {
            let new = &self.view[si];
            for &k in &affected {
                self.tables.add_target(&old, k, SHAPES, -1);
                self.candidates.add_target(&old, k, SHAPES, -1);
            }
            for &k in &affected {
                self.tables.add_target(new, k, SHAPES, 1);
                self.candidates.add_target(new, k, SHAPES, 1);
            }
            total += changed;
        }
        total
    }

    pub fn run(mut self) -> ChooseOutcome {
        while self.step() != Step::Finished {}
        ChooseOutcome {
            rules: self.rules,
            log: self.log,
            damping_rounds: self.damping_rounds,
            diagnostic: self.diagnostic,
            corpus: self.corpus,
        }
    }
}

fn lookup_keys(fs: &crate::featstruct::FeatureStructure, masks: &RelevanceMask, keys: &KeySpace) -> ParseKeys {
    let get = |f: crate::featstruct::FeatureStructure| keys.get(&f).expect("surviving parses were interned");
    ParseKeys {
        at: Position::ALL.map(|p| get(masks.apply(p, fs))),
        stem_rc: fs.stem().map(|s| get(masks.apply(Position::Rc, s))),
        stem_focus: fs.stem().map(|s| get(masks.apply(Position::Focus, s))),
    }
}

/// Result of choose learning: the rules in learning order, the log, and the
/// projected corpus as learning left it.
#[derive(Clone, Debug)]
pub struct ChooseOutcome {
    pub rules: Vec<Rule>,
    pub log: Vec<LearnEvent>,
    pub damping_rounds: usize,
    pub diagnostic: Option<String>,
    pub corpus: Corpus,
}
