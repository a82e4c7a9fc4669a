//! Learning choose and delete rules from unambiguous contexts.

mod choose;
mod keys;
mod score;
mod tables;

use std::collections::HashSet;

pub use choose::{ChooseLearner, ChooseOutcome, LearnEvent, Step, NO_UNAMBIGUOUS_CONTEXTS};
pub use keys::{
    corpus_keys, distinct_focus, has_stem_variant, ContextKey, ContextSpec, KeyId, KeySpace, ParseKeys, Slot, TokenKeys,
};
pub use score::{score_counts, Counts, Score};
pub use tables::{CandidateEntry, Candidates, Tables};

use crate::corpus::{Corpus, ProjectedCorpus};
use crate::error::{Error, Result};
use crate::featstruct::{ProjectionTemplate, RelevanceMask};
use crate::rules::{run_pass, Action, LearnInfo, MatchMode, Provenance, Rule};

/// Per-rank score thresholds, the damping factor applied when no rank
/// qualifies, and the rank-1 threshold below which learning stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSchedule {
    pub thresholds: [f64; 4],
    pub damping: f64,
    pub stop_limit: f64,
}

impl Default for ThresholdSchedule {
    fn default() -> Self {
        ThresholdSchedule {
            thresholds: [4.0, 6.0, 9.0, 13.0],
            damping: 0.9,
            stop_limit: 7.0,
        }
    }
}

impl ThresholdSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::Config(format!(
                "damping must lie in (0, 1), got {}",
                self.damping
            )));
        }
        if !self.stop_limit.is_finite() || self.stop_limit <= 0.0 {
            return Err(Error::Config(format!(
                "stop limit must be positive, got {}",
                self.stop_limit
            )));
        }
        if self.thresholds.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("thresholds must be finite".into()));
        }
        if self.thresholds.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config(
                "thresholds must not decrease from rank 1 to rank 4".into(),
            ));
        }
        Ok(())
    }
}

/// Delete learning: a reading is deleted in a context when its relative
/// frequency there falls below `fraction` of the best reading's.
#[derive(Clone, Debug, PartialEq)]
pub struct DeleteLearnConfig {
    pub fraction: f64,
    pub template: ProjectionTemplate,
}

impl Default for DeleteLearnConfig {
    fn default() -> Self {
        DeleteLearnConfig {
            fraction: 0.2,
            template: ProjectionTemplate::default(),
        }
    }
}

/// Applies the hand-crafted rules to the full parses, projects with
/// `template`, and learns choose rules on the projection.
pub fn learn_choose(
    corpus: &Corpus,
    hand_choose: &[Rule],
    hand_delete: &[Rule],
    template: &ProjectionTemplate,
    masks: &RelevanceMask,
    schedule: ThresholdSchedule,
) -> Result<ChooseOutcome> {
    schedule.validate()?;
    let mut work = corpus.clone();
    run_pass(&mut work, hand_choose, MatchMode::AnyParse);
    run_pass(&mut work, hand_delete, MatchMode::Unambiguous);
    let projected = ProjectedCorpus::new(&work, template);
    Ok(ChooseLearner::new(projected.corpus, masks.clone(), schedule).run())
}

/// Learns delete rules after the hand-crafted and learned choose rules have
/// been applied. For each ambiguous token in an unambiguous context, a
/// reading whose `inc / cnt` is below `fraction` times the largest such
/// ratio among the token's readings yields a delete rule. Rules come out in
/// corpus order, without duplicates.
pub fn learn_delete(
    corpus: &Corpus,
    hand_choose: &[Rule],
    learned_choose: &[Rule],
    hand_delete: &[Rule],
    config: &DeleteLearnConfig,
    masks: &RelevanceMask,
) -> Result<Vec<Rule>> {
    if !(0.0..=1.0).contains(&config.fraction) {
        return Err(Error::Config(format!(
            "delete fraction must lie in [0, 1], got {}",
            config.fraction
        )));
    }
    let mut work = corpus.clone();
    run_pass(&mut work, hand_choose, MatchMode::AnyParse);
    run_pass(&mut work, learned_choose, MatchMode::Unambiguous);
    run_pass(&mut work, hand_delete, MatchMode::Unambiguous);
    let projected = ProjectedCorpus::new(&work, &config.template);
    let mut keys = KeySpace::new();
    let view = corpus_keys(&projected.corpus, masks, &mut keys);
    let tables = Tables::build(&view, ContextSpec::DELETE);

    let mut seen = HashSet::new();
    let mut rules = Vec::new();
    for s in &view {
        for k in 0..s.len() {
            let readings = distinct_focus(&s[k]);
            if readings.len() < 2 {
                continue;
            }
            for c in ContextKey::all_around(s, k, ContextSpec::DELETE) {
                let ratio: Vec<f64> = readings
                    .iter()
                    .map(|&p| match tables.cnt(p) {
                        0 => 0.0,
                        n => f64::from(tables.inc(&c, p)) / f64::from(n),
                    })
                    .collect();
                let max = ratio.iter().copied().fold(0.0, f64::max);
                if max <= 0.0 {
                    continue;
                }
                for (&p, &r) in readings.iter().zip(&ratio) {
                    if r < config.fraction * max && seen.insert((c, p)) {
                        let mut rule = c.to_rule(Action::Delete, p, &keys, Provenance::LearnedDelete);
                        rule.info = Some(LearnInfo {
                            iteration: rules.len() + 1,
                            score: r,
                        });
                        rules.push(rule);
                    }
                }
            }
        }
    }
    Ok(rules)
}
