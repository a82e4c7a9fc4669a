//! The disambiguation pipeline and its evaluation.

mod eval;
mod settings;

pub use eval::{evaluate, evaluate_with, Comparison, EvalReport, SentenceStats};
pub use settings::{Settings, TemplateSet};

use std::fmt::Write as _;

use crate::corpus::Corpus;
use crate::ctxstats::{prune_by_context_stats, CtxStatsConfig};
use crate::error::Result;
use crate::featstruct::{ProjectionTemplate, RelevanceMask};
use crate::rules::{run_pass, MatchMode, Rule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stage {
    Base,
    InitialChoose,
    InitialDelete,
    ContextStatistics,
    LearnedChoose,
    LearnedDelete,
    /// Further rounds of all steps until nothing changes.
    Settled,
}

impl Stage {
    /// The steps of one round, in order.
    pub const STEPS: [Stage; 5] = [
        Stage::InitialChoose,
        Stage::InitialDelete,
        Stage::ContextStatistics,
        Stage::LearnedChoose,
        Stage::LearnedDelete,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Stage::Base => "BASE",
            Stage::InitialChoose => "INITIAL CHOOSE",
            Stage::InitialDelete => "INITIAL DELETE",
            Stage::ContextStatistics => "CONTEXT STATISTICS",
            Stage::LearnedChoose => "LEARNED CHOOSE",
            Stage::LearnedDelete => "LEARNED DELETE",
            Stage::Settled => "SETTLED",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Stage::Base => "base",
            Stage::InitialChoose => "initial_choose",
            Stage::InitialDelete => "initial_delete",
            Stage::ContextStatistics => "context_statistics",
            Stage::LearnedChoose => "learned_choose",
            Stage::LearnedDelete => "learned_delete",
            Stage::Settled => "settled",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct PipelineConfig {
    pub hand_choose: Vec<Rule>,
    pub hand_delete: Vec<Rule>,
    pub learned_choose: Vec<Rule>,
    pub learned_delete: Vec<Rule>,
    pub masks: RelevanceMask,
    /// Projection used by context statistics.
    pub template: ProjectionTemplate,
    pub ctxstats: CtxStatsConfig,
}

/// Runs one step on full parses.
pub fn run_stage(stage: Stage, c: &mut Corpus, cfg: &PipelineConfig) -> Result<()> {
    match stage {
        Stage::InitialChoose => {
            run_pass(c, &cfg.hand_choose, MatchMode::AnyParse);
        }
        Stage::InitialDelete => {
            run_pass(c, &cfg.hand_delete, MatchMode::Unambiguous);
        }
        Stage::ContextStatistics => {
            *c = prune_by_context_stats(c, &cfg.ctxstats, &cfg.masks, &cfg.template)?;
        }
        Stage::LearnedChoose => {
            run_pass(c, &cfg.learned_choose, MatchMode::Unambiguous);
        }
        Stage::LearnedDelete => {
            run_pass(c, &cfg.learned_delete, MatchMode::Unambiguous);
        }
        Stage::Base | Stage::Settled => {}
    }
    Ok(())
}

pub fn disambiguate(c: &Corpus, cfg: &PipelineConfig) -> Result<Corpus> {
    disambiguate_traced(c, cfg, |_, _| {})
}

/// Runs the steps in order, calling `observe` with the corpus before the
/// first step and after each step of the first round. Rounds repeat until
/// one changes nothing; if later rounds changed anything, `observe` sees
/// the final corpus as [`Stage::Settled`].
pub fn disambiguate_traced(
    c: &Corpus,
    cfg: &PipelineConfig,
    mut observe: impl FnMut(Stage, &Corpus),
) -> Result<Corpus> {
    cfg.ctxstats.validate()?;
    let mut cur = c.clone();
    observe(Stage::Base, &cur);
    for stage in Stage::STEPS {
        run_stage(stage, &mut cur, cfg)?;
        observe(stage, &cur);
    }
    let settled_from = cur.parse_count();
    loop {
        let before = cur.parse_count();
        for stage in Stage::STEPS {
            run_stage(stage, &mut cur, cfg)?;
        }
        if cur.parse_count() == before {
            break;
        }
    }
    if cur.parse_count() != settled_from {
        observe(Stage::Settled, &cur);
    }
    Ok(cur)
}

/// Per-step metrics against `gold`.
pub fn trace_metrics(c: &Corpus, gold: &Corpus, cfg: &PipelineConfig) -> Result<(Corpus, Vec<(Stage, EvalReport)>)> {
    let mut rows = Vec::new();
    let mut err = None;
    let out = disambiguate_traced(c, cfg, |stage, cur| match evaluate(cur, gold) {
        Ok(r) => rows.push((stage, r)),
        Err(e) => {
            err.get_or_insert(e);
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok((out, rows)),
    }
}

/// The per-step table, one row per stage.
pub fn step_table(rows: &[(Stage, EvalReport)]) -> String {
    let mut out = format!(
        "{:<20}{:>10}{:>12}{:>10}{:>12}\n",
        "Step", "Parses", "Ambiguity", "Recall", "Precision"
    );
    for (stage, r) in rows {
        let _ = writeln!(
            out,
            "{:<20}{:>10}{:>12.3}{:>10.2}{:>12.2}",
            stage.label(),
            r.parses,
            r.ambiguity,
            100.0 * r.recall,
            100.0 * r.precision
        );
    }
    out
}

/// The machine-readable block for a trace: `step.<stage>.<metric>=value`.
pub fn step_key_values(rows: &[(Stage, EvalReport)]) -> String {
    rows.iter()
        .map(|(stage, r)| r.key_values(&format!("step.{}.", stage.key())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::decode_corpus;
    use crate::rules::{decode_rules, Provenance};

    fn corpus(text: &str) -> Corpus {
        decode_corpus(text, "c", None).unwrap().corpus
    }

    fn rules(text: &str, p: Provenance) -> Vec<Rule> {
        decode_rules(text, "r", p).unwrap()
    }

    const TEXT: &str = "\
bu\t[[CAT DET][ROOT bu]]\t[[CAT PRON][ROOT bu]]
ev\t[[CAT NOUN][ROOT ev]]\t[[CAT VERB][ROOT ev]]
güzel\t[[CAT ADJ][ROOT güzel]]\t[[CAT NOUN][ROOT güzel]]
.\t[[CAT PUNCT][ROOT .]]
";

    #[test]
    fn empty_configuration_is_identity() {
        let c = corpus(TEXT);
        let cfg = PipelineConfig {
            ctxstats: CtxStatsConfig {
                fraction: 0.0,
                ..Default::default()
            },
            ..Default::default()
        };
        assert_eq!(disambiguate(&c, &cfg).unwrap(), c);
    }

    #[test]
    fn learned_choose_unlocks_learned_delete() {
        // Hand choose fixes "bu" as DET; a learned choose after DET picks the
        // noun, which makes "güzel" the only ambiguous token with an
        // unambiguous left neighbor for the learned delete.
        let cfg = PipelineConfig {
            hand_choose: rules(
                "[llc:[ ],lc:[boundary],choose:[cat:det],rc:[ ],rrc:[ ]]",
                Provenance::HandChoose,
            ),
            learned_choose: rules(
                "[llc:[ ],lc:[[cat:det]],choose:[cat:noun],rc:[ ],rrc:[ ]]",
                Provenance::LearnedChoose,
            ),
            learned_delete: rules(
                "[llc:[ ],lc:[[cat:noun]],delete:[cat:noun],rc:[ ],rrc:[ ]]",
                Provenance::LearnedDelete,
            ),
            ctxstats: CtxStatsConfig {
                fraction: 0.0,
                ..Default::default()
            },
            ..Default::default()
        };
        let c = corpus(TEXT);
        let mut seen = Vec::new();
        let out = disambiguate_traced(&c, &cfg, |s, cur| seen.push((s, cur.parse_count()))).unwrap();
        assert_eq!(out.parse_count(), 4);
        assert_eq!(
            seen,
            [
                (Stage::Base, 7),
                (Stage::InitialChoose, 6),
                (Stage::InitialDelete, 6),
                (Stage::ContextStatistics, 6),
                (Stage::LearnedChoose, 5),
                (Stage::LearnedDelete, 4),
            ]
        );
    }

    #[test]
    fn step_order_is_observable() {
        let cfg = PipelineConfig {
            hand_choose: rules(
                "[llc:[ ],lc:[boundary],choose:[cat:det],rc:[ ],rrc:[ ]]",
                Provenance::HandChoose,
            ),
            learned_choose: rules(
                "[llc:[ ],lc:[[cat:det]],choose:[cat:noun],rc:[ ],rrc:[ ]]",
                Provenance::LearnedChoose,
            ),
            ctxstats: CtxStatsConfig {
                fraction: 0.0,
                ..Default::default()
            },
            ..Default::default()
        };
        let c = corpus(TEXT);
        let mut reversed = c.clone();
        for stage in [Stage::LearnedChoose, Stage::InitialChoose] {
            run_stage(stage, &mut reversed, &cfg).unwrap();
        }
        let mut forward = c.clone();
        for stage in [Stage::InitialChoose, Stage::LearnedChoose] {
            run_stage(stage, &mut forward, &cfg).unwrap();
        }
        assert_ne!(forward, reversed);
        assert_eq!(forward.parse_count(), 5);
    }

    #[test]
    fn second_run_changes_nothing() {
        let cfg = PipelineConfig {
            hand_choose: rules(
                "[llc:[ ],lc:[boundary],choose:[cat:det],rc:[ ],rrc:[ ]]",
                Provenance::HandChoose,
            ),
            learned_choose: rules(
                "[llc:[ ],lc:[[cat:det]],choose:[cat:noun],rc:[ ],rrc:[ ]]",
                Provenance::LearnedChoose,
            ),
            ..Default::default()
        };
        let once = disambiguate(&corpus(TEXT), &cfg).unwrap();
        assert_eq!(disambiguate(&once, &cfg).unwrap(), once);
    }

    #[test]
    fn trace_table_has_a_row_per_step() {
        let c = corpus(TEXT);
        let gold = corpus("bu\t[[CAT DET][ROOT bu]]\nev\t[[CAT NOUN][ROOT ev]]\ngüzel\t[[CAT ADJ][ROOT güzel]]\n.\t[[CAT PUNCT][ROOT .]]\n");
        let (_, rows) = trace_metrics(&c, &gold, &PipelineConfig::default()).unwrap();
        let table = step_table(&rows);
        assert_eq!(table.lines().count(), 7);
        assert!(table.lines().nth(1).unwrap().starts_with("BASE"));
        assert!(step_key_values(&rows).contains("step.base.ambiguity=1.750000\n"));
    }
}
