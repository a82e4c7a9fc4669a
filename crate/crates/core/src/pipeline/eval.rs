use std::fmt::{self, Write as _};

use crate::corpus::{Corpus, ProjectedCorpus, Token};
use crate::error::{Error, Location, Result};
use crate::featstruct::ProjectionTemplate;

/// How predicted parses are compared with gold ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Comparison {
    /// Structural equality of the full parses.
    #[default]
    Full,
    /// Equality after projecting both sides with the template.
    Projected(ProjectionTemplate),
}

/// Sentence-level outcome counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SentenceStats {
    pub total: usize,
    /// Every token correct and down to one parse.
    pub unambiguous_correct: usize,
    /// Every token correct, some still ambiguous.
    pub ambiguous_correct: usize,
    /// Sentences with exactly 1, 2, 3, and more than 3 incorrect tokens.
    pub incorrect: [usize; 4],
}

impl SentenceStats {
    pub fn correct(&self) -> usize {
        self.unambiguous_correct + self.ambiguous_correct
    }

    pub fn percent(&self, n: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * n as f64 / self.total as f64
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub tokens: usize,
    pub parses: usize,
    pub correct: usize,
    pub ambiguity: f64,
    pub recall: f64,
    pub precision: f64,
    pub sentences: SentenceStats,
}

impl EvalReport {
    fn from_counts(tokens: usize, parses: usize, correct: usize, sentences: SentenceStats) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        EvalReport {
            tokens,
            parses,
            correct,
            ambiguity: ratio(parses, tokens),
            recall: ratio(correct, tokens),
            precision: ratio(correct, parses),
            sentences,
        }
    }

    /// `prefix.name=value` lines.
    pub fn key_values(&self, prefix: &str) -> String {
        let s = &self.sentences;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{prefix}{k}={v}");
        };
        kv("tokens", self.tokens.to_string());
        kv("parses", self.parses.to_string());
        kv("correct", self.correct.to_string());
        kv("ambiguity", format!("{:.6}", self.ambiguity));
        kv("recall", format!("{:.6}", self.recall));
        kv("precision", format!("{:.6}", self.precision));
        kv("sentences", s.total.to_string());
        kv("sentences.unambiguous_correct", s.unambiguous_correct.to_string());
        kv("sentences.ambiguous_correct", s.ambiguous_correct.to_string());
        kv("sentences.correct", s.correct().to_string());
        for (label, n) in ["1", "2", "3", "gt3"].iter().zip(s.incorrect) {
            kv(&format!("sentences.incorrect.{label}"), n.to_string());
        }
        out
    }

    /// Sentence-level table: counts with percentages.
    pub fn sentence_table(&self) -> String {
        let s = &self.sentences;
        let cell = |n: usize| format!("{n} ({:.2}%)", s.percent(n));
        let cols = [
            ("UA/C", s.unambiguous_correct),
            ("A/C", s.ambiguous_correct),
            ("C", s.correct()),
            ("1", s.incorrect[0]),
            ("2", s.incorrect[1]),
            ("3", s.incorrect[2]),
            (">3", s.incorrect[3]),
        ];
        let mut head = format!("{:<10}", "Sentences");
        let mut row = format!("{:<10}", s.total);
        for (name, n) in cols {
            let c = cell(n);
            let w = c.len().max(name.len()) + 2;
            let _ = write!(head, "{name:>w$}");
            let _ = write!(row, "{c:>w$}");
        }
        format!("{head}\n{row}\n")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<10} {}", "Tokens", self.tokens)?;
        writeln!(f, "{:<10} {}", "Parses", self.parses)?;
        writeln!(f, "{:<10} {:.3}", "Ambiguity", self.ambiguity)?;
        writeln!(f, "{:<10} {:.2}%", "Recall", 100.0 * self.recall)?;
        writeln!(f, "{:<10} {:.2}%", "Precision", 100.0 * self.precision)?;
        writeln!(f)?;
        f.write_str(&self.sentence_table())
    }
}

/// Scores `pred` against `gold`. The corpora must hold the same sentences
/// and surfaces, and every gold token exactly one parse.
pub fn evaluate(pred: &Corpus, gold: &Corpus) -> Result<EvalReport> {
    evaluate_with(pred, gold, &Comparison::Full)
}

pub fn evaluate_with(pred: &Corpus, gold: &Corpus, cmp: &Comparison) -> Result<EvalReport> {
    check_alignment(pred, gold)?;
    if let Comparison::Projected(t) = cmp {
        let p = ProjectedCorpus::new(pred, t).corpus;
        let g = ProjectedCorpus::new(gold, t).corpus;
        return evaluate_with(&p, &g, &Comparison::Full);
    }
    let (mut tokens, mut parses, mut correct) = (0, 0, 0);
    let mut stats = SentenceStats::default();
    for (ps, gs) in pred.sentences.iter().zip(&gold.sentences) {
        let mut wrong = 0;
        let mut ambiguous = false;
        for (pt, gt) in ps.tokens.iter().zip(&gs.tokens) {
            tokens += 1;
            parses += pt.parses.len();
            ambiguous |= pt.parses.len() > 1;
            if pt.parses.contains(&gt.parses[0]) {
                correct += 1;
            } else {
                wrong += 1;
            }
        }
        stats.total += 1;
        match wrong {
            0 if ambiguous => stats.ambiguous_correct += 1,
            0 => stats.unambiguous_correct += 1,
            n => stats.incorrect[n.min(4) - 1] += 1,
        }
    }
    Ok(EvalReport::from_counts(tokens, parses, correct, stats))
}

fn check_alignment(pred: &Corpus, gold: &Corpus) -> Result<()> {
    let at = |t: Option<&Token>| {
        Location::new(
            if gold.source.is_empty() { "gold" } else { &gold.source },
            t.map_or(0, |t| t.line),
        )
    };
    for (i, (ps, gs)) in pred.sentences.iter().zip(&gold.sentences).enumerate() {
        for (j, gt) in gs.tokens.iter().enumerate() {
            let Some(pt) = ps.tokens.get(j) else {
                return Err(Error::Alignment {
                    location: at(Some(gt)),
                    message: format!(
                        "sentence {} of the prediction ends before token '{}'",
                        i + 1,
                        gt.surface
                    ),
                });
            };
            if pt.surface != gt.surface {
                return Err(Error::Alignment {
                    location: at(Some(gt)),
                    message: format!("predicted '{}' where gold has '{}'", pt.surface, gt.surface),
                });
            }
            if gt.parses.len() != 1 {
                return Err(Error::Alignment {
                    location: at(Some(gt)),
                    message: format!("gold token '{}' has {} parses, expected 1", gt.surface, gt.parses.len()),
                });
            }
        }
        if ps.len() > gs.len() {
            return Err(Error::Alignment {
                location: at(gs.tokens.last()),
                message: format!(
                    "sentence {} of the prediction has extra token '{}'",
                    i + 1,
                    ps.tokens[gs.len()].surface
                ),
            });
        }
    }
    if pred.sentences.len() != gold.sentences.len() {
        let last = gold.sentences.last().and_then(|s| s.tokens.last());
        return Err(Error::Alignment {
            location: at(last),
            message: format!(
                "prediction has {} sentences, gold has {}",
                pred.sentences.len(),
                gold.sentences.len()
            ),
        });
    }
    Ok(())
}
