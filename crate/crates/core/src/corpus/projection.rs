use super::{Corpus, Sentence, Token};
use crate::featstruct::{project, FeatureStructure, ProjectionTemplate};

type TokenRefs = Vec<(FeatureStructure, Vec<usize>)>;

/// A corpus whose parses have been projected, with collapsed duplicates and
/// a way back to the original parses.
#[derive(Clone, Debug)]
pub struct ProjectedCorpus {
    pub corpus: Corpus,
    /// Per sentence, per token: each projected parse with the indices of the
    /// original parses it stands for.
    back_refs: Vec<Vec<TokenRefs>>,
}

impl ProjectedCorpus {
    pub fn new(original: &Corpus, t: &ProjectionTemplate) -> Self {
        let mut back_refs = Vec::with_capacity(original.sentences.len());
        let mut sentences = Vec::with_capacity(original.sentences.len());
        for s in &original.sentences {
            let mut s_refs = Vec::with_capacity(s.len());
            let mut tokens = Vec::with_capacity(s.len());
            for tok in &s.tokens {
                let mut refs: Vec<(FeatureStructure, Vec<usize>)> = Vec::new();
                for (i, p) in tok.parses.iter().enumerate() {
                    let proj = project(p, t);
                    match refs.iter_mut().find(|(q, _)| *q == proj) {
                        Some((_, idx)) => idx.push(i),
                        None => refs.push((proj, vec![i])),
                    }
                }
                tokens.push(Token {
                    surface: tok.surface.clone(),
                    parses: refs.iter().map(|(p, _)| p.clone()).collect(),
                    origin: tok.origin,
                    line: tok.line,
                });
                s_refs.push(refs);
            }
            sentences.push(Sentence::new(tokens));
            back_refs.push(s_refs);
        }
        ProjectedCorpus {
            corpus: Corpus {
                sentences,
                source: original.source.clone(),
            },
            back_refs,
        }
    }

    /// The original parses behind each surviving projected parse, in their
    /// original order. `original` must be the corpus this was built from.
    pub fn restore(&self, original: &Corpus) -> Corpus {
        let mut out = original.clone();
        for ((s_out, s_proj), s_refs) in out
            .sentences
            .iter_mut()
            .zip(&self.corpus.sentences)
            .zip(&self.back_refs)
        {
            for ((tok_out, tok_proj), refs) in s_out.tokens.iter_mut().zip(&s_proj.tokens).zip(s_refs) {
                let mut keep: Vec<usize> = tok_proj
                    .parses
                    .iter()
                    .filter_map(|p| refs.iter().find(|(q, _)| q == p))
                    .flat_map(|(_, idx)| idx.iter().copied())
                    .collect();
                keep.sort_unstable();
                keep.dedup();
                tok_out.parses = keep.into_iter().map(|i| tok_out.parses[i].clone()).collect();
            }
        }
        out
    }
}
