//! Synthetic ambiguous corpora with known answers.
//!
//! True tags follow a sparse random chain. Planted rules with a single
//! `lc` or `rc` context are imposed on the chain as hard constraints, so
//! every planted rule holds in the gold data. Ambiguity is injected by
//! adding readings whose tags could not occur next to either true
//! neighbor.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Sentence, Token};
use crate::error::{Error, Result};
use crate::featstruct::{FeatureConstraint, FeatureStructure, Position};
use crate::rules::{Action, ContextConstraint, Rule, Shape};

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub sentences: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Share of tokens that receive extra readings.
    pub ambiguous_rate: f64,
    /// Relative weights of adding 1, 2 or 3 extra readings.
    pub extra_weights: [f64; 3],
    /// Successors per tag in the random chain.
    pub successors: usize,
    pub roots_per_tag: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            sentences: 500,
            min_len: 4,
            max_len: 12,
            ambiguous_rate: 0.5,
            extra_weights: [0.55, 0.3, 0.15],
            successors: 4,
            roots_per_tag: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Synthetic {
    pub corpus: Corpus,
    pub gold: Corpus,
}

impl Synthetic {
    /// The first `n` sentences and the rest.
    pub fn split(&self, n: usize) -> (Synthetic, Synthetic) {
        let cut = |c: &Corpus, r: std::ops::Range<usize>| Corpus::new(c.sentences[r].to_vec());
        let n = n.min(self.corpus.sentences.len());
        let all = self.corpus.sentences.len();
        (
            Synthetic {
                corpus: cut(&self.corpus, 0..n),
                gold: cut(&self.gold, 0..n),
            },
            Synthetic {
                corpus: cut(&self.corpus, n..all),
                gold: cut(&self.gold, n..all),
            },
        )
    }
}

/// The tag inventory: category plus the one feature the synthetic
/// projection template keeps.
pub fn tags() -> Vec<FeatureStructure> {
    let mut out: Vec<FeatureStructure> = ["DET", "NUM", "ADJ", "ADVERB", "CONN", "POSTP", "QUES", "INTERJ"]
        .iter()
        .map(|c| FeatureStructure::new().with("CAT", *c))
        .collect();
    for case in ["NOM", "ACC", "DAT", "LOC", "ABL", "GEN", "INS"] {
        out.push(FeatureStructure::new().with("CAT", "NOUN").with("CASE", case));
    }
    for case in ["NOM", "ACC", "DAT", "LOC", "ABL", "GEN"] {
        out.push(FeatureStructure::new().with("CAT", "PRON").with("CASE", case));
    }
    for tam in ["PAST", "PRES", "FUT", "AOR", "NARR", "PROG", "COND", "NEC", "OPT"] {
        out.push(FeatureStructure::new().with("CAT", "VERB").with("TAM1", tam));
    }
    out
}

/// The full parse of a tag for a given root.
fn full_parse(tag: &FeatureStructure, root: &str) -> FeatureStructure {
    let mut fs = FeatureStructure::new()
        .with("CAT", tag.cat().unwrap_or("X"))
        .with("ROOT", root);
    match tag.cat() {
        Some("NOUN") => {
            fs.insert("AGR", "3SG");
            fs.insert("POSS", "NONE");
        }
        Some("VERB") => {
            fs.insert("SENSE", "POS");
            fs.insert("AGR", "3SG");
        }
        _ => {}
    }
    for (name, v) in tag.iter().skip(1) {
        fs.insert(name, v.clone());
    }
    fs
}

struct Chain {
    /// `succ[0]` is the sentence start; tag `t` is index `t + 1`.
    succ: Vec<BTreeSet<usize>>,
    /// Transition weights other than 1, by (row, tag).
    weight: BTreeMap<(usize, usize), f64>,
}

impl Chain {
    fn random(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Chain {
        let ids: Vec<usize> = (0..n).collect();
        let succ = (0..=n)
            .map(|_| ids.choose_multiple(rng, k.min(n)).copied().collect())
            .collect();
        Chain {
            succ,
            weight: BTreeMap::new(),
        }
    }

    /// Expected share of tokens carrying each tag in sentences of `len`
    /// tokens.
    fn occupancy(&self, n: usize, len: usize) -> Vec<f64> {
        let mut dist = vec![0.0; n + 1];
        dist[0] = 1.0;
        let mut total = vec![0.0; n];
        for _ in 0..len {
            let mut next = vec![0.0; n + 1];
            for (row, p) in dist.iter().enumerate() {
                let s = &self.succ[row];
                let mass: f64 = s.iter().map(|&t| self.w(row, t)).sum();
                for &t in s {
                    next[t + 1] += p * self.w(row, t) / mass;
                }
            }
            for t in 0..n {
                total[t] += next[t + 1];
            }
            dist = next;
        }
        total.iter().map(|v| v / len as f64).collect()
    }

    fn w(&self, row: usize, t: usize) -> f64 {
        self.weight.get(&(row, t)).copied().unwrap_or(1.0)
    }

    fn sample(&self, prev: Option<usize>, rng: &mut ChaCha8Rng) -> usize {
        let row = prev.map_or(0, |p| p + 1);
        let options: Vec<usize> = self.succ[row].iter().copied().collect();
        *options
            .choose_weighted(rng, |&t| self.w(row, t))
            .expect("every tag has a successor with positive weight")
    }

    /// Right contexts of choose rules can only follow their targets; they
    /// get half the mass of each target's row so they stay frequent.
    fn favor_right_contexts(&mut self, planted: &[Planted]) {
        for p in planted {
            let Planted::RightChoose(ctx, target) = p else {
                continue;
            };
            for &t in target {
                let row = t + 1;
                let (hit, rest): (Vec<usize>, Vec<usize>) = self.succ[row].iter().partition(|b| ctx.contains(b));
                if hit.is_empty() || rest.is_empty() {
                    continue;
                }
                let w = rest.len() as f64 / hit.len() as f64;
                for b in hit {
                    self.weight.insert((row, b), w);
                }
            }
        }
    }

    fn can_follow(&self, prev: Option<usize>, t: usize) -> bool {
        self.succ[prev.map_or(0, |p| p + 1)].contains(&t)
    }
}

enum Planted {
    /// Tags matching `ctx` are followed only by tags matching `target`.
    LeftChoose(Option<BTreeSet<usize>>, BTreeSet<usize>),
    /// Tags matching `ctx` are preceded only by tags matching `target`.
    RightChoose(BTreeSet<usize>, BTreeSet<usize>),
    LeftDelete(Option<BTreeSet<usize>>, BTreeSet<usize>),
    RightDelete(BTreeSet<usize>, BTreeSet<usize>),
}

impl Planted {
    /// Tags that must be frequent for the rule to be observable.
    fn tags(&self) -> impl Iterator<Item = &BTreeSet<usize>> {
        let (ctx, target) = match self {
            Planted::LeftChoose(c, t) | Planted::LeftDelete(c, t) => (c.as_ref(), t),
            Planted::RightChoose(c, t) | Planted::RightDelete(c, t) => (Some(c), t),
        };
        ctx.into_iter().chain(std::iter::once(target))
    }
}

fn matching(c: &FeatureConstraint, tags: &[FeatureStructure]) -> BTreeSet<usize> {
    (0..tags.len()).filter(|&i| c.subsumes(&tags[i])).collect()
}

fn interpret(r: &Rule, tags: &[FeatureStructure]) -> Result<Planted> {
    let bad = |why: &str| Error::Config(format!("planted rule {}: {why}", r.record()));
    let target = matching(&r.target, tags);
    if target.is_empty() {
        return Err(bad("target matches no tag"));
    }
    let side = match r.shape() {
        Shape::Left => Position::Lc,
        Shape::Right => Position::Rc,
        _ => return Err(bad("only single lc or rc contexts can be planted")),
    };
    let ctx = match r.context(side) {
        Some(ContextConstraint::Parse(c)) => {
            let m = matching(c, tags);
            if m.is_empty() {
                return Err(bad("context matches no tag"));
            }
            Some(m)
        }
        Some(ContextConstraint::Boundary) if side == Position::Lc => None,
        _ => return Err(bad("a right boundary cannot be planted")),
    };
    Ok(match (side, r.action) {
        (Position::Lc, Action::Choose) => Planted::LeftChoose(ctx, target),
        (Position::Lc, Action::Delete) => Planted::LeftDelete(ctx, target),
        (_, Action::Choose) => Planted::RightChoose(ctx.expect("checked above"), target),
        (_, Action::Delete) => Planted::RightDelete(ctx.expect("checked above"), target),
    })
}

fn rows(ctx: &Option<BTreeSet<usize>>) -> Vec<usize> {
    match ctx {
        None => vec![0],
        Some(set) => set.iter().map(|t| t + 1).collect(),
    }
}

fn impose(chain: &mut Chain, p: &Planted, rng: &mut ChaCha8Rng) {
    match p {
        Planted::LeftChoose(ctx, target) => {
            for row in rows(ctx) {
                let s = &mut chain.succ[row];
                s.retain(|t| target.contains(t));
                if s.is_empty() {
                    let pick: Vec<usize> = target.iter().copied().collect();
                    s.insert(*pick.choose(rng).expect("target is non-empty"));
                }
            }
        }
        Planted::RightChoose(ctx, target) => {
            for (row, s) in chain.succ.iter_mut().enumerate() {
                let allowed = row > 0 && target.contains(&(row - 1));
                if !allowed {
                    s.retain(|t| !ctx.contains(t));
                }
            }
            for &b in ctx {
                if !target.iter().any(|&t| chain.succ[t + 1].contains(&b)) {
                    let pick: Vec<usize> = target.iter().copied().collect();
                    chain.succ[pick.choose(rng).expect("target is non-empty") + 1].insert(b);
                }
            }
        }
        Planted::LeftDelete(ctx, target) => {
            for row in rows(ctx) {
                chain.succ[row].retain(|t| !target.contains(t));
            }
        }
        Planted::RightDelete(ctx, target) => {
            for &d in target {
                chain.succ[d + 1].retain(|t| !ctx.contains(t));
            }
        }
    }
}

fn holds(chain: &Chain, p: &Planted) -> bool {
    match p {
        Planted::LeftChoose(ctx, target) => rows(ctx).iter().all(|&r| chain.succ[r].is_subset(target)),
        Planted::RightChoose(ctx, target) => chain
            .succ
            .iter()
            .enumerate()
            .all(|(row, s)| (row > 0 && target.contains(&(row - 1))) || s.is_disjoint(ctx)),
        Planted::LeftDelete(ctx, target) => rows(ctx).iter().all(|&r| chain.succ[r].is_disjoint(target)),
        Planted::RightDelete(ctx, target) => target.iter().all(|&d| chain.succ[d + 1].is_disjoint(ctx)),
    }
}

/// Draws chains until one satisfies every planted rule and gives each tag a
/// planted rule mentions at least half the average share of tokens. Those
/// tags are added to extra successor sets before the rules are imposed.
fn draw_chain(planted: &[Planted], n: usize, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Chain> {
    const ATTEMPTS: usize = 1000;
    let len = (cfg.min_len + cfg.max_len) / 2;
    for _ in 0..ATTEMPTS {
        let mut chain = Chain::random(n, cfg.successors, rng);
        let rows: Vec<usize> = (0..=n).collect();
        for set in planted.iter().flat_map(Planted::tags) {
            for &t in set {
                for &row in rows.choose_multiple(rng, cfg.successors) {
                    chain.succ[row].insert(t);
                }
            }
        }
        for p in planted {
            impose(&mut chain, p, rng);
        }
        if let Some(i) = planted.iter().position(|p| !holds(&chain, p)) {
            return Err(Error::Config(format!(
                "planted rule {} conflicts with an earlier one",
                i + 1
            )));
        }
        if chain.succ.iter().any(BTreeSet::is_empty) {
            continue;
        }
        chain.favor_right_contexts(planted);
        let occ = chain.occupancy(n, len);
        let frequent = |set: &BTreeSet<usize>| set.iter().map(|&t| occ[t]).sum::<f64>() >= 0.5 / n as f64;
        if planted.iter().all(|p| p.tags().all(frequent)) {
            return Ok(chain);
        }
    }
    Err(Error::Config(format!(
        "no tag chain in {ATTEMPTS} attempts makes every planted rule frequent enough"
    )))
}

/// Generates a corpus and its gold standard. Planted rules must have a
/// single `lc` or `rc` context; a left boundary refers to sentence starts.
pub fn generate(planted: &[Rule], cfg: &SynthConfig) -> Result<Synthetic> {
    if cfg.min_len == 0 || cfg.min_len > cfg.max_len {
        return Err(Error::Config(format!(
            "sentence lengths must satisfy 1 <= min <= max, got {}..{}",
            cfg.min_len, cfg.max_len
        )));
    }
    if !(0.0..=1.0).contains(&cfg.ambiguous_rate) {
        return Err(Error::Config(format!(
            "ambiguous rate must lie in [0, 1], got {}",
            cfg.ambiguous_rate
        )));
    }
    let tags = tags();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let planted: Vec<Planted> = planted.iter().map(|r| interpret(r, &tags)).collect::<Result<_>>()?;
    let chain = draw_chain(&planted, tags.len(), cfg, &mut rng)?;

    let total: f64 = cfg.extra_weights.iter().sum();
    let mut corpus = Vec::with_capacity(cfg.sentences);
    let mut gold = Vec::with_capacity(cfg.sentences);
    for _ in 0..cfg.sentences {
        let len = rng.gen_range(cfg.min_len..=cfg.max_len);
        let mut seq = Vec::with_capacity(len);
        let mut prev = None;
        for _ in 0..len {
            let t = chain.sample(prev, &mut rng);
            seq.push(t);
            prev = Some(t);
        }
        let mut toks = Vec::with_capacity(len);
        let mut gold_toks = Vec::with_capacity(len);
        for (i, &t) in seq.iter().enumerate() {
            let root = format!(
                "{}{}",
                tags[t].cat().unwrap_or("x").to_lowercase(),
                rng.gen_range(0..cfg.roots_per_tag)
            );
            let truth = full_parse(&tags[t], &root);
            let mut parses = vec![truth.clone()];
            if rng.gen_bool(cfg.ambiguous_rate) {
                let mut x = rng.gen_range(0.0..total);
                let mut extra = 1;
                for (k, w) in cfg.extra_weights.iter().enumerate() {
                    if x < *w {
                        extra = k + 1;
                        break;
                    }
                    x -= w;
                }
                let prev = i.checked_sub(1).map(|j| seq[j]);
                let next = seq.get(i + 1).copied();
                let mut pool: Vec<usize> = (0..tags.len())
                    .filter(|&d| {
                        d != t && !chain.can_follow(prev, d) && next.is_none_or(|n| !chain.can_follow(Some(d), n))
                    })
                    .collect();
                pool.shuffle(&mut rng);
                parses.extend(pool.iter().take(extra).map(|&d| full_parse(&tags[d], &root)));
                parses.shuffle(&mut rng);
            }
            toks.push(Token::new(root.clone(), parses));
            gold_toks.push(Token::new(root, vec![truth]));
        }
        corpus.push(Sentence::new(toks));
        gold.push(Sentence::new(gold_toks));
    }
    Ok(Synthetic {
        corpus: Corpus::new(corpus),
        gold: Corpus::new(gold),
    })
}
