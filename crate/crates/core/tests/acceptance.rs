//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every check prints one line whether it passes or not.

use std::collections::{BTreeSet, HashMap};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use morphdis::corpus::{group_collocations, CollocationPattern, Corpus, Sentence, Token};
use morphdis::data;
use morphdis::featstruct::{
    hierarchize, parse_linear, FeatureConstraint, FeatureStructure, Position, ProjectionTemplate, RelevanceMask, Value,
};
use morphdis::learner::{
    learn_choose, learn_delete, score_counts, ChooseLearner, ContextKey, Counts, DeleteLearnConfig, KeyId, Score, Slot,
    Step, Tables, ThresholdSchedule, NO_UNAMBIGUOUS_CONTEXTS,
};
use morphdis::pipeline::{disambiguate, evaluate, PipelineConfig};
use morphdis::rules::{
    decode_rules, run_pass, run_sentence, Action, ContextConstraint, MatchMode, Provenance, Rule, Shape,
};
use morphdis::synth::{self, SynthConfig};
use morphdis::unknown::SuffixLexicon;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check, Duration);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn fs(linear: &str) -> FeatureStructure {
    hierarchize(&parse_linear(linear).unwrap()).unwrap()
}

fn atoms(pairs: &[(&str, &str)]) -> FeatureStructure {
    pairs.iter().fold(FeatureStructure::new(), |f, (n, v)| f.with(n, *v))
}

/// Parses the random corpora draw from, including two derived forms.
const POOL: &[&str] = &[
    "[[CAT NOUN][ROOT ev][CASE NOM]]",
    "[[CAT NOUN][ROOT ev][CASE ACC]]",
    "[[CAT NOUN][ROOT ev][CASE DAT]]",
    "[[CAT VERB][ROOT ev][TAM1 PAST]]",
    "[[CAT ADJ][ROOT iyi]]",
    "[[CAT DET][ROOT bir]]",
    "[[CAT ADVERB][ROOT bir]]",
    "[[CAT POSTP][ROOT gibi][SUBCAT NOM]]",
    "[[CAT VERB][ROOT gel][CONV NOUN INF][CASE ACC]]",
    "[[CAT NOUN][ROOT masa][CASE NOM][CONV VERB NONE][TAM1 PRES]]",
];

fn pool() -> Vec<FeatureStructure> {
    POOL.iter().map(|p| fs(p)).collect()
}

/// A random sentence whose tokens carry 1 to `max_parses` distinct parses
/// from the first `width` pool entries.
fn random_sentence(
    rng: &mut ChaCha8Rng,
    pool: &[FeatureStructure],
    width: usize,
    len: usize,
    max_parses: usize,
) -> Sentence {
    let tokens = (0..len)
        .map(|i| {
            let n = rng.gen_range(1..=max_parses);
            let parses = pool[..width].choose_multiple(rng, n).cloned().collect();
            Token::new(format!("w{i}"), parses)
        })
        .collect();
    Sentence::new(tokens)
}

fn random_corpus(rng: &mut ChaCha8Rng, pool: &[FeatureStructure], tokens: usize, max_parses: usize) -> Corpus {
    let mut sentences = Vec::new();
    let mut left = tokens;
    while left > 0 {
        let len = rng.gen_range(1..=8).min(left);
        sentences.push(random_sentence(rng, pool, pool.len(), len, max_parses));
        left -= len;
    }
    Corpus::new(sentences)
}

// 1

fn metric_identity() -> Check {
    let pool = pool();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for round in 0..1000 {
        let mut pred = Vec::new();
        let mut gold = Vec::new();
        let (mut tokens, mut parses, mut hits) = (0usize, 0usize, 0usize);
        for _ in 0..rng.gen_range(1..6) {
            let len = rng.gen_range(1..10);
            let s = random_sentence(&mut rng, &pool, pool.len(), len, 4);
            let g: Vec<Token> = s
                .tokens
                .iter()
                .map(|t| Token::new(t.surface.clone(), vec![pool.choose(&mut rng).unwrap().clone()]))
                .collect();
            for (p, g) in s.tokens.iter().zip(&g) {
                tokens += 1;
                parses += p.parses.len();
                hits += usize::from(p.parses.iter().any(|f| f == &g.parses[0]));
            }
            pred.push(s);
            gold.push(Sentence::new(g));
        }
        let (pred, gold) = (Corpus::new(pred), Corpus::new(gold));
        let r = evaluate(&pred, &gold).map_err(|e| e.to_string())?;
        ensure!(
            (r.tokens, r.parses, r.correct) == (tokens, parses, hits),
            "round {round}: counts {:?} vs oracle {:?}",
            (r.tokens, r.parses, r.correct),
            (tokens, parses, hits)
        );
        ensure!(
            (r.precision - r.recall / r.ambiguity).abs() <= 1e-9,
            "round {round}: precision {} recall {} ambiguity {}",
            r.precision,
            r.recall,
            r.ambiguity
        );
        let same = evaluate(&gold, &gold).map_err(|e| e.to_string())?;
        ensure!(
            (same.ambiguity, same.recall, same.precision) == (1.0, 1.0, 1.0),
            "round {round}: gold against itself gave {:?}",
            (same.ambiguity, same.recall, same.precision)
        );
    }
    Ok(())
}

// 2

fn published_base_row() -> Check {
    // 1000 tokens carrying 1828 parses, every token keeping its gold parse.
    let pool = pool();
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for i in 0..1000 {
        let n = if i < 828 { 2 } else { 1 };
        pred.push(Token::new("w", pool[..n].to_vec()));
        gold.push(Token::new("w", vec![pool[0].clone()]));
    }
    let r = evaluate(
        &Corpus::new(vec![Sentence::new(pred)]),
        &Corpus::new(vec![Sentence::new(gold)]),
    )
    .map_err(|e| e.to_string())?;
    ensure!(
        r.recall == 1.0 && (r.ambiguity - 1.828).abs() < 1e-12,
        "setup gave {r:?}"
    );
    let precision = (r.precision * 100.0 * 100.0).round() / 100.0;
    ensure!((precision - 54.70).abs() < 1e-9, "precision {precision}");
    let published = 54.69;
    ensure!(
        (precision - published).abs() <= 0.05 + 1e-9,
        "{precision} vs {published}"
    );
    Ok(())
}

// 3

/// Exact fraction `n / d` with `d > 0`.
#[derive(Clone, Copy, Debug)]
struct Frac(i128, i128);

impl Frac {
    fn lt(self, o: Frac) -> bool {
        self.0 * o.1 < o.0 * self.1
    }
}

/// Direct evaluation: every competitor with a nonzero count is a candidate
/// for P_max, ranked by (cnt_i / cnt_j) * inc_j; an unseen reading is taken
/// to have been seen once.
fn score_oracle(inc_i: u32, cnt_i: u32, competitors: &[(u32, u32)]) -> Frac {
    let cnt_i = i128::from(cnt_i.max(1));
    let mut p_max: Option<(usize, Frac)> = None;
    for (j, &(inc_j, cnt_j)) in competitors.iter().enumerate() {
        if cnt_j == 0 {
            continue;
        }
        let v = Frac(cnt_i * i128::from(inc_j), i128::from(cnt_j));
        if p_max.is_none_or(|(_, best)| best.lt(v)) {
            p_max = Some((j, v));
        }
    }
    match p_max {
        Some((j, v)) if competitors[j].0 > 0 => Frac(i128::from(inc_i) * v.1 - v.0, v.1),
        _ => Frac(i128::from(inc_i), 1),
    }
}

fn scoring_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ctx = ContextKey {
        shape: Shape::Left,
        slots: [Slot::ABSENT, Slot::key(KeyId(99)), Slot::ABSENT, Slot::ABSENT],
    };
    for round in 0..10_000 {
        let n = rng.gen_range(0..7u32);
        let mut t = Tables::default();
        let mut raw = Vec::new();
        for k in 0..=n {
            let cnt = if rng.gen_bool(0.15) { 0 } else { rng.gen_range(1..80) };
            let inc = if rng.gen_bool(0.2) {
                0
            } else {
                rng.gen_range(0..=cnt.max(1) * 2)
            };
            if cnt > 0 {
                t.count.insert(KeyId(k), cnt);
            }
            if inc > 0 {
                t.incontext.insert((ctx, KeyId(k)), inc);
            }
            raw.push((inc, cnt));
        }
        let competitors: Vec<KeyId> = (1..=n).map(KeyId).collect();
        let got = t.score(&ctx, KeyId(0), competitors.iter().copied());
        let want = score_oracle(raw[0].0, raw[0].1, &raw[1..]);
        ensure!(
            i128::from(got.num) * want.1 == want.0 * i128::from(got.den),
            "round {round}: {raw:?} gave {}/{} but direct evaluation gives {}/{}",
            got.num,
            got.den,
            want.0,
            want.1
        );
        let counts: Vec<Counts> = raw[1..].iter().map(|&(inc, cnt)| Counts { inc, cnt }).collect();
        let own = Counts {
            inc: raw[0].0,
            cnt: raw[0].1,
        };
        ensure!(score_counts(own, &counts) == got, "round {round}");
    }
    let example = score_counts(Counts { inc: 6, cnt: 10 }, &[Counts { inc: 2, cnt: 5 }]);
    ensure!(example == Score::integer(2), "6 - (10/5)*2 gave {example}");
    Ok(())
}

// 4

fn table_maintenance() -> Check {
    let pool = pool();
    let planted =
        decode_rules(data::SYNTHETIC_PLANTED, "planted", Provenance::HandChoose).map_err(|e| e.to_string())?;
    let synthetic = ProjectionTemplate::parse(data::SYNTHETIC_TEMPLATES, "templates").map_err(|e| e.to_string())?;
    let schedule = ThresholdSchedule {
        thresholds: [2.0, 3.0, 4.0, 5.0],
        damping: 0.7,
        stop_limit: 1.0,
    };
    let mut learned = 0;
    let mut steps = 0;
    for run in 0..120u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + run);
        let corpus = if run % 2 == 0 {
            let cfg = SynthConfig {
                sentences: 25,
                min_len: 3,
                max_len: 8,
                seed: run,
                ..Default::default()
            };
            let s = synth::generate(&planted, &cfg).map_err(|e| e.to_string())?;
            morphdis::corpus::ProjectedCorpus::new(&s.corpus, &synthetic).corpus
        } else {
            let tokens = rng.gen_range(20..=200);
            random_corpus(&mut rng, &pool, tokens, 3)
        };
        ensure!(
            corpus.token_count() <= 200,
            "run {run}: {} tokens",
            corpus.token_count()
        );
        let masks = match run % 3 {
            0 => RelevanceMask::none(),
            1 => RelevanceMask::none().with_dropped(Position::Lc, &["CASE"]),
            _ => RelevanceMask::none()
                .with_dropped(Position::Rc, &["ROOT"])
                .with_dropped(Position::Llc, &["CASE"]),
        };
        let mut l = ChooseLearner::new(corpus, masks, schedule);
        loop {
            let step = l.step();
            steps += 1;
            let (t, c) = l.rebuild();
            ensure!(l.tables() == &t, "run {run}: tables drifted after step {steps}");
            ensure!(l.candidates() == &c, "run {run}: candidates drifted after step {steps}");
            match step {
                Step::Finished => break,
                Step::Learned(_) => learned += 1,
                _ => {}
            }
        }
    }
    ensure!(learned >= 100, "only {learned} rules learned across all runs");
    Ok(())
}

// 5

/// Flattens a structure into path facts. `STEM/` marks that a nested level
/// exists, `=` marks an atom.
fn facts(f: &FeatureStructure, prefix: &str, out: &mut BTreeSet<String>) {
    for (name, value) in f.iter() {
        match value {
            Value::Atom(a) => {
                out.insert(format!("{prefix}{name}={a}"));
            }
            Value::Struct(s) => {
                let p = format!("{prefix}{name}/");
                out.insert(p.clone());
                facts(s, &p, out);
            }
        }
    }
}

fn subsumes_oracle(c: &FeatureStructure, f: &FeatureStructure) -> bool {
    let (mut a, mut b) = (BTreeSet::new(), BTreeSet::new());
    facts(c, "", &mut a);
    facts(f, "", &mut b);
    a.is_subset(&b)
}

fn random_structure(rng: &mut ChaCha8Rng, depth: usize) -> FeatureStructure {
    const NAMES: [&str; 4] = ["CAT", "CASE", "AGR", "ROOT"];
    const VALUES: [&str; 3] = ["A", "B", "C"];
    let mut f = FeatureStructure::new();
    for n in NAMES {
        if rng.gen_bool(0.6) {
            f.insert(n, *VALUES.choose(rng).unwrap());
        }
    }
    if depth > 1 && rng.gen_bool(0.5) {
        f.insert("STEM", random_structure(rng, depth - 1));
    }
    f
}

/// Drops features at random, keeping the rest.
fn weaken(rng: &mut ChaCha8Rng, f: &FeatureStructure) -> FeatureStructure {
    let mut out = FeatureStructure::new();
    for (name, value) in f.iter() {
        if rng.gen_bool(0.35) {
            continue;
        }
        match value {
            Value::Atom(a) => out.insert(name, a.as_str()),
            Value::Struct(s) => out.insert(name, weaken(rng, s)),
        }
    }
    out
}

fn subsumption_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut yes, mut no) = (0, 0);
    for round in 0..10_000 {
        let depth = rng.gen_range(1..=3);
        let f = random_structure(&mut rng, depth);
        let c = match round % 3 {
            0 => weaken(&mut rng, &f),
            1 => {
                let mut c = weaken(&mut rng, &f);
                c.insert(["CAT", "CASE", "ROOT"][round % 3], ["A", "B", "C"][round % 3]);
                c
            }
            _ => random_structure(&mut rng, depth),
        };
        let want = subsumes_oracle(&c, &f);
        let got = FeatureConstraint::from_structure(c.clone()).subsumes(&f);
        ensure!(got == want, "round {round}: {c:?} over {f:?}: got {got}, want {want}");
        if want {
            yes += 1;
        } else {
            no += 1;
        }
    }
    ensure!(yes > 1000 && no > 1000, "unbalanced sample: {yes} subsumed, {no} not");
    Ok(())
}

// 6

fn synthetic_recovery() -> Check {
    let planted =
        decode_rules(data::SYNTHETIC_PLANTED, "planted", Provenance::HandChoose).map_err(|e| e.to_string())?;
    let t = ProjectionTemplate::parse(data::SYNTHETIC_TEMPLATES, "templates").map_err(|e| e.to_string())?;
    let s = synth::generate(
        &planted,
        &SynthConfig {
            sentences: 500,
            seed: 0,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let base = s.corpus.ambiguity();
    ensure!((1.6..=2.0).contains(&base), "injected ambiguity {base}");
    let (train, test) = s.split(400);
    ensure!(
        test.corpus.sentences.len() == 100,
        "held-out slice has {} sentences",
        test.corpus.sentences.len()
    );
    let masks = RelevanceMask::none();
    let choose =
        learn_choose(&train.corpus, &[], &[], &t, &masks, ThresholdSchedule::default()).map_err(|e| e.to_string())?;
    let delete = learn_delete(
        &train.corpus,
        &[],
        &choose.rules,
        &[],
        &DeleteLearnConfig {
            fraction: 0.2,
            template: t.clone(),
        },
        &masks,
    )
    .map_err(|e| e.to_string())?;
    let recovered = planted
        .iter()
        .filter(|p| choose.rules.iter().any(|r| r.generalizes(p)))
        .count();
    let cfg = PipelineConfig {
        learned_choose: choose.rules,
        learned_delete: delete,
        masks,
        template: t,
        ..Default::default()
    };
    let out = disambiguate(&test.corpus, &cfg).map_err(|e| e.to_string())?;
    let r = evaluate(&out, &test.gold).map_err(|e| e.to_string())?;
    println!(
        "    base ambiguity {base:.3}; held-out recall {:.4} ambiguity {:.4}; planted rules recovered {recovered}/5",
        r.recall, r.ambiguity
    );
    ensure!(r.recall >= 0.95, "recall {}", r.recall);
    ensure!(r.ambiguity <= 1.10, "ambiguity {}", r.ambiguity);
    ensure!(recovered >= 4, "{recovered} of 5 planted rules recovered");
    Ok(())
}

// 7

fn worked_examples() -> Check {
    let g = hierarchize(
        &parse_linear("[[CAT VERB][ROOT gel][SENSE POS][CONV NOUN DIK][AGR 3SG][POSS 1SG][CASE LOC][CONV ADJ REL]]")
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let verb = atoms(&[("CAT", "VERB"), ("ROOT", "gel"), ("SENSE", "POS")]);
    let noun = atoms(&[
        ("CAT", "NOUN"),
        ("AGR", "3SG"),
        ("POSS", "1SG"),
        ("CASE", "LOC"),
        ("SUFFIX", "DIK"),
    ])
    .with("STEM", verb);
    let want = atoms(&[("CAT", "ADJ"), ("SUFFIX", "REL")]).with("STEM", noun);
    ensure!(g == want, "geldiGimdeki: {g:?}");

    let m = hierarchize(
        &parse_linear("[[CAT NOUN][ROOT masa][AGR 3SG][POSS NONE][CASE NOM][CONV VERB NONE][TAM1 PRES][AGR 3SG]]")
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let stem = atoms(&[
        ("CAT", "NOUN"),
        ("ROOT", "masa"),
        ("AGR", "3SG"),
        ("POSS", "NONE"),
        ("CASE", "NOM"),
    ]);
    let want = atoms(&[("CAT", "VERB"), ("TAM1", "PRES"), ("AGR", "3SG"), ("SUFFIX", "NONE")]).with("STEM", stem);
    ensure!(m == want, "masa+dir: {m:?}");

    let rule = decode_rules(
        "[llc:[ ],lc:[ ],\n  choose:[case:abl],\n  rc:[[cat:postp,subcat:abl]],rrc:[ ]]\n",
        "ablative",
        Provenance::HandChoose,
    )
    .map_err(|e| e.to_string())?;
    let abl = atoms(&[
        ("CAT", "NOUN"),
        ("ROOT", "ev"),
        ("AGR", "3SG"),
        ("POSS", "NONE"),
        ("CASE", "ABL"),
    ]);
    let readings = vec![
        atoms(&[
            ("CAT", "NOUN"),
            ("ROOT", "evde"),
            ("AGR", "3SG"),
            ("POSS", "NONE"),
            ("CASE", "NOM"),
        ]),
        abl.clone(),
        atoms(&[("CAT", "ADVERB"), ("ROOT", "evden")]),
    ];
    let mut s = Sentence::new(vec![
        Token::new("evden", readings),
        Token::new(
            "sonra",
            vec![atoms(&[("CAT", "POSTP"), ("ROOT", "sonra"), ("SUBCAT", "ABL")])],
        ),
    ]);
    run_sentence(&mut s, &rule, MatchMode::AnyParse);
    ensure!(
        s.tokens[0].parses == vec![abl],
        "ablative window: {:?}",
        s.tokens[0].parses
    );

    let got: BTreeSet<String> = SuffixLexicon::turkish()
        .guess("talkshowumun")
        .iter()
        .map(|f| f.canonical_key())
        .collect();
    let nominal = |root: &str, poss: &str, case: &str| {
        atoms(&[
            ("CAT", "NOUN"),
            ("ROOT", root),
            ("AGR", "3SG"),
            ("POSS", poss),
            ("CASE", case),
        ])
        .canonical_key()
    };
    let want: BTreeSet<String> = [
        nominal("talkshowumun", "NONE", "NOM"),
        nominal("talkshowumu", "2SG", "NOM"),
        nominal("talkshowum", "NONE", "GEN"),
        nominal("talkshowum", "2SG", "NOM"),
        nominal("talkshowu", "1SG", "GEN"),
        nominal("talkshow", "1SG", "GEN"),
    ]
    .into();
    ensure!(got == want, "talkshowumun: {got:?}");

    let patterns =
        CollocationPattern::parse_file(data::TURKISH_COLLOCATIONS, "collocations").map_err(|e| e.to_string())?;
    let verb = |root: &str, sense: &str, tam: &str| {
        atoms(&[
            ("CAT", "VERB"),
            ("ROOT", root),
            ("SENSE", sense),
            ("TAM1", tam),
            ("AGR", "3SG"),
        ])
    };
    let pair = |a: (&str, FeatureStructure), b: (&str, FeatureStructure)| {
        group_collocations(
            &Sentence::new(vec![Token::new(a.0, vec![a.1]), Token::new(b.0, vec![b.1])]),
            &patterns,
        )
    };
    let kosa = pair(("koşa", verb("koS", "POS", "OPT")), ("koşa", verb("koS", "POS", "OPT")));
    let want =
        atoms(&[("CAT", "ADVERB"), ("TYPE", "MANNER"), ("SUFFIX", "DUP1")]).with("STEM", verb("koS", "POS", "OPT"));
    ensure!(
        kosa.tokens.len() == 1 && kosa.tokens[0].surface == "koşa koşa",
        "koşa koşa: {kosa:?}"
    );
    ensure!(
        kosa.tokens[0].parses == vec![want],
        "koşa koşa: {:?}",
        kosa.tokens[0].parses
    );
    let yapar = pair(
        ("yapar", verb("yap", "POS", "AORIST")),
        ("yapmaz", verb("yap", "NEG", "AORIST")),
    );
    let want =
        atoms(&[("CAT", "ADVERB"), ("TYPE", "TEMP"), ("SUFFIX", "DUP-AOR")]).with("STEM", verb("yap", "POS", "AORIST"));
    ensure!(
        yapar.tokens.len() == 1 && yapar.tokens[0].surface == "yapar yapmaz",
        "yapar yapmaz: {yapar:?}"
    );
    ensure!(
        yapar.tokens[0].parses == vec![want],
        "yapar yapmaz: {:?}",
        yapar.tokens[0].parses
    );
    Ok(())
}

// 8

fn random_constraint(rng: &mut ChaCha8Rng) -> FeatureConstraint {
    const CHOICES: &[&[(&str, &str)]] = &[
        &[("CAT", "NOUN")],
        &[("CAT", "VERB")],
        &[("CAT", "ADJ")],
        &[("CAT", "DET")],
        &[("CAT", "ADVERB")],
        &[("CAT", "POSTP")],
        &[("CASE", "NOM")],
        &[("CASE", "ACC")],
        &[("CAT", "NOUN"), ("CASE", "DAT")],
        &[("ROOT", "ev")],
        &[("ROOT", "bir")],
    ];
    let pick = CHOICES.choose(rng).unwrap();
    let f = atoms(pick);
    if rng.gen_bool(0.1) {
        return FeatureConstraint::from_structure(FeatureStructure::new().with("STEM", f));
    }
    FeatureConstraint::from_structure(f)
}

fn random_rules(rng: &mut ChaCha8Rng, action: Action, provenance: Provenance) -> Vec<Rule> {
    (0..rng.gen_range(0..6))
        .map(|_| {
            let mut r = Rule::new(action, random_constraint(rng), provenance);
            for p in Position::CONTEXT {
                if rng.gen_bool(0.45) {
                    let c = if rng.gen_bool(0.1) {
                        ContextConstraint::Boundary
                    } else {
                        ContextConstraint::Parse(random_constraint(rng))
                    };
                    r = r.with_context(p, c);
                }
            }
            r
        })
        .collect()
}

fn no_empty_token(c: &Corpus, what: &str) -> std::result::Result<(), TestCaseError> {
    if c.tokens().any(|t| t.parses.is_empty()) {
        return Err(TestCaseError::fail(format!("{what} emptied a parse set")));
    }
    Ok(())
}

fn safety_invariants() -> Check {
    let pool = pool();
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 300,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    runner
        .run(&(any::<u64>(), 1usize..120), |(seed, tokens)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let corpus = random_corpus(&mut rng, &pool, tokens, 4);
            let bound = corpus.parse_count() - corpus.token_count();
            for mode in [MatchMode::AnyParse, MatchMode::Unambiguous] {
                let mut c = corpus.clone();
                let mut rules = random_rules(&mut rng, Action::Choose, Provenance::HandChoose);
                rules.extend(random_rules(&mut rng, Action::Delete, Provenance::HandDelete));
                let applications = run_pass(&mut c, &rules, mode);
                prop_assert!(applications <= bound, "{applications} applications, bound {bound}");
                no_empty_token(&c, "run_pass")?;
            }
            let cfg = PipelineConfig {
                hand_choose: random_rules(&mut rng, Action::Choose, Provenance::HandChoose),
                hand_delete: random_rules(&mut rng, Action::Delete, Provenance::HandDelete),
                learned_choose: random_rules(&mut rng, Action::Choose, Provenance::LearnedChoose),
                learned_delete: random_rules(&mut rng, Action::Delete, Provenance::LearnedDelete),
                ..Default::default()
            };
            let once = disambiguate(&corpus, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
            no_empty_token(&once, "disambiguate")?;
            let twice = disambiguate(&once, &cfg).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&once.sentences, &twice.sentences);
            let out = learn_choose(
                &corpus,
                &cfg.hand_choose,
                &cfg.hand_delete,
                &ProjectionTemplate::default(),
                &RelevanceMask::none(),
                ThresholdSchedule {
                    thresholds: [1.0, 2.0, 3.0, 4.0],
                    damping: 0.5,
                    stop_limit: 0.5,
                },
            )
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
            no_empty_token(&out.corpus, "choose learning")?;
            Ok(())
        })
        .map_err(|e| e.to_string())
}

// 9

fn degenerate_input() -> Check {
    let pool = pool();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sentences: Vec<Sentence> = (0..40).map(|_| random_sentence(&mut rng, &pool, 8, 6, 3)).collect();
    let mut corpus = Corpus::new(sentences);
    for t in corpus.sentences.iter_mut().flat_map(|s| s.tokens.iter_mut()) {
        if t.parses.len() == 1 {
            let extra = pool.iter().find(|p| **p != t.parses[0]).unwrap().clone();
            t.parses.push(extra);
        }
    }
    ensure!(
        corpus.tokens().all(|t| t.parses.len() > 1),
        "corpus is not fully ambiguous"
    );
    let t = ProjectionTemplate::identity();
    let masks = RelevanceMask::none();
    let out = learn_choose(&corpus, &[], &[], &t, &masks, ThresholdSchedule::default()).map_err(|e| e.to_string())?;
    ensure!(out.rules.is_empty(), "{} rules learned", out.rules.len());
    ensure!(
        out.diagnostic.as_deref() == Some(NO_UNAMBIGUOUS_CONTEXTS),
        "diagnostic {:?}",
        out.diagnostic
    );
    ensure!(
        out.damping_rounds == 0 && out.log.len() == 1,
        "did not stop at once: {:?}",
        out.log
    );
    let delete = learn_delete(
        &corpus,
        &[],
        &[],
        &[],
        &DeleteLearnConfig {
            fraction: 0.2,
            template: t,
        },
        &masks,
    )
    .map_err(|e| e.to_string())?;
    ensure!(delete.is_empty(), "{} delete rules learned", delete.len());

    // No candidate can reach a threshold of 20, so learning only damps.
    let mut sentences = vec![Sentence::new(vec![
        Token::new("a", vec![pool[5].clone()]),
        Token::new("b", pool[..2].to_vec()),
    ])];
    for _ in 0..5 {
        sentences.push(Sentence::new(vec![
            Token::new("a", vec![pool[5].clone()]),
            Token::new("b", vec![pool[0].clone()]),
        ]));
    }
    let mut rounds_seen = HashMap::new();
    for t1 in [20.0, 10.0, 7.5, 50.0] {
        let schedule = ThresholdSchedule {
            thresholds: [t1, t1 + 10.0, t1 + 20.0, t1 + 30.0],
            damping: 0.9,
            stop_limit: 7.0,
        };
        let out = learn_choose(
            &Corpus::new(sentences.clone()),
            &[],
            &[],
            &ProjectionTemplate::default(),
            &masks,
            schedule,
        )
        .map_err(|e| e.to_string())?;
        ensure!(out.rules.is_empty(), "t1={t1}: learned {}", out.rules.len());
        let closed_form = ((7.0f64 / t1).ln() / 0.9f64.ln()).ceil() as usize;
        ensure!(
            out.damping_rounds == closed_form,
            "t1={t1}: {} rounds, closed form {closed_form}",
            out.damping_rounds
        );
        rounds_seen.insert(t1 as u32, out.damping_rounds);
    }
    ensure!(rounds_seen[&20] == 10, "t1=20 took {} rounds", rounds_seen[&20]);
    Ok(())
}

fn main() -> ExitCode {
    let checks: [Criterion; 9] = [
        ("metric identity", metric_identity, Duration::from_secs(5)),
        ("published base row", published_base_row, Duration::MAX),
        ("scoring oracle", scoring_oracle, Duration::from_secs(10)),
        ("incremental tables", table_maintenance, Duration::from_secs(60)),
        ("subsumption oracle", subsumption_oracle, Duration::from_secs(5)),
        ("synthetic recovery", synthetic_recovery, Duration::from_secs(120)),
        ("worked examples", worked_examples, Duration::from_secs(1)),
        ("safety invariants", safety_invariants, Duration::from_secs(30)),
        ("degenerate input", degenerate_input, Duration::MAX),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check, limit)) in checks.into_iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(r) => r,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let took = start.elapsed();
        let result = result.and_then(|()| {
            if took > limit {
                Err(format!("took {took:.2?}, limit {limit:?}"))
            } else {
                Ok(())
            }
        });
        match result {
            Ok(()) => println!("criterion {} {name} ... PASS ({took:.2?})", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {} {name} ... FAIL ({took:.2?}): {e}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
