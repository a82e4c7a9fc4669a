use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use log::{info, warn};

use morphdis::corpus::{decode_corpus, encode_corpus, group_collocations, CollocationPattern, Corpus};
use morphdis::featstruct::RelevanceMask;
use morphdis::learner::{learn_choose, learn_delete, DeleteLearnConfig};
use morphdis::pipeline::{
    disambiguate, evaluate, evaluate_with, step_key_values, step_table, trace_metrics, Comparison, PipelineConfig,
    Settings, TemplateSet,
};
use morphdis::rules::{decode_rules, encode_rules, Provenance, Rule};
use morphdis::synth::{generate, SynthConfig};
use morphdis::unknown::SuffixLexicon;
use morphdis::{data, Error};

#[derive(Parser)]
#[command(
    name = "morphdis",
    version,
    about = "Morphological disambiguation with hand-written and learned constraint rules"
)]
struct Cli {
    /// Worker threads for per-sentence work (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Log more to standard error (-v info, -vv debug).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Group collocations and guess unknown words.
    Preprocess(PreprocessArgs),
    /// Learn choose and delete rules from an ambiguous training corpus.
    Learn(LearnArgs),
    /// Run the full pipeline on a corpus.
    Disambiguate(DisambiguateArgs),
    /// Score a disambiguated corpus against a gold standard.
    Evaluate(EvaluateArgs),
    /// Generate an ambiguous corpus with planted rules and its gold standard.
    GenSynthetic(GenSyntheticArgs),
}

#[derive(Args)]
struct PreprocessArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Collocation patterns.
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// Suffix lexicon for guessing words without analyses.
    #[arg(long)]
    suffixes: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Options shared by learning and disambiguation.
#[derive(Args)]
struct Common {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    hand_choose: Option<PathBuf>,
    #[arg(long)]
    hand_delete: Option<PathBuf>,
    /// Settings file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Projection templates; overrides the config file.
    #[arg(long)]
    templates: Option<PathBuf>,
    /// Relevance masks; overrides the config file.
    #[arg(long)]
    masks: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    common: Common,
    /// Directory for learned_choose.rules, learned_delete.rules and learn.log.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DisambiguateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    learned_choose: Option<PathBuf>,
    #[arg(long)]
    learned_delete: Option<PathBuf>,
    /// Gold standard; enables the per-step report.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Disambiguated corpus (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-step report (default: standard output, which then requires --out).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// The disambiguated corpus.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Compare parses after projecting with the choose templates.
    #[arg(long)]
    templates: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenSyntheticArgs {
    /// Planted rules (default: the bundled set).
    #[arg(long)]
    planted: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    sentences: usize,
    /// Directory for corpus.txt and gold.txt.
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_env("RUST_LOG")
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start {jobs} workers: {e}")))?;
    }
    match cli.command {
        Command::Preprocess(a) => preprocess(a),
        Command::Learn(a) => learn(a),
        Command::Disambiguate(a) => run_pipeline(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::GenSynthetic(a) => gen_synthetic(a),
    }
}

fn read(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|source| {
        Failure::Data(Error::Io {
            path: path.display().to_string(),
            source,
        })
    })
}

fn write(path: &Path, text: &str) -> Outcome<()> {
    fs::write(path, text).map_err(|source| {
        Failure::Data(Error::Io {
            path: path.display().to_string(),
            source,
        })
    })
}

fn emit(path: Option<&Path>, text: &str) -> Outcome<()> {
    match path {
        Some(p) => write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|source| {
                    Failure::Data(Error::Io {
                        path: "<stdout>".into(),
                        source,
                    })
                })
        }
    }
}

fn name(path: &Path) -> String {
    path.display().to_string()
}

fn load_corpus(path: &Path, lexicon: Option<&SuffixLexicon>) -> Outcome<Corpus> {
    let decoded = decode_corpus(&read(path)?, &name(path), lexicon)?;
    for w in &decoded.warnings {
        warn!("{w}");
    }
    let c = decoded.corpus;
    info!(
        "{}: {} sentences, {} tokens, {} parses",
        name(path),
        c.sentences.len(),
        c.token_count(),
        c.parse_count()
    );
    Ok(c)
}

fn load_rules(path: Option<&Path>, provenance: Provenance) -> Outcome<Vec<Rule>> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => Ok(decode_rules(&read(p)?, &name(p), provenance)?),
    }
}

/// Settings plus the templates and masks they point to. Paths in the
/// settings file are relative to that file; command-line paths win.
struct Resolved {
    settings: Settings,
    templates: TemplateSet,
    masks: RelevanceMask,
}

fn resolve(c: &Common) -> Outcome<Resolved> {
    let (settings, base) = match &c.config {
        Some(p) => (
            Settings::parse(&read(p)?, &name(p))?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        None => (Settings::default(), PathBuf::new()),
    };
    let pick =
        |flag: &Option<PathBuf>, key: &Option<String>| flag.clone().or_else(|| key.as_ref().map(|k| base.join(k)));
    let templates = match pick(&c.templates, &settings.templates) {
        Some(p) => TemplateSet::parse(&read(&p)?, &name(&p))?,
        None => TemplateSet::default(),
    };
    let masks = match pick(&c.masks, &settings.masks) {
        Some(p) => RelevanceMask::parse(&read(&p)?, &name(&p))?,
        None => RelevanceMask::none(),
    };
    Ok(Resolved {
        settings,
        templates,
        masks,
    })
}

fn preprocess(a: PreprocessArgs) -> Outcome<()> {
    let lexicon = match &a.suffixes {
        Some(p) => Some(SuffixLexicon::parse(&read(p)?, &name(p))?),
        None => None,
    };
    let patterns = match &a.patterns {
        Some(p) => CollocationPattern::parse_file(&read(p)?, &name(p))?,
        None => Vec::new(),
    };
    let mut c = load_corpus(&a.corpus, lexicon.as_ref())?;
    let before = c.token_count();
    c.sentences = c.sentences.iter().map(|s| group_collocations(s, &patterns)).collect();
    info!("grouped {} collocations", before - c.token_count());
    emit(a.out.as_deref(), &encode_corpus(&c))
}

fn learn(a: LearnArgs) -> Outcome<()> {
    let r = resolve(&a.common)?;
    let corpus = load_corpus(&a.common.corpus, None)?;
    let hand_choose = load_rules(a.common.hand_choose.as_deref(), Provenance::HandChoose)?;
    let hand_delete = load_rules(a.common.hand_delete.as_deref(), Provenance::HandDelete)?;

    let choose = learn_choose(
        &corpus,
        &hand_choose,
        &hand_delete,
        &r.templates.choose,
        &r.masks,
        r.settings.schedule,
    )?;
    if let Some(d) = &choose.diagnostic {
        warn!("choose learning stopped: {d}");
    }
    let delete_cfg = DeleteLearnConfig {
        fraction: r.settings.delete_fraction,
        template: r.templates.delete.clone(),
    };
    let delete = learn_delete(
        &corpus,
        &hand_choose,
        &choose.rules,
        &hand_delete,
        &delete_cfg,
        &r.masks,
    )?;
    info!(
        "learned {} choose and {} delete rules",
        choose.rules.len(),
        delete.len()
    );

    fs::create_dir_all(&a.out).map_err(|source| {
        Failure::Data(Error::Io {
            path: name(&a.out),
            source,
        })
    })?;
    let mut log = String::new();
    for e in &choose.log {
        log.push_str(&e.to_string());
        log.push('\n');
    }
    log.push_str(&format!(
        "summary choose_rules={} delete_rules={} damping_rounds={}\n",
        choose.rules.len(),
        delete.len(),
        choose.damping_rounds
    ));
    write(&a.out.join("learned_choose.rules"), &encode_rules(&choose.rules))?;
    write(&a.out.join("learned_delete.rules"), &encode_rules(&delete))?;
    write(&a.out.join("learn.log"), &log)
}

fn run_pipeline(a: DisambiguateArgs) -> Outcome<()> {
    if a.gold.is_some() && a.report.is_none() && a.out.is_none() {
        return Err(Failure::Usage(
            "with --gold, give --out or --report so the corpus and the report do not share standard output".into(),
        ));
    }
    let r = resolve(&a.common)?;
    let corpus = load_corpus(&a.common.corpus, None)?;
    let cfg = PipelineConfig {
        hand_choose: load_rules(a.common.hand_choose.as_deref(), Provenance::HandChoose)?,
        hand_delete: load_rules(a.common.hand_delete.as_deref(), Provenance::HandDelete)?,
        learned_choose: load_rules(a.learned_choose.as_deref(), Provenance::LearnedChoose)?,
        learned_delete: load_rules(a.learned_delete.as_deref(), Provenance::LearnedDelete)?,
        masks: r.masks,
        template: r.templates.choose,
        ctxstats: r.settings.ctxstats,
    };
    match &a.gold {
        None => {
            let out = disambiguate(&corpus, &cfg)?;
            emit(a.out.as_deref(), &encode_corpus(&out))
        }
        Some(g) => {
            let gold = load_corpus(g, None)?;
            let (out, rows) = trace_metrics(&corpus, &gold, &cfg)?;
            let last = evaluate(&out, &gold)?;
            let report = format!("{}\n{}\n{}", step_table(&rows), last, step_key_values(&rows));
            emit(a.out.as_deref(), &encode_corpus(&out))?;
            emit(a.report.as_deref(), &report)
        }
    }
}

fn run_evaluate(a: EvaluateArgs) -> Outcome<()> {
    let pred = load_corpus(&a.corpus, None)?;
    let gold = load_corpus(&a.gold, None)?;
    let report = match &a.templates {
        Some(p) => {
            let t = TemplateSet::parse(&read(p)?, &name(p))?;
            evaluate_with(&pred, &gold, &Comparison::Projected(t.choose))?
        }
        None => evaluate(&pred, &gold)?,
    };
    emit(a.out.as_deref(), &format!("{report}\n{}", report.key_values("")))
}

fn gen_synthetic(a: GenSyntheticArgs) -> Outcome<()> {
    let (text, source) = match &a.planted {
        Some(p) => (read(p)?, name(p)),
        None => (data::SYNTHETIC_PLANTED.to_string(), "planted.rules".to_string()),
    };
    let planted = decode_rules(&text, &source, Provenance::HandChoose)?;
    let cfg = SynthConfig {
        sentences: a.sentences,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let s = generate(&planted, &cfg)?;
    info!(
        "generated {} sentences, ambiguity {:.3}",
        s.corpus.sentences.len(),
        s.corpus.ambiguity()
    );
    fs::create_dir_all(&a.out).map_err(|source| {
        Failure::Data(Error::Io {
            path: name(&a.out),
            source,
        })
    })?;
    write(&a.out.join("corpus.txt"), &encode_corpus(&s.corpus))?;
    write(&a.out.join("gold.txt"), &encode_corpus(&s.gold))
}
