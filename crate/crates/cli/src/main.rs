use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use leftcorner::chart::ChartParser;
use leftcorner::eval::{aggregate, score_sentence};
use leftcorner::grammar::io::{load_model, save_model, Model};
use leftcorner::grammar::{binarize, DeltaModel, PcfgModel, PlcgModel};
use leftcorner::lc::{BeamOptions, LcParser, Variant};
use leftcorner::stats::StackStats;
use leftcorner::synth::{english_corpus, random_corpus, TreeShape};
use leftcorner::treebank::{
    fold_unaries, is_treebank_shaped, pos_yield, preprocess, read_trees, write_trees,
    PreprocessOptions, UnaryMode, ROOT_LABEL,
};
use leftcorner::{Error, Tree};

const NO_PARSE: &str = "-NOPARSE-";

#[derive(Parser)]
#[command(
    name = "leftcorner",
    version,
    about = "Probabilistic left-corner and PCFG parsing over bracketed treebanks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Induce a model from a tree file.
    Induce(InduceArgs),
    /// Parse tag sequences with a saved model.
    Parse(ParseArgs),
    /// Score test trees against gold trees.
    Eval(EvalArgs),
    /// Stack-size changes of stack-composition derivations.
    Stats(StatsArgs),
    /// Write a seeded synthetic corpus.
    GenCorpus(GenArgs),
}

#[derive(Args)]
struct Preprocessing {
    /// Do not add a ROOT node above each tree.
    #[arg(long)]
    no_root: bool,
    /// Keep -NONE- empty elements.
    #[arg(long)]
    keep_empties: bool,
    /// Keep function tags and indices on labels.
    #[arg(long)]
    keep_function_tags: bool,
}

impl Preprocessing {
    fn options(&self) -> PreprocessOptions {
        PreprocessOptions {
            add_root: !self.no_root,
            strip_empties: !self.keep_empties,
            strip_function_tags: !self.keep_function_tags,
            ..PreprocessOptions::standard()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Pcfg,
    Plcg,
    Delta,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unary {
    Keep,
    #[value(alias = "fold_up")]
    FoldUp,
    #[value(alias = "fold_down")]
    FoldDown,
}

impl From<Unary> for UnaryMode {
    fn from(u: Unary) -> Self {
        match u {
            Unary::Keep => UnaryMode::Keep,
            Unary::FoldUp => UnaryMode::FoldUp,
            Unary::FoldDown => UnaryMode::FoldDown,
        }
    }
}

#[derive(Args)]
struct InduceArgs {
    /// Bracketed tree file.
    #[arg(short, long)]
    input: PathBuf,
    /// Model file to write.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "plcg")]
    kind: Kind,
    /// Binarize trees after unary handling.
    #[arg(long)]
    binarize: bool,
    #[arg(long, value_enum, default_value = "keep")]
    unary: Unary,
    /// Number of most frequent rules to report.
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[command(flatten)]
    prep: Preprocessing,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Pcfg,
    Lc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// One sentence per line, tags separated by spaces.
    Tags,
    /// One sentence per line of `word/TAG` tokens.
    Tagged,
    /// Bracketed trees; their words and tags are parsed.
    Trees,
}

#[derive(Clone, Copy, ValueEnum)]
enum LcVariant {
    Base,
    Compose,
}

#[derive(Args)]
struct ParseArgs {
    #[arg(short, long)]
    model: PathBuf,
    #[arg(short, long)]
    input: PathBuf,
    /// Output file; standard output if absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tags")]
    format: Format,
    /// Must match the model: pcfg for PCFG models, lc otherwise.
    #[arg(long, value_enum)]
    engine: Option<Engine>,
    /// Move semantics for PLCG models.
    #[arg(long, value_enum, default_value = "base")]
    variant: LcVariant,
    #[arg(long, default_value_t = 1000)]
    beam: usize,
    #[arg(long, default_value_t = 1)]
    n_best: usize,
    /// Sentences longer than this are not parsed.
    #[arg(long)]
    max_length: Option<usize>,
    /// Append the log probability to each tree.
    #[arg(long)]
    scores: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct EvalArgs {
    gold: PathBuf,
    test: PathBuf,
    /// Score only sentences of at most this many words.
    #[arg(long)]
    max_length: Option<usize>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    prep: Preprocessing,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusKind {
    /// Word-level English-like trees.
    English,
    /// Random tag-level trees.
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(short = 'n', long, default_value_t = 100)]
    count: usize,
    #[arg(long, value_enum, default_value = "english")]
    kind: CorpusKind,
    #[arg(short, long)]
    output: Option<PathBuf>,
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

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(Error::Io(e))
    }
}

type CliResult<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Data(Error::InvalidArgument(format!("{}: {e}", path.display()))))
}

fn sink(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn preprocess_all(trees: &[Tree], opts: &PreprocessOptions, what: &str) -> CliResult<Vec<Tree>> {
    trees
        .iter()
        .enumerate()
        .map(|(i, t)| {
            preprocess(t, opts).map_err(|e| {
                Failure::Data(Error::InvalidArgument(format!(
                    "{what} tree {}: {e}",
                    i + 1
                )))
            })
        })
        .collect()
}

/// Training form of a preprocessed tree: unaries handled, then tags only,
/// then binarized on request.
fn training_tree(t: &Tree, unary: UnaryMode, bin: bool) -> CliResult<Tree> {
    let folded = fold_unaries(t, unary, ROOT_LABEL);
    let tags = if is_treebank_shaped(&folded) {
        folded.delexicalize()
    } else {
        folded
    };
    Ok(if bin { binarize(&tags)? } else { tags })
}

fn induce(args: &InduceArgs) -> CliResult<()> {
    let raw = read_trees(&read_file(&args.input)?)?;
    let mut trees = Vec::new();
    let mut dropped = 0;
    for t in &raw {
        match preprocess(t, &args.prep.options()) {
            Ok(p) => trees.push(training_tree(&p, args.unary.into(), args.binarize)?),
            Err(_) => dropped += 1,
        }
    }
    if dropped > 0 {
        eprintln!("dropped {dropped} empty trees");
    }
    let model = match args.kind {
        Kind::Pcfg => {
            let mut m = PcfgModel::induce(&trees)?;
            m.binarized = args.binarize;
            Model::Pcfg(m)
        }
        Kind::Plcg => {
            let mut m = PlcgModel::induce(&trees)?;
            m.binarized = args.binarize;
            Model::Plcg(m)
        }
        Kind::Delta => {
            let mut m = DeltaModel::induce(&trees)?;
            m.binarized = args.binarize;
            Model::Delta(m)
        }
    };
    save_model(&model, &args.output)?;
    let pcfg = PcfgModel::induce(&trees)?;
    let mut out = io::stdout().lock();
    writeln!(out, "trees\t{}", trees.len())?;
    writeln!(out, "rules\t{}", pcfg.rule_count())?;
    match &model {
        Model::Plcg(m) => {
            let (s, a, p) = m.table_sizes();
            writeln!(
                out,
                "shift contexts\t{s}\nattach entries\t{a}\nprojection entries\t{p}"
            )?;
        }
        Model::Delta(m) => writeln!(out, "delta contexts\t{}", m.context_count())?,
        Model::Pcfg(_) => {}
    }
    if args.top > 0 {
        writeln!(out, "\n{:<30}{:>10}{:>12}", "Rule", "Freq.", "PCFG Prob.")?;
        for (rule, count, p) in pcfg.top_rules(args.top) {
            writeln!(out, "{:<30}{:>10}{:>12.2}", rule.to_string(), count, p)?;
        }
    }
    Ok(())
}

struct Sentence {
    words: Vec<String>,
    tags: Vec<String>,
}

fn read_sentences(text: &str, format: Format) -> CliResult<Vec<Sentence>> {
    match format {
        Format::Tags => Ok(text
            .lines()
            .map(|l| {
                let tags: Vec<String> = l.split_whitespace().map(String::from).collect();
                Sentence {
                    words: tags.clone(),
                    tags,
                }
            })
            .collect()),
        Format::Tagged => text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                let mut s = Sentence {
                    words: Vec::new(),
                    tags: Vec::new(),
                };
                for tok in l.split_whitespace() {
                    let (w, t) = tok
                        .rsplit_once('/')
                        .filter(|(w, t)| !w.is_empty() && !t.is_empty())
                        .ok_or_else(|| {
                            Error::InvalidArgument(format!(
                                "line {}: token `{tok}` is not word/TAG",
                                i + 1
                            ))
                        })?;
                    s.words.push(w.to_string());
                    s.tags.push(t.to_string());
                }
                Ok(s)
            })
            .collect(),
        Format::Trees => {
            let opts = PreprocessOptions::standard();
            let trees = preprocess_all(&read_trees(text)?, &opts, "input")?;
            Ok(trees
                .iter()
                .map(|t| Sentence {
                    words: t.leaves().into_iter().map(String::from).collect(),
                    tags: pos_yield(t).into_iter().map(String::from).collect(),
                })
                .collect())
        }
    }
}

enum Backend {
    Chart(ChartParser),
    Lc(LcParser, BeamOptions),
}

impl Backend {
    fn parse(&self, tags: &[String]) -> Vec<(Tree, f64)> {
        match self {
            Backend::Chart(c) => c.parse(tags).into_iter().collect(),
            Backend::Lc(p, opts) => p.beam_parse(tags, opts),
        }
    }
}

fn build_parser(args: &ParseArgs, model: &Model) -> CliResult<Backend> {
    let engine = args.engine.unwrap_or(match model {
        Model::Pcfg(_) => Engine::Pcfg,
        _ => Engine::Lc,
    });
    let opts = BeamOptions {
        beam: args.beam,
        n_best: args.n_best,
        ..BeamOptions::default()
    };
    let variant = match args.variant {
        LcVariant::Base => Variant::Base,
        LcVariant::Compose => Variant::Compose,
    };
    match (engine, model) {
        (Engine::Pcfg, Model::Pcfg(m)) => Ok(Backend::Chart(ChartParser::new(m))),
        (Engine::Lc, Model::Plcg(m)) => Ok(Backend::Lc(LcParser::plcg(m, variant)?, opts)),
        (Engine::Lc, Model::Delta(m)) => Ok(Backend::Lc(LcParser::delta(m), opts)),
        (_, m) => Err(Failure::Data(Error::InvalidArgument(format!(
            "a {} model cannot drive the {} engine",
            m.kind(),
            if engine == Engine::Pcfg { "pcfg" } else { "lc" }
        )))),
    }
}

fn thread_pool(threads: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(e.to_string()))
}

fn parse(args: &ParseArgs) -> CliResult<()> {
    if args.beam == 0 || args.n_best == 0 || args.max_length == Some(0) {
        return Err(usage(
            "--beam, --n-best and --max-length must be at least 1",
        ));
    }
    let model = load_model(&args.model)?;
    let parser = build_parser(args, &model)?;
    let sentences = read_sentences(&read_file(&args.input)?, args.format)?;
    let limit = args.max_length.unwrap_or(usize::MAX);
    let results: Vec<Vec<(Tree, f64)>> = thread_pool(args.threads)?.install(|| {
        sentences
            .par_iter()
            .map(|s| {
                if s.tags.is_empty() || s.tags.len() > limit {
                    return Vec::new();
                }
                parser
                    .parse(&s.tags)
                    .into_iter()
                    .filter_map(|(t, lp)| t.relexicalize(&s.words).map(|t| (t, lp)))
                    .collect()
            })
            .collect()
    });
    let mut out = sink(args.output.as_deref())?;
    let (mut parsed, mut total_lp) = (0, 0.0);
    for r in &results {
        if r.is_empty() {
            writeln!(out, "{NO_PARSE}")?;
            continue;
        }
        parsed += 1;
        total_lp += r[0].1;
        for (t, lp) in r {
            if args.scores {
                writeln!(out, "{t}\t{lp:.6}")?;
            } else {
                writeln!(out, "{t}")?;
            }
        }
    }
    out.flush()?;
    let mean = if parsed == 0 {
        f64::NAN
    } else {
        total_lp / parsed as f64
    };
    eprintln!(
        "parsed {parsed} of {} sentences, {} without parse, mean log-prob {mean:.4}",
        results.len(),
        results.len() - parsed
    );
    Ok(())
}

/// Trees of a parser output file, `None` where a sentence has no parse.
fn read_test_trees(text: &str) -> CliResult<Vec<Option<Tree>>> {
    let mut out = Vec::new();
    let mut chunk = String::new();
    for line in text.lines() {
        let line = line.split('\t').next().unwrap_or("");
        if line.trim() == NO_PARSE {
            out.extend(read_trees(&chunk)?.into_iter().map(Some));
            chunk.clear();
            out.push(None);
        } else {
            chunk.push_str(line);
            chunk.push('\n');
        }
    }
    out.extend(read_trees(&chunk)?.into_iter().map(Some));
    Ok(out)
}

fn eval(args: &EvalArgs) -> CliResult<()> {
    if args.max_length == Some(0) {
        return Err(usage("--max-length must be at least 1"));
    }
    let opts = PreprocessOptions::standard();
    let gold = preprocess_all(&read_trees(&read_file(&args.gold)?)?, &opts, "gold")?;
    let test = read_test_trees(&read_file(&args.test)?)?;
    if gold.len() != test.len() {
        return Err(Failure::Data(Error::InvalidArgument(format!(
            "{} gold trees but {} test trees",
            gold.len(),
            test.len()
        ))));
    }
    let limit = args.max_length.unwrap_or(usize::MAX);
    let mut scores = Vec::new();
    let mut no_parse = 0;
    for (i, (g, t)) in gold.iter().zip(&test).enumerate() {
        if g.leaf_count() > limit {
            continue;
        }
        let t = match t {
            Some(t) => preprocess(t, &opts)
                .map_err(|e| Error::InvalidArgument(format!("test tree {}: {e}", i + 1)))?,
            None => {
                no_parse += 1;
                flat(g)
            }
        };
        scores.push(score_sentence(i, g, &t)?);
    }
    let report = aggregate(&scores);
    let retained = if gold.is_empty() {
        1.0
    } else {
        scores.len() as f64 / gold.len() as f64
    };
    let mut out = io::stdout().lock();
    if args.json {
        let doc = json!({
            "precision": report.precision,
            "recall": report.recall,
            "labelled_precision": report.labelled_precision,
            "labelled_recall": report.labelled_recall,
            "labelled_precision_plus1": report.labelled_precision_plus1,
            "labelled_recall_plus1": report.labelled_recall_plus1,
            "avg_cbs": report.avg_cbs,
            "noncrossing_accuracy": report.noncrossing_accuracy,
            "zero_cb_rate": report.zero_cb_rate,
            "sentence_count": report.sentence_count,
            "average_length": report.average_length,
            "retained_fraction": retained,
            "no_parse": no_parse,
            "plus1_unary_levels": "all",
        });
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&doc).expect("report serializes")
        )?;
    } else {
        if args.max_length.is_some() {
            writeln!(
                out,
                "{:<24}{:>7.1}%",
                "% sent. length <= cutoff",
                100.0 * retained
            )?;
        }
        write!(out, "{report}")?;
        if no_parse > 0 {
            writeln!(out, "{:<24}{:>8}", "No parse", no_parse)?;
        }
    }
    Ok(())
}

/// The words of `gold` under a bare ROOT: a test tree with no brackets.
fn flat(gold: &Tree) -> Tree {
    let kids = if is_treebank_shaped(gold) {
        let mut v = Vec::new();
        gold.walk(&mut |n| {
            if n.is_preterminal() {
                v.push(n.clone());
            }
        });
        v
    } else {
        gold.leaves().into_iter().map(Tree::leaf).collect()
    };
    Tree::node(ROOT_LABEL, kids)
}

fn stats(args: &StatsArgs) -> CliResult<()> {
    let trees = preprocess_all(
        &read_trees(&read_file(&args.input)?)?,
        &args.prep.options(),
        "input",
    )?;
    let s = StackStats::from_trees(&trees)?;
    let mut out = io::stdout().lock();
    if args.json {
        let rows: Vec<_> = s
            .rows
            .iter()
            .rev()
            .map(|(size, row)| {
                json!({
                    "stack_size": size,
                    "total": s.row_total(*size),
                    "counts": row.iter().map(|(d, n)| (d.to_string(), *n)).collect::<std::collections::BTreeMap<_, _>>(),
                })
            })
            .collect();
        let doc = json!({ "rows": rows, "max_depth": s.max_depth });
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&doc).expect("stats serialize")
        )?;
    } else {
        write!(out, "{s}")?;
        writeln!(out, "max stack depth {}", s.max_depth)?;
    }
    Ok(())
}

fn gen_corpus(args: &GenArgs) -> CliResult<()> {
    let trees = match args.kind {
        CorpusKind::English => english_corpus(args.seed, args.count),
        CorpusKind::Random => random_corpus(
            args.seed,
            args.count,
            &TreeShape::new(8, 4, &["S", "NP", "VP", "PP"], &["DT", "NN", "VB", "IN"]),
        ),
    };
    let mut out = sink(args.output.as_deref())?;
    write_trees(&trees, &mut out)?;
    out.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Induce(a) => induce(a),
        Command::Parse(a) => parse(a),
        Command::Eval(a) => eval(a),
        Command::Stats(a) => stats(a),
        Command::GenCorpus(a) => gen_corpus(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
