//! Command-line frontend: build an index, select ontology fragments, rank
//! documents against a context, and inspect index files.
//!
//! Data goes to standard output, diagnostics to standard error, so commands
//! compose in pipelines.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use ontodex::indexing::ontology_hash;
use ontodex::relevance::RankedResult;
use ontodex::{
    build_index, load_category_graph, load_context, load_corpus, load_index, load_ontology,
    load_synonyms, rank_documents, save_index, Corpus, CsMaxMode, Index, IndexParams, Ontology,
    RankMethod, RankOptions, RelevanceMode, StopWordList, SynonymTable,
};

#[derive(Parser)]
#[command(
    name = "ontodex",
    version,
    about = "Index a document corpus against an ontology and rank by context relevance"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a topic index for a corpus against an ontology.
    BuildIndex(BuildIndexArgs),
    /// Select the ontology fragment spanned by a set of classes.
    SelectFragment(SelectFragmentArgs),
    /// Rank indexed documents by relevance to an abstract context.
    Rank(RankArgs),
    /// Summarize an index file or a single record in it.
    Inspect(InspectArgs),
}

#[derive(Args)]
#[command(after_help = "\
File formats:
  ontology    JSON {\"classes\":[{\"name\",\"description\",\"attributes\":[{\"name\",\"description\"}]}],
                    \"relations\":[{\"from\",\"to\",\"kind\":\"associative\"|\"taxonomical\"|\"hierarchical\"}]}
  corpus      JSON Lines, one document per line:
              {\"id\",\"title\",\"categories\":[...],\"text\",\"metadata\"?}
  categories  JSON {\"categories\":[...],\"edges\":[{\"child\",\"parent\"}]}
  stopwords   plain text, one word per line (defaults to a built-in English list)
  synonyms    JSON object: element name -> list of synonyms (defaults to empty)
  index       JSON Lines: a header line, then one record per document")]
struct BuildIndexArgs {
    /// Ontology JSON file.
    #[arg(long, value_name = "FILE")]
    ontology: PathBuf,
    /// Corpus JSON Lines file, one document per line.
    #[arg(long, value_name = "FILE")]
    corpus: PathBuf,
    /// Category graph JSON file.
    #[arg(long, value_name = "FILE")]
    categories: PathBuf,
    /// Stop-word file, one word per line; defaults to the built-in list.
    #[arg(long, value_name = "FILE")]
    stopwords: Option<PathBuf>,
    /// Synonym table JSON file (element name to list of synonyms).
    #[arg(long, value_name = "FILE")]
    synonyms: Option<PathBuf>,
    /// Where to write the index.
    #[arg(long, value_name = "FILE")]
    index: PathBuf,
    /// Weight coefficient in [0,1] balancing match coverage against edit
    /// distance in the similarity formula.
    #[arg(long, default_value_t = 0.5)]
    k: f64,
    /// Exclusive upper bound on the Levenshtein distance of a match.
    #[arg(long, default_value_t = 3)]
    dmax: usize,
    /// Candidate-set size bound: total category count, or the largest
    /// candidate set in the corpus.
    #[arg(long, value_name = "MODE", default_value_t = CsMaxMode::Global)]
    cs_max_mode: CsMaxMode,
}

#[derive(Args)]
struct SelectFragmentArgs {
    /// Ontology JSON file.
    #[arg(long, value_name = "FILE")]
    ontology: PathBuf,
    /// Seed class; repeat the flag for several.
    #[arg(long = "classes", value_name = "CLASS", required = true)]
    classes: Vec<String>,
}

#[derive(Args)]
#[command(after_help = "\
File formats:
  context  JSON {\"classes\":[...],\"attributes\":[{\"class\",\"name\"}]?}
  output   JSON Lines {\"doc_id\",\"s\",\"index_sim\",\"relevance\"} in rank order,
           or an aligned table with --format table")]
struct RankArgs {
    /// Ontology JSON file.
    #[arg(long, value_name = "FILE")]
    ontology: PathBuf,
    /// Index file produced by build-index.
    #[arg(long, value_name = "FILE")]
    index: PathBuf,
    /// Abstract-context JSON file.
    #[arg(long, value_name = "FILE")]
    context: PathBuf,
    /// Comparison method: structural graph match or weight vectors.
    #[arg(long, value_name = "METHOD")]
    method: RankMethod,
    /// Node-name similarity threshold for graph matching, in [0,1].
    #[arg(long, default_value_t = 0.6)]
    theta: f64,
    /// Context weight propagation bound in hops.
    #[arg(long, default_value_t = 2)]
    lmax: usize,
    /// How method similarity and indexed similarity combine.
    #[arg(long, value_enum, value_name = "MODE", default_value_t = RelevanceModeArg::Product)]
    relevance_mode: RelevanceModeArg,
    /// Blend coefficient in [0,1]; only used with --relevance-mode blend.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Jsonl)]
    format: OutputFormat,
}

#[derive(Args)]
struct InspectArgs {
    /// Index file produced by build-index.
    #[arg(long, value_name = "FILE")]
    index: PathBuf,
    /// Show one record in full instead of the summary.
    #[arg(long, value_name = "ID")]
    doc_id: Option<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RelevanceModeArg {
    Product,
    Blend,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Jsonl,
    Table,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::BuildIndex(args) => cmd_build_index(args),
        Command::SelectFragment(args) => cmd_select_fragment(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Inspect(args) => cmd_inspect(args),
    }
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn read_ontology(path: &Path) -> anyhow::Result<Ontology> {
    load_ontology(open(path)?).with_context(|| format!("invalid ontology in {}", path.display()))
}

fn read_index(path: &Path) -> anyhow::Result<Index> {
    load_index(open(path)?).with_context(|| format!("invalid index in {}", path.display()))
}

fn cmd_build_index(args: BuildIndexArgs) -> anyhow::Result<ExitCode> {
    let started = Instant::now();
    let params = IndexParams {
        k: args.k,
        d_max: args.dmax,
        cs_max_mode: args.cs_max_mode,
    };
    params.validate()?;

    let ontology = read_ontology(&args.ontology)?;
    let documents = load_corpus(open(&args.corpus)?)
        .with_context(|| format!("invalid corpus in {}", args.corpus.display()))?;
    let graph = load_category_graph(open(&args.categories)?)
        .with_context(|| format!("invalid category graph in {}", args.categories.display()))?;
    let stops = match &args.stopwords {
        Some(path) => StopWordList::from_reader(open(path)?)
            .with_context(|| format!("invalid stop-word file {}", path.display()))?,
        None => StopWordList::default_english(),
    };
    let synonyms = match &args.synonyms {
        Some(path) => load_synonyms(open(path)?)
            .with_context(|| format!("invalid synonym table in {}", path.display()))?,
        None => SynonymTable::empty(),
    };

    let corpus = Corpus::new(documents, graph)?;
    if corpus.added_category_count() > 0 {
        eprintln!(
            "warning: {} document categor{} not in the category graph (added as isolated)",
            corpus.added_category_count(),
            if corpus.added_category_count() == 1 {
                "y is"
            } else {
                "ies are"
            },
        );
    }

    let (index, report) = build_index(&corpus, &ontology, &params, &stops, &synonyms)?;
    let file = File::create(&args.index)
        .with_context(|| format!("cannot create {}", args.index.display()))?;
    let mut writer = BufWriter::new(file);
    save_index(&index, &mut writer)?;
    writer.flush()?;

    for error in &report.errors {
        eprintln!("error: document '{}': {}", error.doc_id, error.message);
    }
    eprintln!(
        "indexed {} documents ({} matches, {} failed) in {:.1?}",
        report.document_count,
        report.match_count,
        report.errors.len(),
        started.elapsed(),
    );
    Ok(if report.errors.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_select_fragment(args: SelectFragmentArgs) -> anyhow::Result<ExitCode> {
    let ontology = read_ontology(&args.ontology)?;
    let selection = ontology.select_fragment(&args.classes)?;
    for (a, b) in &selection.unreachable {
        eprintln!("warning: no path between '{a}' and '{b}'");
    }
    let rendered =
        serde_json::to_string_pretty(&selection.fragment).expect("fragments serialize to JSON");
    println!("{rendered}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_rank(args: RankArgs) -> anyhow::Result<ExitCode> {
    let ontology = read_ontology(&args.ontology)?;
    let index = read_index(&args.index)?;
    if index.ontology_hash != ontology_hash(&ontology) {
        eprintln!(
            "warning: index {} was built against a different ontology (hash mismatch)",
            args.index.display()
        );
    }
    let context = load_context(open(&args.context)?, &ontology)
        .with_context(|| format!("invalid context in {}", args.context.display()))?;
    let options = RankOptions {
        theta: args.theta,
        l_max: args.lmax,
        mode: match args.relevance_mode {
            RelevanceModeArg::Product => RelevanceMode::Product,
            RelevanceModeArg::Blend => RelevanceMode::Blend { alpha: args.alpha },
        },
    };
    let results = rank_documents(&index, &ontology, &context, args.method, &options)?;

    match args.format {
        OutputFormat::Jsonl => {
            let mut stdout = std::io::stdout().lock();
            for result in &results {
                let line = serde_json::to_string(result).expect("results serialize to JSON");
                writeln!(stdout, "{line}")?;
            }
        }
        OutputFormat::Table => print_table(&results)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn print_table(results: &[RankedResult]) -> anyhow::Result<()> {
    let id_width = results
        .iter()
        .map(|r| r.doc_id.len())
        .chain([6])
        .max()
        .unwrap();
    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "{:<id_width$}  {:>16}  {:>16}  {:>16}",
        "doc_id", "s", "index_sim", "relevance"
    )?;
    for r in results {
        writeln!(
            stdout,
            "{:<id_width$}  {:>16}  {:>16}  {:>16}",
            r.doc_id, r.s, r.index_sim, r.relevance
        )?;
    }
    Ok(())
}

fn cmd_inspect(args: InspectArgs) -> anyhow::Result<ExitCode> {
    let index = read_index(&args.index)?;
    match &args.doc_id {
        Some(doc_id) => {
            let record = index
                .record(doc_id)
                .ok_or_else(|| ontodex::Error::UnknownDocument(doc_id.clone()))?;
            println!("doc_id: {}", record.doc_id);
            println!("sim: {}", record.sim);
            println!("matches: {}", record.matches.len());
            for m in &record.matches {
                println!(
                    "  {} ({:?}) ~ '{}' d={} w={} kd={}",
                    m.element, m.kind, m.matched_name, m.distance, m.w, m.kd
                );
            }
            println!(
                "fragment: {} classes, {} relations",
                record.fragment.classes.len(),
                record.fragment.relations.len()
            );
            for class in &record.fragment.classes {
                println!("  class {class}");
            }
            for r in &record.fragment.relations {
                println!("  relation {} -> {} ({:?})", r.from, r.to, r.kind);
            }
        }
        None => {
            println!(
                "params: k={} dmax={} cs-max-mode={}",
                index.params.k, index.params.d_max, index.params.cs_max_mode
            );
            println!("ontology_hash: {}", index.ontology_hash);
            println!("corpus_hash: {}", index.corpus_hash);
            println!("records: {}", index.len());
            if !index.is_empty() {
                let mut sims: Vec<f64> = index.records.iter().map(|r| r.sim).collect();
                sims.sort_by(f64::total_cmp);
                let quartile = |q: usize| sims[(sims.len() - 1) * q / 4];
                println!(
                    "sim quartiles: min={} q1={} median={} q3={} max={}",
                    quartile(0),
                    quartile(1),
                    quartile(2),
                    quartile(3),
                    quartile(4),
                );
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
