//! Command line front end. Every subcommand reads inputs, writes its data
//! files under `--out`, and drops a `manifest.json` next to them recording
//! what ran and with which resolved settings. Progress and diagnostics go
//! to stderr; stdout stays empty so the tool composes in scripts.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use crossact::corpus::{
    link_accounts, parse_github_events, parse_stackoverflow_posts, read_corpus, read_links_file,
    write_corpus, Corpus,
};
use crossact::experiment::{
    render_summary, render_tag_usage, run_experiment, tag_usage_stats, write_report_files,
    ExperimentConfig,
};
use crossact::interests::{build_vocabulary, item_interests, write_interests};
use crossact::synth::{generate_corpus, write_ground_truth, SynthSpec, GROUND_TRUTH_FILE};

#[derive(Parser)]
#[command(name = "crossact", version, about = "Cross-platform activity prediction pipeline")]
struct Cli {
    /// Base random seed. Overrides the seed in a synth spec; for
    /// experiments the per-run seeds become seed, seed+1, ...
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Size of the worker thread pool (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory the data files and manifest are written to.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse platform dumps and an account link table into a corpus.
    Ingest {
        /// GitHub fork/watch events, one JSON object per line.
        #[arg(long)]
        gh_events: PathBuf,
        /// Stack Overflow posts dump (XML rows).
        #[arg(long)]
        so_posts: PathBuf,
        /// Stack Overflow votes dump (XML rows); favorites are used.
        #[arg(long)]
        so_votes: PathBuf,
        /// Tab-separated account links: canonical id, GitHub login,
        /// Stack Overflow user id. Without it no accounts are merged.
        #[arg(long)]
        links: Option<PathBuf>,
    },
    /// Infer per-item interest sets from a corpus.
    Interests {
        /// Directory holding a corpus written by `ingest` or `synth`.
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Run the prediction experiment and write its report.
    Experiment {
        #[arg(long)]
        corpus: PathBuf,
        /// Experiment settings as TOML; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Summarize tag usage per activity type.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        /// How many tags to keep per activity type.
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
    /// Generate a synthetic corpus with planted topic preferences.
    Synth {
        /// Generator settings as TOML; defaults apply when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct RunManifest {
    subcommand: &'static str,
    version: &'static str,
    seed: Option<u64>,
    threads: Option<usize>,
    inputs: BTreeMap<&'static str, String>,
    outputs: Vec<String>,
    config: serde_json::Value,
    duration_seconds: f64,
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("setting up the thread pool")?;
    }
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;

    let started = Instant::now();
    let (subcommand, inputs, config) = match &cli.command {
        Command::Ingest {
            gh_events,
            so_posts,
            so_votes,
            links,
        } => {
            let mut inputs = BTreeMap::new();
            inputs.insert("gh_events", gh_events.display().to_string());
            inputs.insert("so_posts", so_posts.display().to_string());
            inputs.insert("so_votes", so_votes.display().to_string());
            if let Some(links) = links {
                inputs.insert("links", links.display().to_string());
            }
            let corpus = ingest(gh_events, so_posts, so_votes, links.as_deref())?;
            write_corpus(&corpus, &cli.out)?;
            eprintln!(
                "corpus: {} items, {} activities, {} links, window {}",
                corpus.item_count(),
                corpus.activities().len(),
                corpus.links().len(),
                corpus.window()
            );
            ("ingest", inputs, serde_json::Value::Null)
        }
        Command::Interests { corpus } => {
            let loaded = read_corpus(corpus)?;
            let vocabulary = build_vocabulary(&loaded)?;
            eprintln!("vocabulary: {} tags", vocabulary.len());
            let interests = item_interests(&loaded, &vocabulary);
            let path = cli.out.join("interests.jsonl");
            let file = fs::File::create(&path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_interests(&interests, BufWriter::new(file))?;
            let mut inputs = BTreeMap::new();
            inputs.insert("corpus", corpus.display().to_string());
            ("interests", inputs, serde_json::Value::Null)
        }
        Command::Experiment { corpus, config } => {
            let loaded = read_corpus(corpus)?;
            let mut settings = match config {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    ExperimentConfig::from_toml_str(&text)?
                }
                None => ExperimentConfig::default(),
            };
            if let Some(seed) = cli.seed {
                settings.seeds = (0..settings.runs as u64).map(|k| seed + k).collect();
            }
            let output = run_experiment(&loaded, &settings)?;
            write_report_files(&output.report, &cli.out)?;
            for line in render_summary(&output.report).lines() {
                eprintln!("{line}");
            }
            let mut inputs = BTreeMap::new();
            inputs.insert("corpus", corpus.display().to_string());
            if let Some(path) = config {
                inputs.insert("config", path.display().to_string());
            }
            ("experiment", inputs, serde_json::to_value(&settings)?)
        }
        Command::Stats { corpus, top_k } => {
            let loaded = read_corpus(corpus)?;
            let vocabulary = build_vocabulary(&loaded)?;
            let interests = item_interests(&loaded, &vocabulary);
            let usage = tag_usage_stats(&loaded.full_view(), &interests, *top_k);
            let path = cli.out.join("stats.txt");
            fs::write(&path, render_tag_usage(&usage))
                .with_context(|| format!("writing {}", path.display()))?;
            let mut inputs = BTreeMap::new();
            inputs.insert("corpus", corpus.display().to_string());
            ("stats", inputs, serde_json::json!({ "top_k": top_k }))
        }
        Command::Synth { spec } => {
            let mut settings = match spec {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    SynthSpec::from_toml_str(&text)?
                }
                None => SynthSpec::default(),
            };
            if let Some(seed) = cli.seed {
                settings.seed = seed;
            }
            let (corpus, truth) = generate_corpus(&settings)?;
            write_corpus(&corpus, &cli.out)?;
            write_ground_truth(&truth, &cli.out.join(GROUND_TRUTH_FILE))?;
            eprintln!(
                "generated {} items, {} activities for {} users",
                corpus.item_count(),
                corpus.activities().len(),
                truth.len()
            );
            let mut inputs = BTreeMap::new();
            if let Some(path) = spec {
                inputs.insert("spec", path.display().to_string());
            }
            ("synth", inputs, serde_json::to_value(&settings)?)
        }
    };

    let outputs = written_files(&cli.out)?;
    let manifest = RunManifest {
        subcommand,
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        threads: cli.threads,
        inputs,
        outputs,
        config,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    let path = cli.out.join("manifest.json");
    let mut body = serde_json::to_string_pretty(&manifest)?;
    body.push('\n');
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn ingest(
    gh_events: &Path,
    so_posts: &Path,
    so_votes: &Path,
    links: Option<&Path>,
) -> Result<Corpus> {
    let open = |path: &Path| -> Result<BufReader<fs::File>> {
        Ok(BufReader::new(fs::File::open(path).with_context(|| {
            format!("opening {}", path.display())
        })?))
    };

    let github = parse_github_events(open(gh_events)?)?;
    eprintln!(
        "github: {} repositories, {} activities ({} malformed, {} unknown kinds)",
        github.diagnostics.items,
        github.diagnostics.activities,
        github.diagnostics.malformed,
        github.diagnostics.unknown_kind
    );

    let stackoverflow = parse_stackoverflow_posts(open(so_posts)?, open(so_votes)?)?;
    eprintln!(
        "stackoverflow: {} questions, {} activities ({} malformed, {} missing fields, {} ignored)",
        stackoverflow.diagnostics.items,
        stackoverflow.diagnostics.activities,
        stackoverflow.diagnostics.malformed,
        stackoverflow.diagnostics.missing_field,
        stackoverflow.diagnostics.ignored
    );

    let links = match links {
        Some(path) => read_links_file(open(path)?)?,
        None => Vec::new(),
    };
    if links.is_empty() {
        eprintln!("warning: no account links; cross-platform users cannot exist");
    }

    let (corpus, diagnostics) = link_accounts(links, github, stackoverflow)?;
    if diagnostics.dropped_dangling > 0 {
        eprintln!(
            "warning: dropped {} activities on unknown items",
            diagnostics.dropped_dangling
        );
    }
    if diagnostics.deduplicated > 0 {
        eprintln!("deduplicated {} repeated activities", diagnostics.deduplicated);
    }
    Ok(corpus)
}

fn written_files(dir: &Path) -> Result<Vec<String>> {
    let mut names: Vec<String> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok())
        .filter(|entry| entry.path().is_file())
        .map(|entry| entry.file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names.retain(|n| n != "manifest.json");
    Ok(names)
}
