//! `sketchscreen`: batch entry points for corpus generation, index builds,
//! one-shot queries, retrieval and recognizer evaluation, and weight tuning.
//!
//! Exit codes: 0 on success, 2 for usage or validation errors, 1 for
//! runtime failures such as unreadable files.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use sketchscreen_core::doodle_eval::{eval_recognizer, parse_dataset};
use sketchscreen_core::eval::{evaluate_search, parse_pairs, write_pairs, EvalError};
use sketchscreen_core::index::{build_index, load_index, save_index, IndexError, ScreenIndex};
use sketchscreen_core::query::parse_sketch;
use sketchscreen_core::recognizer::{load_templates, RecognizeError, TemplateRecognizer, TemplateSet};
use sketchscreen_core::scorer::{score_screens, Hyperparams};
use sketchscreen_core::screen::{default_label_fixes, filter_screen, parse_label_fixes, FilterVerdict, ScreenDoc};
use sketchscreen_core::synth::{generate_eval_pairs, generate_synthetic_corpus, PairSpec, RarityProfile};
use sketchscreen_core::tuner::{grid_search, GridSpec, TuneError};
use sketchscreen_core::ElementClass;

#[derive(Debug, Parser)]
#[command(name = "sketchscreen", version, about = "Sketch-based app screen search tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic screen corpus with a ground-truth manifest.
    GenCorpus {
        /// Number of screens.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory; screens go to `<out>/screens/<id>.json`.
        #[arg(long)]
        out: PathBuf,
        /// Preset name (uniform, rico) or a profile JSON file.
        #[arg(long, default_value = "rico")]
        profile: String,
        /// Also write this many evaluation pairs to `<out>/pairs.jsonl`.
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long, default_value_t = 1)]
        pairs_seed: u64,
    },
    /// Build an index from a directory of screen documents.
    Index {
        /// Directory of `*.json` screen documents.
        #[arg(long)]
        corpus: PathBuf,
        /// Label-fix rules file; the bundled rules are used when omitted.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank indexed screens against a sketch file.
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        top: u64,
        /// Scoring weights as p1,p2,p3,delta_w,c_w.
        #[arg(long, default_value = "39,8,9,0.4,11")]
        hp: String,
    },
    /// Top-k retrieval accuracy over a pairs file.
    EvalSearch {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, default_value = "39,8,9,0.4,11")]
        hp: String,
        /// Also write per-pair ranks here.
        #[arg(long)]
        ranks: Option<PathBuf>,
    },
    /// Per-class stroke-by-stroke recognizer report over a labeled dataset.
    EvalRecognizer {
        /// Template file; the bundled templates are used when omitted.
        #[arg(long)]
        templates: Option<PathBuf>,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Exhaustive grid search of scoring weights by mean reciprocal rank.
    Tune {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        pairs: PathBuf,
        /// Grid file: `{"p1": [...], "p2": [...], ...}`.
        #[arg(long)]
        grid: PathBuf,
        /// Report file, one row per grid point.
        #[arg(long)]
        report: PathBuf,
    },
}

/// An error tagged with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn invalid(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn runtime(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

/// Standard output of a successful command.
type CmdResult = Result<String, Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(runtime)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(runtime)
}

fn open_index(path: &Path) -> Result<ScreenIndex, Failure> {
    load_index(path)
        .with_context(|| format!("loading index {}", path.display()))
        .map_err(runtime)
}

fn parse_hp(text: &str) -> Result<Hyperparams, Failure> {
    text.parse::<Hyperparams>().context("--hp").map_err(invalid)
}

fn load_pairs(path: &Path) -> Result<Vec<sketchscreen_core::EvalPair>, Failure> {
    let pairs = parse_pairs(&read_text(path)?)
        .with_context(|| path.display().to_string())
        .map_err(invalid)?;
    if pairs.is_empty() {
        return Err(invalid(anyhow!("{}: no evaluation pairs", path.display())));
    }
    Ok(pairs)
}

fn gen_corpus(n: u64, seed: u64, out: &Path, profile: &str, pairs: Option<usize>, pairs_seed: u64) -> CmdResult {
    let mut stdout = String::new();
    let profile = match RarityProfile::preset(profile) {
        Some(p) => p,
        None if Path::new(profile).is_file() => RarityProfile::from_json(&read_text(Path::new(profile))?)
            .with_context(|| profile.to_string())
            .map_err(invalid)?,
        None => {
            return Err(invalid(anyhow!(
                "--profile {profile:?} is neither a preset ({}) nor a file",
                RarityProfile::PRESETS.join(", ")
            )))
        }
    };
    let n = usize::try_from(n).map_err(invalid)?;
    let corpus = generate_synthetic_corpus(seed, n, &profile).map_err(invalid)?;

    let screens = out.join("screens");
    fs::create_dir_all(&screens)
        .with_context(|| format!("creating {}", screens.display()))
        .map_err(runtime)?;
    let rules = default_label_fixes();
    let mut accepted = 0usize;
    for doc in &corpus.docs {
        if matches!(filter_screen(doc, &rules), FilterVerdict::Accept) {
            accepted += 1;
        }
        let text = serde_json::to_string(doc).map_err(runtime)?;
        write_text(&screens.join(format!("{}.json", doc.id)), &text)?;
    }
    let manifest = serde_json::to_string_pretty(&corpus.manifest).map_err(runtime)?;
    write_text(&out.join("manifest.json"), &manifest)?;
    if let Some(count) = pairs {
        let spec = PairSpec {
            count,
            ..PairSpec::default()
        };
        let pairs = generate_eval_pairs(&corpus.manifest, pairs_seed, spec);
        write_text(&out.join("pairs.jsonl"), &write_pairs(&pairs))?;
        let _ = writeln!(stdout, "pairs\t{}", pairs.len());
    }
    let _ = writeln!(stdout, "screens\t{}", corpus.docs.len());
    let _ = writeln!(stdout, "accepted_screens\t{accepted}");
    Ok(stdout)
}

fn read_corpus(dir: &Path) -> Result<Vec<ScreenDoc>, Failure> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("reading corpus directory {}", dir.display()))
        .map_err(runtime)?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(runtime)?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|p| {
            serde_json::from_str::<ScreenDoc>(&read_text(p)?)
                .with_context(|| format!("parsing screen document {}", p.display()))
                .map_err(invalid)
        })
        .collect()
}

fn index(corpus: &Path, rules: Option<&Path>, out: &Path) -> CmdResult {
    let mut stdout = String::new();
    let rules = match rules {
        Some(p) => parse_label_fixes(&read_text(p)?)
            .with_context(|| format!("parsing rules {}", p.display()))
            .map_err(invalid)?,
        None => default_label_fixes(),
    };
    let docs = read_corpus(corpus)?;
    let (index, report) = build_index(&docs, &rules).map_err(|e| match e {
        IndexError::Io(_) => runtime(e),
        _ => invalid(e),
    })?;
    save_index(&index, out)
        .with_context(|| format!("writing index {}", out.display()))
        .map_err(runtime)?;
    let _ = writeln!(stdout, "screen_count\t{}", index.screen_count());
    for (reason, count) in &report.rejected {
        let _ = writeln!(stdout, "rejected\t{reason}\t{count}");
    }
    let _ = writeln!(stdout, "class\tdf\tidf");
    for &class in ElementClass::ALL {
        let idf = index.idf(class).map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        let _ = writeln!(stdout, "{class}\t{}\t{idf}", index.df(class));
    }
    Ok(stdout)
}

fn query(index: &Path, sketch: &Path, top: u64, hp: &str) -> CmdResult {
    let mut stdout = String::new();
    let hp = parse_hp(hp)?;
    let sketch = parse_sketch(&read_text(sketch)?)
        .with_context(|| sketch.display().to_string())
        .map_err(invalid)?;
    let index = open_index(index)?;
    let top = usize::try_from(top).unwrap_or(usize::MAX);
    let results = score_screens(&sketch, &index, &hp, top).map_err(runtime)?;
    let _ = writeln!(stdout, "rank\tid\tscore");
    for (i, r) in results.iter().enumerate() {
        let _ = writeln!(stdout, "{}\t{}\t{:.6}", i + 1, r.screen_id, r.score);
    }
    Ok(stdout)
}

fn eval_search(index: &Path, pairs: &Path, k: u64, hp: &str, ranks: Option<&Path>) -> CmdResult {
    let mut stdout = String::new();
    let hp = parse_hp(hp)?;
    let pairs = load_pairs(pairs)?;
    let index = open_index(index)?;
    let k = usize::try_from(k).unwrap_or(usize::MAX);
    let summary = evaluate_search(&pairs, &index, &hp, k).map_err(|e| match e {
        EvalError::Score(_) => runtime(e),
        _ => invalid(e),
    })?;
    if let Some(path) = ranks {
        write_text(path, &summary.ranks_tsv(&pairs))?;
    }
    stdout.push_str(&summary.to_tsv());
    Ok(stdout)
}

fn eval_recognizer_cmd(templates: Option<&Path>, dataset: &Path) -> CmdResult {
    let mut stdout = String::new();
    let templates = match templates {
        Some(p) => load_templates(p).map_err(|e| match e {
            RecognizeError::Io(_) => runtime(e),
            _ => invalid(e),
        })?,
        None => TemplateSet::bundled(),
    };
    let dataset = parse_dataset(&read_text(dataset)?)
        .with_context(|| dataset.display().to_string())
        .map_err(invalid)?;
    if dataset.is_empty() {
        return Err(invalid(anyhow!("dataset has no doodles")));
    }
    let recognizer = TemplateRecognizer::new(templates);
    let report = eval_recognizer(&dataset, &recognizer).map_err(|e| match e {
        RecognizeError::UntrainedClass(_) => invalid(e),
        _ => runtime(e),
    })?;
    stdout.push_str(&report.to_tsv());
    Ok(stdout)
}

fn tune(index: &Path, pairs: &Path, grid: &Path, report: &Path) -> CmdResult {
    let mut stdout = String::new();
    let grid: GridSpec = serde_json::from_str(&read_text(grid)?)
        .with_context(|| format!("parsing grid {}", grid.display()))
        .map_err(invalid)?;
    let pairs = load_pairs(pairs)?;
    let index = open_index(index)?;
    let (best, tuned) = grid_search(&pairs, &index, &grid).map_err(|e| match e {
        TuneError::EmptyIndex => runtime(e),
        _ => invalid(e),
    })?;
    write_text(report, &tuned.to_tsv())?;
    let row = tuned
        .rows
        .iter()
        .find(|r| r.hp == best)
        .expect("best point is a grid row");
    let _ = writeln!(stdout, "best\t{best}");
    let _ = writeln!(stdout, "mrr\t{:.6}", row.mrr);
    let _ = writeln!(stdout, "top10_hits\t{}", row.top10_hits);
    let _ = writeln!(stdout, "grid_points\t{}", tuned.rows.len());
    Ok(stdout)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::GenCorpus {
            n,
            seed,
            out,
            profile,
            pairs,
            pairs_seed,
        } => gen_corpus(n, seed, &out, &profile, pairs, pairs_seed),
        Command::Index { corpus, rules, out } => index(&corpus, rules.as_deref(), &out),
        Command::Query { index, sketch, top, hp } => query(&index, &sketch, top, &hp),
        Command::EvalSearch {
            index,
            pairs,
            k,
            hp,
            ranks,
        } => eval_search(&index, &pairs, k, &hp, ranks.as_deref()),
        Command::EvalRecognizer { templates, dataset } => eval_recognizer_cmd(templates.as_deref(), &dataset),
        Command::Tune {
            index,
            pairs,
            grid,
            report,
        } => tune(&index, &pairs, &grid, &report),
    }
}

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(stdout) => {
            // a closed pipe (e.g. `| head`) is not a failure
            let _ = io::stdout().lock().write_all(stdout.as_bytes());
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
