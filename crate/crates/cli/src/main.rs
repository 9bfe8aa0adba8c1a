use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use pairclass::features::build_matrix;
use pairclass::index::{build_index, CorpusIndex, WindowSpec};
use pairclass::morphology::Morphology;
use pairclass::patterns::{select_features, PhraseTable};
use pairclass::pipeline::{
    self, make_synthetic_corpus, read_pair_list, synthetic_sat, synthetic_toefl, ternary_spec, RunConfig, SatSynth,
    Task, TaskInput, ToeflSynth,
};
use pairclass::tasks::{write_choice_questions, write_labeled_pairs, write_sat_questions, LabeledPairSet};
use pairclass::{seed, Error, Result};

/// Classify word pairs by the relations their corpus contexts reveal.
#[derive(Parser)]
#[command(name = "pairclass", version)]
struct Cli {
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Errors only.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a positional index over plain-text corpus files.
    Index {
        #[arg(long, required = true, num_args = 1..)]
        corpus: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Retrieve and lemmatize the phrases of every pair in a file.
    Harvest {
        #[arg(long)]
        index: PathBuf,
        /// Pair list (`x:y` or `x<TAB>y` per line), or a task file with --task.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        task: Option<Task>,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        max_phrases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Phrase table to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Select patterns and write the feature space and one vector per pair.
    Features {
        #[arg(long)]
        phrases: PathBuf,
        #[arg(long, default_value_t = 20)]
        k: usize,
        /// Directory for features.tsv and dataset.tsv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage for one task as described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        task: Option<Task>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write a planted-relation corpus, a task file, and a config to run them.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "sat")]
        task: Task,
        /// Questions for sat and toefl, pairs per class for labeled.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    bagging_rounds: Option<usize>,
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.c {
            cfg.svm.c = v;
        }
        if let Some(v) = self.gamma {
            cfg.svm.gamma = v;
        }
        if let Some(v) = self.folds {
            cfg.folds = v;
        }
        if let Some(v) = self.bagging_rounds {
            cfg.bagging_rounds = v;
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => "error",
        (false, 0) => "warn",
        (false, 1) => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Index { corpus, out } => {
            let index = build_index(&corpus, &out)?;
            println!(
                "{}: {} documents, {} tokens, {} words",
                out.display(),
                index.num_docs(),
                index.token_count(),
                index.vocabulary().len()
            );
        }
        Command::Harvest {
            index,
            data,
            task,
            lexicon,
            max_phrases,
            seed,
            out,
        } => {
            let index = CorpusIndex::open(&index)?;
            let rows = match task {
                Some(t) => TaskInput::load(t, &data)?.rows(),
                None => read_pair_list(&data)?,
            };
            let pairs: Vec<_> = rows.into_iter().map(|(p, _)| p).collect();
            let morph = match lexicon {
                Some(p) => Morphology::with_lexicon(&p)?,
                None => Morphology::new(),
            };
            let table = pipeline::harvest(
                &index,
                &pairs,
                &morph,
                &WindowSpec::default(),
                max_phrases,
                seed::derive(seed, "harvest"),
            )?;
            table.write(&out)?;
            let phrases: usize = table.iter().map(|(_, p)| p.len()).sum();
            println!("{}: {} pairs, {phrases} phrases", out.display(), table.len());
        }
        Command::Features { phrases, k, out } => {
            let table = PhraseTable::read(&phrases)?;
            let space = select_features(&table, k)?;
            let rows: Vec<_> = table.iter().map(|(p, _)| (p.clone(), None)).collect();
            let data = build_matrix(&rows, &table, &space)?;
            fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
            space.write(&out.join("features.tsv"))?;
            data.write(&out.join("dataset.tsv"))?;
            println!(
                "{}: {} features over {} pairs, {} all-zero vectors",
                out.display(),
                space.len(),
                data.len(),
                data.zero_rows()
            );
        }
        Command::Run {
            config,
            task,
            out,
            overrides,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(t) = task {
                cfg.task = t;
            }
            if let Some(o) = out {
                // Relative to the working directory, unlike paths in the file.
                cfg.out = std::path::absolute(&o).map_err(|e| io_error(&o, e))?;
            }
            overrides.apply(&mut cfg);
            let outcome = pipeline::run(&cfg)?;
            let s = &outcome.evaluation.summary;
            println!(
                "{}: accuracy {:.4} ({} of {}), baseline {:.4}; artifacts in {}",
                s.task,
                s.accuracy,
                s.correct,
                s.items,
                s.baseline,
                outcome.out_dir.display()
            );
        }
        Command::Synth { out, task, size, seed } => synth(&out, task, size, seed)?,
    }
    Ok(())
}

fn synth(out: &Path, task: Task, size: Option<usize>, seed: u64) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let (corpus, data_file) = match task {
        Task::Sat => {
            let cfg = SatSynth {
                questions: size.unwrap_or(50),
                ..SatSynth::default()
            };
            let (corpus, questions) = synthetic_sat(&cfg, seed)?;
            write_sat_questions(&out.join("sat.tsv"), &questions)?;
            (corpus, "sat.tsv")
        }
        Task::Toefl => {
            let cfg = ToeflSynth {
                questions: size.unwrap_or(80),
                ..ToeflSynth::default()
            };
            let (corpus, questions) = synthetic_toefl(&cfg, seed)?;
            write_choice_questions(&out.join("toefl.tsv"), &questions)?;
            (corpus, "toefl.tsv")
        }
        Task::Labeled => {
            let corpus = make_synthetic_corpus(&ternary_spec(size.unwrap_or(48)), seed)?;
            write_labeled_pairs(&out.join("pairs.tsv"), &LabeledPairSet::new(corpus.pairs.clone())?)?;
            (corpus, "pairs.tsv")
        }
    };
    let corpus_path = out.join("corpus.txt");
    fs::write(&corpus_path, &corpus.text).map_err(|e| io_error(&corpus_path, e))?;
    let mut cfg = RunConfig::new(task, data_file, vec!["corpus.txt".into()]);
    cfg.seed = seed;
    cfg.save(&out.join("run.toml"))?;
    info!("{} pairs planted", corpus.pairs.len());
    println!("{}: corpus.txt, {data_file}, run.toml", out.display());
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}
