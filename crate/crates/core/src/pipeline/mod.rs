//! End-to-end runs: index, harvest, select patterns, build vectors,
//! evaluate, and write every artifact a run depends on.

mod config;
mod synth;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::ModelBundle;
use crate::error::{Error, Result};
use crate::features::{build_matrix, Dataset};
use crate::index::{build_index, corpus_checksum, CorpusIndex, WindowSpec, INDEX_FORMAT_VERSION};
use crate::morphology::Morphology;
use crate::pair::WordPair;
use crate::patterns::{downsample, select_features, FeatureSpace, PhraseTable};
use crate::seed;
use crate::tasks::{
    eval_labeled_pairs, eval_sat, eval_toefl, expand_choice_question, read_choice_questions, read_labeled_pairs,
    read_sat_questions, ChoiceQuestion, Evaluation, LabeledPairSet, SatQuestion,
};

pub use config::{RunConfig, SvmParams, Task};
pub use synth::{
    make_synthetic_corpus, standard_relations, synthetic_sat, synthetic_toefl, ternary_spec, PlantedRelation,
    PlantedSpec, SatSynth, SyntheticCorpus, ToeflSynth,
};

/// Retrieves, lemmatizes, and caps the phrases of every distinct pair.
/// Pair order in the table follows first appearance in `pairs`.
pub fn harvest(
    index: &CorpusIndex,
    pairs: &[WordPair],
    morph: &Morphology,
    window: &WindowSpec,
    max_phrases: usize,
    seed: u64,
) -> Result<PhraseTable> {
    let mut seen = HashSet::new();
    let unique: Vec<&WordPair> = pairs.iter().filter(|p| seen.insert(*p)).collect();
    let found: Vec<Vec<_>> = unique
        .par_iter()
        .map(|pair| {
            if pair.x == pair.y {
                return Err(Error::SameWordPair(pair.x.clone(), pair.y.clone()));
            }
            // When the two words inflect into each other (dog:dogs), each
            // side keeps only the forms the other side does not claim.
            let xv = morph.inflect(&pair.x)?.variants;
            let yv = morph.inflect(&pair.y)?.variants;
            let xs: Vec<&String> = xv.iter().filter(|w| **w != pair.y && !yv.contains(*w) || **w == pair.x).collect();
            let ys: Vec<&String> = yv.iter().filter(|w| !xs.contains(w)).collect();
            let phrases = index.find_phrases(xs, ys, window)?;
            let normalized = phrases.iter().map(|m| morph.normalize_phrase(m)).collect();
            Ok(downsample(
                pair,
                normalized,
                max_phrases,
                seed::derive(seed, &format!("downsample {pair}")),
            ))
        })
        .collect::<Result<_>>()?;
    let mut table = PhraseTable::new();
    for (pair, phrases) in unique.into_iter().zip(found) {
        table.insert(pair.clone(), phrases);
    }
    let empty = table.iter().filter(|(_, p)| p.is_empty()).count();
    if empty > 0 {
        warn!("{empty} of {} pairs have no phrases in the corpus", table.len());
    }
    Ok(table)
}

/// A list of pairs, one per line: `x:y` or `x<TAB>y`, optionally followed
/// by a tab and a label.
pub fn read_pair_list(path: &Path) -> Result<Vec<(WordPair, Option<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        let bad = || Error::parse(path, n + 1, "expected x:y or x<TAB>y, then an optional label");
        let (pair, rest) = if f[0].contains(':') {
            (f[0].to_lowercase().parse::<WordPair>().map_err(|_| bad())?, &f[1..])
        } else if f.len() >= 2 && !f[1].is_empty() {
            (WordPair::new(f[0].to_lowercase(), f[1].to_lowercase()), &f[2..])
        } else {
            return Err(bad());
        };
        let label = match rest {
            [] => None,
            [l] if !l.is_empty() => Some(l.to_string()),
            _ => return Err(bad()),
        };
        out.push((pair, label));
    }
    Ok(out)
}

/// The parsed questions or pairs of one task.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskInput {
    Sat(Vec<SatQuestion>),
    Toefl(Vec<ChoiceQuestion>),
    Labeled(LabeledPairSet),
}

impl TaskInput {
    pub fn load(task: Task, path: &Path) -> Result<Self> {
        Ok(match task {
            Task::Sat => TaskInput::Sat(read_sat_questions(path)?),
            Task::Toefl => TaskInput::Toefl(read_choice_questions(path)?),
            Task::Labeled => TaskInput::Labeled(read_labeled_pairs(path)?),
        })
    }

    /// Dataset rows in the order the task's evaluator expects.
    pub fn rows(&self) -> Vec<(WordPair, Option<String>)> {
        match self {
            TaskInput::Sat(qs) => {
                let mut seen = HashSet::new();
                qs.iter()
                    .flat_map(|q| q.pairs())
                    .filter(|p| seen.insert(*p))
                    .map(|p| (p.clone(), None))
                    .collect()
            }
            TaskInput::Toefl(qs) => qs
                .iter()
                .flat_map(expand_choice_question)
                .map(|(p, l)| (p, Some(l)))
                .collect(),
            TaskInput::Labeled(set) => set.pairs().iter().map(|(p, l)| (p.clone(), Some(l.clone()))).collect(),
        }
    }

    pub fn evaluate(&self, data: &Dataset, cfg: &RunConfig) -> Result<Evaluation> {
        let hp = cfg.svm.hyperparams(seed::derive(cfg.seed, "svm"));
        let task_seed = seed::derive(cfg.seed, "task");
        let mut evaluation = match self {
            TaskInput::Sat(qs) => eval_sat(qs, data, &hp, cfg.bagging_rounds, task_seed),
            TaskInput::Toefl(qs) => eval_toefl(qs, data, &hp, cfg.folds, task_seed),
            TaskInput::Labeled(set) => eval_labeled_pairs(set, data, &hp, cfg.folds, task_seed),
        }?;
        // Report the seed a user would rerun with.
        evaluation.summary.seed = cfg.seed;
        Ok(evaluation)
    }
}

/// Opens the configured index when it was built from the configured corpus,
/// otherwise builds it. Returns whether an existing index was reused.
pub fn open_or_build_index(cfg: &RunConfig) -> Result<(CorpusIndex, bool)> {
    let dir = cfg.index_dir();
    let corpus = cfg.corpus_paths();
    let exists = dir.join("meta").exists();
    if exists {
        let (version, checksum) = CorpusIndex::peek(&dir)?;
        if version != INDEX_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                path: dir.join("meta"),
                found: version.to_string(),
                expected: INDEX_FORMAT_VERSION.to_string(),
            });
        }
        if corpus.is_empty() || corpus_checksum(&corpus)? == checksum {
            info!("reusing index {}", dir.display());
            return Ok((CorpusIndex::open(&dir)?, true));
        }
        warn!("index {} was built from a different corpus; rebuilding", dir.display());
    } else if corpus.is_empty() {
        return Err(Error::io(
            dir.join("meta"),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no index and no corpus to build one"),
        ));
    }
    Ok((build_index(&corpus, &dir)?, false))
}

/// What produced a run's outputs, and a hash of each output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub index_format_version: u32,
    pub task: Task,
    pub seed: u64,
    pub config_sha256: String,
    pub config: String,
    pub corpus_sha256: String,
    pub space_sha256: String,
    pub pairs: usize,
    pub features: usize,
    pub artifacts: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub evaluation: Evaluation,
    pub manifest: Manifest,
    pub out_dir: PathBuf,
    pub index_reused: bool,
}

pub const ARTIFACTS: [&str; 7] = [
    "report.txt",
    "summary.json",
    "phrases.tsv",
    "features.tsv",
    "dataset.tsv",
    "model.txt",
    "manifest.json",
];

/// Runs every stage for the configured task and writes the artifacts listed
/// in [`ARTIFACTS`] into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let input = TaskInput::load(cfg.task, &cfg.resolve(&cfg.data))?;
    let morph = match &cfg.lexicon {
        Some(p) => Morphology::with_lexicon(&cfg.resolve(p))?,
        None => Morphology::new(),
    };
    let (index, index_reused) = open_or_build_index(cfg)?;

    let rows = input.rows();
    let pairs: Vec<WordPair> = rows.iter().map(|(p, _)| p.clone()).collect();
    let table = harvest(
        &index,
        &pairs,
        &morph,
        &cfg.window,
        cfg.max_phrases,
        seed::derive(cfg.seed, "harvest"),
    )?;
    let space = select_features(&table, cfg.k)?;
    info!("{} pairs, {} features", table.len(), space.len());
    let data = build_matrix(&rows, &table, &space)?;
    let evaluation = input.evaluate(&data, cfg)?;
    info!(
        "{}: accuracy {:.4} ({} of {})",
        cfg.task, evaluation.summary.accuracy, evaluation.summary.correct, evaluation.summary.items
    );

    let out_dir = cfg.out_dir();
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let mut manifest = Manifest {
        tool: "pairclass".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        index_format_version: INDEX_FORMAT_VERSION,
        task: cfg.task,
        seed: cfg.seed,
        config_sha256: cfg.checksum(),
        config: cfg.canonical_toml(),
        corpus_sha256: index.corpus_checksum().to_owned(),
        space_sha256: space.checksum(),
        pairs: table.len(),
        features: space.len(),
        artifacts: BTreeMap::new(),
    };
    let files = render_artifacts(&manifest, &evaluation, &table, &space, &data);
    for (name, body) in &files {
        write(&out_dir.join(name), body)?;
        manifest.artifacts.insert(name.to_string(), hex::encode(Sha256::digest(body.as_bytes())));
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write(&out_dir.join("manifest.json"), &json)?;
    Ok(RunOutcome {
        evaluation,
        manifest,
        out_dir,
        index_reused,
    })
}

fn render_artifacts(
    manifest: &Manifest,
    evaluation: &Evaluation,
    table: &PhraseTable,
    space: &FeatureSpace,
    data: &Dataset,
) -> Vec<(&'static str, String)> {
    let report = format!(
        "# pairclass report\nconfig_sha256\t{}\ncorpus_sha256\t{}\nspace_sha256\t{}\npairs\t{}\nfeatures\t{}\n{}",
        manifest.config_sha256,
        manifest.corpus_sha256,
        manifest.space_sha256,
        manifest.pairs,
        manifest.features,
        evaluation.report_text()
    );
    let summary = serde_json::to_string_pretty(&evaluation.summary).expect("summary serializes") + "\n";
    let mut bundle = ModelBundle::new(space.checksum());
    for (name, model) in &evaluation.models {
        bundle.push(name.clone(), model.clone());
    }
    vec![
        ("report.txt", report),
        ("summary.json", summary),
        ("phrases.tsv", table.to_text()),
        ("features.tsv", space.to_text()),
        ("dataset.tsv", data.to_text()),
        ("model.txt", bundle.to_text()),
    ]
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_list_formats() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pairs.txt");
        fs::write(&p, "# comment\nmason:stone\nCarpenter\twood\tcraft\nale:beer\tboth\n").unwrap();
        let got = read_pair_list(&p).unwrap();
        assert_eq!(got[0], (WordPair::new("mason", "stone"), None));
        assert_eq!(got[1], (WordPair::new("carpenter", "wood"), Some("craft".into())));
        assert_eq!(got[2], (WordPair::new("ale", "beer"), Some("both".into())));
        fs::write(&p, "lonely\n").unwrap();
        assert!(matches!(read_pair_list(&p), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn harvest_lemmatizes_and_keeps_first_order() {
        let index = CorpusIndex::from_texts(&["the masons cut stones with care", "a stone mason"]);
        let pairs = [WordPair::new("mason", "stone"), WordPair::new("care", "with"), WordPair::new("mason", "stone")];
        let t = harvest(&index, &pairs, &Morphology::new(), &WindowSpec::default(), 100, 0).unwrap();
        assert_eq!(t.len(), 2);
        let ms = t.get(&pairs[0]).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].tokens, ["the", "mason", "cut", "stone", "with"]);
        assert!(!ms[1].x_first);
        assert!(harvest(&index, &[WordPair::new("a", "a")], &Morphology::new(), &WindowSpec::default(), 9, 0).is_err());
    }

    #[test]
    fn overlapping_inflections_still_query() {
        let index = CorpusIndex::from_texts(&["one dog chased two dogs"]);
        let t = harvest(&index, &[WordPair::new("dog", "dogs")], &Morphology::new(), &WindowSpec::default(), 9, 0)
            .unwrap();
        assert_eq!(t.get(&WordPair::new("dog", "dogs")).unwrap().len(), 1);
    }

    #[test]
    fn exit_codes() {
        let missing = Error::io("x", std::io::Error::new(std::io::ErrorKind::NotFound, "gone"));
        assert_eq!(missing.exit_code(), 2);
        assert_eq!(Error::InvalidArgument("k".into()).exit_code(), 2);
        let v = Error::FormatVersion {
            path: "m".into(),
            found: "9".into(),
            expected: "1".into(),
        };
        assert_eq!(v.exit_code(), 3);
        assert_eq!(Error::Training("one class".into()).exit_code(), 4);
    }
}
