use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::Hyperparams;
use crate::error::{Error, Result};
use crate::index::WindowSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Five-choice analogy questions.
    Sat,
    /// Four-choice synonym questions.
    Toefl,
    /// Pairs with class labels.
    Labeled,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Sat => "sat",
            Task::Toefl => "toefl",
            Task::Labeled => "labeled",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sat" => Ok(Task::Sat),
            "toefl" => Ok(Task::Toefl),
            "labeled" => Ok(Task::Labeled),
            _ => Err(Error::InvalidArgument(format!(
                "unknown task {s:?} (expected sat, toefl, or labeled)"
            ))),
        }
    }
}

/// SVM settings as they appear in a config file. The training seed is not
/// listed here; it is derived from the run's root seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    pub gamma: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_passes: Option<usize>,
}

impl Default for SvmParams {
    fn default() -> Self {
        let hp = Hyperparams::default();
        SvmParams {
            c: hp.c,
            gamma: hp.gamma,
            tol: hp.tol,
            max_passes: hp.max_passes,
        }
    }
}

impl SvmParams {
    pub fn hyperparams(&self, seed: u64) -> Hyperparams {
        Hyperparams {
            c: self.c,
            gamma: self.gamma,
            tol: self.tol,
            max_passes: self.max_passes,
            seed,
        }
    }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_k() -> usize {
    20
}

fn default_folds() -> usize {
    10
}

fn default_rounds() -> usize {
    10
}

fn default_max_phrases() -> usize {
    10_000
}

/// Everything one run needs. Relative paths are resolved against the
/// directory of the file the config was loaded from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    /// Question or labeled-pair file for `task`.
    pub data: PathBuf,
    /// Plain-text corpus files. May be empty when `index` already exists.
    #[serde(default)]
    pub corpus: Vec<PathBuf>,
    /// Index directory, reused when it matches the corpus. Defaults to
    /// `index` under `out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Exception lexicon of `lemma<TAB>form` lines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default = "default_rounds")]
    pub bagging_rounds: usize,
    /// Pairs with more phrases than this are downsampled.
    #[serde(default = "default_max_phrases")]
    pub max_phrases: usize,
    #[serde(default)]
    pub window: WindowSpec,
    #[serde(default)]
    pub svm: SvmParams,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn new(task: Task, data: impl Into<PathBuf>, corpus: Vec<PathBuf>) -> Self {
        RunConfig {
            task,
            data: data.into(),
            corpus,
            index: None,
            out: default_out(),
            lexicon: None,
            seed: 0,
            k: default_k(),
            folds: default_folds(),
            bagging_rounds: default_rounds(),
            max_phrases: default_max_phrases(),
            window: WindowSpec::default(),
            svm: SvmParams::default(),
            base_dir: PathBuf::new(),
        }
    }

    /// Parses without resolving paths.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {}", e.message())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads a config file; relative paths will resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::parse(path, 0, msg),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_toml_string()).map_err(|e| Error::io(path, e))
    }

    /// The settings that determine results, as TOML. Output and index
    /// locations are left at their defaults.
    pub fn canonical_toml(&self) -> String {
        RunConfig {
            out: default_out(),
            index: None,
            ..self.clone()
        }
        .to_toml_string()
    }

    /// SHA-256 of [`Self::canonical_toml`]. Independent of where the file
    /// sits and where outputs go.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_toml().as_bytes()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out)
    }

    pub fn index_dir(&self) -> PathBuf {
        match &self.index {
            Some(p) => self.resolve(p),
            None => self.out_dir().join("index"),
        }
    }

    pub fn corpus_paths(&self) -> Vec<PathBuf> {
        self.corpus.iter().map(|p| self.resolve(p)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.bagging_rounds == 0 {
            return bad("bagging_rounds must be at least 1".into());
        }
        if self.max_phrases == 0 {
            return bad("max_phrases must be at least 1".into());
        }
        if self.corpus.is_empty() && self.index.is_none() {
            return bad("either corpus or index must be given".into());
        }
        self.window.validate()?;
        self.svm.hyperparams(self.seed).validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::from_toml_str("task = \"sat\"\ndata = \"q.tsv\"\ncorpus = [\"c.txt\"]\n").unwrap();
        assert_eq!(c.k, 20);
        assert_eq!(c.folds, 10);
        assert_eq!(c.bagging_rounds, 10);
        assert_eq!(c.window, WindowSpec::default());
        assert_eq!(c.svm.c, 1.0);
        assert_eq!(c.svm.gamma, 0.01);
        assert_eq!(c.out, PathBuf::from("out"));
        c.validate().unwrap();
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::new(Task::Labeled, "pairs.tsv", vec!["a.txt".into(), "b.txt".into()]);
        c.index = Some("idx".into());
        c.lexicon = Some("lex.tsv".into());
        c.seed = 17;
        c.svm.max_passes = Some(40);
        c.window.between.max = 2;
        let text = c.to_toml_string();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
        assert_eq!(RunConfig::new(Task::Sat, "s", vec![]).to_toml_string().lines().next(), Some("task = \"sat\""));
    }

    #[test]
    fn validation() {
        let mut c = RunConfig::new(Task::Sat, "q.tsv", vec!["c.txt".into()]);
        c.k = 0;
        assert!(c.validate().unwrap_err().to_string().contains("k must be"));
        c.k = 20;
        c.folds = 1;
        assert!(c.validate().is_err());
        c.folds = 10;
        c.svm.gamma = 0.0;
        assert!(c.validate().is_err());
        c.svm.gamma = 0.01;
        c.corpus.clear();
        assert!(c.validate().is_err());
        assert!(RunConfig::from_toml_str("task = \"sat\"\ndata = \"q\"\nbogus = 1\n").is_err());
        assert!(RunConfig::from_toml_str("task = \"chess\"\ndata = \"q\"\n").is_err());
    }

    #[test]
    fn paths_resolve_against_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "task = \"toefl\"\ndata = \"q.tsv\"\ncorpus = [\"c.txt\"]\n").unwrap();
        let c = RunConfig::load(&path).unwrap();
        assert_eq!(c.resolve(&c.data), dir.path().join("q.tsv"));
        assert_eq!(c.index_dir(), dir.path().join("out").join("index"));
        let moved = RunConfig::from_toml_str(&fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(moved.checksum(), c.checksum());
        let elsewhere = RunConfig {
            out: "/tmp/other".into(),
            index: Some("/tmp/idx".into()),
            ..c.clone()
        };
        assert_eq!(elsewhere.checksum(), c.checksum());
        let reseeded = RunConfig { seed: 1, ..c.clone() };
        assert_ne!(reseeded.checksum(), c.checksum());
    }
}
