//! Supervised classification of word pairs by the semantic relations between
//! their members.
//!
//! The pipeline runs in stages:
//!
//! 1. [`index`]: tokenize plain-text corpora into a positional inverted index
//!    and retrieve every short window where both words of a pair co-occur.
//! 2. [`morphology`]: widen queries with regular inflections and reduce the
//!    retrieved phrases to lemmas.
//! 3. [`patterns`]: turn each phrase into wildcard patterns and keep the
//!    `k * N` patterns shared by the most pairs.
//! 4. [`features`]: one unit-length `log(f + 1)` vector per pair.
//! 5. [`classifier`]: an RBF-kernel SVM trained by SMO, with logistic
//!    calibration of its outputs.
//! 6. [`tasks`]: analogy, synonym, and labeled-pair evaluation harnesses.
//!
//! [`pipeline`] wires the stages together behind a declarative config.

pub mod classifier;
pub mod error;
pub mod features;
pub mod index;
pub mod morphology;
pub mod pair;
pub mod patterns;
pub mod pipeline;
pub mod seed;
pub mod tasks;
pub mod vector;

pub use error::{Error, Result};
pub use pair::WordPair;
