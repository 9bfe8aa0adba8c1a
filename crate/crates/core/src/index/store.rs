//! Index construction and the on-disk layout.
//!
//! An index directory holds two files:
//!
//! * `meta`: text header (`pairclass-index<TAB>version`), token count, corpus
//!   checksum, per-document lengths, and the vocabulary in id order.
//! * `postings`: an 8-byte magic followed by one record per word id. Each
//!   record is `ndocs` then, per document, `doc_delta npositions pos_delta*`,
//!   all LEB128 varints.
//!
//! The forward token arrays used to materialize windows are rebuilt from the
//! postings at open time, so raw text is never rescanned.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::tokenize::split_documents;
use super::varint;
use crate::error::{Error, Result};

pub const INDEX_FORMAT_VERSION: u32 = 1;

const META_MAGIC: &str = "pairclass-index";
const POSTINGS_MAGIC: &[u8; 8] = b"PCPOST01";

/// Bidirectional word/id map. Ids are assigned in order of first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(word.to_owned());
        self.ids.insert(word.to_owned(), id);
        id
    }
}

/// Immutable positional index plus forward token arrays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusIndex {
    pub(super) vocab: Vocabulary,
    pub(super) docs: Vec<Vec<u32>>,
    token_count: u64,
    corpus_checksum: String,
    postings: Vec<u8>,
    /// `offsets[w]..offsets[w + 1]` is word `w`'s record in `postings`.
    offsets: Vec<usize>,
}

/// SHA-256 over each corpus file's length and bytes, in the given order.
pub fn corpus_checksum<P: AsRef<Path>>(paths: &[P]) -> Result<String> {
    let mut h = Sha256::new();
    for p in paths {
        let bytes = fs::read(p.as_ref()).map_err(|e| Error::io(p.as_ref(), e))?;
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(&bytes);
    }
    Ok(hex::encode(h.finalize()))
}

/// Reads, tokenizes, and indexes the corpus files, then writes the index to
/// `output` via a temporary sibling directory and a rename, so an interrupted
/// build never leaves a half-written index behind.
pub fn build_index<P: AsRef<Path>>(corpus: &[P], output: &Path) -> Result<CorpusIndex> {
    let texts = corpus
        .iter()
        .map(|p| fs::read(p.as_ref()).map_err(|e| Error::io(p.as_ref(), e)))
        .collect::<Result<Vec<_>>>()?;
    let checksum = {
        let mut h = Sha256::new();
        for bytes in &texts {
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(bytes);
        }
        hex::encode(h.finalize())
    };
    // Files tokenize independently; concatenating in input order keeps
    // document ids and vocabulary ids deterministic.
    let docs: Vec<Vec<String>> = texts
        .par_iter()
        .map(|bytes| split_documents(&String::from_utf8_lossy(bytes)))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let index = CorpusIndex::from_documents(&docs, checksum);
    index.write(output)?;
    info!(
        "indexed {} documents, {} tokens, {} distinct words into {}",
        index.num_docs(),
        index.token_count(),
        index.vocab.len(),
        output.display()
    );
    Ok(index)
}

impl CorpusIndex {
    /// Builds an in-memory index from pre-tokenized documents.
    pub fn from_documents<S: AsRef<str>>(docs: &[Vec<S>], corpus_checksum: String) -> Self {
        let mut vocab = Vocabulary::default();
        let mut forward = Vec::with_capacity(docs.len());
        for doc in docs {
            forward.push(doc.iter().map(|w| vocab.intern(w.as_ref())).collect::<Vec<u32>>());
        }
        Self::from_forward(vocab, forward, corpus_checksum)
    }

    /// Convenience for tests and small inputs: one document per string.
    pub fn from_texts<S: AsRef<str>>(texts: &[S]) -> Self {
        let docs: Vec<Vec<String>> = texts
            .iter()
            .map(|t| super::tokenize::tokenize_str(t.as_ref()))
            .collect();
        let mut h = Sha256::new();
        for t in texts {
            h.update((t.as_ref().len() as u64).to_le_bytes());
            h.update(t.as_ref().as_bytes());
        }
        Self::from_documents(&docs, hex::encode(h.finalize()))
    }

    fn from_forward(vocab: Vocabulary, docs: Vec<Vec<u32>>, corpus_checksum: String) -> Self {
        let mut lists: Vec<Vec<(u32, u32)>> = vec![Vec::new(); vocab.len()];
        for (d, doc) in docs.iter().enumerate() {
            for (p, &w) in doc.iter().enumerate() {
                lists[w as usize].push((d as u32, p as u32));
            }
        }
        let mut postings = Vec::new();
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        for list in &lists {
            offsets.push(postings.len());
            encode_postings(&mut postings, list);
        }
        offsets.push(postings.len());
        let token_count = docs.iter().map(|d| d.len() as u64).sum();
        CorpusIndex {
            vocab,
            docs,
            token_count,
            corpus_checksum,
            postings,
            offsets,
        }
    }

    pub fn token_count(&self) -> u64 {
        self.token_count
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn corpus_checksum(&self) -> &str {
        &self.corpus_checksum
    }

    /// Tokens of document `doc`, as strings.
    pub fn document(&self, doc: usize) -> Vec<&str> {
        self.docs[doc].iter().map(|&w| self.vocab.word(w)).collect()
    }

    /// `(doc, position)` occurrences of `word`, sorted.
    pub fn positions(&self, word: &str) -> Vec<(u32, u32)> {
        match self.vocab.id(word) {
            Some(id) => self.decode(id),
            None => Vec::new(),
        }
    }

    pub(super) fn decode(&self, id: u32) -> Vec<(u32, u32)> {
        let record = &self.postings[self.offsets[id as usize]..self.offsets[id as usize + 1]];
        decode_postings(record).expect("postings validated at construction")
    }

    pub fn write(&self, output: &Path) -> Result<()> {
        let name = output
            .file_name()
            .ok_or_else(|| Error::InvalidArgument(format!("bad index path {}", output.display())))?;
        let parent = match output.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
        let tmp = parent.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        }
        fs::create_dir(&tmp).map_err(|e| Error::io(&tmp, e))?;

        let meta_path = tmp.join("meta");
        fs::write(&meta_path, self.meta_text()).map_err(|e| Error::io(&meta_path, e))?;
        let postings_path = tmp.join("postings");
        let mut f = fs::File::create(&postings_path).map_err(|e| Error::io(&postings_path, e))?;
        f.write_all(POSTINGS_MAGIC)
            .and_then(|_| f.write_all(&self.postings))
            .and_then(|_| f.sync_all())
            .map_err(|e| Error::io(&postings_path, e))?;

        if output.exists() {
            // Only ever replace a previous index, never an arbitrary directory.
            let is_index = output.join("meta").is_file()
                || fs::read_dir(output).map(|mut d| d.next().is_none()).unwrap_or(false);
            if !is_index {
                let _ = fs::remove_dir_all(&tmp);
                return Err(Error::InvalidArgument(format!(
                    "{} exists and is not an index directory",
                    output.display()
                )));
            }
            fs::remove_dir_all(output).map_err(|e| Error::io(output, e))?;
        }
        fs::rename(&tmp, output).map_err(|e| Error::io(output, e))
    }

    fn meta_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("{META_MAGIC}\t{INDEX_FORMAT_VERSION}\n"));
        s.push_str(&format!("token_count\t{}\n", self.token_count));
        s.push_str(&format!("corpus_sha256\t{}\n", self.corpus_checksum));
        s.push_str(&format!("documents\t{}\n", self.docs.len()));
        for d in &self.docs {
            s.push_str(&format!("{}\n", d.len()));
        }
        s.push_str(&format!("vocabulary\t{}\n", self.vocab.len()));
        for w in &self.vocab.words {
            s.push_str(w);
            s.push('\n');
        }
        s
    }

    /// Reads only the header of an index's `meta` file: its format version
    /// and corpus checksum. Used to decide whether a cached index is reusable.
    pub fn peek(dir: &Path) -> Result<(u32, String)> {
        let path = dir.join("meta");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut lines = text.lines();
        let version = parse_header(&path, lines.next())?;
        let checksum = field(&path, 3, lines.nth(1), "corpus_sha256")?.to_owned();
        Ok((version, checksum))
    }

    /// Opens an index written by [`CorpusIndex::write`]. Refuses any other
    /// format version.
    pub fn open(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("meta");
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(&meta_path, 0, format!("truncated before {what}")))
        };

        let (_, header) = next("header")?;
        let version = parse_header(&meta_path, Some(header))?;
        if version != INDEX_FORMAT_VERSION {
            return Err(Error::FormatVersion {
                path: meta_path,
                found: version.to_string(),
                expected: INDEX_FORMAT_VERSION.to_string(),
            });
        }
        let (n, l) = next("token_count")?;
        let token_count: u64 = parse_num(&meta_path, n, field(&meta_path, n, Some(l), "token_count")?)?;
        let (n, l) = next("corpus_sha256")?;
        let corpus_checksum = field(&meta_path, n, Some(l), "corpus_sha256")?.to_owned();
        let (n, l) = next("documents")?;
        let num_docs: usize = parse_num(&meta_path, n, field(&meta_path, n, Some(l), "documents")?)?;
        let mut doc_lens = Vec::with_capacity(num_docs);
        for _ in 0..num_docs {
            let (n, l) = next("document length")?;
            doc_lens.push(parse_num::<usize>(&meta_path, n, l)?);
        }
        let (n, l) = next("vocabulary")?;
        let vocab_len: usize = parse_num(&meta_path, n, field(&meta_path, n, Some(l), "vocabulary")?)?;
        let mut vocab = Vocabulary::default();
        for _ in 0..vocab_len {
            let (n, w) = next("vocabulary word")?;
            if w.is_empty() || vocab.id(w).is_some() {
                return Err(Error::parse(&meta_path, n, format!("bad vocabulary entry {w:?}")));
            }
            vocab.intern(w);
        }

        let postings_path = dir.join("postings");
        let raw = fs::read(&postings_path).map_err(|e| Error::io(&postings_path, e))?;
        if raw.len() < POSTINGS_MAGIC.len() || &raw[..POSTINGS_MAGIC.len()] != POSTINGS_MAGIC {
            let found = String::from_utf8_lossy(&raw[..raw.len().min(POSTINGS_MAGIC.len())]).into_owned();
            return Err(Error::FormatVersion {
                path: postings_path,
                found,
                expected: String::from_utf8_lossy(POSTINGS_MAGIC).into_owned(),
            });
        }
        let postings = raw[POSTINGS_MAGIC.len()..].to_vec();

        let corrupt = |msg: String| Error::parse(&postings_path, 0, msg);
        let mut docs: Vec<Vec<u32>> = doc_lens.iter().map(|&n| vec![u32::MAX; n]).collect();
        let mut offsets = Vec::with_capacity(vocab_len + 1);
        let mut pos = 0;
        for w in 0..vocab_len as u32 {
            offsets.push(pos);
            let start = pos;
            let list = decode_one(&postings, &mut pos)
                .ok_or_else(|| corrupt(format!("truncated record for word {w}")))?;
            debug_assert!(pos > start);
            for (d, p) in list {
                let slot = docs
                    .get_mut(d as usize)
                    .and_then(|doc| doc.get_mut(p as usize))
                    .ok_or_else(|| corrupt(format!("position ({d},{p}) out of range")))?;
                *slot = w;
            }
        }
        offsets.push(pos);
        if pos != postings.len() {
            return Err(corrupt("trailing bytes".into()));
        }
        if docs.iter().flatten().any(|&w| w == u32::MAX) {
            return Err(corrupt("postings do not cover every token".into()));
        }
        let index = CorpusIndex {
            vocab,
            docs,
            token_count,
            corpus_checksum,
            postings,
            offsets,
        };
        if index.docs.iter().map(|d| d.len() as u64).sum::<u64>() != token_count {
            return Err(Error::parse(&meta_path, 2, "token_count disagrees with document lengths"));
        }
        Ok(index)
    }
}

fn parse_header(path: &Path, line: Option<&str>) -> Result<u32> {
    let line = line.ok_or_else(|| Error::parse(path, 1, "empty meta file"))?;
    match line.split_once('\t') {
        Some((META_MAGIC, v)) => v.parse().map_err(|_| Error::FormatVersion {
            path: path.to_path_buf(),
            found: v.to_owned(),
            expected: INDEX_FORMAT_VERSION.to_string(),
        }),
        _ => Err(Error::FormatVersion {
            path: path.to_path_buf(),
            found: line.to_owned(),
            expected: format!("{META_MAGIC}\t{INDEX_FORMAT_VERSION}"),
        }),
    }
}

fn field<'a>(path: &Path, n: usize, line: Option<&'a str>, name: &str) -> Result<&'a str> {
    match line.and_then(|l| l.split_once('\t')) {
        Some((k, v)) if k == name => Ok(v),
        _ => Err(Error::parse(path, n, format!("expected {name}"))),
    }
}

fn parse_num<T: std::str::FromStr>(path: &Path, n: usize, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(path, n, format!("bad number {s:?}")))
}

fn encode_postings(out: &mut Vec<u8>, list: &[(u32, u32)]) {
    let mut groups: Vec<(u32, Vec<u32>)> = Vec::new();
    for &(d, p) in list {
        match groups.last_mut() {
            Some((gd, ps)) if *gd == d => ps.push(p),
            _ => groups.push((d, vec![p])),
        }
    }
    varint::write(out, groups.len() as u64);
    let mut prev_doc = 0;
    for (d, ps) in &groups {
        varint::write(out, u64::from(d - prev_doc));
        prev_doc = *d;
        varint::write(out, ps.len() as u64);
        let mut prev = 0;
        for &p in ps {
            varint::write(out, u64::from(p - prev));
            prev = p;
        }
    }
}

fn decode_one(buf: &[u8], pos: &mut usize) -> Option<Vec<(u32, u32)>> {
    let ndocs = varint::read(buf, pos)?;
    let mut out = Vec::new();
    let mut doc = 0u64;
    for i in 0..ndocs {
        let delta = varint::read(buf, pos)?;
        if i > 0 && delta == 0 {
            return None;
        }
        doc += delta;
        let npos = varint::read(buf, pos)?;
        if npos == 0 {
            return None;
        }
        let mut p = 0u64;
        for j in 0..npos {
            let delta = varint::read(buf, pos)?;
            if j > 0 && delta == 0 {
                return None;
            }
            p += delta;
            out.push((u32::try_from(doc).ok()?, u32::try_from(p).ok()?));
        }
    }
    Some(out)
}

fn decode_postings(record: &[u8]) -> Option<Vec<(u32, u32)>> {
    let mut pos = 0;
    let out = decode_one(record, &mut pos)?;
    (pos == record.len()).then_some(out)
}
