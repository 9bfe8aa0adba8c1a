//! Planted-relation corpora: every relation class is signaled by its own
//! marker contexts, so pair labels are known by construction.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::morphology;
use crate::pair::WordPair;
use crate::seed;
use crate::tasks::{ChoiceQuestion, SatQuestion};

/// A relation class and the contexts that signal it. Each marker is a
/// phrase with exactly one `X` and one `Y` token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedRelation {
    pub name: String,
    pub markers: Vec<String>,
}

impl PlantedRelation {
    pub fn new(name: impl Into<String>, markers: &[&str]) -> Self {
        PlantedRelation {
            name: name.into(),
            markers: markers.iter().map(|m| m.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub relations: Vec<PlantedRelation>,
    /// Pairs of fresh nonce words generated for each relation.
    pub pairs_per_relation: usize,
    /// Pairs with given words, each with a relation index.
    pub fixed_pairs: Vec<(WordPair, usize)>,
    pub sentences_per_pair: usize,
    /// Fraction of each pair's sentences that place it in a random context
    /// instead of one of its relation's markers.
    pub distractor_rate: f64,
    /// Sentences mentioning no pair at all.
    pub filler_sentences: usize,
    pub sentences_per_document: usize,
}

impl PlantedSpec {
    pub fn new(relations: Vec<PlantedRelation>, pairs_per_relation: usize) -> Self {
        PlantedSpec {
            relations,
            pairs_per_relation,
            fixed_pairs: Vec::new(),
            sentences_per_pair: 10,
            distractor_rate: 0.2,
            filler_sentences: 50,
            sentences_per_document: 20,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.relations.len() < 2 {
            return bad("need at least two relations".into());
        }
        for r in &self.relations {
            if r.markers.is_empty() {
                return bad(format!("relation {} has no marker", r.name));
            }
            for m in &r.markers {
                let toks: Vec<&str> = m.split_whitespace().collect();
                let count = |s| toks.iter().filter(|t| **t == s).count();
                if count("X") != 1 || count("Y") != 1 {
                    return bad(format!("marker {m:?} needs exactly one X and one Y"));
                }
            }
        }
        if let Some((p, r)) = self.fixed_pairs.iter().find(|(_, r)| *r >= self.relations.len()) {
            return bad(format!("pair {p} has relation index {r} out of range"));
        }
        if !(0.0..=1.0).contains(&self.distractor_rate) {
            return bad(format!("distractor rate {} outside [0, 1]", self.distractor_rate));
        }
        if self.sentences_per_pair == 0 || self.sentences_per_document == 0 {
            return bad("sentence counts must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticCorpus {
    /// Documents separated by blank lines.
    pub text: String,
    /// Every pair with its relation name: generated pairs by relation, then
    /// the fixed pairs.
    pub pairs: Vec<(WordPair, String)>,
}

/// Ten relation classes with distinct marker contexts. Readable, so that
/// reports over synthetic data are easy to eyeball.
pub fn standard_relations() -> Vec<PlantedRelation> {
    vec![
        PlantedRelation::new("kind", &["X such as Y", "X including Y", "Y and other X"]),
        PlantedRelation::new("contrast", &["either X or Y", "X rather than Y", "X versus Y"]),
        PlantedRelation::new("material", &["X cut the Y", "X shaped the Y", "Y worked by X"]),
        PlantedRelation::new("container", &["X inside the Y", "X within a Y", "Y holding X"]),
        PlantedRelation::new("cause", &["X causes Y", "X leads to Y", "Y results from X"]),
        PlantedRelation::new("part", &["X is part of Y", "X belongs to Y", "Y has a X"]),
        PlantedRelation::new("purpose", &["X used for Y", "X helps with Y", "Y needs X"]),
        PlantedRelation::new("sequence", &["X before Y", "X precedes Y", "Y comes after X"]),
        PlantedRelation::new("size", &["X larger than Y", "X exceeds Y", "Y smaller than X"]),
        PlantedRelation::new("place", &["X lives near Y", "X found at Y", "Y home of X"]),
    ]
}

const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z"];
const NUCLEI: &[&str] = &["a", "i", "o", "u"];

/// Fresh lowercase words that are their own lemma and never repeat.
struct NonceWords {
    used: HashSet<String>,
}

impl NonceWords {
    fn new() -> Self {
        NonceWords { used: HashSet::new() }
    }

    fn reserve(&mut self, w: &str) {
        for form in morphology::inflect(w).map(|v| v.variants).unwrap_or_default() {
            self.used.insert(form);
        }
        self.used.insert(w.to_owned());
    }

    fn next(&mut self, rng: &mut ChaCha8Rng, syllables: usize) -> String {
        loop {
            let w: String = (0..syllables)
                .map(|_| format!("{}{}", ONSETS.choose(rng).unwrap(), NUCLEI.choose(rng).unwrap()))
                .collect();
            if !self.used.contains(&w) && morphology::lemmatize(&w) == w {
                self.reserve(&w);
                return w;
            }
        }
    }
}

fn fillers(rng: &mut ChaCha8Rng, vocab: &[String], range: std::ops::RangeInclusive<usize>) -> Vec<String> {
    let n = rng.gen_range(range);
    (0..n).map(|_| vocab.choose(rng).unwrap().clone()).collect()
}

/// Builds the corpus text and the ground-truth labels. Same spec and seed,
/// same bytes.
pub fn make_synthetic_corpus(spec: &PlantedSpec, seed: u64) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = seed::stage_rng(seed, "synthetic corpus");
    let mut words = NonceWords::new();
    for r in &spec.relations {
        for m in &r.markers {
            m.split_whitespace().filter(|t| *t != "X" && *t != "Y").for_each(|t| words.reserve(&t.to_lowercase()));
        }
    }
    for (p, _) in &spec.fixed_pairs {
        words.reserve(&p.x);
        words.reserve(&p.y);
    }
    let filler_vocab: Vec<String> = (0..400).map(|_| words.next(&mut rng, 2)).collect();

    let mut pairs = Vec::new();
    let mut assigned = Vec::new();
    for (ri, r) in spec.relations.iter().enumerate() {
        for _ in 0..spec.pairs_per_relation {
            let pair = WordPair::new(words.next(&mut rng, 3), words.next(&mut rng, 3));
            pairs.push((pair.clone(), r.name.clone()));
            assigned.push((pair, ri));
        }
    }
    for (p, ri) in &spec.fixed_pairs {
        pairs.push((p.clone(), spec.relations[*ri].name.clone()));
        assigned.push((p.clone(), *ri));
    }

    // Flanks of at least two fillers keep mentions in neighboring sentences
    // more than three words apart, so no window spans two sentences.
    let mut sentences = Vec::new();
    for (pair, ri) in &assigned {
        for _ in 0..spec.sentences_per_pair {
            let mut toks = fillers(&mut rng, &filler_vocab, 2..=3);
            if rng.gen_bool(spec.distractor_rate) {
                let gap = fillers(&mut rng, &filler_vocab, 0..=3);
                let (a, b) = if rng.gen_bool(0.5) { (&pair.x, &pair.y) } else { (&pair.y, &pair.x) };
                toks.push(a.clone());
                toks.extend(gap);
                toks.push(b.clone());
            } else {
                let marker = spec.relations[*ri].markers.choose(&mut rng).unwrap();
                toks.extend(marker.split_whitespace().map(|t| match t {
                    "X" => pair.x.clone(),
                    "Y" => pair.y.clone(),
                    other => other.to_lowercase(),
                }));
            }
            toks.extend(fillers(&mut rng, &filler_vocab, 2..=3));
            sentences.push(toks.join(" "));
        }
    }
    for _ in 0..spec.filler_sentences {
        sentences.push(fillers(&mut rng, &filler_vocab, 6..=12).join(" "));
    }
    sentences.shuffle(&mut rng);

    let mut text = String::new();
    for (i, doc) in sentences.chunks(spec.sentences_per_document).enumerate() {
        if i > 0 {
            text.push('\n');
        }
        for s in doc {
            text.push_str(s);
            text.push_str(".\n");
        }
    }
    Ok(SyntheticCorpus { text, pairs })
}

/// Knobs for a planted analogy set.
#[derive(Debug, Clone, PartialEq)]
pub struct SatSynth {
    pub questions: usize,
    /// Relations drawn from [`standard_relations`]; at least five.
    pub relations: usize,
    pub sentences_per_pair: usize,
    pub distractor_rate: f64,
    /// Put mason:stone, answered by carpenter:wood, first.
    pub include_example: bool,
}

impl Default for SatSynth {
    fn default() -> Self {
        SatSynth {
            questions: 50,
            relations: 10,
            sentences_per_pair: 8,
            distractor_rate: 0.2,
            include_example: true,
        }
    }
}

/// Questions whose stem and correct choice share a relation; the four
/// other choices each come from a different relation.
pub fn synthetic_sat(cfg: &SatSynth, seed: u64) -> Result<(SyntheticCorpus, Vec<SatQuestion>)> {
    let all = standard_relations();
    if cfg.relations < 5 || cfg.relations > all.len() {
        return Err(Error::InvalidArgument(format!(
            "need between 5 and {} relations, got {}",
            all.len(),
            cfg.relations
        )));
    }
    if cfg.questions == 0 {
        return Err(Error::InvalidArgument("need at least one question".into()));
    }
    let r = cfg.relations;
    let generated = cfg.questions - usize::from(cfg.include_example);
    let per_relation = 6 * generated.div_ceil(r);
    let mut spec = PlantedSpec::new(all.into_iter().take(r).collect(), per_relation);
    spec.sentences_per_pair = cfg.sentences_per_pair;
    spec.distractor_rate = cfg.distractor_rate;
    let example = [
        ("mason:stone", 2),
        ("teacher:chalk", 3),
        ("carpenter:wood", 2),
        ("soldier:gun", 4),
        ("photograph:camera", 5 % r),
        ("book:word", 6 % r),
    ];
    if cfg.include_example {
        spec.fixed_pairs = example.iter().map(|(p, ri)| (p.parse().unwrap(), *ri)).collect();
    }
    let corpus = make_synthetic_corpus(&spec, seed)?;

    let mut by_relation: Vec<std::collections::VecDeque<WordPair>> = (0..r)
        .map(|ri| {
            corpus.pairs[ri * per_relation..(ri + 1) * per_relation]
                .iter()
                .map(|(p, _)| p.clone())
                .collect()
        })
        .collect();
    let mut rng = seed::stage_rng(seed, "synthetic sat");
    let mut questions = Vec::new();
    if cfg.include_example {
        let p: Vec<WordPair> = example.iter().map(|(p, _)| p.parse().unwrap()).collect();
        questions.push(SatQuestion::new(
            p[0].clone(),
            [p[1].clone(), p[2].clone(), p[3].clone(), p[4].clone(), p[5].clone()],
            1,
        )?);
    }
    for i in 0..generated {
        let ri = i % r;
        let stem = by_relation[ri].pop_front().expect("enough pairs");
        let mut choices = vec![by_relation[ri].pop_front().expect("enough pairs")];
        for j in 1..5 {
            choices.push(by_relation[(ri + j) % r].pop_front().expect("enough pairs"));
        }
        let correct = choices[0].clone();
        choices.shuffle(&mut rng);
        let answer = choices.iter().position(|c| *c == correct).unwrap();
        let choices: [WordPair; 5] = choices.try_into().unwrap();
        questions.push(SatQuestion::new(stem, choices, answer)?);
    }
    Ok((corpus, questions))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToeflSynth {
    pub questions: usize,
    pub sentences_per_pair: usize,
    pub distractor_rate: f64,
    /// Put levied / imposed, believed, requested, correlated first.
    pub include_example: bool,
}

impl Default for ToeflSynth {
    fn default() -> Self {
        ToeflSynth {
            questions: 80,
            sentences_per_pair: 8,
            distractor_rate: 0.2,
            include_example: true,
        }
    }
}

/// Four-choice questions where the stem and its answer appear in synonym
/// contexts and the stem and each wrong choice in unrelated ones.
pub fn synthetic_toefl(cfg: &ToeflSynth, seed: u64) -> Result<(SyntheticCorpus, Vec<ChoiceQuestion>)> {
    if cfg.questions == 0 {
        return Err(Error::InvalidArgument("need at least one question".into()));
    }
    let relations = vec![
        PlantedRelation::new("synonym", &["X or rather Y", "X also called Y", "X in other words Y"]),
        PlantedRelation::new("unrelated", &["X next to Y", "X and then Y", "X beside the Y"]),
    ];
    let mut rng = seed::stage_rng(seed, "synthetic toefl");
    let mut words = NonceWords::new();
    for w in ["levied", "imposed", "believed", "requested", "correlated"] {
        words.reserve(w);
    }
    for r in &relations {
        for m in &r.markers {
            m.split_whitespace().for_each(|t| words.reserve(&t.to_lowercase()));
        }
    }
    let mut questions = Vec::new();
    if cfg.include_example {
        let choices = ["imposed", "believed", "requested", "correlated"].map(String::from);
        questions.push(ChoiceQuestion::new("levied", choices, 0)?);
    }
    while questions.len() < cfg.questions {
        // Four syllables keeps these apart from the corpus's own nonce words.
        let stem = words.next(&mut rng, 4);
        let choices: [String; 4] = std::array::from_fn(|_| words.next(&mut rng, 4));
        questions.push(ChoiceQuestion::new(stem, choices, rng.gen_range(0..4))?);
    }
    let mut spec = PlantedSpec::new(relations, 0);
    spec.sentences_per_pair = cfg.sentences_per_pair;
    spec.distractor_rate = cfg.distractor_rate;
    spec.fixed_pairs = questions
        .iter()
        .flat_map(|q| {
            q.choices
                .iter()
                .enumerate()
                .map(move |(i, c)| (WordPair::new(q.stem.clone(), c.clone()), usize::from(i != q.answer)))
        })
        .collect();
    let corpus = make_synthetic_corpus(&spec, seed)?;
    Ok((corpus, questions))
}

/// Three classes in the similar / associated / both scheme, with ale:beer
/// planted as both and cradle:baby as associated.
pub fn ternary_spec(pairs_per_relation: usize) -> PlantedSpec {
    let relations = vec![
        PlantedRelation::new("associated", &["X for the Y", "X goes with Y", "Y sleeps in X"]),
        PlantedRelation::new("both", &["X and its kin Y", "X alongside Y", "X or perhaps Y"]),
        PlantedRelation::new("similar", &["X resembles Y", "X much like Y", "Y similar to X"]),
    ];
    let mut spec = PlantedSpec::new(relations, pairs_per_relation);
    spec.fixed_pairs = vec![(WordPair::new("ale", "beer"), 1), (WordPair::new("cradle", "baby"), 0)];
    spec
}
