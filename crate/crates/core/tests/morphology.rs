use pairclass::index::PhraseMatch;
use pairclass::morphology::{inflect, lemmatize, normalize_phrase};
use proptest::prelude::*;

struct Entry {
    lemma: String,
    pos: String,
    forms: Vec<String>,
}

fn lexicon() -> Vec<Entry> {
    include_str!("fixtures/regular_lexicon.tsv")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            Entry {
                lemma: f[0].to_string(),
                pos: f[1].to_string(),
                forms: f[2].split(' ').map(String::from).collect(),
            }
        })
        .collect()
}

#[test]
fn inflections_lemmatize_back_together() {
    let verbs: Vec<Entry> = lexicon().into_iter().filter(|e| e.pos == "verb").collect();
    assert_eq!(verbs.len(), 1000);
    for e in &verbs {
        let lemma = lemmatize(&e.lemma);
        for v in inflect(&e.lemma).unwrap().iter() {
            assert_eq!(lemmatize(v), lemma, "{} -> {v}", e.lemma);
        }
    }
}

#[test]
fn regular_lexicon_round_trips() {
    for e in lexicon() {
        assert_eq!(lemmatize(&e.lemma), e.lemma);
        let set = inflect(&e.lemma).unwrap();
        for f in &e.forms {
            assert_eq!(lemmatize(f), e.lemma, "{f}");
            assert!(set.contains(f), "{} should inflect to {f}", e.lemma);
        }
    }
}

#[test]
fn documented_example_forms() {
    for (form, lemma) in [("masons", "mason"), ("stones", "stone"), ("stoning", "stone"), ("carried", "carry")] {
        assert_eq!(lemmatize(form), lemma);
        assert!(inflect(lemma).unwrap().contains(form));
    }
}

proptest! {
    #[test]
    fn lemmatize_is_idempotent(w in "[a-z]{1,12}") {
        let once = lemmatize(&w);
        prop_assert_eq!(lemmatize(&once), once);
    }

    #[test]
    fn inflect_contains_its_input(w in "[a-z]{1,12}") {
        let set = inflect(&w).unwrap();
        prop_assert!(set.contains(&w));
        prop_assert!(set.iter().all(|v| v.chars().all(|c| c.is_ascii_lowercase())));
    }

    #[test]
    fn normalize_phrase_is_idempotent(
        tokens in proptest::collection::vec("[a-z]{1,9}", 2..=7),
        x in 0usize..7,
        shift in 1usize..7,
    ) {
        let n = tokens.len();
        let (x, y) = (x % n, (x % n + shift % (n - 1).max(1)) % n);
        prop_assume!(x != y);
        let m = PhraseMatch::new(tokens, x, y).unwrap();
        let once = normalize_phrase(&m);
        prop_assert_eq!(once.x_index, m.x_index);
        prop_assert_eq!(once.x_first, m.x_first);
        prop_assert_eq!(normalize_phrase(&once), once);
    }
}
