//! Rule-based English inflection and lemmatization.
//!
//! [`inflect`] widens a query word with its regular noun and verb forms;
//! [`lemmatize`] strips the same suffix families so retrieved phrases can be
//! compared across inflections. Only regular morphology is covered. Irregular
//! forms (go/went) need an exception lexicon, see [`Morphology::with_lexicon`].
//!
//! Both directions share one notion of a stressed closed syllable: a
//! one-syllable word ending consonant-vowel-consonant (not w, x, or y)
//! doubles its final consonant before -ed/-ing (stop, stopped), and a
//! stripped stem of that shape had a silent e dropped (stoning, stone).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::index::PhraseMatch;

/// A word and its generated inflections. `variants` always contains `base`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantSet {
    pub base: String,
    pub variants: BTreeSet<String>,
}

impl VariantSet {
    pub fn contains(&self, w: &str) -> bool {
        self.variants.contains(w)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.variants.iter().map(String::as_str)
    }
}

/// Regular rules plus an optional exception lexicon.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Morphology {
    /// form -> lemma
    form_to_lemma: BTreeMap<String, String>,
    /// lemma -> forms
    lemma_forms: BTreeMap<String, BTreeSet<String>>,
}

impl Morphology {
    /// Rules only.
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads `lemma<TAB>form` lines. Blank lines and `#` comments are skipped.
    pub fn with_lexicon(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lemma, form) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, n + 1, "expected lemma<TAB>form"))?;
            entries.push((lemma.trim().to_lowercase(), form.trim().to_lowercase()));
        }
        Self::from_entries(entries).map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::parse(path, 0, msg),
            other => other,
        })
    }

    pub fn from_entries<I, S, T>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut m = Morphology::default();
        for (lemma, form) in entries {
            let (lemma, form) = (lemma.into(), form.into());
            check_word(&lemma)?;
            check_word(&form)?;
            if let Some(prev) = m.form_to_lemma.get(&form) {
                if *prev != lemma {
                    return Err(Error::InvalidArgument(format!(
                        "form {form:?} listed under both {prev:?} and {lemma:?}"
                    )));
                }
            }
            m.form_to_lemma.insert(form.clone(), lemma.clone());
            m.lemma_forms.entry(lemma).or_default().insert(form);
        }
        // A lemma that is also some other lemma's form would make
        // lemmatization non-idempotent.
        for lemma in m.lemma_forms.keys() {
            if let Some(other) = m.form_to_lemma.get(lemma) {
                if other != lemma {
                    return Err(Error::InvalidArgument(format!(
                        "lemma {lemma:?} is also listed as a form of {other:?}"
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn inflect(&self, word: &str) -> Result<VariantSet> {
        let mut set = inflect(word)?;
        if let Some(forms) = self.lemma_forms.get(word) {
            set.variants.extend(forms.iter().cloned());
        }
        Ok(set)
    }

    pub fn lemmatize(&self, word: &str) -> String {
        let mut w = word.to_owned();
        loop {
            if let Some(lemma) = self.form_to_lemma.get(&w) {
                return lemma.clone();
            }
            if self.lemma_forms.contains_key(&w) {
                return w;
            }
            match strip_step(&w) {
                Some(next) => w = next,
                None => return w,
            }
        }
    }

    /// Replaces every token by its lemma; pair positions are kept.
    pub fn normalize_phrase(&self, m: &PhraseMatch) -> PhraseMatch {
        PhraseMatch {
            tokens: m.tokens.iter().map(|t| self.lemmatize(t)).collect(),
            ..m.clone()
        }
    }
}

/// Base word plus regular plural/third-person, past, and progressive forms.
pub fn inflect(word: &str) -> Result<VariantSet> {
    check_word(word)?;
    let mut variants = BTreeSet::new();
    variants.insert(word.to_owned());
    variants.insert(s_form(word));
    variants.insert(ed_form(word));
    variants.insert(ing_form(word));
    Ok(VariantSet {
        base: word.to_owned(),
        variants,
    })
}

/// Strips regular inflectional suffixes until none applies.
pub fn lemmatize(word: &str) -> String {
    let mut w = word.to_owned();
    while let Some(next) = strip_step(&w) {
        w = next;
    }
    w
}

pub fn normalize_phrase(m: &PhraseMatch) -> PhraseMatch {
    PhraseMatch {
        tokens: m.tokens.iter().map(|t| lemmatize(t)).collect(),
        ..m.clone()
    }
}

fn check_word(word: &str) -> Result<()> {
    if word.is_empty() {
        return Err(Error::InvalidArgument("empty word".into()));
    }
    if !word.chars().all(|c| c.is_alphabetic() && !c.is_uppercase()) {
        return Err(Error::InvalidArgument(format!(
            "{word:?} is not a lowercase alphabetic word"
        )));
    }
    Ok(())
}

fn is_vowel_at(chars: &[char], i: usize) -> bool {
    match chars[i] {
        'a' | 'e' | 'i' | 'o' | 'u' => true,
        // y is a vowel after a consonant (cry, gym), a consonant otherwise (yes, play)
        'y' => i > 0 && !is_vowel_at(chars, i - 1),
        _ => false,
    }
}

fn is_plain_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn vowel_groups(chars: &[char]) -> usize {
    let mut groups = 0;
    let mut in_group = false;
    for i in 0..chars.len() {
        let v = is_vowel_at(chars, i);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    groups
}

fn has_vowel(chars: &[char]) -> bool {
    (0..chars.len()).any(|i| is_vowel_at(chars, i))
}

/// Ends consonant, single vowel, consonant other than w/x/y.
fn ends_cvc(chars: &[char]) -> bool {
    let n = chars.len();
    n >= 3
        && !is_vowel_at(chars, n - 3)
        && is_plain_vowel(chars[n - 2])
        && !is_vowel_at(chars, n - 1)
        && !matches!(chars[n - 1], 'w' | 'x' | 'y')
}

fn is_cvc_monosyllable(chars: &[char]) -> bool {
    ends_cvc(chars) && vowel_groups(chars) == 1
}

fn ends_consonant_y(chars: &[char]) -> bool {
    let n = chars.len();
    n >= 2 && chars[n - 1] == 'y' && !is_plain_vowel(chars[n - 2])
}

fn s_form(w: &str) -> String {
    let chars: Vec<char> = w.chars().collect();
    if ["s", "x", "z", "ch", "sh"].iter().any(|s| w.ends_with(s)) {
        format!("{w}es")
    } else if ends_consonant_y(&chars) {
        format!("{}ies", &w[..w.len() - 1])
    } else {
        format!("{w}s")
    }
}

fn ed_form(w: &str) -> String {
    let chars: Vec<char> = w.chars().collect();
    if w.ends_with('e') {
        format!("{w}d")
    } else if ends_consonant_y(&chars) {
        format!("{}ied", &w[..w.len() - 1])
    } else if is_cvc_monosyllable(&chars) {
        format!("{w}{}ed", chars[chars.len() - 1])
    } else {
        format!("{w}ed")
    }
}

fn ing_form(w: &str) -> String {
    let chars: Vec<char> = w.chars().collect();
    if let Some(stem) = w.strip_suffix("ie") {
        format!("{stem}ying")
    } else if w.ends_with('e') && !["ee", "ye", "oe"].iter().any(|s| w.ends_with(s)) && chars.len() > 2 {
        format!("{}ing", &w[..w.len() - 1])
    } else if is_cvc_monosyllable(&chars) {
        format!("{w}{}ing", chars[chars.len() - 1])
    } else {
        format!("{w}ing")
    }
}

/// One suffix-stripping step, or `None` when no rule applies.
fn strip_step(w: &str) -> Option<String> {
    let n = w.chars().count();
    if n <= 3 {
        return None;
    }
    if let Some(stem) = w.strip_suffix("ies") {
        // pies -> pie, cities -> city
        return Some(if n > 4 { format!("{stem}y") } else { format!("{stem}ie") });
    }
    if let Some(stem) = w.strip_suffix("ied") {
        return Some(if n > 4 { format!("{stem}y") } else { format!("{stem}ie") });
    }
    if let Some(stem) = w.strip_suffix("ying") {
        if stem.chars().count() == 1 {
            // tying -> tie
            return Some(format!("{stem}ie"));
        }
    }
    if let Some(stem) = w.strip_suffix("ing") {
        let chars: Vec<char> = stem.chars().collect();
        if chars.len() >= 2 && has_vowel(&chars) {
            return Some(restore_stem(stem));
        }
    }
    if w.ends_with("eed") {
        // need, seed stay; agreed -> agree
        return if n <= 4 { None } else { Some(w[..w.len() - 1].to_owned()) };
    }
    if let Some(stem) = w.strip_suffix("ed") {
        let chars: Vec<char> = stem.chars().collect();
        if chars.len() >= 2 && has_vowel(&chars) {
            return Some(restore_stem(stem));
        }
    }
    if let Some(stem) = w.strip_suffix("es") {
        if ["ss", "zz", "sh", "ch", "x"].iter().any(|s| stem.ends_with(s)) {
            return Some(stem.to_owned());
        }
        let len = stem.chars().count();
        if stem.ends_with('s') {
            // buses, campuses, geniuses keep the bare stem; houses, causes,
            // uses, abuses restore e
            let bare = DOUBLED_S.contains(&stem)
                || (len > 2
                    && stem.ends_with("us")
                    && !stem.ends_with("ous")
                    && !stem.ends_with("aus")
                    && !us_takes_e(stem));
            return Some(if bare {
                stem.to_owned()
            } else {
                format!("{stem}e")
            });
        }
        if stem.ends_with('z') {
            return Some(format!("{stem}e"));
        }
    }
    if let Some(stem) = w.strip_suffix('s') {
        if !["ss", "us", "is"].iter().any(|s| w.ends_with(s)) {
            return Some(stem.to_owned());
        }
    }
    None
}

/// Repairs a stem left by removing -ed/-ing: undoes consonant doubling and
/// restores a dropped silent e. The endings below are spelling tendencies,
/// not certainties: `visit` and `complete` look alike to any suffix rule.
fn restore_stem(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    let n = chars.len();
    let last = chars[n - 1];

    if let Some(single) = stem.strip_suffix('s').filter(|s| DOUBLED_S.contains(s)) {
        return single.to_owned();
    }
    if n >= 4 && chars[n - 2] == last && !is_vowel_at(&chars, n - 1) && !matches!(last, 'l' | 's' | 'z' | 'f') {
        let undoubled = &chars[..n - 1];
        if ends_cvc(undoubled) {
            return undoubled.iter().collect();
        }
    }
    if needs_e(stem, &chars) {
        format!("{stem}e")
    } else {
        stem.to_owned()
    }
}

/// Frequent stems the ending rules get wrong.
const E_STEMS: &[&str] = &["wast", "tast", "past", "hast", "rout", "ignor", "explor", "restor", "ador", "compet", "concret", "delet"];
const BARE_STEMS: &[&str] = &["combat", "debut", "sugar"];
/// gassed, bussed; most -ss stems are whole words (pass, kiss)
const DOUBLED_S: &[&str] = &["gas", "bus", "plus"];

/// abuse, refuse, amuse, excuse, accuse; not focus, campus, bonus
fn us_takes_e(stem: &str) -> bool {
    ["abus", "fus", "mus", "ccus", "xcus"].iter().any(|s| stem.ends_with(s))
}

fn needs_e(stem: &str, chars: &[char]) -> bool {
    let n = chars.len();
    let last = chars[n - 1];
    let ends = |s: &str| stem.ends_with(s);
    let consonant_at = |i: usize| !is_vowel_at(chars, i) || (chars[i] == 'u' && i > 0 && chars[i - 1] == 'q');
    let consonant_before_last = n >= 2 && consonant_at(n - 2);
    // single vowel letter between consonants at the end: decid, volum
    let single_vowel = |v: &str| n >= 3 && v.contains(chars[n - 2]) && consonant_at(n - 3) && !is_vowel_at(chars, n - 1);
    let polysyllabic = vowel_groups(chars) >= 2;

    if is_cvc_monosyllable(chars) || E_STEMS.contains(&stem) {
        return true;
    }
    if BARE_STEMS.contains(&stem) {
        return false;
    }
    if n == 2 {
        // us(e), ey(e), su(e), dy(e)
        return (is_plain_vowel(chars[0]) && !is_vowel_at(chars, 1) && last != 'x' && (last != 'y' || chars[0] == 'e'))
            || (!is_plain_vowel(chars[0]) && matches!(last, 'u' | 'y'));
    }
    match last {
        'v' => return true,
        'z' => return !ends("zz"),
        'c' => return true,
        'u' => return consonant_before_last,
        'y' => return ends("ys"),
        _ => {}
    }
    // a vowel y between consonants: typ, styl, rhym
    if chars[n - 2] == 'y' && is_vowel_at(chars, n - 2) && !is_vowel_at(chars, n - 1) {
        return true;
    }
    if last == 's' {
        return (consonant_before_last && chars[n - 2] != 's')
            || ["eas", "ais", "aus", "ous", "ois", "uis", "oos", "ys"].iter().any(|s| ends(s))
            || (polysyllabic && (single_vowel("aio")))
            || us_takes_e(stem);
    }
    if last == 'l' {
        return (consonant_before_last && !matches!(chars[n - 2], 'l' | 'r' | 'w')) || (polysyllabic && single_vowel("iuo"));
    }
    if last == 'r' {
        // centr(e), fibr(e), compar(e), secur(e), acquir(e)
        return (consonant_before_last && matches!(chars[n - 2], 't' | 'b' | 'c' | 'g'))
            || ends("uir")
            || (single_vowel("a") && n >= 4)
            || single_vowel("i")
            || (polysyllabic && single_vowel("u"));
    }
    if last == 'g' {
        return ends("dg")
            || ends("rg")
            || ends("lg")
            || ends("rang")
            || ends("chang")
            || ends("eng")
            || (n >= 5 && ends("ung"))
            || (polysyllabic && (ends("ag") || single_vowel("e")));
    }
    ends("uid")
        || ends("iat")
        || ends("uat")
        || ends("creat")
        || ends("plet")
        || ends("elet")
        || ends("com")
        || ends("som")
        || ends("iz")
        || ends("rib")
        || ends("phon")
        || ends("mot")
        || ends("uot")
        || ends("vot")
        || (polysyllabic && ends("ap") && single_vowel("a"))
        || (ends("at") && n >= 4 && consonant_at(n - 3) && polysyllabic)
        || (polysyllabic && last == 'd' && single_vowel("iuoa"))
        || (polysyllabic && ends("am") && !ends("ram") && single_vowel("a"))
        || (ends("ik") && single_vowel("i"))
        || ["eath", "oath", "eeth"].iter().any(|s| ends(s))
        || (polysyllabic && (ends("ut") || ends("um")) && single_vowel("u"))
        || (polysyllabic && ends("in") && single_vowel("i"))
}
