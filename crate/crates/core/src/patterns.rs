//! Lexico-syntactic extraction of qualified place-name candidates from notice
//! titles and legends.
//!
//! The chain is segmentation, closed-class tagging, then three patterns:
//!
//! * `P1`: `DET? LOW+ PREP CAP+`, e.g. "les eaux minérales de Bigorre"
//! * `P2`: a `P1` continued by `(CC (PREP|DET)? CAP+)+`, e.g. "... et du Béarn"
//! * `P3`: any other capitalized run that does not open a sentence
//!
//! No lemmatizer or statistical tagger is involved, so output is a pure
//! function of the text and the lexicon.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;

use crate::error::{Error, Result};
use crate::graph::TerridocGraph;
use crate::notice::Notice;
use crate::thesaurus::normalize_label;

const DEFAULT_DET: &str = include_str!("../lexicon/det.txt");
const DEFAULT_PREP: &str = include_str!("../lexicon/prep.txt");
const DEFAULT_CC: &str = include_str!("../lexicon/cc.txt");

/// Longest qualifier kept before the preposition.
pub const MAX_QUALIFIER_TOKENS: usize = 4;

/// Lowercase particles allowed inside a multiword proper name.
const NAME_PARTICLES: [&[&str]; 5] = [&["de", "la"], &["de"], &["du"], &["des"], &["d'"]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    #[serde(rename = "DET")]
    Det,
    #[serde(rename = "PREP")]
    Prep,
    #[serde(rename = "CC")]
    Cc,
    #[serde(rename = "PUNCT")]
    Punct,
    #[serde(rename = "CAP")]
    Cap,
    #[serde(rename = "LOW")]
    Low,
    #[serde(rename = "NUM")]
    Num,
}

/// Closed-class word lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    det: BTreeSet<String>,
    prep: BTreeSet<String>,
    cc: BTreeSet<String>,
}

fn word_list(content: &str) -> BTreeSet<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize_label)
        .collect()
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::from_lists(DEFAULT_DET, DEFAULT_PREP, DEFAULT_CC)
    }
}

impl Lexicon {
    pub fn from_lists(det: &str, prep: &str, cc: &str) -> Self {
        Lexicon {
            det: word_list(det),
            prep: word_list(prep),
            cc: word_list(cc),
        }
    }

    /// Reads `det.txt`, `prep.txt` and `cc.txt` from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path)
                .map_err(|e| Error::validation(format!("cannot read lexicon file {}: {e}", path.display())))
        };
        Ok(Lexicon::from_lists(
            &read("det.txt")?,
            &read("prep.txt")?,
            &read("cc.txt")?,
        ))
    }

    /// Closed-class tag for a word, coordinators first, then prepositions.
    pub fn closed_class(&self, word: &str) -> Option<Tag> {
        let key = normalize_label(word);
        if self.cc.contains(&key) {
            Some(Tag::Cc)
        } else if self.prep.contains(&key) {
            Some(Tag::Prep)
        } else if self.det.contains(&key) {
            Some(Tag::Det)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Character offset of the first char.
    pub start: usize,
    pub tag: Tag,
    pub sentence_initial: bool,
}

impl Token {
    pub fn end(&self) -> usize {
        self.start + self.surface.chars().count()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || is_combining_mark(c)
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Segments `text` into tagged tokens.
pub fn tokenize(text: &str, lexicon: &Lexicon) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut raw: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !is_word_char(c) {
            raw.push((i, i + 1));
            i += 1;
            continue;
        }
        let start = i;
        loop {
            i += 1;
            let Some(&c) = chars.get(i) else { break };
            let next_is_word = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            if is_word_char(c) || (c == '-' && next_is_word) {
                continue;
            }
            if is_apostrophe(c) && next_is_word && chars[i - 1].is_alphabetic() {
                // Elision: the particle keeps its apostrophe.
                i += 1;
            }
            break;
        }
        raw.push((start, i));
    }

    let mut tokens = Vec::with_capacity(raw.len());
    let mut at_sentence_start = true;
    for (start, end) in raw {
        let surface: String = chars[start..end].iter().collect();
        let first = chars[start];
        let tag = if !is_word_char(first) {
            Tag::Punct
        } else if let Some(tag) = lexicon.closed_class(&surface) {
            tag
        } else if first.is_numeric() {
            Tag::Num
        } else if first.is_uppercase() {
            Tag::Cap
        } else {
            Tag::Low
        };
        let sentence_initial = tag != Tag::Punct && at_sentence_start;
        if tag == Tag::Punct {
            if matches!(first, '.' | '!' | '?') {
                at_sentence_start = true;
            }
        } else {
            at_sentence_start = false;
        }
        tokens.push(Token {
            surface,
            start,
            tag,
            sentence_initial,
        });
    }
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PatternId {
    P1,
    P2,
    P3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextField {
    Title,
    Legend,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionCandidate {
    pub proper_name: String,
    pub qualifier_np: Option<String>,
    pub notice_id: String,
    pub field: TextField,
    /// Character offsets `[start, end)` of the proper name in the source text.
    pub span: (usize, usize),
    pub pattern_id: PatternId,
}

/// Char-offset slice helper.
pub fn slice_chars(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end.saturating_sub(start)).collect()
}

struct Matcher<'a> {
    text: &'a str,
    tokens: &'a [Token],
    notice_id: &'a str,
    field: TextField,
    out: Vec<ExtractionCandidate>,
}

impl Matcher<'_> {
    fn tag(&self, i: usize) -> Option<Tag> {
        self.tokens.get(i).map(|t| t.tag)
    }

    fn particle_len(&self, i: usize) -> Option<usize> {
        NAME_PARTICLES.iter().find_map(|words| {
            let fits = words.iter().enumerate().all(|(k, w)| {
                self.tokens
                    .get(i + k)
                    .is_some_and(|t| t.tag != Tag::Cap && t.surface.replace('\u{2019}', "'") == *w)
            });
            fits.then_some(words.len())
        })
    }

    /// End (exclusive) of the capitalized run starting at `i`.
    fn cap_run(&self, i: usize) -> usize {
        debug_assert_eq!(self.tag(i), Some(Tag::Cap));
        let mut end = i + 1;
        loop {
            if self.tag(end) == Some(Tag::Cap) {
                end += 1;
                continue;
            }
            match self.particle_len(end) {
                Some(n) if self.tag(end + n) == Some(Tag::Cap) => end += n + 1,
                _ => return end,
            }
        }
    }

    fn span_text(&self, from: usize, to: usize) -> ((usize, usize), String) {
        let start = self.tokens[from].start;
        let end = self.tokens[to - 1].end();
        ((start, end), slice_chars(self.text, start, end))
    }

    fn emit(&mut self, run: (usize, usize), qualifier: Option<String>, pattern_id: PatternId) {
        let (span, proper_name) = self.span_text(run.0, run.1);
        self.out.push(ExtractionCandidate {
            proper_name,
            qualifier_np: qualifier,
            notice_id: self.notice_id.to_string(),
            field: self.field,
            span,
            pattern_id,
        });
    }

    /// Tries P1 at `i`, extended by P2 coordinations; returns the end index.
    fn qualified(&mut self, i: usize) -> Option<usize> {
        let mut j = i;
        if self.tag(j) == Some(Tag::Det) {
            j += 1;
        }
        let low_start = j;
        while self.tag(j) == Some(Tag::Low) {
            j += 1;
        }
        if j == low_start || self.tag(j) != Some(Tag::Prep) || self.tag(j + 1) != Some(Tag::Cap) {
            return None;
        }
        let low_end = j;
        let qual_start = low_end.saturating_sub(MAX_QUALIFIER_TOKENS).max(low_start);
        let (_, qualifier) = self.span_text(qual_start, low_end);

        let run_start = j + 1;
        let run_end = self.cap_run(run_start);
        self.emit((run_start, run_end), Some(qualifier.clone()), PatternId::P1);

        let mut k = run_end;
        while self.tag(k) == Some(Tag::Cc) {
            let mut m = k + 1;
            if matches!(self.tag(m), Some(Tag::Prep | Tag::Det)) {
                m += 1;
            }
            if self.tag(m) != Some(Tag::Cap) {
                break;
            }
            let end = self.cap_run(m);
            self.emit((m, end), Some(qualifier.clone()), PatternId::P2);
            k = end;
        }
        Some(k)
    }

    fn run(mut self) -> Vec<ExtractionCandidate> {
        let mut i = 0;
        while i < self.tokens.len() {
            if let Some(end) = self.qualified(i) {
                i = end;
                continue;
            }
            if self.tag(i) == Some(Tag::Cap) {
                let end = self.cap_run(i);
                // A lone capitalized word opening a sentence is an ordinary
                // sentence start; a bridged multiword run is still a name.
                let lone_opener = self.tokens[i].sentence_initial && end - i == 1;
                if !lone_opener {
                    self.emit((i, end), None, PatternId::P3);
                }
                i = end;
                continue;
            }
            i += 1;
        }
        self.out
    }
}

/// Applies the patterns left to right over the tokens of `text`.
pub fn match_patterns(text: &str, tokens: &[Token], notice_id: &str, field: TextField) -> Vec<ExtractionCandidate> {
    Matcher {
        text,
        tokens,
        notice_id,
        field,
        out: Vec::new(),
    }
    .run()
}

/// Candidates from a notice's title and legend, ordered by (field, span).
pub fn extract_candidates(notice: &Notice, lexicon: &Lexicon) -> Vec<ExtractionCandidate> {
    let mut out = Vec::new();
    for (field, text) in [(TextField::Title, &notice.title), (TextField::Legend, &notice.legend)] {
        if let Some(text) = text {
            let tokens = tokenize(text, lexicon);
            out.extend(match_patterns(text, &tokens, &notice.id, field));
        }
    }
    out
}

/// Candidates for all notices, sorted by (notice id, field, span).
pub fn extract_all(notices: &[Notice], lexicon: &Lexicon) -> Vec<ExtractionCandidate> {
    let mut out: Vec<ExtractionCandidate> = notices.iter().flat_map(|n| extract_candidates(n, lexicon)).collect();
    out.sort_by(|a, b| (&a.notice_id, a.field, a.span).cmp(&(&b.notice_id, b.field, b.span)));
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkedCandidate {
    pub candidate: ExtractionCandidate,
    /// Term-graph node the qualifier was matched to.
    pub concept: Option<String>,
}

fn strip_plurals(normalized: &str) -> String {
    normalized
        .split(' ')
        .map(|w| {
            if w.chars().count() > 1 {
                w.strip_suffix(['s', 'x']).unwrap_or(w)
            } else {
                w
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Matches each qualifier to a non-temporal graph node: exact normalized label
/// first, then with a final `s`/`x` stripped from every word.
pub fn link_qualifiers(cands: &[ExtractionCandidate], graph: &TerridocGraph) -> Vec<LinkedCandidate> {
    let mut exact: BTreeMap<String, &str> = BTreeMap::new();
    let mut loose: BTreeMap<String, &str> = BTreeMap::new();
    for node in graph.nodes.values().filter(|n| !n.temporal_flag) {
        let key = normalize_label(&node.label);
        loose.entry(strip_plurals(&key)).or_insert(&node.id);
        exact.entry(key).or_insert(&node.id);
    }
    cands
        .iter()
        .map(|c| {
            let concept = c.qualifier_np.as_deref().and_then(|q| {
                let key = normalize_label(q);
                exact
                    .get(&key)
                    .or_else(|| loose.get(&strip_plurals(&key)))
                    .map(|id| id.to_string())
            });
            LinkedCandidate {
                candidate: c.clone(),
                concept,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TITLE: &str = "Précis d'observation sur les eaux de Barèges et les eaux minérales de Bigorre et du Béarn";
    const LEGEND: &str = "Théophile de Bourdeu est à l'origine de la mode du thermalisme pyrénéen";

    fn tags(text: &str) -> Vec<(String, Tag)> {
        tokenize(text, &Lexicon::default())
            .into_iter()
            .map(|t| (t.surface, t.tag))
            .collect()
    }

    fn pairs(text: &str) -> Vec<(Option<String>, String, PatternId)> {
        let toks = tokenize(text, &Lexicon::default());
        match_patterns(text, &toks, "n", TextField::Title)
            .into_iter()
            .map(|c| (c.qualifier_np, c.proper_name, c.pattern_id))
            .collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tags("les eaux de Barèges"),
            [
                ("les".into(), Tag::Det),
                ("eaux".into(), Tag::Low),
                ("de".into(), Tag::Prep),
                ("Barèges".into(), Tag::Cap)
            ]
        );
        assert!(tokenize("", &Lexicon::default()).is_empty());
        assert_eq!(tags("d'Ossau"), [("d'".into(), Tag::Prep), ("Ossau".into(), Tag::Cap)]);
        assert_eq!(
            tags("d\u{2019}Ossau"),
            [("d\u{2019}".into(), Tag::Prep), ("Ossau".into(), Tag::Cap)]
        );
    }

    #[test]
    fn tokenize_keeps_hyphenated_compounds_and_numbers() {
        assert_eq!(
            tags("Bagnères-de-Bigorre, 1780 -"),
            [
                ("Bagnères-de-Bigorre".into(), Tag::Cap),
                (",".into(), Tag::Punct),
                ("1780".into(), Tag::Num),
                ("-".into(), Tag::Punct)
            ]
        );
    }

    #[test]
    fn sentence_boundaries() {
        let toks = tokenize("Vue de Pau. Le Béarn ! Et Lescar", &Lexicon::default());
        let initial: Vec<&str> = toks
            .iter()
            .filter(|t| t.sentence_initial)
            .map(|t| t.surface.as_str())
            .collect();
        assert_eq!(initial, ["Vue", "Le", "Et"]);
    }

    #[test]
    fn offsets_increase() {
        let toks = tokenize(TITLE, &Lexicon::default());
        assert!(toks.windows(2).all(|w| w[0].start < w[1].start));
        for t in &toks {
            assert_eq!(slice_chars(TITLE, t.start, t.end()), t.surface);
        }
    }

    #[test]
    fn title_yields_three_pairs() {
        assert_eq!(
            pairs(TITLE),
            [
                (Some("eaux".into()), "Barèges".into(), PatternId::P1),
                (Some("eaux minérales".into()), "Bigorre".into(), PatternId::P1),
                (Some("eaux minérales".into()), "Béarn".into(), PatternId::P2),
            ]
        );
    }

    #[test]
    fn legend_yields_bridged_name() {
        assert_eq!(pairs(LEGEND), [(None, "Théophile de Bourdeu".into(), PatternId::P3)]);
    }

    #[test]
    fn no_capitals_no_candidates() {
        assert!(pairs("la mode du thermalisme pyrénéen").is_empty());
        assert!(pairs("Vue générale").is_empty());
    }

    #[test]
    fn qualifier_is_capped_rightmost() {
        assert_eq!(
            pairs("une très belle vue générale prise depuis Gavarnie"),
            [(
                Some("belle vue générale prise".into()),
                "Gavarnie".into(),
                PatternId::P1
            )]
        );
    }

    #[test]
    fn multiple_coordinations() {
        assert_eq!(
            pairs("vallées de Luz, d'Aure et de Campan et Barèges"),
            [
                (Some("vallées".into()), "Luz".into(), PatternId::P1),
                (None, "Aure".into(), PatternId::P3),
                (None, "Campan".into(), PatternId::P3),
                (None, "Barèges".into(), PatternId::P3),
            ]
        );
        assert_eq!(
            pairs("routes de Luz et d'Aure ou Campan"),
            [
                (Some("routes".into()), "Luz".into(), PatternId::P1),
                (Some("routes".into()), "Aure".into(), PatternId::P2),
                (Some("routes".into()), "Campan".into(), PatternId::P2),
            ]
        );
    }

    #[test]
    fn p3_outside_sentence_start() {
        assert_eq!(pairs("Voyage vers Lourdes"), [(None, "Lourdes".into(), PatternId::P3)]);
    }

    #[test]
    fn link_examples() {
        use crate::graph::{enrich, CorpusTerm};
        use crate::thesaurus::Thesaurus;
        let term = |l: &str| CorpusTerm {
            label: l.into(),
            docs: BTreeSet::from(["n".to_string()]),
            head_in: BTreeSet::new(),
        };
        let cand = |q: Option<&str>| ExtractionCandidate {
            proper_name: "Bigorre".into(),
            qualifier_np: q.map(Into::into),
            notice_id: "n".into(),
            field: TextField::Title,
            span: (0, 7),
            pattern_id: if q.is_some() { PatternId::P1 } else { PatternId::P3 },
        };

        let g = enrich(&[term("Eaux minérales"), term("18e siècle")], &Thesaurus::default());
        let linked = link_qualifiers(&[cand(Some("eaux minérales")), cand(None), cand(Some("eaux"))], &g);
        assert_eq!(linked[0].concept.as_deref(), Some("eaux_minerales"));
        assert_eq!(linked[1].concept, None);
        assert_eq!(linked[2].concept, None);

        let g = enrich(&[term("Eau minérale")], &Thesaurus::default());
        let linked = link_qualifiers(&[cand(Some("eaux minérales"))], &g);
        assert_eq!(linked[0].concept.as_deref(), Some("eau_minerale"));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn word() -> impl Strategy<Value = String> {
            prop::sample::select(vec![
                "les",
                "eaux",
                "minérales",
                "de",
                "du",
                "et",
                "Barèges",
                "Bigorre",
                "Béarn",
                "la",
                "vue",
                "Pic",
                "Midi",
                "d'",
                "ou",
                ",",
                ".",
                "Saint-Savin",
                "1780",
                "vallée",
            ])
            .prop_map(String::from)
        }

        fn sentence() -> impl Strategy<Value = String> {
            prop::collection::vec(word(), 0..25).prop_map(|ws| {
                let mut s = String::new();
                for w in ws {
                    if !(s.is_empty() || s.ends_with('\'')) {
                        s.push(' ');
                    }
                    s.push_str(&w);
                }
                s
            })
        }

        proptest! {
            #[test]
            fn candidate_invariants(text in sentence()) {
                let toks = tokenize(&text, &Lexicon::default());
                let cands = match_patterns(&text, &toks, "n", TextField::Title);
                let again = match_patterns(&text, &toks, "n", TextField::Title);
                prop_assert_eq!(&cands, &again);
                let mut used = BTreeSet::new();
                let mut prev_end = 0;
                for c in &cands {
                    prop_assert_eq!(slice_chars(&text, c.span.0, c.span.1), c.proper_name.clone());
                    prop_assert!(c.proper_name.chars().next().unwrap().is_uppercase());
                    prop_assert_eq!(c.qualifier_np.is_some(), c.pattern_id != PatternId::P3);
                    prop_assert!(c.span.0 >= prev_end);
                    prev_end = c.span.1;
                    for t in toks.iter().filter(|t| t.start >= c.span.0 && t.end() <= c.span.1) {
                        prop_assert!(used.insert(t.start));
                    }
                }
                // Each P2 shares the qualifier of the P1 it follows.
                for w in cands.windows(2) {
                    if w[1].pattern_id == PatternId::P2 {
                        prop_assert_eq!(&w[0].qualifier_np, &w[1].qualifier_np);
                    }
                }
            }
        }
    }
}
