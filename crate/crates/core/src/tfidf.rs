//! TF-IDF document scoring and top-fraction filtering.
//!
//! * `TF(t, d)  = count(t, d) / |d|`
//! * `IDF(t)    = ln(N / (1 + DF(t)))`, unclamped, so terms present in every
//!   document get a small negative weight
//! * `score(d)  = Σ_{unique t ∈ d} TF(t, d) · IDF(t)`
//!
//! Documents are ranked by descending score with ties going to the smaller
//! doc id, and the first `max(1, ⌊p·n⌋)` are retained.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::floor_fraction;
use crate::io::format_significant;

/// Recorded in every artifact so consumers know how terms were produced.
pub const TOKEN_PATTERN: &str = "maximal runs of letters, digits, and apostrophes";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub lowercase: bool,
    pub strip_urls: bool,
    pub strip_mentions: bool,
    pub token_pattern: String,
    #[serde(default)]
    pub stopwords: BTreeSet<String>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            lowercase: true,
            strip_urls: true,
            strip_mentions: true,
            token_pattern: TOKEN_PATTERN.to_string(),
            stopwords: BTreeSet::new(),
        }
    }
}

impl PreprocessConfig {
    fn validate(&self) -> Result<()> {
        if self.token_pattern != TOKEN_PATTERN {
            return Err(Error::data(format!(
                "unsupported token pattern `{}`",
                self.token_pattern
            )));
        }
        Ok(())
    }
}

fn is_term_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\''
}

/// Byte offset of the first `http://` or `https://` (ASCII case-insensitive).
fn url_start(chunk: &str) -> Option<usize> {
    let lower = chunk.to_ascii_lowercase();
    [lower.find("http://"), lower.find("https://")]
        .into_iter()
        .flatten()
        .min()
}

fn strip_mentions(chunk: &str) -> String {
    let mut out = String::with_capacity(chunk.len());
    let mut chars = chunk.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '@' {
            while chars.next_if(|n| n.is_alphanumeric() || *n == '_').is_some() {}
            // keep the mention from gluing its neighbours together
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    out
}

/// Turns raw text into the ordered term sequence used for counting.
pub fn preprocess(text: &str, config: &PreprocessConfig) -> Vec<String> {
    let mut terms = Vec::new();
    for chunk in text.split_whitespace() {
        let chunk = match config.strip_urls.then(|| url_start(chunk)).flatten() {
            Some(at) => &chunk[..at],
            None => chunk,
        };
        let chunk = if config.strip_mentions && chunk.contains('@') {
            std::borrow::Cow::Owned(strip_mentions(chunk))
        } else {
            std::borrow::Cow::Borrowed(chunk)
        };
        for run in chunk.split(|c: char| !is_term_char(c)).filter(|r| !r.is_empty()) {
            let term = if config.lowercase {
                run.to_lowercase()
            } else {
                run.to_string()
            };
            terms.push(term);
        }
    }
    if !config.stopwords.is_empty() {
        terms.retain(|t| !config.stopwords.contains(t));
    }
    terms
}

/// Bag of terms for one document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermCounts {
    pub doc_id: u64,
    counts: BTreeMap<String, u32>,
    total_terms: u32,
}

impl TermCounts {
    pub fn from_terms<I, S>(doc_id: u64, terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut counts = BTreeMap::new();
        let mut total_terms = 0u32;
        for t in terms {
            *counts.entry(t.into()).or_insert(0u32) += 1;
            total_terms += 1;
        }
        TermCounts {
            doc_id,
            counts,
            total_terms,
        }
    }

    pub fn from_text(doc_id: u64, text: &str, config: &PreprocessConfig) -> Self {
        Self::from_terms(doc_id, preprocess(text, config))
    }

    pub fn from_document(doc: &Document, config: &PreprocessConfig) -> Self {
        Self::from_text(doc.doc_id, &doc.text, config)
    }

    pub fn count(&self, term: &str) -> u32 {
        self.counts.get(term).copied().unwrap_or(0)
    }

    /// Unique terms in ascending order with their counts.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(t, &c)| (t.as_str(), c))
    }

    pub fn unique_terms(&self) -> usize {
        self.counts.len()
    }

    pub fn total_terms(&self) -> u32 {
        self.total_terms
    }

    pub fn is_empty(&self) -> bool {
        self.total_terms == 0
    }
}

pub fn term_frequency(term: &str, doc: &TermCounts) -> Result<f64> {
    if doc.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "term frequency of document {} with zero terms",
            doc.doc_id
        )));
    }
    Ok(tf(doc.count(term), doc.total_terms))
}

fn tf(count: u32, total: u32) -> f64 {
    count as f64 / total as f64
}

fn idf_value(n_docs: u64, df: u64) -> f64 {
    (n_docs as f64 / (1.0 + df as f64)).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermStat {
    pub df: u64,
    pub idf: f64,
}

/// Fitted document frequencies and IDF weights. Immutable once built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "IdfTableFile", try_from = "IdfTableFile")]
pub struct IdfTable {
    n_docs: u64,
    entries: BTreeMap<String, TermStat>,
    config: PreprocessConfig,
}

impl IdfTable {
    /// Counts in how many of `docs` each term occurs. `n_docs` is the corpus
    /// size `N` and must be at least the number of bags supplied.
    pub fn fit(docs: &[TermCounts], n_docs: usize, config: PreprocessConfig) -> Result<Self> {
        if docs.is_empty() || n_docs == 0 {
            return Err(Error::InvalidArgument("cannot fit IDF on an empty corpus".into()));
        }
        if n_docs < docs.len() {
            return Err(Error::InvalidArgument(format!(
                "n_docs = {n_docs} is smaller than the {} documents supplied",
                docs.len()
            )));
        }
        config.validate()?;
        let mut df: BTreeMap<String, u64> = BTreeMap::new();
        for doc in docs {
            for (term, _) in doc.iter() {
                match df.get_mut(term) {
                    Some(n) => *n += 1,
                    None => {
                        df.insert(term.to_string(), 1);
                    }
                }
            }
        }
        let n = n_docs as u64;
        let entries = df
            .into_iter()
            .map(|(t, df)| (t, TermStat { df, idf: idf_value(n, df) }))
            .collect();
        Ok(IdfTable {
            n_docs: n,
            entries,
            config,
        })
    }

    /// Preprocesses `docs` with `config` and fits on the result.
    pub fn fit_documents(docs: &[Document], config: PreprocessConfig) -> Result<Self> {
        let bags: Vec<TermCounts> = docs.iter().map(|d| TermCounts::from_document(d, &config)).collect();
        Self::fit(&bags, bags.len(), config)
    }

    /// Rebuilds a table from stored parts, checking every invariant.
    pub fn from_parts(
        n_docs: u64,
        entries: impl IntoIterator<Item = (String, TermStat)>,
        config: PreprocessConfig,
    ) -> Result<Self> {
        if n_docs == 0 {
            return Err(Error::Invariant("IDF table with n_docs = 0".into()));
        }
        config.validate()?;
        let mut map = BTreeMap::new();
        for (term, stat) in entries {
            if stat.df == 0 || stat.df > n_docs {
                return Err(Error::Invariant(format!(
                    "term `{term}` has df = {} outside [1, {n_docs}]",
                    stat.df
                )));
            }
            if !stat.idf.is_finite() {
                return Err(Error::Invariant(format!("term `{term}` has non-finite idf")));
            }
            if map.insert(term.clone(), stat).is_some() {
                return Err(Error::Invariant(format!("term `{term}` listed twice")));
            }
        }
        Ok(IdfTable {
            n_docs,
            entries: map,
            config,
        })
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.config
    }

    pub fn get(&self, term: &str) -> Option<TermStat> {
        self.entries.get(term).copied()
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.entries.get(term).map(|s| s.idf)
    }

    pub fn df(&self, term: &str) -> Option<u64> {
        self.entries.get(term).map(|s| s.df)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Terms in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, TermStat)> {
        self.entries.iter().map(|(t, s)| (t.as_str(), *s))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_json(path, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        crate::io::read_json(path)
    }
}

#[derive(Serialize, Deserialize)]
struct TermEntry {
    term: String,
    df: u64,
    idf: f64,
}

#[derive(Serialize, Deserialize)]
struct IdfTableFile {
    n_docs: u64,
    config: PreprocessConfig,
    terms: Vec<TermEntry>,
}

impl From<IdfTable> for IdfTableFile {
    fn from(t: IdfTable) -> Self {
        IdfTableFile {
            n_docs: t.n_docs,
            config: t.config,
            terms: t
                .entries
                .into_iter()
                .map(|(term, s)| TermEntry {
                    term,
                    df: s.df,
                    idf: s.idf,
                })
                .collect(),
        }
    }
}

impl TryFrom<IdfTableFile> for IdfTable {
    type Error = Error;

    fn try_from(f: IdfTableFile) -> Result<Self> {
        IdfTable::from_parts(
            f.n_docs,
            f.terms.into_iter().map(|e| (e.term, TermStat { df: e.df, idf: e.idf })),
            f.config,
        )
    }
}

/// `TF(t, d) · IDF(t)`. Zero when `t` is absent from `d` or from the table.
pub fn tfidf_weight(term: &str, doc: &TermCounts, table: &IdfTable) -> f64 {
    let count = doc.count(term);
    if count == 0 {
        return 0.0;
    }
    match table.idf(term) {
        Some(idf) => tf(count, doc.total_terms) * idf,
        None => 0.0,
    }
}

/// Per-term weights of a document, ascending by term. Terms unknown to the
/// table are left out.
pub fn weights<'a>(doc: &'a TermCounts, table: &'a IdfTable) -> impl Iterator<Item = (&'a str, f64)> + 'a {
    doc.iter().filter_map(move |(term, count)| {
        table
            .idf(term)
            .map(|idf| (term, tf(count, doc.total_terms) * idf))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocScore {
    pub doc_id: u64,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreOptions {
    /// Divide the aggregate by the document's term count. Off by default.
    pub normalize_by_length: bool,
}

/// Aggregate TF-IDF over the document's unique terms.
pub fn doc_score(doc: &TermCounts, table: &IdfTable) -> DocScore {
    DocScore {
        doc_id: doc.doc_id,
        score: weights(doc, table).map(|(_, w)| w).sum(),
    }
}

pub fn doc_score_with(doc: &TermCounts, table: &IdfTable, options: ScoreOptions) -> DocScore {
    let mut s = doc_score(doc, table);
    if options.normalize_by_length && !doc.is_empty() {
        s.score /= doc.total_terms as f64;
    }
    s
}

pub fn score_all(docs: &[TermCounts], table: &IdfTable, options: ScoreOptions) -> Vec<DocScore> {
    docs.iter().map(|d| doc_score_with(d, table, options)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub retain_fraction: f64,
}

impl FilterSpec {
    pub fn new(retain_fraction: f64) -> Result<Self> {
        if !(retain_fraction > 0.0 && retain_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "retain fraction must lie in (0, 1], got {retain_fraction}"
            )));
        }
        Ok(FilterSpec { retain_fraction })
    }

    /// `max(1, ⌊p·n⌋)`.
    pub fn retained_count(&self, n: usize) -> usize {
        floor_fraction(self.retain_fraction, n).max(1).min(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedDoc {
    /// 1-based.
    pub rank: usize,
    pub doc_id: u64,
    pub score: f64,
}

fn ranking_order(a: &DocScore, b: &DocScore) -> Ordering {
    b.score.total_cmp(&a.score).then(a.doc_id.cmp(&b.doc_id))
}

/// Full ranking: descending score, ascending doc id on ties.
pub fn rank(scores: &[DocScore]) -> Result<Vec<RankedDoc>> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("cannot rank an empty score list".into()));
    }
    if let Some(bad) = scores.iter().find(|s| !s.score.is_finite()) {
        return Err(Error::Invariant(format!(
            "document {} has non-finite score",
            bad.doc_id
        )));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(ranking_order);
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, s)| RankedDoc {
            rank: i + 1,
            doc_id: s.doc_id,
            score: s.score,
        })
        .collect())
}

/// The top `max(1, ⌊p·n⌋)` documents in ranked order.
pub fn rank_and_filter(scores: &[DocScore], spec: FilterSpec) -> Result<Vec<RankedDoc>> {
    let mut ranked = rank(scores)?;
    ranked.truncate(spec.retained_count(scores.len()));
    Ok(ranked)
}

/// `doc_id,score` with 12 significant digits.
pub fn write_scores(path: impl AsRef<Path>, scores: &[DocScore]) -> Result<()> {
    let mut out = String::from("doc_id,score\n");
    for s in scores {
        out.push_str(&format!("{},{}\n", s.doc_id, format_significant(s.score, 12)));
    }
    crate::io::write_bytes(path, out.as_bytes())
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<Vec<DocScore>> {
    let path = path.as_ref();
    let text = crate::io::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("doc_id,score") {
        return Err(Error::data_at(path, Some(0), "expected header `doc_id,score`"));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let row = Some(i as u64 + 1);
            let (id, score) = line
                .split_once(',')
                .ok_or_else(|| Error::data_at(path, row, "expected two fields"))?;
            Ok(DocScore {
                doc_id: id
                    .trim()
                    .parse()
                    .map_err(|_| Error::data_at(path, row, "doc_id is not an integer"))?,
                score: score
                    .trim()
                    .parse()
                    .map_err(|_| Error::data_at(path, row, "score is not a number"))?,
            })
        })
        .collect()
}

/// `rank,doc_id,score`.
pub fn write_filter_manifest(path: impl AsRef<Path>, ranked: &[RankedDoc]) -> Result<()> {
    let mut out = String::from("rank,doc_id,score\n");
    for r in ranked {
        out.push_str(&format!(
            "{},{},{}\n",
            r.rank,
            r.doc_id,
            format_significant(r.score, 12)
        ));
    }
    crate::io::write_bytes(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(doc_id: u64, text: &str) -> TermCounts {
        TermCounts::from_terms(doc_id, text.split_whitespace())
    }

    fn toy() -> (Vec<TermCounts>, IdfTable) {
        let docs = vec![bag(1, "cat sat"), bag(2, "cat ran"), bag(3, "dog barked loud")];
        let table = IdfTable::fit(&docs, 3, PreprocessConfig::default()).unwrap();
        (docs, table)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn preprocess_strips_urls_and_mentions() {
        let cfg = PreprocessConfig::default();
        assert_eq!(preprocess("Check http://x.co @user LOL", &cfg), vec!["check", "lol"]);
        assert!(preprocess("", &cfg).is_empty());
        assert_eq!(preprocess("A a A", &cfg), vec!["a", "a", "a"]);
    }

    #[test]
    fn preprocess_details() {
        let cfg = PreprocessConfig::default();
        assert_eq!(
            preprocess("RT @mayasolovely: you shouldn't!!!https://t.co/x9 ok", &cfg),
            vec!["rt", "you", "shouldn't", "ok"]
        );
        assert_eq!(preprocess("a@b.c HTTPS://X.CO/a", &cfg), vec!["a", "c"]);
        assert_eq!(preprocess("h8 h8ers &#8220;yo", &cfg), vec!["h8", "h8ers", "8220", "yo"]);

        let keep = PreprocessConfig {
            lowercase: false,
            strip_urls: false,
            strip_mentions: false,
            ..PreprocessConfig::default()
        };
        assert_eq!(preprocess("Hi @Bob http://x.co", &keep), vec!["Hi", "Bob", "http", "x", "co"]);

        let stop = PreprocessConfig {
            stopwords: ["the".to_string()].into_iter().collect(),
            ..PreprocessConfig::default()
        };
        assert_eq!(preprocess("The cat THE end", &stop), vec!["cat", "end"]);
    }

    #[test]
    fn term_frequency_examples() {
        let d = bag(0, "a b a");
        assert!(close(term_frequency("a", &d).unwrap(), 2.0 / 3.0, 1e-15));
        assert_eq!(term_frequency("z", &d).unwrap(), 0.0);
        assert_eq!(term_frequency("w", &bag(1, "w x y z")).unwrap(), 0.25);
        assert!(term_frequency("a", &bag(2, "")).is_err());
    }

    #[test]
    #[allow(clippy::approx_constant)] // frozen literals, not a use of ln 2
    fn idf_examples() {
        let four: Vec<TermCounts> = vec![bag(0, "rare common"), bag(1, "common"), bag(2, "common"), bag(3, "common")];
        let t = IdfTable::fit(&four, 4, PreprocessConfig::default()).unwrap();
        assert!(close(t.idf("rare").unwrap(), 0.693147180559945, 1e-12));
        assert!(close(t.idf("common").unwrap(), -0.2231435513142097, 1e-12));
        assert_eq!(t.df("common"), Some(4));

        let one = IdfTable::fit(&[bag(0, "x")], 1, PreprocessConfig::default()).unwrap();
        assert!(close(one.idf("x").unwrap(), -0.693147180559945, 1e-12));

        assert!(IdfTable::fit(&[], 1, PreprocessConfig::default()).is_err());
        assert!(IdfTable::fit(&four, 3, PreprocessConfig::default()).is_err());
    }

    #[test]
    fn idf_sign_matches_smoothing() {
        let docs = vec![bag(0, "a b"), bag(1, "a"), bag(2, "a c")];
        let t = IdfTable::fit(&docs, 3, PreprocessConfig::default()).unwrap();
        for (term, stat) in t.iter() {
            assert_eq!(stat.idf < 0.0, stat.df >= t.n_docs(), "{term}");
            let split_form = (t.n_docs() as f64).ln() - (1.0 + stat.df as f64).ln();
            assert!(close(stat.idf, split_form, 1e-15));
        }
    }

    #[test]
    fn weight_examples() {
        let d = bag(0, "a b a");
        let docs = vec![d.clone(), bag(1, "c"), bag(2, "c"), bag(3, "c")];
        let t = IdfTable::fit(&docs, 4, PreprocessConfig::default()).unwrap();
        assert!(close(tfidf_weight("a", &d, &t), 0.462098120373297, 1e-12));
        assert_eq!(tfidf_weight("zzz", &d, &t), 0.0);

        let q = bag(9, "w x y z");
        let all_w: Vec<TermCounts> = (0..4).map(|i| bag(i, "w")).collect();
        let tw = IdfTable::fit(&all_w, 4, PreprocessConfig::default()).unwrap();
        assert!(close(tfidf_weight("w", &q, &tw), -0.05578588782855243, 1e-12));
    }

    #[test]
    fn toy_corpus_scores() {
        let (docs, table) = toy();
        // hand-evaluated: d3 = 3 · (1/3) · ln(3/2); d1 = ½·ln(3/3) + ½·ln(3/2)
        assert!(close(doc_score(&docs[2], &table).score, 0.4054651081081644, 1e-12));
        assert!(close(doc_score(&docs[0], &table).score, 0.2027325540540822, 1e-12));
        assert_eq!(doc_score(&bag(9, ""), &table).score, 0.0);
    }

    #[test]
    fn unique_terms_are_summed_once() {
        let d = bag(0, "a a b");
        let docs = vec![d.clone(), bag(1, "c"), bag(2, "c"), bag(3, "c"), bag(4, "c")];
        let t = IdfTable::fit(&docs, 5, PreprocessConfig::default()).unwrap();
        let expected = (2.0 / 3.0) * (5.0f64 / 2.0).ln() + (1.0 / 3.0) * (5.0f64 / 2.0).ln();
        assert!(close(doc_score(&d, &t).score, expected, 1e-15));
    }

    #[test]
    fn normalization_is_opt_in() {
        let (docs, table) = toy();
        let plain = doc_score_with(&docs[2], &table, ScoreOptions::default()).score;
        let norm = doc_score_with(&docs[2], &table, ScoreOptions { normalize_by_length: true }).score;
        assert!(close(norm, plain / 3.0, 1e-15));
    }

    #[test]
    fn unseen_terms_contribute_nothing() {
        let (_, table) = toy();
        let d = bag(7, "unicorn dog");
        let expected = 0.5 * (1.5f64).ln();
        assert!(close(doc_score(&d, &table).score, expected, 1e-15));
    }

    #[test]
    fn retained_counts() {
        assert_eq!(FilterSpec::new(0.75).unwrap().retained_count(10), 7);
        assert_eq!(FilterSpec::new(0.01).unwrap().retained_count(10), 1);
        assert_eq!(FilterSpec::new(1.0).unwrap().retained_count(10), 10);
        assert!(FilterSpec::new(0.0).is_err());
        assert!(FilterSpec::new(1.5).is_err());
    }

    #[test]
    fn rank_and_filter_examples() {
        let scores: Vec<DocScore> = (0..10).map(|i| DocScore { doc_id: i, score: i as f64 }).collect();
        let kept = rank_and_filter(&scores, FilterSpec::new(0.75).unwrap()).unwrap();
        assert_eq!(kept.iter().map(|r| r.doc_id).collect::<Vec<_>>(), vec![9, 8, 7, 6, 5, 4, 3]);
        assert_eq!(kept[0].rank, 1);

        let all = rank_and_filter(&scores, FilterSpec::new(1.0).unwrap()).unwrap();
        assert_eq!(all.len(), 10);

        let tied = [DocScore { doc_id: 5, score: 1.0 }, DocScore { doc_id: 2, score: 1.0 }];
        let kept = rank_and_filter(&tied, FilterSpec::new(0.5).unwrap()).unwrap();
        assert_eq!(kept[0].doc_id, 2);

        assert!(rank_and_filter(&[], FilterSpec::new(0.5).unwrap()).is_err());
        let nan = [DocScore { doc_id: 0, score: f64::NAN }];
        assert_eq!(rank(&nan).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn empty_documents_rank_below_positive_scores() {
        let (docs, table) = toy();
        let mut bags = docs.clone();
        bags.push(bag(0, ""));
        let scores = score_all(&bags, &table, ScoreOptions::default());
        let ranked = rank(&scores).unwrap();
        // d2 = ½·ln(1) + ½·ln(3/2) ties with d1; the empty doc scores exactly 0
        assert_eq!(ranked.last().unwrap().doc_id, 0);
        assert_eq!(ranked.last().unwrap().score, 0.0);
    }

    #[test]
    fn log_base_does_not_change_ranking() {
        let texts = ["a b c", "a a d", "e f", "a", "b d e f g", "c c c h"];
        let bags: Vec<TermCounts> = texts.iter().enumerate().map(|(i, t)| bag(i as u64, t)).collect();
        let ln_table = IdfTable::fit(&bags, bags.len(), PreprocessConfig::default()).unwrap();
        let log10_table = IdfTable::from_parts(
            ln_table.n_docs(),
            ln_table.iter().map(|(t, s)| {
                let idf = (ln_table.n_docs() as f64 / (1.0 + s.df as f64)).log10();
                (t.to_string(), TermStat { df: s.df, idf })
            }),
            ln_table.config().clone(),
        )
        .unwrap();
        let ids = |t: &IdfTable| -> Vec<u64> {
            rank(&score_all(&bags, t, ScoreOptions::default()))
                .unwrap()
                .iter()
                .map(|r| r.doc_id)
                .collect()
        };
        assert_eq!(ids(&ln_table), ids(&log10_table));
    }

    #[test]
    fn duplicated_corpus_shifts_idf_by_exact_formula() {
        let texts = ["a b", "a c", "d", "a b c d e"];
        let bags: Vec<TermCounts> = texts.iter().enumerate().map(|(i, t)| bag(i as u64, t)).collect();
        let doubled: Vec<TermCounts> = bags
            .iter()
            .chain(&bags)
            .enumerate()
            .map(|(i, b)| TermCounts { doc_id: i as u64, ..b.clone() })
            .collect();
        let t1 = IdfTable::fit(&bags, 4, PreprocessConfig::default()).unwrap();
        let t2 = IdfTable::fit(&doubled, 8, PreprocessConfig::default()).unwrap();
        for (term, s1) in t1.iter() {
            let s2 = t2.get(term).unwrap();
            assert_eq!(s2.df, 2 * s1.df);
            let n = 4.0f64;
            let df = s1.df as f64;
            let expected_shift = (2.0 * n / (1.0 + 2.0 * df)).ln() - (n / (1.0 + df)).ln();
            assert!(close(s2.idf - s1.idf, expected_shift, 1e-12), "{term}");
        }
    }

    #[test]
    fn idf_json_is_sorted_and_round_trips() {
        let (_, table) = toy();
        let json = serde_json::to_string(&table).unwrap();
        assert!(json.starts_with("{\"n_docs\":3,\"config\":"));
        let barked = json.find("\"barked\"").unwrap();
        let sat = json.find("\"sat\"").unwrap();
        assert!(barked < sat);
        let back: IdfTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, table);

        let bad = json.replace("\"df\":1", "\"df\":9");
        assert!(serde_json::from_str::<IdfTable>(&bad).is_err());
    }

    #[test]
    fn score_and_manifest_files() {
        let dir = tempfile::tempdir().unwrap();
        let (docs, table) = toy();
        let scores = score_all(&docs, &table, ScoreOptions::default());
        let p = dir.path().join("scores.csv");
        write_scores(&p, &scores).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().nth(3), Some("3,0.405465108108"));
        let back = read_scores(&p).unwrap();
        assert_eq!(back.len(), 3);
        assert!(close(back[2].score, scores[2].score, 1e-11));

        let m = dir.path().join("filter.csv");
        write_filter_manifest(&m, &rank_and_filter(&back, FilterSpec::new(0.5).unwrap()).unwrap()).unwrap();
        assert_eq!(std::fs::read_to_string(&m).unwrap(), "rank,doc_id,score\n1,3,0.405465108108\n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn scores_strategy() -> impl Strategy<Value = Vec<DocScore>> {
            proptest::collection::vec(-5i32..20, 1..200).prop_map(|v| {
                v.into_iter()
                    .enumerate()
                    .map(|(i, s)| DocScore { doc_id: i as u64, score: s as f64 / 4.0 })
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn retained_sets_nest(scores in scores_strategy(), a in 0.01f64..=1.0, b in 0.01f64..=1.0) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let small = rank_and_filter(&scores, FilterSpec::new(lo).unwrap()).unwrap();
                let large = rank_and_filter(&scores, FilterSpec::new(hi).unwrap()).unwrap();
                prop_assert!(small.len() <= large.len());
                prop_assert_eq!(&large[..small.len()], &small[..]);
            }

            #[test]
            fn permutation_invariant(scores in scores_strategy(), p in 0.01f64..=1.0, rot in 0usize..200) {
                let mut shuffled = scores.clone();
                let len = shuffled.len();
                shuffled.rotate_left(rot % len);
                shuffled.reverse();
                let spec = FilterSpec::new(p).unwrap();
                prop_assert_eq!(
                    rank_and_filter(&scores, spec).unwrap(),
                    rank_and_filter(&shuffled, spec).unwrap()
                );
            }
        }
    }
}
