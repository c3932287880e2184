//! WordPiece vocabularies, greedy longest-match-first tokenization and
//! append-only vocabulary augmentation.
//!
//! A vocabulary is the ordered token list of a BERT `vocab.txt`; the token id
//! is the zero-based line number. Tokens appended by [`augment`] are
//! whole-word tokens: a word equal to one of them maps to that single token,
//! and they never take part in the greedy prefix search. Existing ids never
//! move, and no word's fragment count can grow through augmentation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

pub const CONTINUATION_PREFIX: &str = "##";
pub const UNK_TOKEN: &str = "[UNK]";
pub const SPECIAL_TOKENS: [&str; 5] = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"];
pub const DEFAULT_MAX_WORD_CHARS: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordPieceVocab {
    tokens: Vec<String>,
    token_to_id: HashMap<String, u32>,
    /// Ids at or above this index are whole-word additions.
    base_len: usize,
    max_word_chars: usize,
    /// Longest base piece in chars, not counting the continuation prefix.
    max_piece_chars: usize,
    unk_id: u32,
}

impl WordPieceVocab {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        let mut token_to_id = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if token_to_id.insert(t.clone(), i as u32).is_some() {
                return Err(Error::data(format!("duplicate token `{t}` at id {i}")));
            }
        }
        for special in SPECIAL_TOKENS {
            if !token_to_id.contains_key(special) {
                return Err(Error::data(format!("missing special token {special}")));
            }
        }
        let unk_id = token_to_id[UNK_TOKEN];
        let base_len = tokens.len();
        let mut vocab = WordPieceVocab {
            tokens,
            token_to_id,
            base_len,
            max_word_chars: DEFAULT_MAX_WORD_CHARS,
            max_piece_chars: 0,
            unk_id,
        };
        vocab.max_piece_chars = vocab.compute_max_piece_chars();
        Ok(vocab)
    }

    fn compute_max_piece_chars(&self) -> usize {
        self.tokens[..self.base_len]
            .iter()
            .map(|t| t.strip_prefix(CONTINUATION_PREFIX).unwrap_or(t).chars().count())
            .max()
            .unwrap_or(0)
    }

    /// Parses `vocab.txt` content: one token per line, LF endings, no blank
    /// lines except a final newline.
    pub fn parse(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let mut tokens = Vec::new();
        for (i, line) in body.split('\n').enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.is_empty() {
                return Err(Error::Data {
                    path: None,
                    row: Some(i as u64 + 1),
                    message: "blank line in vocabulary".into(),
                });
            }
            tokens.push(line.to_string());
        }
        Self::from_tokens(tokens)
    }

    /// Marks ids `base_len..` as whole-word additions, as produced by
    /// [`augment`]. Needed after reloading an augmented vocabulary file,
    /// which carries no such marker.
    pub fn with_added_from(mut self, base_len: usize) -> Result<Self> {
        if base_len > self.tokens.len() {
            return Err(Error::InvalidArgument(format!(
                "base size {base_len} exceeds vocabulary size {}",
                self.tokens.len()
            )));
        }
        for t in &self.tokens[base_len..] {
            check_whole_word(t)?;
        }
        if self.tokens[base_len..].iter().any(|t| SPECIAL_TOKENS.contains(&t.as_str())) {
            return Err(Error::InvalidArgument("special tokens cannot be additions".into()));
        }
        self.base_len = base_len;
        self.max_piece_chars = self.compute_max_piece_chars();
        Ok(self)
    }

    pub fn with_max_word_chars(mut self, max_word_chars: usize) -> Self {
        self.max_word_chars = max_word_chars.max(1);
        self
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn max_word_chars(&self) -> usize {
        self.max_word_chars
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn added_tokens(&self) -> &[String] {
        &self.tokens[self.base_len..]
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_id.contains_key(token)
    }

    pub fn unk_id(&self) -> u32 {
        self.unk_id
    }

    fn base_id(&self, piece: &str) -> Option<u32> {
        self.id(piece).filter(|&id| (id as usize) < self.base_len)
    }

    fn added_id(&self, word: &str) -> Option<u32> {
        self.id(word).filter(|&id| (id as usize) >= self.base_len)
    }

    /// Token ids for one whitespace-free word.
    pub fn word_ids(&self, word: &str) -> Vec<u32> {
        if word.is_empty() {
            return Vec::new();
        }
        if let Some(id) = self.added_id(word) {
            return vec![id];
        }
        let bounds: Vec<usize> = word
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(word.len()))
            .collect();
        let n_chars = bounds.len() - 1;
        if n_chars > self.max_word_chars {
            return vec![self.unk_id];
        }

        let mut ids = Vec::new();
        let mut piece = String::with_capacity(word.len() + CONTINUATION_PREFIX.len());
        let mut start = 0;
        while start < n_chars {
            let mut end = n_chars.min(start + self.max_piece_chars);
            let mut found = None;
            while end > start {
                piece.clear();
                if start > 0 {
                    piece.push_str(CONTINUATION_PREFIX);
                }
                piece.push_str(&word[bounds[start]..bounds[end]]);
                if let Some(id) = self.base_id(&piece) {
                    found = Some(id);
                    break;
                }
                end -= 1;
            }
            match found {
                Some(id) => {
                    ids.push(id);
                    start = end;
                }
                None => return vec![self.unk_id],
            }
        }
        ids
    }

    /// Token ids for free text, see [`tokenize`].
    pub fn text_ids(&self, text: &str) -> Vec<u32> {
        let lowered = text.to_lowercase();
        let mut ids = Vec::new();
        for chunk in lowered.split_whitespace() {
            let (lead, core, trail) = split_edges(chunk);
            if let Some(id) = self.added_id(core).filter(|_| !core.is_empty()) {
                let mut buf = [0u8; 4];
                for c in lead.chars() {
                    ids.extend(self.word_ids(c.encode_utf8(&mut buf)));
                }
                ids.push(id);
                for c in trail.chars() {
                    ids.extend(self.word_ids(c.encode_utf8(&mut buf)));
                }
                continue;
            }
            for word in basic_split(chunk) {
                ids.extend(self.word_ids(word));
            }
        }
        ids
    }

    fn to_strings(&self, ids: Vec<u32>) -> Vec<String> {
        ids.into_iter().map(|id| self.tokens[id as usize].clone()).collect()
    }

    /// One token per line in id order, LF terminated.
    pub fn to_file_string(&self) -> String {
        let mut out = String::with_capacity(self.tokens.iter().map(|t| t.len() + 1).sum());
        for t in &self.tokens {
            out.push_str(t);
            out.push('\n');
        }
        out
    }
}

fn check_whole_word(term: &str) -> Result<()> {
    if term.chars().any(char::is_whitespace) {
        return Err(Error::InvalidArgument(format!("term `{term}` contains whitespace")));
    }
    Ok(())
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Leading non-alphanumeric chars, the core, trailing non-alphanumeric chars.
fn split_edges(chunk: &str) -> (&str, &str, &str) {
    let core_start = chunk.find(is_word_char).unwrap_or(chunk.len());
    let core_end = chunk
        .rfind(is_word_char)
        .map(|i| i + chunk[i..].chars().next().map_or(0, char::len_utf8))
        .unwrap_or(core_start);
    (&chunk[..core_start], &chunk[core_start..core_end], &chunk[core_end..])
}

/// Runs of alphanumeric characters; every other character stands alone.
fn basic_split(chunk: &str) -> Vec<&str> {
    let mut words = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, c) in chunk.char_indices() {
        if is_word_char(c) {
            run_start.get_or_insert(i);
        } else {
            if let Some(s) = run_start.take() {
                words.push(&chunk[s..i]);
            }
            words.push(&chunk[i..i + c.len_utf8()]);
        }
    }
    if let Some(s) = run_start {
        words.push(&chunk[s..]);
    }
    words
}

pub fn load_vocab(path: impl AsRef<Path>) -> Result<WordPieceVocab> {
    let path = path.as_ref();
    let text = crate::io::read_to_string(path)?;
    WordPieceVocab::parse(&text).map_err(|e| e.with_path(path))
}

pub fn save_vocab(vocab: &WordPieceVocab, path: impl AsRef<Path>) -> Result<()> {
    crate::io::write_bytes(path, vocab.to_file_string().as_bytes())
}

/// Greedy longest-match-first split of a single word.
pub fn tokenize_word(word: &str, vocab: &WordPieceVocab) -> Vec<String> {
    vocab.to_strings(vocab.word_ids(word))
}

/// Lowercases, splits on whitespace, separates punctuation into one-char
/// words and WordPiece-splits each word. A whitespace chunk whose
/// alphanumeric core is an appended token keeps that core whole.
pub fn tokenize(text: &str, vocab: &WordPieceVocab) -> Vec<String> {
    vocab.to_strings(vocab.text_ids(text))
}

pub fn fragment_count(word: &str, vocab: &WordPieceVocab) -> usize {
    vocab.word_ids(word).len()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    CorpusAudit,
    ExternalLexicon,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub term: String,
    pub corpus_frequency: u64,
    pub fragment_count: usize,
    pub source: CandidateSource,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedTerm {
    pub term: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_frequency: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_fragments: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_words: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon_terms: Option<usize>,
    pub vocab_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub augmented_vocab_size: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentationReport {
    pub candidates: Vec<Candidate>,
    pub added: Vec<String>,
    pub skipped: Vec<SkippedTerm>,
    pub params: ReportParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditParams {
    pub min_frequency: u64,
    pub min_fragments: usize,
    /// Keep symbols inside words (`h8`, `f*ck`) instead of splitting on them.
    pub raw_words: bool,
}

impl Default for AuditParams {
    fn default() -> Self {
        AuditParams {
            min_frequency: 10,
            min_fragments: 3,
            raw_words: true,
        }
    }
}

/// Removes `&name;` and `&#123;` character references.
fn strip_entities(chunk: &str) -> std::borrow::Cow<'_, str> {
    if !chunk.contains('&') {
        return std::borrow::Cow::Borrowed(chunk);
    }
    let mut out = String::with_capacity(chunk.len());
    let mut rest = chunk;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let after = &rest[amp + 1..];
        let body = after.strip_prefix('#').unwrap_or(after);
        let name_len = body.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(body.len());
        let consumed = after.len() - body.len() + name_len;
        if name_len > 0 && after[consumed..].starts_with(';') {
            out.push(' ');
            rest = &after[consumed + 1..];
        } else {
            out.push('&');
            rest = after;
        }
    }
    out.push_str(rest);
    std::borrow::Cow::Owned(out)
}

/// Words the audit counts in one document.
pub fn audit_words(text: &str, raw_words: bool) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut words = Vec::new();
    for chunk in lowered.split_whitespace() {
        let cleaned = strip_entities(chunk);
        for piece in cleaned.split_whitespace() {
            if piece.starts_with('@') || piece.contains("http://") || piece.contains("https://") {
                continue;
            }
            if raw_words {
                let (_, core, _) = split_edges(piece);
                if !core.is_empty() {
                    words.push(core.to_string());
                }
            } else {
                words.extend(
                    basic_split(piece)
                        .into_iter()
                        .filter(|w| w.chars().any(is_word_char))
                        .map(str::to_string),
                );
            }
        }
    }
    words
}

/// Reads a lexicon: one term per line, blank lines and `#` comments ignored.
pub fn parse_lexicon(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Vec<String>> {
    Ok(parse_lexicon(&crate::io::read_to_string(path)?))
}

/// Finds frequent corpus words that the vocabulary splits into many pieces,
/// plus lexicon terms that are not already single tokens.
pub fn fragmentation_audit(
    docs: &[Document],
    vocab: &WordPieceVocab,
    lexicon: Option<&[String]>,
    params: &AuditParams,
) -> Result<AugmentationReport> {
    if params.min_fragments < 2 {
        return Err(Error::InvalidArgument(format!(
            "min_fragments must be at least 2, got {}",
            params.min_fragments
        )));
    }
    let mut frequency: BTreeMap<String, u64> = BTreeMap::new();
    for doc in docs {
        for w in audit_words(&doc.text, params.raw_words) {
            *frequency.entry(w).or_insert(0) += 1;
        }
    }

    let mut candidates: Vec<Candidate> = Vec::new();
    let mut listed: HashSet<String> = HashSet::new();
    for (word, &freq) in &frequency {
        if freq < params.min_frequency {
            continue;
        }
        let fragments = fragment_count(word, vocab);
        if fragments >= params.min_fragments {
            listed.insert(word.clone());
            candidates.push(Candidate {
                term: word.clone(),
                corpus_frequency: freq,
                fragment_count: fragments,
                source: CandidateSource::CorpusAudit,
            });
        }
    }

    let mut skipped = Vec::new();
    if let Some(lexicon) = lexicon {
        for term in lexicon {
            if term.chars().any(char::is_whitespace) {
                skipped.push(SkippedTerm {
                    term: term.clone(),
                    reason: "contains whitespace".into(),
                });
                continue;
            }
            if listed.contains(term) {
                continue;
            }
            let ids = vocab.word_ids(term);
            let single = ids.len() == 1 && vocab.token(ids[0]) == Some(term.as_str());
            if single {
                continue;
            }
            listed.insert(term.clone());
            candidates.push(Candidate {
                term: term.clone(),
                corpus_frequency: frequency.get(term).copied().unwrap_or(0),
                fragment_count: ids.len(),
                source: CandidateSource::ExternalLexicon,
            });
        }
    }

    candidates.sort_by(|a, b| {
        b.corpus_frequency
            .cmp(&a.corpus_frequency)
            .then_with(|| a.term.cmp(&b.term))
    });

    Ok(AugmentationReport {
        candidates,
        added: Vec::new(),
        skipped,
        params: ReportParams {
            min_frequency: Some(params.min_frequency),
            min_fragments: Some(params.min_fragments),
            raw_words: Some(params.raw_words),
            lexicon_terms: lexicon.map(<[String]>::len),
            vocab_size: vocab.len(),
            augmented_vocab_size: None,
        },
    })
}

/// Appends the genuinely new `terms`, in order, as whole-word tokens.
///
/// Already-present, duplicate, empty, non-lowercase, `##`-prefixed and
/// over-long terms are skipped with a reason. Whitespace and special tokens
/// are rejected outright.
pub fn augment(vocab: &WordPieceVocab, terms: &[String]) -> Result<(WordPieceVocab, AugmentationReport)> {
    for term in terms {
        check_whole_word(term)?;
        if SPECIAL_TOKENS.contains(&term.as_str()) {
            return Err(Error::InvalidArgument(format!("cannot add special token {term}")));
        }
    }

    let mut tokens = vocab.tokens.clone();
    let mut token_to_id = vocab.token_to_id.clone();
    let mut added = Vec::new();
    let mut skipped = Vec::new();
    let mut seen = HashSet::new();
    for term in terms {
        let reason = if term.is_empty() {
            Some("empty")
        } else if !seen.insert(term.as_str()) {
            Some("duplicate in input")
        } else if token_to_id.contains_key(term) {
            Some("already in vocabulary")
        } else if term.to_lowercase() != *term {
            Some("not lowercase")
        } else if term.starts_with(CONTINUATION_PREFIX) {
            Some("continuation piece")
        } else if term.chars().count() > vocab.max_word_chars {
            Some("longer than max_word_chars")
        } else {
            None
        };
        match reason {
            Some(reason) => skipped.push(SkippedTerm {
                term: term.clone(),
                reason: reason.to_string(),
            }),
            None => {
                token_to_id.insert(term.clone(), tokens.len() as u32);
                tokens.push(term.clone());
                added.push(term.clone());
            }
        }
    }

    let augmented = WordPieceVocab {
        tokens,
        token_to_id,
        ..vocab.clone()
    };
    let report = AugmentationReport {
        candidates: Vec::new(),
        added,
        skipped,
        params: ReportParams {
            vocab_size: vocab.len(),
            augmented_vocab_size: Some(augmented.len()),
            ..ReportParams::default()
        },
    };
    Ok((augmented, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> WordPieceVocab {
        let tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "play", "##ing", "##ed", "!"];
        WordPieceVocab::from_tokens(tokens.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ids_follow_line_order() {
        let v = WordPieceVocab::parse("[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\nhello\n").unwrap();
        assert_eq!(v.len(), 6);
        for (i, t) in v.tokens().iter().enumerate() {
            assert_eq!(v.id(t), Some(i as u32));
        }
        assert_eq!(v.id("hello"), Some(5));
        assert_eq!(v.unk_id(), 1);
    }

    #[test]
    fn invalid_vocab_files() {
        let missing_unk = WordPieceVocab::parse("[PAD]\n[CLS]\n[SEP]\n[MASK]\n").unwrap_err();
        assert!(missing_unk.to_string().contains("[UNK]"));
        let dup = WordPieceVocab::parse("[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\na\na\n").unwrap_err();
        assert!(dup.to_string().contains("duplicate"));
        let blank = WordPieceVocab::parse("[PAD]\n[UNK]\n\n[CLS]\n[SEP]\n[MASK]\n").unwrap_err();
        assert!(blank.to_string().contains("row 3"), "{blank}");
    }

    #[test]
    fn greedy_longest_match() {
        let v = toy();
        assert_eq!(tokenize_word("playing", &v), strings(&["play", "##ing"]));
        assert_eq!(tokenize_word("play", &v), strings(&["play"]));
        assert_eq!(tokenize_word("qqq", &v), strings(&["[UNK]"]));
        assert_eq!(tokenize_word("playingx", &v), strings(&["[UNK]"]));
        assert!(tokenize_word("", &v).is_empty());
    }

    #[test]
    fn longest_prefix_wins() {
        let tokens = strings(&["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "un", "una", "##ff", "##ffable", "##able"]);
        let v = WordPieceVocab::from_tokens(tokens).unwrap();
        assert_eq!(tokenize_word("unaffable", &v), strings(&["una", "##ffable"]));
    }

    #[test]
    fn over_long_words_are_unknown() {
        let v = toy().with_max_word_chars(6);
        assert_eq!(tokenize_word("playing", &v), strings(&["[UNK]"]));
        assert_eq!(tokenize_word("play", &v), strings(&["play"]));
    }

    #[test]
    fn text_tokenization() {
        let v = toy();
        assert_eq!(tokenize("Playing!", &v), strings(&["play", "##ing", "!"]));
        assert!(tokenize("", &v).is_empty());
        assert_eq!(tokenize("PLAY play", &v), strings(&["play", "play"]));
        assert_eq!(tokenize("play's", &v), strings(&["play", "[UNK]", "[UNK]"]));
    }

    #[test]
    fn augmented_terms_become_single_tokens() {
        let v = toy();
        assert_eq!(tokenize_word("h8ter", &v), strings(&["[UNK]"]));
        let (aug, report) = augment(&v, &strings(&["h8ter", "playing", "f*ck"])).unwrap();
        assert_eq!(report.added, strings(&["h8ter", "playing", "f*ck"]));
        assert_eq!(aug.len(), v.len() + 3);
        assert_eq!(aug.id("h8ter"), Some(v.len() as u32));
        for t in &report.added {
            assert_eq!(tokenize_word(t, &aug), vec![t.clone()]);
        }
        assert_eq!(tokenize("Playing! F*CK!!", &aug), strings(&["playing", "!", "f*ck", "!", "!"]));
        // appended tokens are not prefix pieces
        assert_eq!(tokenize_word("playinged", &aug), strings(&["play", "##ing", "##ed"]));
    }

    #[test]
    fn augment_skips_and_rejects() {
        let v = toy();
        let (same, report) = augment(&v, &strings(&["play"])).unwrap();
        assert_eq!(same, v);
        assert_eq!(report.skipped[0].reason, "already in vocabulary");

        let (_, report) = augment(&v, &strings(&["new", "new", "", "Caps", "##x"])).unwrap();
        assert_eq!(report.added, strings(&["new"]));
        let reasons: Vec<&str> = report.skipped.iter().map(|s| s.reason.as_str()).collect();
        assert_eq!(reasons, vec!["duplicate in input", "empty", "not lowercase", "continuation piece"]);

        assert!(augment(&v, &strings(&["two words"])).is_err());
        assert!(augment(&v, &strings(&["[MASK]"])).is_err());
    }

    #[test]
    fn augmentation_stacks_and_reload_needs_the_boundary() {
        let v = toy();
        let (a1, _) = augment(&v, &strings(&["alpha"])).unwrap();
        let (a2, _) = augment(&a1, &strings(&["beta"])).unwrap();
        assert_eq!(a2.added_tokens(), &strings(&["alpha", "beta"])[..]);

        let reloaded = WordPieceVocab::parse(&a2.to_file_string()).unwrap();
        assert_eq!(reloaded.tokens(), a2.tokens());
        assert_eq!(reloaded.with_added_from(v.len()).unwrap(), a2);
        assert!(WordPieceVocab::parse(&v.to_file_string()).unwrap().with_added_from(0).is_err());
    }

    #[test]
    fn save_and_load_are_inverse_and_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let v = toy();
        let p1 = dir.path().join("a.txt");
        let p2 = dir.path().join("b.txt");
        save_vocab(&v, &p1).unwrap();
        save_vocab(&v, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        assert_eq!(load_vocab(&p1).unwrap(), v);
    }

    fn audit_vocab() -> WordPieceVocab {
        let mut t = strings(&["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "the", "cat"]);
        for c in 'a'..='z' {
            t.push(c.to_string());
            t.push(format!("##{c}"));
        }
        for d in '0'..='9' {
            t.push(d.to_string());
            t.push(format!("##{d}"));
        }
        t.push("##*".into());
        WordPieceVocab::from_tokens(t).unwrap()
    }

    fn docs(texts: &[&str]) -> Vec<Document> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| Document {
                doc_id: i as u64,
                text: t.to_string(),
                label: crate::corpus::Label::HatefulOrOffensive,
                raw_class: None,
            })
            .collect()
    }

    #[test]
    fn audit_thresholds() {
        let v = audit_vocab();
        let mut texts = vec!["grrr the cat"; 40];
        texts.extend(vec!["zz"; 50]);
        texts.extend(vec!["wxyz"; 5]);
        let report = fragmentation_audit(
            &docs(&texts),
            &v,
            None,
            &AuditParams {
                min_frequency: 10,
                min_fragments: 3,
                raw_words: true,
            },
        )
        .unwrap();
        // "grrr" → g ##r ##r ##r; "zz" only 2 pieces; "wxyz" too rare; "the"/"cat" single tokens
        assert_eq!(report.candidates.len(), 1);
        let c = &report.candidates[0];
        assert_eq!((c.term.as_str(), c.corpus_frequency, c.fragment_count), ("grrr", 40, 4));
        assert_eq!(c.source, CandidateSource::CorpusAudit);
    }

    #[test]
    fn lexicon_terms_join_the_candidates() {
        let v = audit_vocab();
        let lexicon = strings(&["h8r", "cat", "two words"]);
        let report = fragmentation_audit(&docs(&["hello"]), &v, Some(&lexicon), &AuditParams::default()).unwrap();
        assert_eq!(report.candidates.len(), 1);
        let c = &report.candidates[0];
        assert_eq!(c.term, "h8r");
        assert_eq!(c.corpus_frequency, 0);
        assert_eq!(c.fragment_count, 3);
        assert_eq!(c.source, CandidateSource::ExternalLexicon);
        assert_eq!(report.skipped[0].term, "two words");
        assert_eq!(report.params.lexicon_terms, Some(3));
    }

    #[test]
    fn audit_rejects_min_fragments_below_two() {
        let params = AuditParams {
            min_fragments: 1,
            ..AuditParams::default()
        };
        assert!(fragmentation_audit(&[], &toy(), None, &params).is_err());
    }

    #[test]
    fn audit_word_modes() {
        let text = "RT @user: f*ck!! &#8220;h8ers&#8221; are... http://t.co/x &amp; you";
        assert_eq!(audit_words(text, true), strings(&["rt", "f*ck", "h8ers", "are", "you"]));
        assert_eq!(audit_words(text, false), strings(&["rt", "f", "ck", "h8ers", "are", "you"]));
    }

    #[test]
    fn lexicon_parsing() {
        let lex = parse_lexicon("# slurs\nFoo\n\n  bar  \n#skip\n");
        assert_eq!(lex, strings(&["foo", "bar"]));
    }

    #[test]
    fn candidates_sorted_by_frequency_then_term() {
        let v = audit_vocab();
        let mut texts = vec!["bbbb aaaa"; 12];
        texts.extend(vec!["cccc"; 20]);
        let report = fragmentation_audit(&docs(&texts), &v, None, &AuditParams::default()).unwrap();
        let terms: Vec<&str> = report.candidates.iter().map(|c| c.term.as_str()).collect();
        assert_eq!(terms, vec!["cccc", "aaaa", "bbbb"]);
    }

    #[test]
    fn report_json_keys() {
        let (_, report) = augment(&toy(), &strings(&["new"])).unwrap();
        let value = serde_json::to_value(&report).unwrap();
        let obj = value.as_object().unwrap();
        for key in ["candidates", "added", "skipped", "params"] {
            assert!(obj.contains_key(key), "{key}");
        }
        assert_eq!(value["params"]["augmented_vocab_size"], 10);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        const PIECES: [&str; 6] = ["ab", "c", "abc", "d", "e", "cd"];

        fn prop_vocab() -> WordPieceVocab {
            let mut t = strings(&["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]);
            for p in PIECES {
                t.push(p.to_string());
                t.push(format!("##{p}"));
            }
            WordPieceVocab::from_tokens(t).unwrap()
        }

        proptest! {
            #[test]
            fn pieces_reassemble_the_word(idx in proptest::collection::vec(0usize..PIECES.len(), 1..8), junk in proptest::option::of("[a-z]{1,3}")) {
                let v = prop_vocab();
                let mut word: String = idx.iter().map(|&i| PIECES[i]).collect();
                if let Some(j) = junk { word.push_str(&j); }
                let out = tokenize_word(&word, &v);
                if out != vec![UNK_TOKEN.to_string()] {
                    let joined: String = out.iter().map(|p| p.strip_prefix("##").unwrap_or(p)).collect();
                    prop_assert_eq!(joined, word);
                }
                for t in &out {
                    prop_assert!(v.contains(t));
                }
            }

            #[test]
            fn tokenize_is_total(text in "\\PC{0,40}") {
                let v = prop_vocab();
                for t in tokenize(&text, &v) {
                    prop_assert!(v.contains(&t));
                }
            }

            #[test]
            fn augmentation_never_adds_fragments(words in proptest::collection::vec("[a-e]{1,8}", 1..20), adds in proptest::collection::vec("[a-e]{1,6}", 0..10)) {
                let v = prop_vocab();
                let (aug, report) = augment(&v, &adds).unwrap();
                for w in words.iter().chain(&adds) {
                    prop_assert!(fragment_count(w, &aug) <= fragment_count(w, &v));
                }
                for t in &report.added {
                    prop_assert_eq!(tokenize_word(t, &aug), vec![t.clone()]);
                }
                for (i, t) in v.tokens().iter().enumerate() {
                    prop_assert_eq!(aug.id(t), Some(i as u32));
                }
            }
        }
    }
}
