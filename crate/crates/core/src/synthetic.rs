//! Deterministic stand-in data for tests and demos.
//!
//! [`planted_corpus`] generates tweets in the Davidson CSV schema with
//! roughly the same class mix (about 6% hate, 77% offensive, 17% neither).
//! Each class draws from its own small set of marker words, on top of a
//! Zipf-distributed filler vocabulary shared by all classes, with some label
//! noise. [`bert_like_vocab`] builds a vocabulary with the layout of the
//! uncased BERT `vocab.txt` (specials, unused slots, single characters and
//! their continuations, words, continuation pieces) at any size.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::corpus::RawClass;
use crate::error::{Error, Result};
use crate::rng::{below, stream_rng, unit};
use crate::wordpiece::WordPieceVocab;

const ONSETS: [&str; 16] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr"];
const VOWELS: [&str; 6] = ["a", "e", "i", "o", "u", "y"];

fn pseudo_word<R: Rng>(rng: &mut R, syllables: usize) -> String {
    let mut w = String::new();
    for _ in 0..syllables {
        w.push_str(ONSETS[below(rng, ONSETS.len())]);
        w.push_str(VOWELS[below(rng, VOWELS.len())]);
    }
    w
}

fn unique_words<R: Rng>(rng: &mut R, n: usize, syllables: (usize, usize), taken: &mut HashSet<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let s = syllables.0 + below(rng, syllables.1 - syllables.0 + 1);
        let w = pseudo_word(rng, s);
        if taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Knobs for [`planted_corpus`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantedCorpus {
    pub n_docs: usize,
    pub seed: u64,
    pub filler_vocab: usize,
    /// Probability that a document carries markers of a different class.
    pub label_noise: f64,
}

impl Default for PlantedCorpus {
    fn default() -> Self {
        PlantedCorpus {
            n_docs: 5000,
            seed: 2017,
            filler_vocab: 6000,
            label_noise: 0.04,
        }
    }
}

/// One generated row: `(raw_class, text)`.
pub fn planted_corpus(params: &PlantedCorpus) -> Vec<(RawClass, String)> {
    let mut rng = stream_rng(params.seed, 0x5EED);
    let mut taken = HashSet::new();
    let filler = unique_words(&mut rng, params.filler_vocab, (1, 4), &mut taken);
    let markers: Vec<Vec<String>> = [8usize, 12, 12]
        .iter()
        .map(|&n| unique_words(&mut rng, n, (2, 3), &mut taken))
        .collect();
    let mut hate_markers = markers[0].clone();
    hate_markers.extend(["h8", "h8ers", "b1tch", "f*ck"].map(String::from));
    let markers = [hate_markers, markers[1].clone(), markers[2].clone()];

    // Zipf(1) over the filler vocabulary via inverse CDF on cumulative weights.
    let cumulative: Vec<f64> = filler
        .iter()
        .enumerate()
        .scan(0.0, |acc, (i, _)| {
            *acc += 1.0 / (i as f64 + 1.0);
            Some(*acc)
        })
        .collect();
    let total_weight = *cumulative.last().unwrap_or(&1.0);
    let draw_filler = |rng: &mut rand_chacha::ChaCha8Rng| -> &str {
        let u = unit(rng) * total_weight;
        let i = cumulative.partition_point(|&c| c < u).min(filler.len() - 1);
        &filler[i]
    };

    let mut rows = Vec::with_capacity(params.n_docs);
    for _ in 0..params.n_docs {
        let u = unit(&mut rng);
        let class = if u < 0.0577 {
            RawClass::Hate
        } else if u < 0.0577 + 0.774 {
            RawClass::Offensive
        } else {
            RawClass::Neither
        };
        let marker_class = if unit(&mut rng) < params.label_noise {
            RawClass::ALL[below(&mut rng, 3)]
        } else {
            class
        };

        let mut words: Vec<String> = Vec::new();
        let short = unit(&mut rng) < 0.15;
        let n_filler = if short { 1 + below(&mut rng, 2) } else { 4 + below(&mut rng, 14) };
        for _ in 0..n_filler {
            words.push(draw_filler(&mut rng).to_string());
        }
        let pool = &markers[marker_class.code() as usize];
        let n_markers = if short { 1 } else { 1 + below(&mut rng, 3) };
        for _ in 0..n_markers {
            let at = below(&mut rng, words.len() + 1);
            words.insert(at, pool[below(&mut rng, pool.len())].clone());
        }
        if unit(&mut rng) < 0.3 {
            words.insert(0, format!("@{}", draw_filler(&mut rng)));
            words.insert(0, "RT".to_string());
        }
        if unit(&mut rng) < 0.1 {
            words.push(format!("http://t.co/{}", pseudo_word(&mut rng, 2)));
        }
        if unit(&mut rng) < 0.2 {
            words.last_mut().unwrap().push('!');
        }
        rows.push((class, words.join(" ")));
    }
    rows
}

/// Writes rows in the Davidson distribution layout.
pub fn write_davidson_csv(path: impl AsRef<Path>, rows: &[(RawClass, String)]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let io_err = |e: csv::Error| Error::data_at(path, None, e.to_string());
    w.write_record(["", "count", "hate_speech", "offensive_language", "neither", "class", "tweet"])
        .map_err(io_err)?;
    for (i, (class, text)) in rows.iter().enumerate() {
        let mut votes = ["0"; 3];
        votes[class.code() as usize] = "3";
        w.write_record([&i.to_string(), "3", votes[0], votes[1], votes[2], &class.code().to_string(), text])
            .map_err(io_err)?;
    }
    let mut inner = w.into_inner().map_err(|e| Error::data_at(path, None, e.to_string()))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

const PUNCTUATION: &str = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";

/// A vocabulary with the uncased BERT layout and exactly `size` tokens.
pub fn bert_like_vocab(size: usize, seed: u64) -> Result<WordPieceVocab> {
    let mut tokens: Vec<String> = vec!["[PAD]".into()];
    tokens.extend((0..99).map(|i| format!("[unused{i}]")));
    tokens.extend(["[UNK]", "[CLS]", "[SEP]", "[MASK]"].map(String::from));
    tokens.extend((99..994).map(|i| format!("[unused{i}]")));
    let singles: Vec<String> = PUNCTUATION
        .chars()
        .chain('0'..='9')
        .chain('a'..='z')
        .map(String::from)
        .collect();
    tokens.extend(singles.iter().cloned());
    tokens.extend(singles.iter().map(|s| format!("##{s}")));
    if size < tokens.len() {
        return Err(Error::InvalidArgument(format!(
            "a BERT-layout vocabulary needs at least {} tokens",
            tokens.len()
        )));
    }

    let mut taken: HashSet<String> = tokens.iter().cloned().collect();
    let mut rng = stream_rng(seed, 0xB0C4B);
    while tokens.len() < size {
        let continuation = unit(&mut rng) < 0.2;
        let syllables = if continuation { 1 + below(&mut rng, 2) } else { 1 + below(&mut rng, 4) };
        let w = pseudo_word(&mut rng, syllables);
        let tok = if continuation { format!("##{w}") } else { w };
        if taken.insert(tok.clone()) {
            tokens.push(tok);
        }
    }
    WordPieceVocab::from_tokens(tokens)
}
