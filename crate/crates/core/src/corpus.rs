//! Corpus ingest, label collapsing, statistics and the fixed train/test split.
//!
//! Input is a CSV in the distribution format of the Davidson et al. tweet
//! corpus: a header row, a `class` column holding 0 (hate speech),
//! 1 (offensive language) or 2 (neither), and a `tweet` column. Quoted fields
//! may span several lines.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{floor_fraction, rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawClass {
    Hate,
    Offensive,
    Neither,
}

impl RawClass {
    pub const ALL: [RawClass; 3] = [RawClass::Hate, RawClass::Offensive, RawClass::Neither];

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(RawClass::Hate),
            1 => Some(RawClass::Offensive),
            2 => Some(RawClass::Neither),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    /// Hate speech and offensive language collapse into one positive class.
    pub fn binary_label(self) -> Label {
        match self {
            RawClass::Hate | RawClass::Offensive => Label::HatefulOrOffensive,
            RawClass::Neither => Label::Neither,
        }
    }
}

/// Binary label. Serialized as the integers 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Label {
    Neither,
    HatefulOrOffensive,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Neither, Label::HatefulOrOffensive];

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Label::Neither),
            1 => Some(Label::HatefulOrOffensive),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_positive(self) -> bool {
        self == Label::HatefulOrOffensive
    }
}

impl From<Label> for u8 {
    fn from(label: Label) -> u8 {
        label.code()
    }
}

impl TryFrom<u8> for Label {
    type Error = String;

    fn try_from(code: u8) -> std::result::Result<Self, String> {
        Label::from_code(code).ok_or_else(|| format!("label must be 0 or 1, got {code}"))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRecord {
    /// Zero-based index of the data row in the source file, counting skipped rows.
    pub row_id: u64,
    pub raw_class: RawClass,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: u64,
    pub text: String,
    pub label: Label,
    /// Present when the document came straight from ingest.
    pub raw_class: Option<RawClass>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub class_column: String,
    pub text_column: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            class_column: "class".to_string(),
            text_column: "tweet".to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipCounts {
    /// Rows that could not be decoded or lack one of the configured fields.
    pub malformed: usize,
    pub empty_text: usize,
    pub unknown_class: usize,
}

impl SkipCounts {
    pub fn total(&self) -> usize {
        self.malformed + self.empty_text + self.unknown_class
    }
}

#[derive(Clone, Debug)]
pub struct LoadedRecords {
    pub records: Vec<RawRecord>,
    pub skipped: SkipCounts,
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<LoadedRecords> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema).map_err(|e| e.with_path(path))
}

/// Parse records from any reader. Rows that fail to decode, miss a field,
/// carry an unknown class or whitespace-only text are skipped and counted.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<LoadedRecords> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr
        .byte_headers()
        .map_err(|e| Error::data(format!("cannot read header: {e}")))?
        .clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| trim_bom(h) == name.as_bytes())
            .ok_or_else(|| Error::data(format!("missing required column `{name}`")))
    };
    let class_col = column(&schema.class_column)?;
    let text_col = column(&schema.text_column)?;

    let mut records = Vec::new();
    let mut skipped = SkipCounts::default();
    let mut row = csv::ByteRecord::new();
    let mut row_id = 0u64;
    loop {
        match rdr.read_byte_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {}
            Err(_) => {
                skipped.malformed += 1;
                row_id += 1;
                continue;
            }
        }
        let this_row = row_id;
        row_id += 1;

        let (Some(class_field), Some(text_field)) = (row.get(class_col), row.get(text_col)) else {
            skipped.malformed += 1;
            continue;
        };
        let Ok(text) = std::str::from_utf8(text_field) else {
            skipped.malformed += 1;
            continue;
        };
        let raw_class = std::str::from_utf8(class_field)
            .ok()
            .and_then(|s| s.trim().parse::<u8>().ok())
            .and_then(RawClass::from_code);
        let Some(raw_class) = raw_class else {
            skipped.unknown_class += 1;
            continue;
        };
        if text.trim().is_empty() {
            skipped.empty_text += 1;
            continue;
        }
        records.push(RawRecord {
            row_id: this_row,
            raw_class,
            text: text.to_string(),
        });
    }

    if records.is_empty() {
        return Err(Error::data(format!(
            "zero valid rows ({} skipped)",
            skipped.total()
        )));
    }
    Ok(LoadedRecords { records, skipped })
}

fn trim_bom(field: &[u8]) -> &[u8] {
    field.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(field)
}

/// Collapse to binary labels and assign doc ids `0..n` in input order.
pub fn to_binary(records: &[RawRecord]) -> Vec<Document> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| Document {
            doc_id: i as u64,
            text: r.text.clone(),
            label: r.raw_class.binary_label(),
            raw_class: Some(r.raw_class),
        })
        .collect()
}

/// Anything that carries a binary label and possibly the original class.
pub trait Labeled {
    fn label(&self) -> Label;
    fn raw_class(&self) -> Option<RawClass>;
}

impl Labeled for RawRecord {
    fn label(&self) -> Label {
        self.raw_class.binary_label()
    }
    fn raw_class(&self) -> Option<RawClass> {
        Some(self.raw_class)
    }
}

impl Labeled for Document {
    fn label(&self) -> Label {
        self.label
    }
    fn raw_class(&self) -> Option<RawClass> {
        self.raw_class
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    /// Counts for hate, offensive, neither; absent when any item lacks its raw class.
    pub raw_counts: Option<[usize; 3]>,
    pub raw_fractions: Option<[f64; 3]>,
    pub binary_counts: [usize; 2],
    pub binary_fractions: [f64; 2],
}

pub fn corpus_stats<T: Labeled>(items: &[T]) -> Result<CorpusStats> {
    if items.is_empty() {
        return Err(Error::InvalidArgument("corpus_stats on empty input".into()));
    }
    let total = items.len();
    let mut raw = [0usize; 3];
    let mut raw_known = true;
    let mut binary = [0usize; 2];
    for item in items {
        binary[item.label().index()] += 1;
        match item.raw_class() {
            Some(c) => raw[c.code() as usize] += 1,
            None => raw_known = false,
        }
    }
    let frac = |c: usize| c as f64 / total as f64;
    Ok(CorpusStats {
        total,
        raw_counts: raw_known.then_some(raw),
        raw_fractions: raw_known.then(|| raw.map(frac)),
        binary_counts: binary,
        binary_fractions: binary.map(frac),
    })
}

/// JSON stats report written by `ingest`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub total: usize,
    pub raw_fractions: Option<BTreeMap<String, f64>>,
    pub binary_fractions: BTreeMap<String, f64>,
    pub skipped: SkipCounts,
}

impl StatsReport {
    pub fn new(stats: &CorpusStats, skipped: SkipCounts) -> Self {
        let raw_fractions = stats.raw_fractions.map(|f| {
            [("hate", f[0]), ("offensive", f[1]), ("neither", f[2])]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect()
        });
        let binary_fractions = Label::ALL
            .iter()
            .map(|l| (l.code().to_string(), stats.binary_fractions[l.index()]))
            .collect();
        StatsReport {
            total: stats.total,
            raw_fractions,
            binary_fractions,
            skipped,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            test_fraction: 0.2,
            seed: 42,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn new(test_fraction: f64, seed: u64) -> Result<Self> {
        let spec = SplitSpec {
            test_fraction,
            seed,
            stratified: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    /// Sorted by doc id.
    pub train: Vec<Document>,
    /// Sorted by doc id.
    pub test: Vec<Document>,
}

const UNSTRATIFIED_STREAM: u64 = 2;

/// Deterministic train/test partition.
///
/// Each class (or the whole pool when `stratified` is off) is ordered by doc
/// id, permuted by a ChaCha8 stream seeded from `(seed, class)`, and the
/// first `max(1, ⌊test_fraction · n_class⌋)` members go to the test side.
/// Membership therefore depends only on doc ids, labels and the spec.
pub fn stratified_split(docs: &[Document], spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    let mut seen = HashSet::with_capacity(docs.len());
    for d in docs {
        if !seen.insert(d.doc_id) {
            return Err(Error::Invariant(format!("duplicate doc_id {}", d.doc_id)));
        }
    }

    let mut groups: Vec<(u64, Vec<usize>)> = if spec.stratified {
        Label::ALL
            .iter()
            .map(|&l| {
                let members = (0..docs.len()).filter(|&i| docs[i].label == l).collect();
                (l.code() as u64, members)
            })
            .collect()
    } else {
        vec![(UNSTRATIFIED_STREAM, (0..docs.len()).collect())]
    };

    let mut is_test = vec![false; docs.len()];
    for (stream, members) in &mut groups {
        if members.len() < 2 {
            let what = if spec.stratified {
                format!("class {stream}")
            } else {
                "corpus".to_string()
            };
            return Err(Error::InvalidArgument(format!(
                "{what} has {} document(s); at least 2 are needed to split",
                members.len()
            )));
        }
        members.sort_unstable_by_key(|&i| docs[i].doc_id);
        let mut rng = rng::stream_rng(spec.seed, *stream);
        rng::shuffle(members, &mut rng);
        let n_test = floor_fraction(spec.test_fraction, members.len()).max(1);
        for &i in &members[..n_test] {
            is_test[i] = true;
        }
    }

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (doc, &t) in docs.iter().zip(&is_test) {
        if t {
            test.push(doc.clone());
        } else {
            train.push(doc.clone());
        }
    }
    train.sort_by_key(|d| d.doc_id);
    test.sort_by_key(|d| d.doc_id);
    Ok(Split { train, test })
}

/// Writes the `doc_id,label` manifest used for split membership.
pub fn write_split_manifest(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["doc_id", "label"]).map_err(|e| csv_err(path, e))?;
    for d in docs {
        w.write_record([d.doc_id.to_string(), d.label.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the full ingested corpus: `doc_id,label,raw_class,text`.
pub fn write_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::NonNumeric)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(["doc_id", "label", "raw_class", "text"])
        .map_err(|e| csv_err(path, e))?;
    for d in docs {
        let raw = d.raw_class.map(|c| c.code().to_string()).unwrap_or_default();
        w.write_record([d.doc_id.to_string(), d.label.to_string(), raw, d.text.clone()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a training-set export: `doc_id,label,text` with text quoted.
pub fn write_export(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::WriterBuilder::new()
        .quote_style(csv::QuoteStyle::NonNumeric)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(["doc_id", "label", "text"]).map_err(|e| csv_err(path, e))?;
    for d in docs {
        w.write_record([d.doc_id.to_string(), d.label.to_string(), d.text.clone()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a corpus written by [`write_corpus`] or an export written by
/// [`write_export`].
pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let id_col = col("doc_id").ok_or_else(|| Error::data_at(path, None, "missing column `doc_id`"))?;
    let label_col = col("label").ok_or_else(|| Error::data_at(path, None, "missing column `label`"))?;
    let text_col = col("text").ok_or_else(|| Error::data_at(path, None, "missing column `text`"))?;
    let raw_col = col("raw_class");

    let mut docs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i as u64 + 1;
        let rec = rec.map_err(|e| Error::data_at(path, Some(row), e.to_string()))?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let doc_id = field(id_col)
            .parse::<u64>()
            .map_err(|_| Error::data_at(path, Some(row), "doc_id is not an integer"))?;
        let label = field(label_col)
            .parse::<u8>()
            .ok()
            .and_then(Label::from_code)
            .ok_or_else(|| Error::data_at(path, Some(row), "label must be 0 or 1"))?;
        let raw_class = match raw_col.map(field) {
            None | Some("") => None,
            Some(s) => Some(
                s.parse::<u8>()
                    .ok()
                    .and_then(RawClass::from_code)
                    .ok_or_else(|| Error::data_at(path, Some(row), "raw_class must be 0, 1 or 2"))?,
            ),
        };
        docs.push(Document {
            doc_id,
            text: field(text_col).to_string(),
            label,
            raw_class,
        });
    }
    Ok(docs)
}

/// Reads the `doc_id` column of any manifest with a header row, in file order.
pub fn read_doc_ids(path: impl AsRef<Path>) -> Result<Vec<u64>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let id_col = headers
        .iter()
        .position(|h| h == "doc_id")
        .ok_or_else(|| Error::data_at(path, None, "missing column `doc_id`"))?;
    let mut ids = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i as u64 + 1;
        let rec = rec.map_err(|e| Error::data_at(path, Some(row), e.to_string()))?;
        let id = rec
            .get(id_col)
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| Error::data_at(path, Some(row), "doc_id is not an integer"))?;
        ids.push(id);
    }
    Ok(ids)
}

/// Picks `ids` out of `docs`, preserving the order of `ids`.
pub fn select(docs: &[Document], ids: &[u64]) -> Result<Vec<Document>> {
    let by_id: std::collections::HashMap<u64, &Document> = docs.iter().map(|d| (d.doc_id, d)).collect();
    ids.iter()
        .map(|id| {
            by_id
                .get(id)
                .map(|d| (*d).clone())
                .ok_or_else(|| Error::data(format!("doc_id {id} not present in corpus")))
        })
        .collect()
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        let row = e.position().map(|p| p.record());
        Error::data_at(path, row, e.to_string())
    }
}
