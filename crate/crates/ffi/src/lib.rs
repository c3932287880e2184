//! C ABI over `lexfilt`.
//!
//! Conventions:
//! - Every fallible call returns a [`LexfiltStatus`]; on anything but
//!   `LEXFILT_STATUS_OK`, [`lexfilt_last_error`] describes the failure.
//! - Handles are opaque and owned by the caller once returned; release them
//!   with the matching `_free` function. Freeing NULL is a no-op.
//! - Strings are NUL-terminated UTF-8. Output arrays are caller-allocated:
//!   pass the capacity, receive the needed length, and get
//!   `LEXFILT_STATUS_BUFFER_TOO_SMALL` (with the length filled in) when it
//!   does not fit.
//! - Panics never cross the boundary; they surface as `LEXFILT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lexfilt::corpus::Label;
use lexfilt::tfidf::{self, DocScore, FilterSpec, IdfTable, PreprocessConfig, TermCounts};
use lexfilt::wordpiece::{self, WordPieceVocab};
use lexfilt::{metrics, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LexfiltStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Data = 5,
    Invariant = 6,
    NotFound = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// A WordPiece vocabulary.
pub struct LexfiltVocab {
    inner: WordPieceVocab,
}

/// A fitted IDF table, including its preprocessing settings.
pub struct LexfiltIdfTable {
    inner: IdfTable,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LexfiltMetrics {
    pub accuracy: f64,
    /// Indexed by label: 0 neither, 1 hateful or offensive.
    pub precision: [f64; 2],
    pub recall: [f64; 2],
    pub f1: [f64; 2],
    pub support: [u64; 2],
    pub macro_f1: f64,
    pub weighted_f1: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(LexfiltStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Usage(_) | Error::InvalidArgument(_) => LexfiltStatus::InvalidArgument,
            Error::Io { .. } => LexfiltStatus::Io,
            Error::Data { .. } | Error::Json(_) => LexfiltStatus::Data,
            Error::Invariant(_) => LexfiltStatus::Invariant,
        };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: LexfiltStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LexfiltStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            LexfiltStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            LexfiltStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(LexfiltStatus::NullPointer, format!("{name} is NULL"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(LexfiltStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .map_or_else(|| fail(LexfiltStatus::NullPointer, format!("{name} is NULL")), Ok)
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(LexfiltStatus::NullPointer, format!("{name} is NULL"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn strings_arg<'a>(p: *const *const c_char, len: usize, name: &str) -> Result<Vec<&'a str>, Failure> {
    slice_arg(p, len, name)?
        .iter()
        .enumerate()
        .map(|(i, &s)| str_arg(s, &format!("{name}[{i}]")))
        .collect()
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .map_or_else(|| fail(LexfiltStatus::NullPointer, format!("{name} is NULL")), Ok)
}

/// Copies `items` into a caller buffer of `capacity`, always reporting the length.
unsafe fn copy_out<T: Copy>(items: &[T], out: *mut T, capacity: usize, out_len: *mut usize) -> Result<(), Failure> {
    *out_arg(out_len, "out_len")? = items.len();
    if items.len() > capacity {
        return fail(
            LexfiltStatus::BufferTooSmall,
            format!("need room for {} items, capacity is {capacity}", items.len()),
        );
    }
    if !items.is_empty() {
        if out.is_null() {
            return fail(LexfiltStatus::NullPointer, "output buffer is NULL");
        }
        ptr::copy_nonoverlapping(items.as_ptr(), out, items.len());
    }
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn lexfilt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn lexfilt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a `vocab.txt` (one token per line, id = line number).
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_vocab_load(path: *const c_char, out: *mut *mut LexfiltVocab) -> LexfiltStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inner = wordpiece::load_vocab(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(LexfiltVocab { inner }));
        Ok(())
    })
}

/// Reloads a vocabulary written by [`lexfilt_vocab_save`] after augmentation:
/// ids at or above `base_len` are treated as whole-word added tokens.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_vocab_load_augmented(
    path: *const c_char,
    base_len: usize,
    out: *mut *mut LexfiltVocab,
) -> LexfiltStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inner = wordpiece::load_vocab(str_arg(path, "path")?)?.with_added_from(base_len)?;
        *out = Box::into_raw(Box::new(LexfiltVocab { inner }));
        Ok(())
    })
}

/// # Safety
/// `vocab` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_vocab_free(vocab: *mut LexfiltVocab) {
    if !vocab.is_null() {
        drop(Box::from_raw(vocab));
    }
}

/// # Safety
/// `vocab` must be a valid handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_vocab_save(vocab: *const LexfiltVocab, path: *const c_char) -> LexfiltStatus {
    guard(|| {
        let v = ref_arg(vocab, "vocab")?;
        wordpiece::save_vocab(&v.inner, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// Number of tokens; 0 for NULL.
///
/// # Safety
/// `vocab` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_vocab_len(vocab: *const LexfiltVocab) -> usize {
    vocab.as_ref().map_or(0, |v| v.inner.len())
}

/// Number of tokens before augmentation; 0 for NULL.
///
/// # Safety
/// `vocab` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_vocab_base_len(vocab: *const LexfiltVocab) -> usize {
    vocab.as_ref().map_or(0, |v| v.inner.base_len())
}

/// # Safety
/// `vocab` must be a valid handle, `token` a valid C string, `out_id` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_vocab_token_id(
    vocab: *const LexfiltVocab,
    token: *const c_char,
    out_id: *mut u32,
) -> LexfiltStatus {
    guard(|| {
        let v = ref_arg(vocab, "vocab")?;
        let token = str_arg(token, "token")?;
        match v.inner.id(token) {
            Some(id) => {
                *out_arg(out_id, "out_id")? = id;
                Ok(())
            }
            None => fail(LexfiltStatus::NotFound, format!("{token:?} is not in the vocabulary")),
        }
    })
}

/// Tokenizes `text` into ids.
///
/// # Safety
/// `ids` must have room for `capacity` values (may be NULL when 0);
/// `out_len` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_vocab_tokenize(
    vocab: *const LexfiltVocab,
    text: *const c_char,
    ids: *mut u32,
    capacity: usize,
    out_len: *mut usize,
) -> LexfiltStatus {
    guard(|| {
        let v = ref_arg(vocab, "vocab")?;
        let found = v.inner.text_ids(str_arg(text, "text")?);
        copy_out(&found, ids, capacity, out_len)
    })
}

/// Number of pieces `word` splits into (an unknown word counts as one).
///
/// # Safety
/// `vocab` must be a valid handle, `word` a valid C string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_vocab_fragment_count(
    vocab: *const LexfiltVocab,
    word: *const c_char,
    out: *mut usize,
) -> LexfiltStatus {
    guard(|| {
        let v = ref_arg(vocab, "vocab")?;
        *out_arg(out, "out")? = wordpiece::fragment_count(str_arg(word, "word")?, &v.inner);
        Ok(())
    })
}

/// Appends `terms` as whole-word tokens, returning a new handle. Terms that
/// are already present, duplicated or unusable are skipped; `out_added`
/// receives how many were appended.
///
/// # Safety
/// `terms` must point to `n_terms` valid C strings; `out` and `out_added`
/// must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_vocab_augment(
    vocab: *const LexfiltVocab,
    terms: *const *const c_char,
    n_terms: usize,
    out: *mut *mut LexfiltVocab,
    out_added: *mut usize,
) -> LexfiltStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let v = ref_arg(vocab, "vocab")?;
        let terms: Vec<String> = strings_arg(terms, n_terms, "terms")?.into_iter().map(String::from).collect();
        let (inner, report) = wordpiece::augment(&v.inner, &terms)?;
        *out_arg(out_added, "out_added")? = report.added.len();
        *out = Box::into_raw(Box::new(LexfiltVocab { inner }));
        Ok(())
    })
}

/// Fits IDF on `texts` with the default preprocessing (lowercase, URLs and
/// @mentions stripped, no stopwords).
///
/// # Safety
/// `texts` must point to `n_texts` valid C strings; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_idf_fit(
    texts: *const *const c_char,
    n_texts: usize,
    out: *mut *mut LexfiltIdfTable,
) -> LexfiltStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let config = PreprocessConfig::default();
        let bags: Vec<TermCounts> = strings_arg(texts, n_texts, "texts")?
            .into_iter()
            .enumerate()
            .map(|(i, t)| TermCounts::from_text(i as u64, t, &config))
            .collect();
        let inner = IdfTable::fit(&bags, bags.len(), config)?;
        *out = Box::into_raw(Box::new(LexfiltIdfTable { inner }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_idf_load(path: *const c_char, out: *mut *mut LexfiltIdfTable) -> LexfiltStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inner = IdfTable::load(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(LexfiltIdfTable { inner }));
        Ok(())
    })
}

/// # Safety
/// `table` must be a valid handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_idf_save(table: *const LexfiltIdfTable, path: *const c_char) -> LexfiltStatus {
    guard(|| {
        ref_arg(table, "table")?.inner.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `table` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_idf_free(table: *mut LexfiltIdfTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of distinct terms; 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a valid handle.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_idf_len(table: *const LexfiltIdfTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.len())
}

/// IDF of `term`, `LEXFILT_STATUS_NOT_FOUND` when the term was never seen.
///
/// # Safety
/// `table` must be a valid handle, `term` a valid C string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_idf_get(
    table: *const LexfiltIdfTable,
    term: *const c_char,
    out: *mut f64,
) -> LexfiltStatus {
    guard(|| {
        let t = ref_arg(table, "table")?;
        let term = str_arg(term, "term")?;
        match t.inner.idf(term) {
            Some(v) => {
                *out_arg(out, "out")? = v;
                Ok(())
            }
            None => fail(LexfiltStatus::NotFound, format!("{term:?} is not in the IDF table")),
        }
    })
}

/// Aggregate TF-IDF score of one text, preprocessed like the fitted corpus.
///
/// # Safety
/// `table` must be a valid handle, `text` a valid C string, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_idf_score(
    table: *const LexfiltIdfTable,
    text: *const c_char,
    out: *mut f64,
) -> LexfiltStatus {
    guard(|| {
        let t = ref_arg(table, "table")?;
        let bag = TermCounts::from_text(0, str_arg(text, "text")?, t.inner.config());
        *out_arg(out, "out")? = tfidf::doc_score(&bag, &t.inner).score;
        Ok(())
    })
}

/// Keeps the top `max(1, floor(retain * n))` documents by descending score,
/// ties broken by ascending id, and writes their ids in rank order.
///
/// # Safety
/// `doc_ids` and `scores` must each hold `n` values; `out_ids` must have
/// room for `capacity` values; `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_rank_filter(
    doc_ids: *const u64,
    scores: *const f64,
    n: usize,
    retain: f64,
    out_ids: *mut u64,
    capacity: usize,
    out_len: *mut usize,
) -> LexfiltStatus {
    guard(|| {
        let ids = slice_arg(doc_ids, n, "doc_ids")?;
        let scores = slice_arg(scores, n, "scores")?;
        let docs: Vec<DocScore> = ids
            .iter()
            .zip(scores)
            .map(|(&doc_id, &score)| DocScore { doc_id, score })
            .collect();
        let kept = tfidf::rank_and_filter(&docs, FilterSpec::new(retain)?)?;
        let kept: Vec<u64> = kept.iter().map(|r| r.doc_id).collect();
        copy_out(&kept, out_ids, capacity, out_len)
    })
}

/// Binary metrics with label 1 as the positive class. Labels must be 0 or 1.
///
/// # Safety
/// `predictions` and `labels` must each hold `n` values; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn lexfilt_metrics(
    predictions: *const u8,
    labels: *const u8,
    n: usize,
    out: *mut LexfiltMetrics,
) -> LexfiltStatus {
    guard(|| {
        let to_labels = |v: &[u8], name: &str| -> Result<Vec<Label>, Failure> {
            v.iter()
                .map(|&b| {
                    Label::from_code(b)
                        .map_or_else(|| fail(LexfiltStatus::InvalidArgument, format!("{name} contains {b}")), Ok)
                })
                .collect()
        };
        let preds = to_labels(slice_arg(predictions, n, "predictions")?, "predictions")?;
        let truth = to_labels(slice_arg(labels, n, "labels")?, "labels")?;
        let r = metrics::report(&metrics::confusion(&preds, &truth)?)?;
        let out = out_arg(out, "out")?;
        let mut m = LexfiltMetrics {
            accuracy: r.accuracy,
            macro_f1: r.macro_f1,
            weighted_f1: r.weighted_f1,
            ..LexfiltMetrics::default()
        };
        for label in Label::ALL {
            let c = r.class(label);
            let i = label.index();
            m.precision[i] = c.precision;
            m.recall[i] = c.recall;
            m.f1[i] = c.f1;
            m.support[i] = c.support;
        }
        *out = m;
        Ok(())
    })
}
