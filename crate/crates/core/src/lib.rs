//! Training-set pruning and tokenizer vocabulary augmentation for labeled
//! text corpora.
//!
//! The pipeline ingests a CSV of labeled tweets, collapses the labels to a
//! binary task, splits off a fixed stratified test set, ranks the training
//! pool by aggregate TF-IDF score and keeps the top fraction. Separately, a
//! WordPiece vocabulary can be audited against the corpus and extended with
//! whole-word domain terms. A small logistic-regression classifier over
//! TF-IDF features and the usual classification metrics make it possible to
//! check the effect of filtering end to end without a GPU.

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub(crate) mod rng;
pub mod synthetic;
pub mod tfidf;
pub mod wordpiece;

pub use error::{Error, Result};

/// `⌊fraction · n⌋`, tolerant of the representation error in decimal
/// fractions such as `0.29 * 100 = 28.999999999999996`.
pub fn floor_fraction(fraction: f64, n: usize) -> usize {
    let exact = fraction * n as f64;
    let snapped = exact.round();
    if (exact - snapped).abs() <= 1e-9 * snapped.max(1.0) {
        snapped as usize
    } else {
        exact.floor() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::floor_fraction;

    #[test]
    fn floor_fraction_handles_decimal_representation() {
        assert_eq!(floor_fraction(0.29, 100), 29);
        assert_eq!(floor_fraction(0.75, 10), 7);
        assert_eq!(floor_fraction(0.2, 100), 20);
        assert_eq!(floor_fraction(0.2, 4163), 832);
        assert_eq!(floor_fraction(0.75, 19827), 14870);
        assert_eq!(floor_fraction(1.0, 13), 13);
        assert_eq!(floor_fraction(0.5, 1), 0);
    }
}
