//! End-to-end filter ladder: split, fit IDF, score the training pool, then
//! for the full pool and each retain fraction train the baseline classifier
//! and evaluate it on the fixed test set.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{self, TrainConfig};
use crate::corpus::{self, Document, Label, SplitSpec};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::tfidf::{self, DocScore, FilterSpec, IdfTable, PreprocessConfig, ScoreOptions, TermCounts};

pub const DEFAULT_LADDER: [f64; 6] = [0.80, 0.75, 0.70, 0.65, 0.60, 0.50];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub split: SplitSpec,
    pub preprocess: PreprocessConfig,
    pub ladder: Vec<f64>,
    pub train: TrainConfig,
    pub score: ScoreOptions,
    /// Fit IDF on train and test together instead of the training pool only.
    pub fit_on_full: bool,
    /// Training runs per level; the reported time is the median.
    pub repetitions: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            split: SplitSpec::default(),
            preprocess: PreprocessConfig::default(),
            ladder: DEFAULT_LADDER.to_vec(),
            train: TrainConfig::default(),
            score: ScoreOptions::default(),
            fit_on_full: false,
            repetitions: 1,
        }
    }
}

/// Ladder values must be strictly decreasing and lie in (0, 1].
pub fn validate_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::InvalidArgument("empty filter ladder".into()));
    }
    for &p in ladder {
        FilterSpec::new(p)?;
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "filter ladder must be strictly decreasing: {ladder:?}"
        )));
    }
    Ok(())
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.train.validate()?;
        validate_ladder(&self.ladder)?;
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything the ladder levels share.
pub struct Prepared {
    pub train: Vec<Document>,
    pub test: Vec<Document>,
    pub table: IdfTable,
    pub train_bags: Vec<(TermCounts, Label)>,
    pub test_bags: Vec<(TermCounts, Label)>,
    pub scores: Vec<DocScore>,
}

pub fn bags(docs: &[Document], config: &PreprocessConfig) -> Vec<(TermCounts, Label)> {
    docs.iter()
        .map(|d| (TermCounts::from_document(d, config), d.label))
        .collect()
}

pub fn prepare(docs: &[Document], config: &PipelineConfig) -> Result<Prepared> {
    config.validate()?;
    let split = corpus::stratified_split(docs, &config.split)?;
    let train_bags = bags(&split.train, &config.preprocess);
    let test_bags = bags(&split.test, &config.preprocess);
    let table = if config.fit_on_full {
        let all: Vec<TermCounts> = train_bags.iter().chain(&test_bags).map(|(b, _)| b.clone()).collect();
        IdfTable::fit(&all, all.len(), config.preprocess.clone())?
    } else {
        let pool: Vec<TermCounts> = train_bags.iter().map(|(b, _)| b.clone()).collect();
        IdfTable::fit(&pool, pool.len(), config.preprocess.clone())?
    };
    let pool: Vec<TermCounts> = train_bags.iter().map(|(b, _)| b.clone()).collect();
    let scores = tfidf::score_all(&pool, &table, config.score);
    Ok(Prepared {
        train: split.train,
        test: split.test,
        table,
        train_bags,
        test_bags,
        scores,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub configuration: String,
    pub retain_fraction: f64,
    pub train_docs: usize,
    /// Median over repetitions.
    pub seconds: f64,
    pub seconds_per_run: Vec<f64>,
    pub accuracy: f64,
    pub report: MetricsReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderResult {
    pub train_pool: usize,
    pub test_size: usize,
    pub rows: Vec<LadderRow>,
}

impl LadderResult {
    /// `configuration,seconds,accuracy`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("configuration,seconds,accuracy\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.6},{:.6}\n", r.configuration, r.seconds, r.accuracy));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<24}{:>10}{:>14}{:>10}\n", "configuration", "docs", "time (s)", "accuracy");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<24}{:>10}{:>14.4}{:>10.4}\n",
                r.configuration, r.train_docs, r.seconds, r.accuracy
            ));
        }
        out
    }
}

pub fn level_name(p: f64) -> String {
    format!("p{:03}", (p * 100.0).round() as u32)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

struct Level {
    name: String,
    configuration: String,
    retain_fraction: f64,
    ranked: Option<Vec<tfidf::RankedDoc>>,
    subset: Vec<(TermCounts, Label)>,
}

fn levels(prepared: &Prepared, config: &PipelineConfig) -> Result<Vec<Level>> {
    let by_id: std::collections::HashMap<u64, &(TermCounts, Label)> =
        prepared.train_bags.iter().map(|b| (b.0.doc_id, b)).collect();
    let mut out = Vec::with_capacity(config.ladder.len() + 1);
    for level in std::iter::once(None).chain(config.ladder.iter().copied().map(Some)) {
        let (name, configuration, retain_fraction, ranked) = match level {
            None => ("full".to_string(), "full training pool".to_string(), 1.0, None),
            Some(p) => {
                let ranked = tfidf::rank_and_filter(&prepared.scores, FilterSpec::new(p)?)?;
                (level_name(p), format!("top {:.0}%", p * 100.0), p, Some(ranked))
            }
        };
        // training order is by doc id so it does not depend on the ranking
        let mut ids: Vec<u64> = match &ranked {
            Some(r) => r.iter().map(|r| r.doc_id).collect(),
            None => prepared.train.iter().map(|d| d.doc_id).collect(),
        };
        ids.sort_unstable();
        let subset = ids.iter().map(|id| by_id[id].clone()).collect();
        out.push(Level {
            name,
            configuration,
            retain_fraction,
            ranked,
            subset,
        });
    }
    Ok(out)
}

/// Runs the full pool and every ladder level. Repetitions are interleaved
/// across levels (all levels once, then again) so a slow stretch on the
/// machine does not land on every run of one level. When `out_dir` is
/// given, each level writes its manifest, model, training log and report to
/// its own subdirectory.
pub fn run_ladder(docs: &[Document], config: &PipelineConfig, out_dir: Option<&Path>) -> Result<LadderResult> {
    let prepared = prepare(docs, config)?;
    let levels = levels(&prepared, config)?;

    let mut outcomes: Vec<Option<classifier::TrainOutcome>> = vec![None; levels.len()];
    let mut times: Vec<Vec<f64>> = vec![Vec::with_capacity(config.repetitions); levels.len()];
    for _ in 0..config.repetitions {
        for (i, level) in levels.iter().enumerate() {
            let o = classifier::train(&level.subset, &prepared.table, &config.train)?;
            times[i].push(o.seconds);
            outcomes[i].get_or_insert(o);
        }
    }

    let mut rows = Vec::with_capacity(levels.len());
    for ((level, outcome), times) in levels.iter().zip(outcomes).zip(times) {
        let outcome = outcome.expect("at least one repetition");
        let report = classifier::evaluate(&outcome.model, &prepared.test_bags, &prepared.table)?;

        if let Some(dir) = out_dir {
            let level_dir = dir.join(&level.name);
            std::fs::create_dir_all(&level_dir).map_err(|e| Error::io(&level_dir, e))?;
            if let Some(r) = &level.ranked {
                tfidf::write_filter_manifest(level_dir.join("filter.csv"), r)?;
            }
            outcome.model.save(level_dir.join("model.json"))?;
            classifier::write_training_log(level_dir.join("train_log.csv"), &outcome.log)?;
            crate::io::write_json(level_dir.join("report.json"), &report)?;
        }

        rows.push(LadderRow {
            configuration: level.configuration.clone(),
            retain_fraction: level.retain_fraction,
            train_docs: level.subset.len(),
            seconds: median(&times),
            seconds_per_run: times,
            accuracy: report.accuracy,
            report,
        });
    }

    let result = LadderResult {
        train_pool: prepared.train.len(),
        test_size: prepared.test.len(),
        rows,
    };
    if let Some(dir) = out_dir {
        crate::io::write_bytes(dir.join("ladder.csv"), result.to_csv().as_bytes())?;
        crate::io::write_json(dir.join("ladder.json"), &result)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{planted_corpus, PlantedCorpus};

    #[test]
    fn ladder_validation() {
        assert!(validate_ladder(&DEFAULT_LADDER).is_ok());
        assert!(validate_ladder(&[0.5, 0.7]).is_err());
        assert!(validate_ladder(&[0.7, 0.7]).is_err());
        assert!(validate_ladder(&[1.2, 0.7]).is_err());
        assert!(validate_ladder(&[]).is_err());
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn small_ladder_has_seven_rows() {
        let rows = planted_corpus(&PlantedCorpus { n_docs: 400, ..PlantedCorpus::default() });
        let docs: Vec<Document> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (c, t))| Document {
                doc_id: i as u64,
                text: t,
                label: c.binary_label(),
                raw_class: Some(c),
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let result = run_ladder(&docs, &PipelineConfig::default(), Some(dir.path())).unwrap();
        assert_eq!(result.rows.len(), 7);
        assert_eq!(result.rows[0].train_docs, result.train_pool);
        assert_eq!(result.rows[2].train_docs, crate::floor_fraction(0.75, result.train_pool));
        assert!(dir.path().join("p075/filter.csv").exists());
        assert!(dir.path().join("full/report.json").exists());
        let csv = std::fs::read_to_string(dir.path().join("ladder.csv")).unwrap();
        assert_eq!(csv.lines().count(), 8);
        assert!(csv.lines().nth(2).unwrap().starts_with("top 80%,"));
    }
}
