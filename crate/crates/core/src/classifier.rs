//! Logistic regression over sparse TF-IDF features, trained with plain
//! mini-batch gradient descent for a fixed number of epochs.
//!
//! This is a stand-in for transformer fine-tuning: cheap enough to run the
//! whole filter ladder in seconds, with training time proportional to the
//! number of training documents.

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::metrics::{self, MetricsReport};
use crate::rng;
use crate::tfidf::{self, IdfTable, TermCounts};

/// Term → feature index, frozen from an IDF table's term order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureIndex {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl FeatureIndex {
    pub fn from_table(table: &IdfTable) -> Self {
        Self::from_terms(table.iter().map(|(t, _)| t.to_string()).collect())
    }

    pub fn from_terms(terms: Vec<String>) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        FeatureIndex { terms, index }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, index: u32) -> Option<&str> {
        self.terms.get(index as usize).map(String::as_str)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub doc_id: u64,
    /// `(feature index, weight)`, ascending by index.
    pub entries: Vec<(u32, f64)>,
    pub dimension: usize,
}

impl FeatureVector {
    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, x)| weights[i as usize] * x).sum()
    }
}

/// One entry per unique in-vocabulary term, valued by its TF-IDF weight.
pub fn featurize(doc: &TermCounts, table: &IdfTable, index: &FeatureIndex) -> FeatureVector {
    let mut entries: Vec<(u32, f64)> = tfidf::weights(doc, table)
        .filter_map(|(term, w)| index.get(term).map(|i| (i, w)))
        .collect();
    entries.sort_unstable_by_key(|&(i, _)| i);
    FeatureVector {
        doc_id: doc.doc_id,
        entries,
        dimension: index.len(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2_penalty: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 3,
            batch_size: 8,
            learning_rate: 0.1,
            l2_penalty: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidArgument("epochs and batch size must be at least 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidArgument("learning rate must be positive".into()));
        }
        if !(self.l2_penalty.is_finite() && self.l2_penalty >= 0.0) {
            return Err(Error::InvalidArgument("l2 penalty must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub index: FeatureIndex,
    pub config: TrainConfig,
}

impl LinearModel {
    pub fn zeros(index: FeatureIndex, config: TrainConfig) -> Self {
        LinearModel {
            weights: vec![0.0; index.len()],
            bias: 0.0,
            index,
            config,
        }
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    pub fn logit(&self, x: &FeatureVector) -> f64 {
        x.dot(&self.weights) + self.bias
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io::write_json(path, &ModelFile::from(self))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file: ModelFile = crate::io::read_json(path)?;
        LinearModel::try_from(file).map_err(|e| e.with_path(path))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    dimension: usize,
    bias: f64,
    weights: Vec<f64>,
    term_index: Vec<(String, u32)>,
    config: TrainConfig,
}

impl From<&LinearModel> for ModelFile {
    fn from(m: &LinearModel) -> Self {
        ModelFile {
            dimension: m.dimension(),
            bias: m.bias,
            weights: m.weights.clone(),
            term_index: m
                .index
                .terms
                .iter()
                .enumerate()
                .map(|(i, t)| (t.clone(), i as u32))
                .collect(),
            config: m.config,
        }
    }
}

impl TryFrom<ModelFile> for LinearModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.weights.len() != f.dimension || f.term_index.len() != f.dimension {
            return Err(Error::data(format!(
                "model dimension {} does not match {} weights / {} terms",
                f.dimension,
                f.weights.len(),
                f.term_index.len()
            )));
        }
        let mut terms = vec![None; f.dimension];
        for (term, idx) in f.term_index {
            let slot = terms
                .get_mut(idx as usize)
                .ok_or_else(|| Error::data(format!("term index {idx} out of range")))?;
            if slot.replace(term).is_some() {
                return Err(Error::data(format!("term index {idx} assigned twice")));
            }
        }
        let terms: Vec<String> = terms.into_iter().map(|t| t.expect("every slot filled")).collect();
        Ok(LinearModel {
            weights: f.weights,
            bias: f.bias,
            index: FeatureIndex::from_terms(terms),
            config: f.config,
        })
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-ln σ(z)` for y = 1, `-ln(1 − σ(z))` for y = 0, without overflow.
fn cross_entropy(z: f64, y: f64) -> f64 {
    z.max(0.0) - y * z + (-z.abs()).exp().ln_1p()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Mean binary cross-entropy plus `(l2/2)·‖w‖²` (bias not penalised), and
/// its exact gradient.
pub fn loss_and_gradient(model: &LinearModel, batch: &[(FeatureVector, Label)], l2: f64) -> Result<(f64, Gradient)> {
    let refs: Vec<&(FeatureVector, Label)> = batch.iter().collect();
    batch_loss_and_gradient(model, &refs, l2)
}

fn batch_loss_and_gradient(model: &LinearModel, batch: &[&(FeatureVector, Label)], l2: f64) -> Result<(f64, Gradient)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let n = batch.len() as f64;
    let mut grad: Vec<f64> = model.weights.iter().map(|w| l2 * w).collect();
    let mut grad_bias = 0.0;
    let mut loss = 0.0;
    for &(x, label) in batch {
        let y = if label.is_positive() { 1.0 } else { 0.0 };
        let z = model.logit(x);
        loss += cross_entropy(z, y);
        let residual = (sigmoid(z) - y) / n;
        for &(i, v) in &x.entries {
            grad[i as usize] += residual * v;
        }
        grad_bias += residual;
    }
    let penalty = 0.5 * l2 * model.weights.iter().map(|w| w * w).sum::<f64>();
    Ok((
        loss / n + penalty,
        Gradient {
            weights: grad,
            bias: grad_bias,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_loss: f64,
    pub seconds_elapsed: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: LinearModel,
    pub seconds: f64,
    pub log: Vec<EpochLog>,
}

/// Featurizes `docs` against `table` and runs `config.epochs` passes of
/// mini-batch gradient descent in a seeded batch order.
pub fn train(docs: &[(TermCounts, Label)], table: &IdfTable, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if docs.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if docs.iter().all(|(_, l)| *l == docs[0].1) {
        return Err(Error::InvalidArgument(format!(
            "training set contains only label {}",
            docs[0].1
        )));
    }

    let started = Instant::now();
    let index = FeatureIndex::from_table(table);
    let examples: Vec<(FeatureVector, Label)> = docs
        .iter()
        .map(|(d, l)| (featurize(d, table, &index), *l))
        .collect();
    let mut model = LinearModel::zeros(index, *config);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    let mut batch: Vec<&(FeatureVector, Label)> = Vec::with_capacity(config.batch_size);

    for epoch in 0..config.epochs {
        rng::shuffle(&mut order, &mut rng::stream_rng(config.seed, epoch as u64));
        let mut loss_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| &examples[i]));
            let (loss, grad) = batch_loss_and_gradient(&model, &batch, config.l2_penalty)?;
            for (w, g) in model.weights.iter_mut().zip(&grad.weights) {
                *w -= config.learning_rate * g;
            }
            model.bias -= config.learning_rate * grad.bias;
            loss_sum += loss;
            batches += 1;
        }
        log.push(EpochLog {
            epoch: epoch + 1,
            mean_loss: loss_sum / batches as f64,
            seconds_elapsed: started.elapsed().as_secs_f64(),
        });
    }
    if model.weights.iter().any(|w| !w.is_finite()) || !model.bias.is_finite() {
        return Err(Error::Invariant("training diverged to non-finite weights".into()));
    }
    Ok(TrainOutcome {
        model,
        seconds: started.elapsed().as_secs_f64(),
        log,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub probability: f64,
}

pub fn predict_features(model: &LinearModel, x: &FeatureVector) -> Prediction {
    let probability = sigmoid(model.logit(x));
    let label = if probability >= 0.5 {
        Label::HatefulOrOffensive
    } else {
        Label::Neither
    };
    Prediction { label, probability }
}

pub fn predict(model: &LinearModel, doc: &TermCounts, table: &IdfTable) -> Prediction {
    predict_features(model, &featurize(doc, table, &model.index))
}

pub fn evaluate(model: &LinearModel, docs: &[(TermCounts, Label)], table: &IdfTable) -> Result<MetricsReport> {
    let preds: Vec<Label> = docs.iter().map(|(d, _)| predict(model, d, table).label).collect();
    let truth: Vec<Label> = docs.iter().map(|(_, l)| *l).collect();
    metrics::report(&metrics::confusion(&preds, &truth)?)
}

/// `epoch,mean_loss,seconds_elapsed`.
pub fn write_training_log(path: impl AsRef<Path>, log: &[EpochLog]) -> Result<()> {
    let mut out = String::from("epoch,mean_loss,seconds_elapsed\n");
    for e in log {
        out.push_str(&format!("{},{},{:.6}\n", e.epoch, e.mean_loss, e.seconds_elapsed));
    }
    crate::io::write_bytes(path, out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, unit};
    use crate::tfidf::PreprocessConfig;

    fn bag(doc_id: u64, text: &str) -> TermCounts {
        TermCounts::from_terms(doc_id, text.split_whitespace())
    }

    fn toy_table() -> (Vec<TermCounts>, IdfTable) {
        let docs = vec![bag(1, "cat sat"), bag(2, "cat ran"), bag(3, "dog barked loud")];
        let t = IdfTable::fit(&docs, 3, PreprocessConfig::default()).unwrap();
        (docs, t)
    }

    #[test]
    fn featurize_matches_tfidf_weights() {
        let (docs, table) = toy_table();
        let index = FeatureIndex::from_table(&table);
        let fv = featurize(&docs[0], &table, &index);
        assert_eq!(fv.dimension, 6);
        assert_eq!(fv.entries.len(), 2);
        for &(i, w) in &fv.entries {
            let term = index.term(i).unwrap();
            assert_eq!(w, tfidf::tfidf_weight(term, &docs[0], &table));
        }
        assert!(featurize(&bag(0, "unicorn"), &table, &index).entries.is_empty());
        let dup = featurize(&bag(0, "cat cat"), &table, &index);
        assert_eq!(dup.entries.len(), 1);
    }

    #[test]
    fn zero_model_loss_is_ln2() {
        let (docs, table) = toy_table();
        let index = FeatureIndex::from_table(&table);
        let model = LinearModel::zeros(index.clone(), TrainConfig::default());
        let batch: Vec<(FeatureVector, Label)> = docs
            .iter()
            .map(|d| (featurize(d, &table, &index), Label::HatefulOrOffensive))
            .collect();
        let (loss, _) = loss_and_gradient(&model, &batch, 0.5).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(loss_and_gradient(&model, &[], 0.0).is_err());
    }

    fn random_case(seed: u64) -> (LinearModel, Vec<(FeatureVector, Label)>, f64) {
        let mut rng = stream_rng(seed, 0);
        let dim = 3 + crate::rng::below(&mut rng, 10);
        let index = FeatureIndex::from_terms((0..dim).map(|i| format!("t{i}")).collect());
        let mut model = LinearModel::zeros(index, TrainConfig::default());
        for w in &mut model.weights {
            *w = 2.0 * unit(&mut rng) - 1.0;
        }
        model.bias = unit(&mut rng) - 0.5;
        let n = 1 + crate::rng::below(&mut rng, 6);
        let batch = (0..n)
            .map(|k| {
                let mut entries = Vec::new();
                for i in 0..dim as u32 {
                    if unit(&mut rng) < 0.6 {
                        entries.push((i, 3.0 * unit(&mut rng)));
                    }
                }
                let label = if unit(&mut rng) < 0.5 { Label::Neither } else { Label::HatefulOrOffensive };
                (FeatureVector { doc_id: k as u64, entries, dimension: dim }, label)
            })
            .collect();
        (model, batch, 0.1 * unit(&mut rng))
    }

    #[test]
    fn gradient_matches_central_differences() {
        let h = 1e-5;
        for seed in 0..20 {
            let (model, batch, l2) = random_case(seed);
            let (_, grad) = loss_and_gradient(&model, &batch, l2).unwrap();
            for j in 0..=model.dimension() {
                let mut plus = model.clone();
                let mut minus = model.clone();
                if j < model.dimension() {
                    plus.weights[j] += h;
                    minus.weights[j] -= h;
                } else {
                    plus.bias += h;
                    minus.bias -= h;
                }
                let fd = (loss_and_gradient(&plus, &batch, l2).unwrap().0
                    - loss_and_gradient(&minus, &batch, l2).unwrap().0)
                    / (2.0 * h);
                let analytic = if j < model.dimension() { grad.weights[j] } else { grad.bias };
                let scale = analytic.abs().max(fd.abs()).max(1e-4);
                assert!((analytic - fd).abs() / scale <= 1e-6, "seed {seed} j {j}: {analytic} vs {fd}");
            }
        }
    }

    #[test]
    fn descent_on_separable_pair() {
        let index = FeatureIndex::from_terms(vec!["a".into(), "b".into()]);
        let mut model = LinearModel::zeros(index, TrainConfig::default());
        let batch = vec![
            (FeatureVector { doc_id: 0, entries: vec![(0, 1.0)], dimension: 2 }, Label::HatefulOrOffensive),
            (FeatureVector { doc_id: 1, entries: vec![(1, 1.0)], dimension: 2 }, Label::Neither),
        ];
        let mut prev = f64::INFINITY;
        for _ in 0..50 {
            let (loss, g) = loss_and_gradient(&model, &batch, 0.0).unwrap();
            assert!(loss < prev);
            prev = loss;
            for (w, gw) in model.weights.iter_mut().zip(&g.weights) {
                *w -= 0.5 * gw;
            }
            model.bias -= 0.5 * g.bias;
        }
    }

    #[test]
    fn prediction_threshold_and_hand_weights() {
        let (docs, table) = toy_table();
        let index = FeatureIndex::from_table(&table);
        let mut model = LinearModel::zeros(index.clone(), TrainConfig::default());
        let p = predict(&model, &docs[0], &table);
        assert_eq!(p.probability, 0.5);
        assert_eq!(p.label, Label::HatefulOrOffensive);

        model.bias = 10.0;
        assert!(predict(&model, &docs[0], &table).probability > 0.9999);

        // d3 = "dog barked loud": each term weight (1/3)·ln(3/2)
        model.bias = -0.5;
        model.weights[index.get("dog").unwrap() as usize] = 2.0;
        let z = 2.0 * (1.0 / 3.0) * 1.5f64.ln() - 0.5;
        let expected = 1.0 / (1.0 + (-z).exp());
        let p = predict(&model, &docs[2], &table);
        assert!((p.probability - expected).abs() < 1e-15);
        assert_eq!(p.label, Label::Neither);
    }

    fn labeled_toy() -> (Vec<(TermCounts, Label)>, IdfTable) {
        let texts = [
            ("awful nasty trash", Label::HatefulOrOffensive),
            ("nasty trash talk", Label::HatefulOrOffensive),
            ("lovely sunny day", Label::Neither),
            ("sunny walk today", Label::Neither),
            ("trash awful people", Label::HatefulOrOffensive),
            ("lovely walk", Label::Neither),
        ];
        let docs: Vec<(TermCounts, Label)> = texts
            .iter()
            .enumerate()
            .map(|(i, (t, l))| (bag(i as u64, t), *l))
            .collect();
        let bags: Vec<TermCounts> = docs.iter().map(|(d, _)| d.clone()).collect();
        let table = IdfTable::fit(&bags, bags.len(), PreprocessConfig::default()).unwrap();
        (docs, table)
    }

    #[test]
    fn training_is_deterministic_and_learns() {
        let (docs, table) = labeled_toy();
        let config = TrainConfig {
            epochs: 60,
            batch_size: 2,
            learning_rate: 0.5,
            ..TrainConfig::default()
        };
        let a = train(&docs, &table, &config).unwrap();
        let b = train(&docs, &table, &config).unwrap();
        assert_eq!(a.model, b.model);
        let la: Vec<f64> = a.log.iter().map(|e| e.mean_loss).collect();
        let lb: Vec<f64> = b.log.iter().map(|e| e.mean_loss).collect();
        assert_eq!(la, lb);
        assert!(la.last().unwrap() < &la[0]);
        let r = evaluate(&a.model, &docs, &table).unwrap();
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn training_rejects_bad_input() {
        let (docs, table) = labeled_toy();
        let one_class: Vec<_> = docs.iter().filter(|(_, l)| l.is_positive()).cloned().collect();
        assert!(train(&one_class, &table, &TrainConfig::default()).is_err());
        assert!(train(&[], &table, &TrainConfig::default()).is_err());
        let bad = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(train(&docs, &table, &bad).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let (docs, table) = labeled_toy();
        let out = train(&docs, &table, &TrainConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("model.json");
        out.model.save(&p).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        for key in ["dimension", "bias", "weights", "term_index", "config"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(LinearModel::load(&p).unwrap(), out.model);

        let log = dir.path().join("log.csv");
        write_training_log(&log, &out.log).unwrap();
        let text = std::fs::read_to_string(&log).unwrap();
        assert!(text.starts_with("epoch,mean_loss,seconds_elapsed\n1,"));
        assert_eq!(text.lines().count(), 4);
    }
}
