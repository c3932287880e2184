//! Binary classification metrics: per-class precision, recall and F1,
//! accuracy, and macro / support-weighted F1.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Counts with label 1 as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Same matrix with label 0 treated as positive.
    pub fn mirrored(&self) -> Self {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }
}

pub fn confusion(predictions: &[Label], labels: &[Label]) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::InvalidArgument("no predictions to evaluate".into()));
    }
    let mut cm = ConfusionMatrix::default();
    for (p, y) in predictions.iter().zip(labels) {
        match (p.is_positive(), y.is_positive()) {
            (true, true) => cm.tp += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
            (false, false) => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    /// Keyed `"0"` and `"1"`.
    pub per_class: BTreeMap<String, ClassMetrics>,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub support: u64,
    /// Metrics whose denominator was zero and were reported as 0, e.g. `precision_1`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined_metrics: Vec<String>,
}

fn ratio(num: u64, den: u64, name: String, undefined: &mut Vec<String>) -> f64 {
    if den == 0 {
        undefined.push(name);
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_metrics(cm: &ConfusionMatrix, class: u8, undefined: &mut Vec<String>) -> ClassMetrics {
    let precision = ratio(cm.tp, cm.tp + cm.fp, format!("precision_{class}"), undefined);
    let recall = ratio(cm.tp, cm.tp + cm.fn_, format!("recall_{class}"), undefined);
    let f1 = if precision + recall == 0.0 {
        undefined.push(format!("f1_{class}"));
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        support: cm.tp + cm.fn_,
    }
}

pub fn report(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::InvalidArgument("empty confusion matrix".into()));
    }
    let mut undefined = Vec::new();
    let neg = class_metrics(&cm.mirrored(), 0, &mut undefined);
    let pos = class_metrics(cm, 1, &mut undefined);
    let weighted_f1 = (neg.support as f64 * neg.f1 + pos.support as f64 * pos.f1) / total as f64;
    Ok(MetricsReport {
        accuracy: (cm.tp + cm.tn) as f64 / total as f64,
        per_class: [("0".to_string(), neg), ("1".to_string(), pos)].into_iter().collect(),
        macro_f1: (neg.f1 + pos.f1) / 2.0,
        weighted_f1,
        support: total,
        undefined_metrics: undefined,
    })
}

impl MetricsReport {
    pub fn class(&self, label: Label) -> &ClassMetrics {
        &self.per_class[&label.code().to_string()]
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12}{:>10}{:>10}{:>10}{:>10}", "class", "precision", "recall", "f1", "support")?;
        for (name, m) in &self.per_class {
            writeln!(
                f,
                "{:<12}{:>10.4}{:>10.4}{:>10.4}{:>10}",
                name, m.precision, m.recall, m.f1, m.support
            )?;
        }
        writeln!(f, "{:<12}{:>30.4}", "accuracy", self.accuracy)?;
        writeln!(f, "{:<12}{:>30.4}", "macro f1", self.macro_f1)?;
        write!(f, "{:<12}{:>30.4}", "weighted f1", self.weighted_f1)
    }
}
