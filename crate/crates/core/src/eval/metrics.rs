use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{AsgError, Result};
use crate::open_classifier::risk_of;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    /// Zero denominators give 0.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }

    fn mean(items: &[Prf]) -> Self {
        if items.is_empty() {
            return Self::from_counts(0, 0, 0);
        }
        let n = items.len() as f64;
        Self {
            precision: items.iter().map(|p| p.precision).sum::<f64>() / n,
            recall: items.iter().map(|p| p.recall).sum::<f64>() / n,
            f1: items.iter().map(|p| p.f1).sum::<f64>() / n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelMetrics {
    pub label: Label,
    /// Number of test instances with this true label.
    pub support: usize,
    #[serde(flatten)]
    pub scores: Prf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub num_classes: usize,
    pub total: usize,
    /// Classes `1..=K` then NOVEL.
    pub per_class: Vec<LabelMetrics>,
    /// `confusion[pred][truth]`, indexed like `per_class`.
    pub confusion: Vec<Vec<usize>>,
    /// Macro F1 over the labels present in the truths, all unseen classes
    /// collapsed into NOVEL.
    pub macro_f1: f64,
    pub macro_f1_collapsed: f64,
    /// Macro F1 over the original label set, when original labels are known.
    pub macro_f1_original: Option<f64>,
    pub accuracy: f64,
    pub empirical_risk: f64,
    /// Macro average over the seen classes present in the truths.
    pub seen_aggregate: Prf,
    /// The NOVEL label's scores.
    pub unseen_aggregate: Prf,
}

fn label_index(label: Label, k: usize) -> Result<usize> {
    match label {
        Label::Novel => Ok(k),
        Label::Class(c) if (1..=k).contains(&c) => Ok(c - 1),
        Label::Class(c) => Err(AsgError::InvalidConfig(format!(
            "label {c} outside 1..={k}"
        ))),
    }
}

fn index_label(i: usize, k: usize) -> Label {
    if i == k {
        Label::Novel
    } else {
        Label::Class(i + 1)
    }
}

pub fn confusion_and_metrics(
    truths: &[Label],
    preds: &[Label],
    num_classes: usize,
) -> Result<MetricsReport> {
    if truths.len() != preds.len() {
        return Err(AsgError::dimension(
            truths.len(),
            preds.len(),
            "predictions vs truths",
        ));
    }
    if truths.is_empty() {
        return Err(AsgError::EmptyInput("no predictions to score".into()));
    }
    let k = num_classes;
    let mut confusion = vec![vec![0usize; k + 1]; k + 1];
    for (&t, &p) in truths.iter().zip(preds) {
        confusion[label_index(p, k)?][label_index(t, k)?] += 1;
    }

    let mut per_class = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let tp = confusion[i][i];
        let predicted: usize = confusion[i].iter().sum();
        let support: usize = confusion.iter().map(|row| row[i]).sum();
        per_class.push(LabelMetrics {
            label: index_label(i, k),
            support,
            scores: Prf::from_counts(tp, predicted - tp, support - tp),
        });
    }
    let present: Vec<&LabelMetrics> = per_class.iter().filter(|m| m.support > 0).collect();
    let macro_f1 = present.iter().map(|m| m.scores.f1).sum::<f64>() / present.len() as f64;
    let correct: usize = (0..=k).map(|i| confusion[i][i]).sum();
    let seen: Vec<Prf> = present
        .iter()
        .filter(|m| !m.label.is_novel())
        .map(|m| m.scores)
        .collect();

    Ok(MetricsReport {
        num_classes: k,
        total: truths.len(),
        macro_f1,
        macro_f1_collapsed: macro_f1,
        macro_f1_original: None,
        accuracy: correct as f64 / truths.len() as f64,
        empirical_risk: risk_of(truths, preds),
        seen_aggregate: Prf::mean(&seen),
        unseen_aggregate: per_class[k].scores,
        per_class,
        confusion,
    })
}

/// Macro F1 over the original classes present in `original_truths`.
///
/// A seen prediction `k` stands for original class `seen[k-1]`. A NOVEL
/// prediction is correct for any unseen original class and wrong for a
/// seen one.
pub fn macro_f1_original(
    original_truths: &[usize],
    preds: &[Label],
    seen: &[usize],
) -> Result<f64> {
    if original_truths.len() != preds.len() {
        return Err(AsgError::dimension(
            original_truths.len(),
            preds.len(),
            "predictions vs original truths",
        ));
    }
    if original_truths.is_empty() {
        return Err(AsgError::EmptyInput("no predictions to score".into()));
    }
    // `None` is a NOVEL prediction on a seen truth; it matches no class.
    let mapped: Vec<Option<usize>> = original_truths
        .iter()
        .zip(preds)
        .map(|(&t, &p)| match p {
            Label::Class(k) => seen
                .get(k - 1)
                .copied()
                .ok_or_else(|| {
                    AsgError::InvalidConfig(format!("prediction {k} outside the seen list"))
                })
                .map(Some),
            Label::Novel if seen.contains(&t) => Ok(None),
            Label::Novel => Ok(Some(t)),
        })
        .collect::<Result<_>>()?;
    let classes: BTreeSet<usize> = original_truths.iter().copied().collect();
    let total: f64 = classes
        .iter()
        .map(|&c| {
            let tp = original_truths
                .iter()
                .zip(&mapped)
                .filter(|(&t, &p)| t == c && p == Some(c))
                .count();
            let predicted = mapped.iter().filter(|&&p| p == Some(c)).count();
            let support = original_truths.iter().filter(|&&t| t == c).count();
            Prf::from_counts(tp, predicted - tp, support - tp).f1
        })
        .sum();
    Ok(total / classes.len() as f64)
}
