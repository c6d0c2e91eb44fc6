//! Comparison methods built from the same SVM solvers: one-vs-rest with a
//! rejection rule, one one-class SVM per class, and a single pooled
//! one-class SVM. Models score inputs as given; wrap them in
//! [`Standardized`] to apply training statistics first.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label, StandardizationStats};
use crate::error::{AsgError, Result};
use crate::open_classifier::{argmax, OpenClassifier, Prediction};
use crate::svm::solver::SmoParams;
use crate::svm::{
    fit_with_kernel, train_one_class_svm, BinarySvmModel, GramMatrix, KernelSpec, OneClassSvmModel,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OvrOpenModel {
    pub per_class: Vec<BinarySvmModel>,
}

impl OvrOpenModel {
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.per_class.iter().map(|m| m.decision_value(x)).collect()
    }
}

/// NOVEL unless some score is strictly positive; then the argmax class.
pub fn predict_ovr_scores(scores: &[f64]) -> Label {
    match argmax(scores) {
        Some(k) if scores[k - 1] > 0.0 => Label::Class(k),
        _ => Label::Novel,
    }
}

pub fn predict_ovr_open(model: &OvrOpenModel, x: &[f64]) -> Result<Prediction> {
    let confidences = model.decision_values(x)?;
    Ok(Prediction {
        label: predict_ovr_scores(&confidences),
        confidences,
    })
}

impl OpenClassifier for OvrOpenModel {
    fn dim(&self) -> usize {
        self.per_class[0].dim
    }

    fn num_classes(&self) -> usize {
        self.per_class.len()
    }

    fn predict(&self, x: &[f64]) -> Result<Prediction> {
        predict_ovr_open(self, x)
    }
}

/// One binary SVM per class, class `k` against all other training data.
pub fn train_ovr_open(
    train: &Dataset,
    kernel: KernelSpec,
    cost: f64,
    smo: &SmoParams,
) -> Result<OvrOpenModel> {
    let labels = train.labels();
    if labels.iter().any(|l| l.is_novel()) {
        return Err(AsgError::InvalidConfig(
            "training data must not contain novel labels".into(),
        ));
    }
    train.require_class_sizes(1, "one-vs-rest training")?;
    if train.num_classes() < 2 {
        return Err(AsgError::InsufficientData(
            "one-vs-rest needs at least two classes".into(),
        ));
    }
    if !(cost > 0.0 && cost.is_finite()) {
        return Err(AsgError::InvalidConfig(format!(
            "svm cost must be > 0, got {cost}"
        )));
    }
    let points: Vec<&[f64]> = train.features().collect();
    let gram = GramMatrix::compute(&kernel, &points);
    let upper = vec![cost; points.len()];
    let per_class = (1..=train.num_classes())
        .into_par_iter()
        .map(|k| {
            let y: Vec<f64> = labels
                .iter()
                .map(|&l| if l == Label::Class(k) { 1.0 } else { -1.0 })
                .collect();
            fit_with_kernel(&points, &gram, &y, &upper, kernel, smo).0
        })
        .collect();
    Ok(OvrOpenModel { per_class })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MocModel {
    pub per_class: Vec<OneClassSvmModel>,
    /// Assigns seen labels among the accepting classes; absent for a single class.
    pub fallback_ovr: Option<OvrOpenModel>,
}

pub fn train_moc(
    train: &Dataset,
    kernel: KernelSpec,
    nu: f64,
    cost: f64,
    smo: &SmoParams,
) -> Result<MocModel> {
    train.require_class_sizes(1, "per-class one-class training")?;
    let per_class = (1..=train.num_classes())
        .into_par_iter()
        .map(|k| train_one_class_svm(&train.class_subset(k), kernel, nu, smo))
        .collect::<Result<Vec<_>>>()?;
    let fallback_ovr = if train.num_classes() >= 2 {
        Some(train_ovr_open(train, kernel, cost, smo)?)
    } else {
        None
    };
    Ok(MocModel {
        per_class,
        fallback_ovr,
    })
}

/// Resolves the label among classes whose one-class model accepts `x`.
fn assign_among(accepting: &[usize], ovr: Option<&OvrOpenModel>, x: &[f64]) -> Result<Label> {
    match (accepting, ovr) {
        ([], _) => Ok(Label::Novel),
        ([k], _) | ([k, ..], None) => Ok(Label::Class(*k)),
        (_, Some(ovr)) => {
            let scores = ovr.decision_values(x)?;
            let sub: Vec<f64> = accepting.iter().map(|&k| scores[k - 1]).collect();
            let i = argmax(&sub).expect("accepting set is non-empty");
            Ok(Label::Class(accepting[i - 1]))
        }
    }
}

pub fn predict_moc(model: &MocModel, x: &[f64]) -> Result<Prediction> {
    let confidences: Vec<f64> = model
        .per_class
        .iter()
        .map(|m| m.decision_value(x))
        .collect::<Result<_>>()?;
    let accepting: Vec<usize> = (1..=confidences.len())
        .filter(|&k| confidences[k - 1] >= 0.0)
        .collect();
    Ok(Prediction {
        label: assign_among(&accepting, model.fallback_ovr.as_ref(), x)?,
        confidences,
    })
}

impl OpenClassifier for MocModel {
    fn dim(&self) -> usize {
        self.per_class[0].dim
    }

    fn num_classes(&self) -> usize {
        self.per_class.len()
    }

    fn predict(&self, x: &[f64]) -> Result<Prediction> {
        predict_moc(self, x)
    }
}

/// One-class SVM over all seen training data pooled.
pub fn train_oc_single(
    train: &Dataset,
    kernel: KernelSpec,
    nu: f64,
    smo: &SmoParams,
) -> Result<OneClassSvmModel> {
    train_one_class_svm(train, kernel, nu, smo)
}

/// Pooled detector; accepted points get the one-vs-rest argmax label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OcOpenModel {
    pub detector: OneClassSvmModel,
    pub num_classes: usize,
    pub fallback_ovr: Option<OvrOpenModel>,
}

pub fn train_oc(
    train: &Dataset,
    kernel: KernelSpec,
    nu: f64,
    cost: f64,
    smo: &SmoParams,
) -> Result<OcOpenModel> {
    let detector = train_oc_single(train, kernel, nu, smo)?;
    let fallback_ovr = if train.num_classes() >= 2 {
        Some(train_ovr_open(train, kernel, cost, smo)?)
    } else {
        None
    };
    Ok(OcOpenModel {
        detector,
        num_classes: train.num_classes(),
        fallback_ovr,
    })
}

impl OpenClassifier for OcOpenModel {
    fn dim(&self) -> usize {
        self.detector.dim
    }

    fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Confidences are the pooled detector score repeated per class.
    fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let score = self.detector.decision_value(x)?;
        let accepting: Vec<usize> = if score >= 0.0 {
            (1..=self.num_classes).collect()
        } else {
            Vec::new()
        };
        Ok(Prediction {
            label: assign_among(&accepting, self.fallback_ovr.as_ref(), x)?,
            confidences: vec![score; self.num_classes],
        })
    }
}

/// Applies stored standardization before delegating to the inner model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardized<M> {
    pub stats: StandardizationStats,
    pub model: M,
}

impl<M: OpenClassifier> OpenClassifier for Standardized<M> {
    fn dim(&self) -> usize {
        self.stats.dim()
    }

    fn num_classes(&self) -> usize {
        self.model.num_classes()
    }

    fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.model.predict(&self.stats.apply(x)?)
    }
}
