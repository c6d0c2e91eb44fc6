//! Open-category classifiers: one seen-vs-generated SVM per class, and the
//! shared prediction and risk machinery.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label, StandardizationStats};
use crate::dfo::{Optimizer, Racos};
use crate::error::{AsgError, Result};
use crate::generation::{
    generate_pool, CostSelection, GeneratedPool, GenerationConfig, SvmTrainer,
};
use crate::svm::{
    cross_validate_cost, train_binary_weighted, BinarySvmModel, KernelSpec, SmoParams,
};

/// Cost used when cross-validation has nothing to compare (a single class).
pub const SINGLE_CLASS_COST: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// One score per seen class, in class order.
    pub confidences: Vec<f64>,
}

/// Anything that maps a feature vector to a seen class or NOVEL.
pub trait OpenClassifier: Sync {
    fn dim(&self) -> usize;
    fn num_classes(&self) -> usize;
    fn predict(&self, x: &[f64]) -> Result<Prediction>;

    fn predict_all(&self, data: &Dataset) -> Result<Vec<Label>> {
        data.features()
            .map(|x| self.predict(x).map(|p| p.label))
            .collect()
    }
}

/// Index (1-based) of the largest score, ties to the smallest index.
pub(crate) fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i + 1)
}

/// NOVEL when every score is negative, otherwise the argmax class.
pub fn predict_from_scores(scores: &[f64]) -> Label {
    match argmax(scores) {
        Some(k) if scores[k - 1] >= 0.0 => Label::Class(k),
        _ => Label::Novel,
    }
}

/// 0/1 open-set loss: a seen truth must be matched exactly, a novel truth
/// must be predicted novel.
pub fn err(truth: Label, pred: Label) -> u8 {
    u8::from(truth != pred)
}

/// Mean of [`err`] over the test set.
pub fn empirical_risk(model: &dyn OpenClassifier, test: &Dataset) -> Result<f64> {
    if test.is_empty() {
        return Err(AsgError::EmptyInput("risk of an empty test set".into()));
    }
    let preds = model.predict_all(test)?;
    Ok(risk_of(&test.labels(), &preds))
}

/// Mean of [`err`] over paired labels; 0 for empty input.
pub fn risk_of(truths: &[Label], preds: &[Label]) -> f64 {
    if truths.is_empty() {
        return 0.0;
    }
    let wrong: usize = truths
        .iter()
        .zip(preds)
        .map(|(&t, &p)| err(t, p) as usize)
        .sum();
    wrong as f64 / truths.len() as f64
}

/// Per-class SVMs trained on standardized features; inputs are standardized
/// with the stored statistics before scoring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpenCategoryModel {
    pub per_class: Vec<BinarySvmModel>,
    pub standardization: StandardizationStats,
    pub cost: f64,
}

impl OpenCategoryModel {
    pub fn new(
        per_class: Vec<BinarySvmModel>,
        standardization: StandardizationStats,
        cost: f64,
    ) -> Result<Self> {
        if per_class.is_empty() {
            return Err(AsgError::InvalidConfig(
                "model needs at least one class".into(),
            ));
        }
        let d = standardization.dim();
        if let Some(m) = per_class.iter().find(|m| m.dim != d) {
            return Err(AsgError::dimension(d, m.dim, "per-class model"));
        }
        Ok(Self {
            per_class,
            standardization,
            cost,
        })
    }

    /// Raw decision value of every per-class SVM.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.standardization.apply(x)?;
        Ok(self
            .per_class
            .iter()
            .map(|m| m.decision_value_unchecked(&z))
            .collect())
    }
}

impl OpenClassifier for OpenCategoryModel {
    fn dim(&self) -> usize {
        self.standardization.dim()
    }

    fn num_classes(&self) -> usize {
        self.per_class.len()
    }

    fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let confidences = self.decision_values(x)?;
        Ok(Prediction {
            label: predict_from_scores(&confidences),
            confidences,
        })
    }
}

/// Picks the SVM cost on (already standardized) training data.
///
/// Fold count is capped by the smallest class so small classes can still be
/// cross-validated.
pub fn tune_cost(train: &Dataset, selection: &CostSelection, seed: u64) -> Result<f64> {
    match selection {
        CostSelection::Fixed(c) => Ok(*c),
        CostSelection::CrossValidate { grid, folds } => {
            let counts = train.class_counts();
            if counts.iter().filter(|&&c| c > 0).count() < 2 {
                return Ok(SINGLE_CLASS_COST);
            }
            let smallest = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
            let folds = (*folds).min(smallest);
            if folds < 2 {
                return Err(AsgError::InsufficientData(
                    "cross-validation needs at least 2 instances in every class".into(),
                ));
            }
            cross_validate_cost(train, KernelSpec::for_dim(train.dim()), grid, folds, seed)
        }
    }
}

/// Trains one class-vs-generated SVM per class. Positive and negative costs
/// are rebalanced so both sides carry the same total weight.
pub fn fit_open_classifiers(
    train: &Dataset,
    pool: &GeneratedPool,
    kernel: KernelSpec,
    cost: f64,
    smo: &SmoParams,
    use_positives: bool,
) -> Result<Vec<BinarySvmModel>> {
    (1..=train.num_classes())
        .into_par_iter()
        .map(|k| {
            let class = train.class_subset(k);
            let generated_pos = if use_positives {
                pool.positive_features(k)
            } else {
                Vec::new()
            };
            let negatives = pool.negative_features(k);
            let pos: Vec<&[f64]> = class
                .features()
                .chain(generated_pos.iter().map(Vec::as_slice))
                .collect();
            let neg: Vec<&[f64]> = negatives.iter().map(Vec::as_slice).collect();
            if pos.is_empty() || neg.is_empty() {
                return Err(AsgError::InsufficientData(format!(
                    "class {k} has no training or generated data"
                )));
            }
            let cost_pos = cost * neg.len() as f64 / pos.len() as f64;
            train_binary_weighted(&pos, &neg, kernel, cost_pos, cost, smo)
        })
        .collect()
}

/// Result of [`train_asg`]; the pool is in input (unstandardized) units.
pub type AsgOutput = (OpenCategoryModel, GeneratedPool);

/// Standardize, tune the cost, generate samples, train per-class SVMs.
pub fn train_asg(
    train: &Dataset,
    cfg: &GenerationConfig,
    use_positives: bool,
) -> Result<AsgOutput> {
    let optimizer = Racos { params: cfg.racos };
    train_asg_with(train, cfg, use_positives, &optimizer)
}

pub fn train_asg_with(
    train: &Dataset,
    cfg: &GenerationConfig,
    use_positives: bool,
    optimizer: &dyn Optimizer,
) -> Result<AsgOutput> {
    cfg.validate()?;
    train.require_class_sizes(2, "open-category training")?;
    if train.labels().iter().any(|l| l.is_novel()) {
        return Err(AsgError::InvalidConfig(
            "training data must not contain novel labels".into(),
        ));
    }
    let (std_train, stats) = train.standardize()?;
    let cost = tune_cost(&std_train, &cfg.cost, cfg.seed)?;
    let trainer =
        SvmTrainer::for_data(&std_train, cfg.discriminator_cost.unwrap_or(cost), cfg.smo)?;
    let pool = generate_pool(&std_train, cfg, trainer, optimizer, use_positives)?;
    let per_class = fit_open_classifiers(
        &std_train,
        &pool,
        trainer.kernel,
        cost,
        &cfg.smo,
        use_positives,
    )?;
    let model = OpenCategoryModel::new(per_class, stats.clone(), cost)?;
    let raw_pool = pool.map_features(|z| stats.invert(z))?;
    Ok((model, raw_pool))
}
