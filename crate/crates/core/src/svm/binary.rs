use serde::{Deserialize, Serialize};

use super::solver::{solve_dual, DualProblem, DualSolution, KernelSource, SmoParams};
use super::{logistic, GramMatrix, KernelSpec};
use crate::dataset::Dataset;
use crate::error::{AsgError, Result};

/// A trained binary RBF SVM: `f(x) = sum_i coef_i K(sv_i, x) + bias`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinarySvmModel {
    pub dim: usize,
    pub support_vectors: Vec<Vec<f64>>,
    /// Signed coefficients `alpha_i * y_i`.
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    /// Largest per-sample box constraint used in training.
    pub cost: f64,
    /// False when the solver hit its iteration cap.
    pub converged: bool,
    pub iterations: usize,
    /// Dual objective `sum a - 1/2 a'Qa` at the returned solution.
    pub dual_objective: f64,
}

impl BinarySvmModel {
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(AsgError::dimension(self.dim, x.len(), "svm decision value"));
        }
        Ok(self.decision_value_unchecked(x))
    }

    pub fn decision_value_unchecked(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * self.kernel.eval(sv, x))
            .sum::<f64>()
            + self.bias
    }

    /// Probability of the positive side, the logistic of the decision value.
    pub fn predict_prob(&self, x: &[f64]) -> Result<f64> {
        self.decision_value(x).map(logistic)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// A fitted model together with the full dual solution, for inspection.
#[derive(Clone, Debug)]
pub struct BinaryTraining {
    pub model: BinarySvmModel,
    pub alpha: Vec<f64>,
    pub labels: Vec<f64>,
    pub upper: Vec<f64>,
}

pub(crate) fn model_from_solution(
    points: &[&[f64]],
    labels: &[f64],
    upper: &[f64],
    kernel: KernelSpec,
    solution: &DualSolution,
) -> BinarySvmModel {
    let dim = points.first().map_or(0, |p| p.len());
    let mut support_vectors = Vec::new();
    let mut alphas = Vec::new();
    for (i, &a) in solution.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(points[i].to_vec());
            alphas.push(a * labels[i]);
        }
    }
    let linear = vec![-1.0; labels.len()];
    BinarySvmModel {
        dim,
        support_vectors,
        alphas,
        bias: -solution.rho,
        kernel,
        cost: upper.iter().copied().fold(0.0, f64::max),
        converged: solution.converged,
        iterations: solution.iterations,
        dual_objective: -solution.objective(&linear),
    }
}

/// Solves C-SVC over an already computed kernel matrix.
pub(crate) fn fit_with_kernel<K: KernelSource>(
    points: &[&[f64]],
    kernel_matrix: &K,
    labels: &[f64],
    upper: &[f64],
    kernel: KernelSpec,
    params: &SmoParams,
) -> (BinarySvmModel, Vec<f64>) {
    let linear = vec![-1.0; labels.len()];
    let problem = DualProblem {
        kernel: kernel_matrix,
        y: labels,
        linear: &linear,
        upper,
    };
    let n = labels.len();
    let solution = solve_dual(&problem, vec![0.0; n], Some(linear.clone()), params);
    let model = model_from_solution(points, labels, upper, kernel, &solution);
    (model, solution.alpha)
}

/// Trains C-SVC on `points` with labels in `{-1, +1}` and per-sample costs.
pub fn fit_binary(
    points: &[&[f64]],
    labels: &[f64],
    upper: &[f64],
    kernel: KernelSpec,
    params: &SmoParams,
) -> Result<BinaryTraining> {
    let n = points.len();
    if labels.len() != n || upper.len() != n {
        return Err(AsgError::dimension(
            n,
            labels.len().min(upper.len()),
            "svm labels/costs",
        ));
    }
    if n == 0 {
        return Err(AsgError::EmptyInput("svm training set is empty".into()));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(AsgError::dimension(dim, p.len(), "svm training point"));
    }
    if labels.iter().any(|&l| l != 1.0 && l != -1.0) {
        return Err(AsgError::InvalidConfig(
            "svm labels must be +1 or -1".into(),
        ));
    }
    if !labels.contains(&1.0) || !labels.contains(&-1.0) {
        return Err(AsgError::InsufficientData(
            "svm needs both positive and negative samples".into(),
        ));
    }
    if upper.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return Err(AsgError::InvalidConfig("svm cost must be > 0".into()));
    }
    let gram = GramMatrix::compute(&kernel, points);
    let (model, alpha) = fit_with_kernel(points, &gram, labels, upper, kernel, params);
    Ok(BinaryTraining {
        model,
        alpha,
        labels: labels.to_vec(),
        upper: upper.to_vec(),
    })
}

/// Positive-vs-negative C-SVC with separate costs for each side.
pub fn train_binary_weighted(
    pos: &[&[f64]],
    neg: &[&[f64]],
    kernel: KernelSpec,
    cost_pos: f64,
    cost_neg: f64,
    params: &SmoParams,
) -> Result<BinarySvmModel> {
    let points: Vec<&[f64]> = pos.iter().chain(neg).copied().collect();
    let labels: Vec<f64> = std::iter::repeat_n(1.0, pos.len())
        .chain(std::iter::repeat_n(-1.0, neg.len()))
        .collect();
    let upper: Vec<f64> = std::iter::repeat_n(cost_pos, pos.len())
        .chain(std::iter::repeat_n(cost_neg, neg.len()))
        .collect();
    Ok(fit_binary(&points, &labels, &upper, kernel, params)?.model)
}

pub fn train_binary_svm(
    pos: &Dataset,
    neg: &Dataset,
    kernel: KernelSpec,
    cost: f64,
    params: &SmoParams,
) -> Result<BinarySvmModel> {
    if pos.dim() != neg.dim() {
        return Err(AsgError::dimension(
            pos.dim(),
            neg.dim(),
            "positive vs negative set",
        ));
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(AsgError::InsufficientData(
            "svm needs non-empty positive and negative sets".into(),
        ));
    }
    let p: Vec<&[f64]> = pos.features().collect();
    let n: Vec<&[f64]> = neg.features().collect();
    train_binary_weighted(&p, &n, kernel, cost, cost, params)
}
