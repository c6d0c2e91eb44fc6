//! The discriminator behind the generation objectives: a binary RBF SVM that
//! is retrained with every candidate inserted on one side, warm-started from
//! the solution without the candidate.

use crate::dataset::Dataset;
use crate::error::{AsgError, Result};
use crate::svm::solver::{solve_dual, DualProblem};
use crate::svm::{logistic, AugmentedGram, GramMatrix, KernelSpec, SmoParams};

/// Which side of the discriminator candidates are inserted on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    fn label(self) -> f64 {
        match self {
            Side::Positive => 1.0,
            Side::Negative => -1.0,
        }
    }
}

/// Kernel and cost used for every SVM the generator trains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SvmTrainer {
    pub kernel: KernelSpec,
    pub cost: f64,
    pub smo: SmoParams,
}

impl SvmTrainer {
    pub fn new(kernel: KernelSpec, cost: f64, smo: SmoParams) -> Result<Self> {
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(AsgError::InvalidConfig(format!(
                "svm cost must be > 0, got {cost}"
            )));
        }
        Ok(Self { kernel, cost, smo })
    }

    pub fn for_data(data: &Dataset, cost: f64, smo: SmoParams) -> Result<Self> {
        Self::new(KernelSpec::for_dim(data.dim()), cost, smo)
    }
}

/// Result of training with one candidate inserted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateScore {
    pub decision: f64,
    pub probability: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct SvmDiscriminator {
    trainer: SvmTrainer,
    candidate_side: Side,
    points: Vec<Vec<f64>>,
    labels: Vec<f64>,
    gram: GramMatrix,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    rho: f64,
}

impl SvmDiscriminator {
    pub fn new(
        positives: &[Vec<f64>],
        negatives: &[Vec<f64>],
        candidate_side: Side,
        trainer: SvmTrainer,
    ) -> Result<Self> {
        let points: Vec<Vec<f64>> = positives.iter().chain(negatives).cloned().collect();
        let dim = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| AsgError::EmptyInput("discriminator has no training points".into()))?;
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(AsgError::dimension(dim, p.len(), "discriminator point"));
        }
        let labels: Vec<f64> = std::iter::repeat_n(1.0, positives.len())
            .chain(std::iter::repeat_n(-1.0, negatives.len()))
            .collect();
        let refs: Vec<&[f64]> = points.iter().map(Vec::as_slice).collect();
        let gram = GramMatrix::compute(&trainer.kernel, &refs);
        let n = points.len();
        let mut disc = Self {
            trainer,
            candidate_side,
            points,
            labels,
            gram,
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            rho: 0.0,
        };
        disc.resolve();
        Ok(disc)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    fn upper(&self, n: usize) -> Vec<f64> {
        vec![self.trainer.cost; n]
    }

    fn resolve(&mut self) {
        let n = self.points.len();
        let upper = self.upper(n);
        let linear = vec![-1.0; n];
        let problem = DualProblem {
            kernel: &self.gram,
            y: &self.labels,
            linear: &linear,
            upper: &upper,
        };
        let alpha = std::mem::take(&mut self.alpha);
        let grad = std::mem::take(&mut self.grad);
        let solution = solve_dual(&problem, alpha, Some(grad), &self.trainer.smo);
        self.alpha = solution.alpha;
        self.grad = solution.grad;
        self.rho = solution.rho;
    }

    /// Kernel values of `x` against the stored points, followed by `K(x, x)`.
    fn extra_row(&self, x: &[f64]) -> Vec<f64> {
        let mut row: Vec<f64> = self
            .points
            .iter()
            .map(|p| self.trainer.kernel.eval(p, x))
            .collect();
        row.push(1.0);
        row
    }

    /// Retrains with `x` added on the candidate side and scores `x` itself.
    pub fn score_candidate(&self, x: &[f64]) -> CandidateScore {
        let n = self.points.len();
        let extra = self.extra_row(x);
        let y_x = self.candidate_side.label();

        let mut labels = self.labels.clone();
        labels.push(y_x);
        let mut alpha = self.alpha.clone();
        alpha.push(0.0);
        let mut grad = self.grad.clone();
        let sum: f64 = (0..n)
            .map(|j| self.labels[j] * self.alpha[j] * extra[j])
            .sum();
        grad.push(y_x * sum - 1.0);

        let upper = self.upper(n + 1);
        let linear = vec![-1.0; n + 1];
        let gram = AugmentedGram {
            base: &self.gram,
            extra: &extra,
        };
        let problem = DualProblem {
            kernel: &gram,
            y: &labels,
            linear: &linear,
            upper: &upper,
        };
        let solution = solve_dual(&problem, alpha, Some(grad), &self.trainer.smo);
        let decision = (0..=n)
            .map(|j| labels[j] * solution.alpha[j] * extra[j])
            .sum::<f64>()
            - solution.rho;
        CandidateScore {
            decision,
            probability: logistic(decision),
            converged: solution.converged,
            iterations: solution.iterations,
        }
    }

    /// Permanently adds `x` on the candidate side and re-solves.
    pub fn accept(&mut self, x: Vec<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(AsgError::dimension(self.dim(), x.len(), "accepted sample"));
        }
        let extra = self.extra_row(&x);
        self.gram.push(&extra);
        let y_x = self.candidate_side.label();
        let sum: f64 = (0..self.points.len())
            .map(|j| self.labels[j] * self.alpha[j] * extra[j])
            .sum();
        self.points.push(x);
        self.labels.push(y_x);
        self.alpha.push(0.0);
        self.grad.push(y_x * sum - 1.0);
        self.resolve();
        Ok(())
    }

    /// Decision value of the current model, without any candidate.
    ///
    /// Meaningful once both sides hold points.
    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.points
            .iter()
            .zip(self.labels.iter().zip(&self.alpha))
            .filter(|(_, (_, a))| **a > 0.0)
            .map(|(p, (y, a))| y * a * self.trainer.kernel.eval(p, x))
            .sum::<f64>()
            - self.rho
    }

    /// Largest gap between the maintained and a from-scratch gradient.
    #[cfg(test)]
    fn gradient_drift(&self) -> f64 {
        let n = self.points.len();
        let upper = self.upper(n);
        let linear = vec![-1.0; n];
        let problem = DualProblem {
            kernel: &self.gram,
            y: &self.labels,
            linear: &linear,
            upper: &upper,
        };
        crate::svm::solver::initial_gradient(&problem, &self.alpha)
            .iter()
            .zip(&self.grad)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
