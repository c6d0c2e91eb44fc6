use serde::{Deserialize, Serialize};

use super::solver::{initial_gradient, solve_dual, DualProblem, SmoParams};
use super::{GramMatrix, KernelSpec};
use crate::dataset::Dataset;
use crate::error::{AsgError, Result};

pub const DEFAULT_NU: f64 = 0.1;

/// ν one-class SVM: `f(x) = sum_i a_i K(sv_i, x) - rho`, with `sum a = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneClassSvmModel {
    pub dim: usize,
    pub support_vectors: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub rho: f64,
    pub kernel: KernelSpec,
    pub nu: f64,
    pub converged: bool,
}

impl OneClassSvmModel {
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(AsgError::dimension(
                self.dim,
                x.len(),
                "one-class decision value",
            ));
        }
        Ok(self.decision_value_unchecked(x))
    }

    pub fn decision_value_unchecked(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * self.kernel.eval(sv, x))
            .sum::<f64>()
            - self.rho
    }

    /// Inlier test, `f(x) >= 0`.
    pub fn accepts(&self, x: &[f64]) -> Result<bool> {
        Ok(self.decision_value(x)? >= 0.0)
    }
}

pub fn train_one_class_svm(
    data: &Dataset,
    kernel: KernelSpec,
    nu: f64,
    params: &SmoParams,
) -> Result<OneClassSvmModel> {
    let points: Vec<&[f64]> = data.features().collect();
    train_one_class_points(&points, kernel, nu, params)
}

pub(crate) fn train_one_class_points(
    points: &[&[f64]],
    kernel: KernelSpec,
    nu: f64,
    params: &SmoParams,
) -> Result<OneClassSvmModel> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(AsgError::InvalidConfig(format!(
            "nu must be in (0, 1], got {nu}"
        )));
    }
    let n = points.len();
    if n == 0 {
        return Err(AsgError::EmptyInput(
            "one-class svm needs training data".into(),
        ));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(AsgError::dimension(
            dim,
            p.len(),
            "one-class training point",
        ));
    }

    // solved with box [0, 1] and sum nu * n, then rescaled to sum 1
    let total = nu * n as f64;
    let mut alpha = vec![0.0; n];
    let mut remaining = total;
    for a in alpha.iter_mut() {
        if remaining <= 0.0 {
            break;
        }
        *a = remaining.min(1.0);
        remaining -= *a;
    }

    let gram = GramMatrix::compute(&kernel, points);
    let y = vec![1.0; n];
    let linear = vec![0.0; n];
    let upper = vec![1.0; n];
    let problem = DualProblem {
        kernel: &gram,
        y: &y,
        linear: &linear,
        upper: &upper,
    };
    let grad = initial_gradient(&problem, &alpha);
    let solution = solve_dual(&problem, alpha, Some(grad), params);
    let rho = boundary_offset(&solution.alpha, &solution.grad).unwrap_or(solution.rho);

    let mut support_vectors = Vec::new();
    let mut alphas = Vec::new();
    for (i, &a) in solution.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(points[i].to_vec());
            alphas.push(a / total);
        }
    }
    Ok(OneClassSvmModel {
        dim,
        support_vectors,
        alphas,
        rho: rho / total,
        kernel,
        nu,
        converged: solution.converged,
    })
}

/// Smallest gradient over the free coefficients, so every margin support
/// vector scores `f >= 0` instead of straddling zero within the solver
/// tolerance.
fn boundary_offset(alpha: &[f64], grad: &[f64]) -> Option<f64> {
    alpha
        .iter()
        .zip(grad)
        .filter(|(&a, _)| a > 0.0 && a < 1.0)
        .map(|(_, &g)| g)
        .min_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn cluster(n: usize, sd: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sd).unwrap();
        let pts = (0..n)
            .map(|_| vec![normal.sample(&mut rng), normal.sample(&mut rng)])
            .collect();
        Dataset::from_parts(pts, vec![Label::Class(1); n]).unwrap()
    }

    #[test]
    fn nu_property_on_tight_cluster() {
        let data = cluster(200, 0.3, 5);
        let m =
            train_one_class_svm(&data, KernelSpec::for_dim(2), 0.1, &SmoParams::default()).unwrap();
        let accepted = data
            .features()
            .filter(|x| m.decision_value(x).unwrap() >= 0.0)
            .count();
        assert!(accepted as f64 >= 0.85 * 200.0, "accepted {accepted}");
        let total: f64 = m.alphas.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        let ub = 1.0 / (0.1 * 200.0);
        assert!(m.alphas.iter().all(|&a| a > 0.0 && a <= ub + 1e-15));
    }

    #[test]
    fn single_point_is_accepted() {
        let data = cluster(1, 1.0, 1);
        let m =
            train_one_class_svm(&data, KernelSpec::for_dim(2), 0.1, &SmoParams::default()).unwrap();
        assert!(m.decision_value(&data.instances()[0].features).unwrap() >= 0.0);
    }

    #[test]
    fn far_query_is_rejected() {
        let data = cluster(100, 0.2, 9);
        let m =
            train_one_class_svm(&data, KernelSpec::for_dim(2), 0.1, &SmoParams::default()).unwrap();
        assert!(m.rho > 0.0);
        assert!(m.decision_value(&[20.0, 20.0]).unwrap() < 0.0);
    }

    #[test]
    fn nu_one_keeps_uniform_weights() {
        let data = cluster(10, 0.5, 2);
        let m =
            train_one_class_svm(&data, KernelSpec::for_dim(2), 1.0, &SmoParams::default()).unwrap();
        assert_eq!(m.alphas.len(), 10);
        assert!(m.alphas.iter().all(|&a| (a - 0.1).abs() < 1e-12));
    }

    #[test]
    fn invalid_nu() {
        let data = cluster(5, 1.0, 0);
        assert!(
            train_one_class_svm(&data, KernelSpec::for_dim(2), 0.0, &SmoParams::default()).is_err()
        );
        assert!(
            train_one_class_svm(&data, KernelSpec::for_dim(2), 1.5, &SmoParams::default()).is_err()
        );
    }
}
