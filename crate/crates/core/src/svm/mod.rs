//! RBF-kernel support vector machines.
//!
//! Binary C-SVC and the ν one-class SVM share one dual solver
//! ([`solver::solve_dual`]); models are plain data and serialize to JSON.

mod binary;
mod cv;
mod one_class;
pub mod solver;

pub(crate) use binary::fit_with_kernel;
pub use binary::{
    fit_binary, train_binary_svm, train_binary_weighted, BinarySvmModel, BinaryTraining,
};
pub use cv::{
    cross_validate_cost, cross_validation_scores, stratified_folds, DEFAULT_COST_GRID,
    DEFAULT_FOLDS,
};
pub use one_class::{train_one_class_svm, OneClassSvmModel, DEFAULT_NU};
pub use solver::{KernelSource, SmoParams};

use serde::{Deserialize, Serialize};

use crate::dataset::squared_distance;
use crate::error::{AsgError, Result};

/// Gaussian (RBF) kernel `exp(-gamma * |a - b|^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub gamma: f64,
}

impl KernelSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(Self { gamma })
        } else {
            Err(AsgError::InvalidConfig(format!(
                "kernel gamma must be > 0, got {gamma}"
            )))
        }
    }

    /// The default width, `1/d`.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            gamma: 1.0 / dim.max(1) as f64,
        }
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        (-self.gamma * squared_distance(a, b)).exp()
    }

    /// Kernel values between `x` and each of `points`.
    pub fn row(&self, points: &[&[f64]], x: &[f64]) -> Vec<f64> {
        points.iter().map(|p| self.eval(p, x)).collect()
    }
}

/// Logistic map of a decision value onto `(0, 1)`.
pub fn logistic(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Dense symmetric kernel matrix.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    n: usize,
    data: Vec<f64>,
}

impl GramMatrix {
    pub fn compute(kernel: &KernelSpec, points: &[&[f64]]) -> Self {
        let n = points.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
            for j in 0..i {
                let v = kernel.eval(points[i], points[j]);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    /// Appends one point given its kernel values against the existing points
    /// followed by its self-similarity.
    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.n + 1, "gram row length");
        let m = self.n + 1;
        let mut data = vec![0.0; m * m];
        for i in 0..self.n {
            data[i * m..i * m + self.n].copy_from_slice(&self.data[i * self.n..(i + 1) * self.n]);
            data[i * m + self.n] = row[i];
        }
        data[self.n * m..].copy_from_slice(row);
        self.n = m;
        self.data = data;
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

impl KernelSource for GramMatrix {
    fn size(&self) -> usize {
        self.n
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn fill_row(&self, i: usize, out: &mut [f64]) {
        out.copy_from_slice(self.row_slice(i));
    }
}

/// A Gram matrix extended by one extra point without copying it.
pub struct AugmentedGram<'a> {
    pub base: &'a GramMatrix,
    /// Kernel values of the extra point against the base points, then itself.
    pub extra: &'a [f64],
}

impl KernelSource for AugmentedGram<'_> {
    fn size(&self) -> usize {
        self.base.n + 1
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let n = self.base.n;
        if i == n {
            self.extra[j]
        } else if j == n {
            self.extra[i]
        } else {
            self.base.get(i, j)
        }
    }

    fn fill_row(&self, i: usize, out: &mut [f64]) {
        let n = self.base.n;
        if i == n {
            out.copy_from_slice(self.extra);
        } else {
            out[..n].copy_from_slice(self.base.row_slice(i));
            out[n] = self.extra[i];
        }
    }
}

/// A principal submatrix of a Gram matrix selected by index.
pub struct SubGram<'a> {
    pub base: &'a GramMatrix,
    pub indices: &'a [usize],
}

impl KernelSource for SubGram<'_> {
    fn size(&self) -> usize {
        self.indices.len()
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.base.get(self.indices[i], self.indices[j])
    }

    fn fill_row(&self, i: usize, out: &mut [f64]) {
        let row = self.base.row_slice(self.indices[i]);
        for (o, &j) in out.iter_mut().zip(self.indices) {
            *o = row[j];
        }
    }
}
