//! Sequential minimal optimization for the box- and equality-constrained
//! quadratic program shared by C-SVC and the ν one-class SVM:
//!
//! ```text
//! min  1/2 a'Qa + p'a   s.t.  y'a = const,  0 <= a_i <= u_i,   Q_ij = y_i y_j K_ij
//! ```
//!
//! Pairs are chosen by maximal violation for the first index and by the
//! second-order gain for the second one. The solve stops once the maximal
//! KKT violation drops below `tol`, so any caller-supplied feasible starting
//! point (warm start) reaches the same optimum.

use serde::{Deserialize, Serialize};

const TAU: f64 = 1e-12;

/// Read access to a symmetric kernel matrix.
pub trait KernelSource {
    fn size(&self) -> usize;
    fn get(&self, i: usize, j: usize) -> f64;
    fn fill_row(&self, i: usize, out: &mut [f64]) {
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.get(i, j);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoParams {
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Iteration cap, in units of `max(n, 1000)` pair updates.
    pub max_passes: usize,
}

impl Default for SmoParams {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            max_passes: 50,
        }
    }
}

impl SmoParams {
    pub fn max_iterations(&self, n: usize) -> usize {
        self.max_passes.saturating_mul(n.max(1000))
    }
}

pub struct DualProblem<'a, K: KernelSource> {
    pub kernel: &'a K,
    /// Labels in `{-1, +1}`.
    pub y: &'a [f64],
    pub linear: &'a [f64],
    pub upper: &'a [f64],
}

#[derive(Clone, Debug)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Gradient `Q a + p` at `alpha`.
    pub grad: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl DualSolution {
    /// Value of `1/2 a'Qa + p'a`.
    pub fn objective(&self, linear: &[f64]) -> f64 {
        0.5 * self
            .alpha
            .iter()
            .zip(&self.grad)
            .zip(linear)
            .map(|((a, g), p)| a * (g + p))
            .sum::<f64>()
    }
}

/// Gradient `Q a + p` computed from scratch.
pub fn initial_gradient<K: KernelSource>(problem: &DualProblem<'_, K>, alpha: &[f64]) -> Vec<f64> {
    let n = problem.y.len();
    let mut grad = problem.linear.to_vec();
    let mut row = vec![0.0; n];
    for i in 0..n {
        if alpha[i] != 0.0 {
            problem.kernel.fill_row(i, &mut row);
            let s = alpha[i] * problem.y[i];
            for t in 0..n {
                grad[t] += problem.y[t] * s * row[t];
            }
        }
    }
    grad
}

#[inline]
fn in_up(y: f64, a: f64, u: f64) -> bool {
    if y > 0.0 {
        a < u
    } else {
        a > 0.0
    }
}

#[inline]
fn in_low(y: f64, a: f64, u: f64) -> bool {
    if y > 0.0 {
        a > 0.0
    } else {
        a < u
    }
}

/// Solves the dual starting from the feasible point `alpha`.
///
/// `grad` may carry the gradient at `alpha` when the caller already knows it.
pub fn solve_dual<K: KernelSource>(
    problem: &DualProblem<'_, K>,
    mut alpha: Vec<f64>,
    grad: Option<Vec<f64>>,
    params: &SmoParams,
) -> DualSolution {
    let n = problem.y.len();
    debug_assert_eq!(problem.kernel.size(), n);
    let y = problem.y;
    let upper = problem.upper;
    let mut grad = grad.unwrap_or_else(|| initial_gradient(problem, &alpha));
    let diag: Vec<f64> = (0..n).map(|i| problem.kernel.get(i, i)).collect();
    let mut row_i = vec![0.0; n];
    let mut row_j = vec![0.0; n];

    let max_iter = params.max_iterations(n);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        // first index: maximal violation among I_up
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if in_up(y[t], alpha[t], upper[t]) {
                let v = -y[t] * grad[t];
                if v >= gmax {
                    gmax = v;
                    i_sel = t;
                }
            }
        }
        if i_sel == usize::MAX {
            converged = true;
            break;
        }
        let i = i_sel;
        problem.kernel.fill_row(i, &mut row_i);

        // second index: best second-order decrease among I_low
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut best_gain = f64::INFINITY;
        for t in 0..n {
            if !in_low(y[t], alpha[t], upper[t]) {
                continue;
            }
            let v = y[t] * grad[t];
            if v >= gmax2 {
                gmax2 = v;
            }
            let grad_diff = gmax + v;
            if grad_diff > 0.0 {
                let quad = (diag[i] + diag[t] - 2.0 * row_i[t]).max(TAU);
                let gain = -(grad_diff * grad_diff) / quad;
                if gain <= best_gain {
                    best_gain = gain;
                    j_sel = t;
                }
            }
        }
        if gmax + gmax2 < params.tol || j_sel == usize::MAX {
            converged = true;
            break;
        }
        let j = j_sel;
        problem.kernel.fill_row(j, &mut row_j);
        iterations += 1;

        let (old_ai, old_aj) = (alpha[i], alpha[j]);
        let (ci, cj) = (upper[i], upper[j]);
        let quad = (diag[i] + diag[j] - 2.0 * row_i[j]).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let di = (alpha[i] - old_ai) * y[i];
        let dj = (alpha[j] - old_aj) * y[j];
        for t in 0..n {
            grad[t] += y[t] * (row_i[t] * di + row_j[t] * dj);
        }
    }

    let rho = compute_rho(y, &alpha, upper, &grad);
    DualSolution {
        alpha,
        grad,
        rho,
        iterations,
        converged,
    }
}

/// Offset `rho` so that the decision function is `sum_i y_i a_i K(x_i, .) - rho`.
pub fn compute_rho(y: &[f64], alpha: &[f64], upper: &[f64], grad: &[f64]) -> f64 {
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    let mut free = 0usize;
    let mut sum_free = 0.0;
    for t in 0..y.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= upper[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free += 1;
            sum_free += yg;
        }
    }
    if free > 0 {
        sum_free / free as f64
    } else if ub.is_finite() && lb.is_finite() {
        0.5 * (ub + lb)
    } else if ub.is_finite() {
        ub
    } else if lb.is_finite() {
        lb
    } else {
        0.0
    }
}
