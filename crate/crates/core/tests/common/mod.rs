#![allow(dead_code)]

use asg::svm::KernelSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random binary problem: points, labels in {-1, +1}, per-sample costs.
pub struct BinaryProblem {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<f64>,
    pub cost: f64,
}

pub fn random_problem(seed: u64, max_n: usize) -> BinaryProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=max_n);
    let d = rng.gen_range(1..=4);
    let shift = rng.gen_range(0.0..2.0);
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        let p: Vec<f64> = (0..d)
            .map(|_| rng.gen_range(-1.0..1.0) + y * shift * 0.5)
            .collect();
        points.push(p);
        labels.push(y);
    }
    let cost = [0.1, 1.0, 10.0][rng.gen_range(0..3)];
    BinaryProblem {
        points,
        labels,
        cost,
    }
}

pub fn q_matrix(kernel: &KernelSpec, points: &[Vec<f64>], labels: &[f64]) -> Vec<Vec<f64>> {
    let n = points.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| labels[i] * labels[j] * kernel.eval(&points[i], &points[j]))
                .collect()
        })
        .collect()
}

/// `1/2 a'Qa - sum a`.
pub fn dual_value(q: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * q[i][j] * alpha[j];
        }
    }
    0.5 * quad - alpha.iter().sum::<f64>()
}

/// Euclidean projection onto `{a : y'a = 0, 0 <= a <= c}` by bisection on the
/// multiplier of the equality constraint.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |mu: f64| -> Vec<f64> {
        v.iter()
            .zip(y)
            .map(|(vi, yi)| (vi - mu * yi).clamp(0.0, c))
            .collect()
    };
    let balance = |a: &[f64]| a.iter().zip(y).map(|(ai, yi)| ai * yi).sum::<f64>();
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Minimizes the C-SVC dual by accelerated projected gradient.
pub fn projected_gradient_dual(q: &[Vec<f64>], y: &[f64], c: f64, iterations: usize) -> Vec<f64> {
    let n = y.len();
    let lipschitz = q
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-12);
    let step = 1.0 / lipschitz;
    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iterations {
        let grad: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| q[i][j] * z[j]).sum::<f64>() - 1.0)
            .collect();
        let v: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi - step * gi).collect();
        let next = project(&v, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        x = next;
        t = t_next;
    }
    x
}

/// Largest violation of the C-SVC optimality conditions, given `f` at every
/// training point and the dual variables.
pub fn kkt_residual(alpha: &[f64], labels: &[f64], decision: &[f64], c: f64, eps: f64) -> f64 {
    let mut worst = 0.0f64;
    for ((&a, &y), &f) in alpha.iter().zip(labels).zip(decision) {
        let m = y * f;
        let v = if a <= eps {
            (1.0 - m).max(0.0)
        } else if a >= c - eps {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}

pub fn fraction(hits: usize, total: usize) -> f64 {
    hits as f64 / total as f64
}

/// Generation settings used for the two-dimensional moons data: a stiffer
/// discriminator and a spread radius on the scale of the moons' width.
pub fn moons_generation(seed: u64, t: usize, budget: usize) -> asg::generation::GenerationConfig {
    asg::generation::GenerationConfig {
        samples_per_class: t,
        opt_budget: budget,
        seed,
        discriminator_cost: Some(10.0),
        c2: asg::generation::Radius::Fixed(0.6),
        lambda2: 1.0,
        ..Default::default()
    }
}
