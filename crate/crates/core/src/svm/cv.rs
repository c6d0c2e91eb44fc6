use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::binary::fit_with_kernel;
use super::solver::SmoParams;
use super::{GramMatrix, KernelSpec, SubGram};
use crate::dataset::{Dataset, Label};
use crate::error::{AsgError, Result};

pub const DEFAULT_COST_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];
pub const DEFAULT_FOLDS: usize = 5;

/// Fold index for every instance; each class is shuffled and dealt round-robin.
pub fn stratified_folds(labels: &[Label], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(AsgError::InvalidConfig(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes: Vec<Label> = labels.to_vec();
    classes.sort();
    classes.dedup();
    let mut assignment = vec![0; labels.len()];
    for class in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < folds {
            return Err(AsgError::InsufficientData(format!(
                "class {class} has {} instance(s), fewer than {folds} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (pos, i) in members.into_iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    Ok(assignment)
}

/// Mean closed-world one-vs-rest accuracy over stratified folds, per grid value.
pub fn cross_validation_scores(
    data: &Dataset,
    kernel: KernelSpec,
    grid: &[f64],
    folds: usize,
    seed: u64,
    params: &SmoParams,
) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(AsgError::InvalidConfig("cost grid is empty".into()));
    }
    if let Some(c) = grid.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
        return Err(AsgError::InvalidConfig(format!(
            "cost grid value {c} is not > 0"
        )));
    }
    let labels = data.labels();
    if labels.iter().any(|l| l.is_novel()) {
        return Err(AsgError::InvalidConfig(
            "cross-validation data must not contain novel labels".into(),
        ));
    }
    let assignment = stratified_folds(&labels, folds, seed)?;
    let k = data.num_classes();
    let present = data.class_counts().iter().filter(|&&c| c > 0).count();
    if present < 2 {
        return Ok(vec![1.0; grid.len()]);
    }

    let points: Vec<&[f64]> = data.features().collect();
    let gram = GramMatrix::compute(&kernel, &points);
    let mut scores = vec![0.0; grid.len()];
    for fold in 0..folds {
        let train: Vec<usize> = (0..points.len())
            .filter(|&i| assignment[i] != fold)
            .collect();
        let test: Vec<usize> = (0..points.len())
            .filter(|&i| assignment[i] == fold)
            .collect();
        let sub = SubGram {
            base: &gram,
            indices: &train,
        };
        let train_points: Vec<&[f64]> = train.iter().map(|&i| points[i]).collect();
        for (g, &cost) in grid.iter().enumerate() {
            let upper = vec![cost; train.len()];
            let mut best = vec![(f64::NEG_INFINITY, 0usize); test.len()];
            for class in 1..=k {
                let y: Vec<f64> = train
                    .iter()
                    .map(|&i| {
                        if labels[i] == Label::Class(class) {
                            1.0
                        } else {
                            -1.0
                        }
                    })
                    .collect();
                if !y.contains(&1.0) {
                    continue;
                }
                let (model, alpha) =
                    fit_with_kernel(&train_points, &sub, &y, &upper, kernel, params);
                for (slot, &t) in best.iter_mut().zip(&test) {
                    let row = gram.row_slice(t);
                    let f = train
                        .iter()
                        .zip(alpha.iter().zip(&y))
                        .filter(|(_, (a, _))| **a > 0.0)
                        .map(|(&i, (a, yi))| a * yi * row[i])
                        .sum::<f64>()
                        + model.bias;
                    if f > slot.0 {
                        *slot = (f, class);
                    }
                }
            }
            let correct = best
                .iter()
                .zip(&test)
                .filter(|((_, c), &t)| labels[t] == Label::Class(*c))
                .count();
            scores[g] += correct as f64 / test.len() as f64;
        }
    }
    scores.iter_mut().for_each(|s| *s /= folds as f64);
    Ok(scores)
}

/// Grid value with the best cross-validated accuracy, smallest on ties.
pub fn cross_validate_cost(
    data: &Dataset,
    kernel: KernelSpec,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<f64> {
    let scores = cross_validation_scores(data, kernel, grid, folds, seed, &SmoParams::default())?;
    let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let pick = order
        .into_iter()
        .find(|&i| scores[i] >= best - 1e-12)
        .expect("grid is non-empty");
    Ok(grid[pick])
}
