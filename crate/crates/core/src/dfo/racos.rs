//! Sequential classification-based randomized search (RACOS family).
//!
//! A small population of evaluated solutions is split into a positive set
//! (the best few) and a negative set (the rest). Each step picks a positive
//! solution, learns an axis-aligned region that contains it but none of the
//! negatives by randomly cutting dimensions, and samples the next candidate
//! from that region. With probability `epsilon` the candidate is drawn from
//! the whole box instead. A candidate that beats the worst population member
//! replaces it.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::random::uniform_in;
use super::{check_budget, OptBudget, OptResult, Optimizer, Tracker};
use crate::dataset::SearchBox;
use crate::error::{AsgError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RacosParams {
    pub population: usize,
    pub positive_size: usize,
    /// Probability of sampling the whole box instead of a learned region.
    pub epsilon: f64,
    /// Number of coordinates resampled inside the learned region; the rest
    /// are copied from the chosen positive. `None` resamples all of them.
    pub uncertain_dims: Option<usize>,
    pub early_stop: bool,
}

impl Default for RacosParams {
    fn default() -> Self {
        Self {
            population: 20,
            positive_size: 2,
            epsilon: 0.05,
            uncertain_dims: Some(1),
            early_stop: true,
        }
    }
}

impl RacosParams {
    fn validate(&self) -> Result<()> {
        if self.population < 2 || self.positive_size == 0 || self.positive_size >= self.population {
            return Err(AsgError::InvalidConfig(format!(
                "racos needs 0 < positive_size ({}) < population ({})",
                self.positive_size, self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(AsgError::InvalidConfig(format!(
                "epsilon {} outside [0, 1]",
                self.epsilon
            )));
        }
        if self.uncertain_dims == Some(0) {
            return Err(AsgError::InvalidConfig(
                "uncertain_dims must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Racos {
    pub params: RacosParams,
}

impl Optimizer for Racos {
    fn minimize(
        &self,
        objective: &mut dyn FnMut(&[f64]) -> f64,
        search: &SearchBox,
        budget: &OptBudget,
    ) -> Result<OptResult> {
        minimize_racos(objective, search, budget, &self.params)
    }
}

pub fn minimize_racos(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    search: &SearchBox,
    budget: &OptBudget,
    params: &RacosParams,
) -> Result<OptResult> {
    minimize_racos_traced(objective, search, budget, params, None)
}

/// As [`minimize_racos`], writing one JSON line per evaluation to `trace`.
pub fn minimize_racos_traced(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    search: &SearchBox,
    budget: &OptBudget,
    params: &RacosParams,
    trace: Option<&mut dyn Write>,
) -> Result<OptResult> {
    check_budget(budget)?;
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let max_evals = budget.max_evaluations;
    let mut tracker = Tracker::new(max_evals, trace);
    let stalled = |t: &Tracker<'_>| params.early_stop && t.stalled(max_evals);

    let mut population: Vec<(Vec<f64>, f64)> = Vec::with_capacity(params.population);
    for _ in 0..params.population.min(max_evals) {
        let x = uniform_in(&mut rng, search.lower(), search.upper());
        let v = tracker.evaluate(objective, &x)?;
        population.push((x, v));
    }
    population.sort_by(|a, b| a.1.total_cmp(&b.1));
    if population.len() < params.population {
        return Ok(tracker.finish());
    }

    let dim = search.dim();
    let mut lower = vec![0.0; dim];
    let mut upper = vec![0.0; dim];
    let mut dims: Vec<usize> = (0..dim).collect();
    while tracker.evaluations < max_evals && !stalled(&tracker) {
        let x = if rng.gen::<f64>() < params.epsilon {
            uniform_in(&mut rng, search.lower(), search.upper())
        } else {
            let anchor = &population[rng.gen_range(0..params.positive_size)].0;
            lower.copy_from_slice(search.lower());
            upper.copy_from_slice(search.upper());
            learn_region(
                &mut rng,
                anchor,
                &population[params.positive_size..],
                &mut lower,
                &mut upper,
            );
            let mut x = anchor.clone();
            match params.uncertain_dims {
                Some(u) if u < dim => {
                    dims.shuffle(&mut rng);
                    for &j in &dims[..u] {
                        x[j] = if lower[j] < upper[j] {
                            rng.gen_range(lower[j]..=upper[j])
                        } else {
                            lower[j]
                        };
                    }
                }
                _ => x = uniform_in(&mut rng, &lower, &upper),
            }
            x
        };
        let v = tracker.evaluate(objective, &x)?;
        let worst = population.last().expect("population is non-empty").1;
        if v < worst {
            population.pop();
            let pos = population.partition_point(|p| p.1 <= v);
            population.insert(pos, (x, v));
        }
    }
    Ok(tracker.finish())
}

/// Shrinks `[lower, upper]` until it holds `anchor` but no negative.
fn learn_region(
    rng: &mut ChaCha8Rng,
    anchor: &[f64],
    negatives: &[(Vec<f64>, f64)],
    lower: &mut [f64],
    upper: &mut [f64],
) {
    let inside = |x: &[f64], lower: &[f64], upper: &[f64]| {
        x.iter()
            .zip(lower.iter().zip(upper.iter()))
            .all(|(v, (l, u))| *l <= *v && *v <= *u)
    };
    let mut remaining: Vec<&[f64]> = negatives
        .iter()
        .map(|(x, _)| x.as_slice())
        .filter(|x| x.iter().zip(anchor).any(|(a, b)| a != b))
        .collect();
    while !remaining.is_empty() {
        let neg = remaining[rng.gen_range(0..remaining.len())];
        let differing: Vec<usize> = (0..anchor.len()).filter(|&j| neg[j] != anchor[j]).collect();
        let j = differing[rng.gen_range(0..differing.len())];
        let cut = anchor[j] + rng.gen::<f64>() * (neg[j] - anchor[j]);
        let cut = if cut == neg[j] { anchor[j] } else { cut };
        if neg[j] > anchor[j] {
            upper[j] = upper[j].min(cut);
        } else {
            lower[j] = lower[j].max(cut);
        }
        // the cut may land exactly on the anchor; it stays inside the closed box
        remaining.retain(|x| inside(x, lower, upper));
    }
}
