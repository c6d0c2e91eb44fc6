//! Derivative-free minimization over a [`SearchBox`].

mod racos;
mod random;

pub use racos::{minimize_racos, minimize_racos_traced, Racos, RacosParams};
pub use random::{minimize_random, RandomSearch};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::SearchBox;
use crate::error::{AsgError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptBudget {
    pub max_evaluations: usize,
    pub seed: u64,
}

impl OptBudget {
    pub fn new(max_evaluations: usize, seed: u64) -> Self {
        Self {
            max_evaluations,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_x: Vec<f64>,
    pub best_value: f64,
    pub evaluations_used: usize,
    /// `(evaluation index, best value so far)` recorded at every improvement.
    pub history: Vec<(usize, f64)>,
}

/// A black-box minimizer. Objectives are called sequentially.
pub trait Optimizer: Sync {
    fn minimize(
        &self,
        objective: &mut dyn FnMut(&[f64]) -> f64,
        search: &SearchBox,
        budget: &OptBudget,
    ) -> Result<OptResult>;
}

/// Bookkeeping shared by the optimizers: counts evaluations, tracks the
/// incumbent and writes the optional trace.
pub(crate) struct Tracker<'a> {
    pub best_x: Option<Vec<f64>>,
    pub best_value: f64,
    pub evaluations: usize,
    pub history: Vec<(usize, f64)>,
    /// Best value after each evaluation, for the stall test.
    best_after: Vec<f64>,
    trace: Option<&'a mut dyn Write>,
}

impl<'a> Tracker<'a> {
    pub fn new(capacity: usize, trace: Option<&'a mut dyn Write>) -> Self {
        Self {
            best_x: None,
            best_value: f64::INFINITY,
            evaluations: 0,
            history: Vec::new(),
            best_after: Vec::with_capacity(capacity),
            trace,
        }
    }

    /// Evaluates `x`; non-finite values come back as `+inf`.
    pub fn evaluate(&mut self, objective: &mut dyn FnMut(&[f64]) -> f64, x: &[f64]) -> Result<f64> {
        let raw = objective(x);
        let value = if raw.is_finite() { raw } else { f64::INFINITY };
        let index = self.evaluations;
        self.evaluations += 1;
        if let Some(out) = self.trace.as_deref_mut() {
            let record = serde_json::json!({ "eval": index, "x": x, "value": raw.is_finite().then_some(raw) });
            writeln!(out, "{record}")?;
        }
        if self.best_x.is_none() || value < self.best_value {
            if value < self.best_value || self.history.is_empty() {
                self.history.push((index, value));
            }
            self.best_value = value;
            self.best_x = Some(x.to_vec());
        }
        self.best_after.push(self.best_value);
        Ok(value)
    }

    /// True once the incumbent improved by less than `1e-12` over the last
    /// quarter of the budget.
    pub fn stalled(&self, budget: usize) -> bool {
        let window = (budget / 4).max(1);
        let e = self.best_after.len();
        if e <= window || e >= budget {
            return false;
        }
        let before = self.best_after[e - 1 - window];
        let now = self.best_after[e - 1];
        if !before.is_finite() {
            return false;
        }
        before - now < 1e-12
    }

    pub fn finish(self) -> OptResult {
        OptResult {
            best_x: self.best_x.unwrap_or_default(),
            best_value: self.best_value,
            evaluations_used: self.evaluations,
            history: self.history,
        }
    }
}

pub(crate) fn check_budget(budget: &OptBudget) -> Result<()> {
    if budget.max_evaluations == 0 {
        return Err(AsgError::InvalidConfig(
            "optimizer budget must be >= 1".into(),
        ));
    }
    Ok(())
}
