use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_budget, OptBudget, OptResult, Optimizer, Tracker};
use crate::dataset::SearchBox;
use crate::error::Result;

pub(crate) fn uniform_in(rng: &mut ChaCha8Rng, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    lower
        .iter()
        .zip(upper)
        .map(|(&l, &u)| if l < u { rng.gen_range(l..=u) } else { l })
        .collect()
}

/// Best of `max_evaluations` i.i.d. uniform samples from the box.
pub fn minimize_random(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    search: &SearchBox,
    budget: &OptBudget,
) -> Result<OptResult> {
    check_budget(budget)?;
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut tracker = Tracker::new(budget.max_evaluations, None);
    for _ in 0..budget.max_evaluations {
        let x = uniform_in(&mut rng, search.lower(), search.upper());
        tracker.evaluate(objective, &x)?;
    }
    Ok(tracker.finish())
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RandomSearch;

impl Optimizer for RandomSearch {
    fn minimize(
        &self,
        objective: &mut dyn FnMut(&[f64]) -> f64,
        search: &SearchBox,
        budget: &OptBudget,
    ) -> Result<OptResult> {
        minimize_random(objective, search, budget)
    }
}
