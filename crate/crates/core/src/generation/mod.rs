//! Per-class generation of boundary samples.
//!
//! For class `k`, generated negatives minimize
//! `P_D(x; D_k, D_k^- ∪ {x}) + lambda1 * P1(x) + lambda2 * P2(x)`: points the
//! discriminator already rejects, close to the class but away from earlier
//! negatives. Generated positives minimize `-P_D(x; D_k, D_k^+ ∪ {x}) + eta * P3(x)`.
//! Each sample is the result of one optimizer run; samples of a class are
//! produced sequentially, classes independently.

mod discriminator;
mod penalty;

pub use discriminator::{CandidateScore, Side, SvmDiscriminator, SvmTrainer};
pub use penalty::{nearest_distance, penalty_p1, penalty_p2, penalty_p3};

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::{min_distinct_distance, Dataset, SearchBox};
use crate::dfo::{OptBudget, Optimizer, RacosParams};
use crate::error::{AsgError, Result};
use crate::svm::{SmoParams, DEFAULT_COST_GRID, DEFAULT_FOLDS};

/// Mixed into the class seed for the positive stream so it never replays
/// the negative stream.
const POSITIVE_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// A radius parameter: fixed, or the closest distinct pair of the class.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Radius {
    #[default]
    Auto,
    Fixed(f64),
}

impl Radius {
    fn resolve(self, auto: f64) -> f64 {
        match self {
            Radius::Auto => auto,
            Radius::Fixed(r) => r,
        }
    }
}

impl Serialize for Radius {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Radius::Auto => s.serialize_str("auto"),
            Radius::Fixed(r) => s.serialize_f64(*r),
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Number(r) => Ok(Radius::Fixed(r)),
            Repr::Text(t) if t.eq_ignore_ascii_case("auto") => Ok(Radius::Auto),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "radius must be a number or \"auto\", got {t:?}"
            ))),
        }
    }
}

/// How the SVM cost is chosen before generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostSelection {
    CrossValidate { grid: Vec<f64>, folds: usize },
    Fixed(f64),
}

impl Default for CostSelection {
    fn default() -> Self {
        CostSelection::CrossValidate {
            grid: DEFAULT_COST_GRID.to_vec(),
            folds: DEFAULT_FOLDS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    /// Generated samples per class (negatives, and positives when enabled).
    #[serde(alias = "T")]
    pub samples_per_class: usize,
    pub c1: Radius,
    pub c2: Radius,
    pub c3: Radius,
    pub lambda1: f64,
    pub lambda2: f64,
    pub eta: f64,
    /// Objective evaluations per generated sample.
    pub opt_budget: usize,
    /// Search box padding, as a fraction of the class's per-dimension range.
    pub margin_fraction: f64,
    pub seed: u64,
    /// Put generated positives on the discriminator's positive side, next to
    /// the class data and against the generated negatives, instead of on its
    /// negative side.
    pub positives_as_positive_side: bool,
    pub cost: CostSelection,
    /// Cost of the discriminator used while generating; `None` reuses the
    /// tuned classifier cost.
    pub discriminator_cost: Option<f64>,
    pub racos: RacosParams,
    pub smo: SmoParams,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            samples_per_class: 200,
            c1: Radius::Auto,
            c2: Radius::Auto,
            c3: Radius::Auto,
            lambda1: 0.1,
            lambda2: 0.1,
            eta: 0.3,
            opt_budget: 1000,
            margin_fraction: 0.25,
            seed: 0,
            positives_as_positive_side: false,
            cost: CostSelection::default(),
            discriminator_cost: None,
            racos: RacosParams::default(),
            smo: SmoParams::default(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(AsgError::InvalidConfig(msg));
        if self.samples_per_class == 0 {
            return bad("samples_per_class must be >= 1".into());
        }
        if self.opt_budget == 0 {
            return bad("opt_budget must be >= 1".into());
        }
        for (name, w) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("eta", self.eta),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {w}"));
            }
        }
        for (name, r) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if let Radius::Fixed(v) = r {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("{name} must be > 0, got {v}"));
                }
            }
        }
        if !(self.margin_fraction >= 0.0 && self.margin_fraction.is_finite()) {
            return bad(format!(
                "margin_fraction must be >= 0, got {}",
                self.margin_fraction
            ));
        }
        if let Some(c) = self.discriminator_cost {
            if !(c > 0.0 && c.is_finite()) {
                return bad(format!("discriminator_cost must be > 0, got {c}"));
            }
        }
        match &self.cost {
            CostSelection::Fixed(c) if !(*c > 0.0 && c.is_finite()) => {
                bad(format!("cost must be > 0, got {c}"))
            }
            CostSelection::CrossValidate { grid, folds } if grid.is_empty() || *folds < 2 => {
                bad("cross-validation needs a non-empty grid and at least 2 folds".into())
            }
            _ => Ok(()),
        }
    }

    /// Resolves the radii of one class.
    pub fn radii_for(&self, class_points: &[Vec<f64>]) -> Result<Radii> {
        let refs: Vec<&[f64]> = class_points.iter().map(Vec::as_slice).collect();
        let auto = if [self.c1, self.c2, self.c3].contains(&Radius::Auto) {
            min_distinct_distance(&refs).ok_or_else(|| {
                AsgError::InsufficientData(
                    "automatic radius needs two distinct points in the class".into(),
                )
            })?
        } else {
            f64::NAN
        };
        Ok(Radii {
            c1: self.c1.resolve(auto),
            c2: self.c2.resolve(auto),
            c3: self.c3.resolve(auto),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Radii {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// The pieces of one objective evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    /// Discriminator probability that `x` belongs to the class.
    pub probability: f64,
    /// Weighted-sum ingredient P1 (negatives only; 0 for positives).
    pub distance_penalty: f64,
    /// P2 for negatives, P3 for positives.
    pub spread_penalty: f64,
    pub value: f64,
}

/// Scores `x` as a negative candidate against a discriminator that holds
/// the class data and the negatives generated so far.
pub fn negative_terms(
    disc: &SvmDiscriminator,
    x: &[f64],
    class_points: &[Vec<f64>],
    negatives: &[Vec<f64>],
    radii: &Radii,
    cfg: &GenerationConfig,
) -> ObjectiveTerms {
    let probability = disc.score_candidate(x).probability;
    let p1 = penalty_p1(x, class_points, radii.c1);
    let p2 = penalty_p2(x, negatives, radii.c2);
    ObjectiveTerms {
        probability,
        distance_penalty: p1,
        spread_penalty: p2,
        value: probability + cfg.lambda1 * p1 + cfg.lambda2 * p2,
    }
}

/// Scores `x` as a positive candidate; `disc` holds whatever the configured
/// side convention puts next to the generated positives.
pub fn positive_terms(
    disc: &SvmDiscriminator,
    x: &[f64],
    positives: &[Vec<f64>],
    radii: &Radii,
    cfg: &GenerationConfig,
) -> ObjectiveTerms {
    let probability = disc.score_candidate(x).probability;
    let p3 = penalty_p3(x, positives, radii.c3);
    ObjectiveTerms {
        probability,
        distance_penalty: 0.0,
        spread_penalty: p3,
        value: -probability + cfg.eta * p3,
    }
}

/// Standalone negative objective: trains a discriminator on `class_data`
/// against `negatives` and scores `x` with it inserted.
pub fn negative_objective(
    x: &[f64],
    class_data: &Dataset,
    negatives: &[Vec<f64>],
    cfg: &GenerationConfig,
    trainer: SvmTrainer,
) -> Result<ObjectiveTerms> {
    class_data.check_dim(x)?;
    let class_points = class_data.points();
    let radii = cfg.radii_for(&class_points)?;
    let disc = SvmDiscriminator::new(&class_points, negatives, Side::Negative, trainer)?;
    Ok(negative_terms(
        &disc,
        x,
        &class_points,
        negatives,
        &radii,
        cfg,
    ))
}

/// Standalone positive objective, the counterpart of [`negative_objective`].
///
/// `negatives` is only used when `cfg.positives_as_positive_side` is set.
pub fn positive_objective(
    x: &[f64],
    class_data: &Dataset,
    positives: &[Vec<f64>],
    negatives: &[Vec<f64>],
    cfg: &GenerationConfig,
    trainer: SvmTrainer,
) -> Result<ObjectiveTerms> {
    class_data.check_dim(x)?;
    let class_points = class_data.points();
    let radii = cfg.radii_for(&class_points)?;
    let disc = positive_discriminator(&class_points, positives, negatives, cfg, trainer)?;
    Ok(positive_terms(&disc, x, positives, &radii, cfg))
}

fn positive_discriminator(
    class_points: &[Vec<f64>],
    positives: &[Vec<f64>],
    negatives: &[Vec<f64>],
    cfg: &GenerationConfig,
    trainer: SvmTrainer,
) -> Result<SvmDiscriminator> {
    if cfg.positives_as_positive_side {
        let pos: Vec<Vec<f64>> = class_points.iter().chain(positives).cloned().collect();
        SvmDiscriminator::new(&pos, negatives, Side::Positive, trainer)
    } else {
        SvmDiscriminator::new(class_points, positives, Side::Negative, trainer)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedSample {
    pub features: Vec<f64>,
    /// Objective value and its parts at acceptance time.
    pub terms: ObjectiveTerms,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Neg,
    Pos,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GeneratedPool {
    pub negatives: BTreeMap<usize, Vec<GeneratedSample>>,
    pub positives: BTreeMap<usize, Vec<GeneratedSample>>,
}

impl GeneratedPool {
    pub fn negative_features(&self, k: usize) -> Vec<Vec<f64>> {
        features_of(self.negatives.get(&k))
    }

    pub fn positive_features(&self, k: usize) -> Vec<Vec<f64>> {
        features_of(self.positives.get(&k))
    }

    /// Maps every generated vector through `f`, e.g. back to raw units.
    pub fn map_features(&self, mut f: impl FnMut(&[f64]) -> Result<Vec<f64>>) -> Result<Self> {
        let mut map = |m: &BTreeMap<usize, Vec<GeneratedSample>>| -> Result<BTreeMap<usize, Vec<GeneratedSample>>> {
            m.iter()
                .map(|(k, v)| {
                    let mapped = v
                        .iter()
                        .map(|s| {
                            Ok(GeneratedSample {
                                features: f(&s.features)?,
                                ..s.clone()
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok((*k, mapped))
                })
                .collect()
        };
        Ok(Self {
            negatives: map(&self.negatives)?,
            positives: map(&self.positives)?,
        })
    }

    /// One row per generated vector: `class,kind,x1..xd`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let dim = self
            .negatives
            .values()
            .chain(self.positives.values())
            .flatten()
            .map(|s| s.features.len())
            .next()
            .unwrap_or(0);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["class".to_string(), "kind".to_string()];
        header.extend((1..=dim).map(|j| format!("x{j}")));
        w.write_record(&header)?;
        for (kind, map) in [("neg", &self.negatives), ("pos", &self.positives)] {
            for (k, samples) in map {
                for s in samples {
                    let mut row = vec![k.to_string(), kind.to_string()];
                    row.extend(s.features.iter().map(|v| v.to_string()));
                    w.write_record(&row)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn features_of(samples: Option<&Vec<GeneratedSample>>) -> Vec<Vec<f64>> {
    samples
        .map(|v| v.iter().map(|s| s.features.clone()).collect())
        .unwrap_or_default()
}

fn class_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(k as u64)
}

struct ClassContext {
    points: Vec<Vec<f64>>,
    radii: Radii,
    search: SearchBox,
}

fn class_context(data: &Dataset, k: usize, cfg: &GenerationConfig) -> Result<ClassContext> {
    let subset = data.class_subset(k);
    let points = subset.points();
    let radii = cfg
        .radii_for(&points)
        .map_err(|e| AsgError::InsufficientData(format!("class {k}: {e}")))?;
    let search = subset.bounding_box(cfg.margin_fraction)?;
    Ok(ClassContext {
        points,
        radii,
        search,
    })
}

fn check_generation_input(data: &Dataset, cfg: &GenerationConfig) -> Result<()> {
    cfg.validate()?;
    data.require_class_sizes(2, "sample generation")
}

/// Runs `run_class` for every class in parallel and collects the results.
fn per_class<F>(data: &Dataset, run_class: F) -> Result<BTreeMap<usize, Vec<GeneratedSample>>>
where
    F: Fn(usize) -> Result<Vec<GeneratedSample>> + Sync,
{
    (1..=data.num_classes())
        .into_par_iter()
        .map(|k| run_class(k).map(|s| (k, s)))
        .collect()
}

/// Generates `T` negatives per class.
pub fn generate_negatives(
    data: &Dataset,
    cfg: &GenerationConfig,
    trainer: SvmTrainer,
    optimizer: &dyn Optimizer,
) -> Result<BTreeMap<usize, Vec<GeneratedSample>>> {
    check_generation_input(data, cfg)?;
    per_class(data, |k| {
        negatives_for_class(data, k, cfg, trainer, optimizer)
    })
}

fn negatives_for_class(
    data: &Dataset,
    k: usize,
    cfg: &GenerationConfig,
    trainer: SvmTrainer,
    optimizer: &dyn Optimizer,
) -> Result<Vec<GeneratedSample>> {
    let ctx = class_context(data, k, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(class_seed(cfg.seed, k));
    let mut disc = SvmDiscriminator::new(&ctx.points, &[], Side::Negative, trainer)?;
    let mut negatives: Vec<Vec<f64>> = Vec::with_capacity(cfg.samples_per_class);
    let mut samples = Vec::with_capacity(cfg.samples_per_class);
    for _ in 0..cfg.samples_per_class {
        let budget = OptBudget::new(cfg.opt_budget, rng.gen());
        let result = optimizer.minimize(
            &mut |x| negative_terms(&disc, x, &ctx.points, &negatives, &ctx.radii, cfg).value,
            &ctx.search,
            &budget,
        )?;
        let terms = negative_terms(
            &disc,
            &result.best_x,
            &ctx.points,
            &negatives,
            &ctx.radii,
            cfg,
        );
        disc.accept(result.best_x.clone())?;
        negatives.push(result.best_x.clone());
        samples.push(GeneratedSample {
            features: result.best_x,
            terms,
            evaluations: result.evaluations_used,
        });
    }
    Ok(samples)
}

/// Generates `T` positives per class. `negatives` is consulted only when
/// generated positives sit on the discriminator's positive side.
pub fn generate_positives(
    data: &Dataset,
    cfg: &GenerationConfig,
    trainer: SvmTrainer,
    optimizer: &dyn Optimizer,
    negatives: &BTreeMap<usize, Vec<GeneratedSample>>,
) -> Result<BTreeMap<usize, Vec<GeneratedSample>>> {
    check_generation_input(data, cfg)?;
    per_class(data, |k| {
        let negs = features_of(negatives.get(&k));
        positives_for_class(data, k, cfg, trainer, optimizer, &negs)
    })
}

fn positives_for_class(
    data: &Dataset,
    k: usize,
    cfg: &GenerationConfig,
    trainer: SvmTrainer,
    optimizer: &dyn Optimizer,
    negatives: &[Vec<f64>],
) -> Result<Vec<GeneratedSample>> {
    let ctx = class_context(data, k, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(class_seed(cfg.seed, k) ^ POSITIVE_STREAM);
    let mut disc = positive_discriminator(&ctx.points, &[], negatives, cfg, trainer)?;
    let mut positives: Vec<Vec<f64>> = Vec::with_capacity(cfg.samples_per_class);
    let mut samples = Vec::with_capacity(cfg.samples_per_class);
    for _ in 0..cfg.samples_per_class {
        let budget = OptBudget::new(cfg.opt_budget, rng.gen());
        let result = optimizer.minimize(
            &mut |x| positive_terms(&disc, x, &positives, &ctx.radii, cfg).value,
            &ctx.search,
            &budget,
        )?;
        let terms = positive_terms(&disc, &result.best_x, &positives, &ctx.radii, cfg);
        disc.accept(result.best_x.clone())?;
        positives.push(result.best_x.clone());
        samples.push(GeneratedSample {
            features: result.best_x,
            terms,
            evaluations: result.evaluations_used,
        });
    }
    Ok(samples)
}

/// Negatives for every class, then (optionally) positives.
pub fn generate_pool(
    data: &Dataset,
    cfg: &GenerationConfig,
    trainer: SvmTrainer,
    optimizer: &dyn Optimizer,
    with_positives: bool,
) -> Result<GeneratedPool> {
    let negatives = generate_negatives(data, cfg, trainer, optimizer)?;
    let positives = if with_positives {
        generate_positives(data, cfg, trainer, optimizer, &negatives)?
    } else {
        BTreeMap::new()
    };
    Ok(GeneratedPool {
        negatives,
        positives,
    })
}
