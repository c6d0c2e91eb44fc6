//! Repeated open-split experiments over several methods, with per-run and
//! aggregated reports written to disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bundle::ModelBundle;
use super::metrics::{confusion_and_metrics, macro_f1_original, MetricsReport};
use super::split::{make_open_split, OpenSplit};
use crate::baselines::{train_moc, train_oc, train_ovr_open, Standardized};
use crate::dataset::{
    load_csv, make_gaussian_classes, three_moons_pool, Dataset, GaussianClassesSpec,
};
use crate::error::{AsgError, Result};
use crate::generation::{CostSelection, GenerationConfig};
use crate::open_classifier::{train_asg, tune_cost, OpenClassifier};
use crate::svm::{KernelSpec, DEFAULT_NU};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Generated negatives and positives.
    Asg,
    /// Generated negatives only.
    AsgNoPos,
    Ovr,
    Oc,
    Moc,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Asg,
        Method::AsgNoPos,
        Method::Ovr,
        Method::Oc,
        Method::Moc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Asg => "asg",
            Method::AsgNoPos => "asg_no_pos",
            Method::Ovr => "ovr",
            Method::Oc => "oc",
            Method::Moc => "moc",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = AsgError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| AsgError::InvalidConfig(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        #[serde(default)]
        label_column: Option<usize>,
    },
    ThreeMoons {
        n_per_class: usize,
        noise: f64,
        #[serde(default)]
        seed: u64,
    },
    GaussianClasses(GaussianClassesSpec),
}

impl DataSource {
    pub fn load(&self) -> Result<Dataset> {
        match self {
            DataSource::Csv { path, label_column } => load_csv(path, *label_column),
            DataSource::ThreeMoons {
                n_per_class,
                noise,
                seed,
            } => three_moons_pool(*n_per_class, *noise, *seed),
            DataSource::GaussianClasses(spec) => make_gaussian_classes(spec),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeenClasses {
    List(Vec<usize>),
    /// A fresh random draw of this many classes per repetition.
    Random {
        random: usize,
    },
}

impl SeenClasses {
    fn resolve(&self, num_classes: usize, seed: u64) -> Result<Vec<usize>> {
        match self {
            SeenClasses::List(v) => Ok(v.clone()),
            SeenClasses::Random { random } => {
                if *random == 0 || *random > num_classes {
                    return Err(AsgError::InvalidConfig(format!(
                        "cannot draw {random} seen classes from {num_classes}"
                    )));
                }
                let mut classes: Vec<usize> = (1..=num_classes).collect();
                classes.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                let mut seen = classes[..*random].to_vec();
                seen.sort_unstable();
                Ok(seen)
            }
        }
    }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_nu() -> f64 {
    DEFAULT_NU
}

fn default_repetitions() -> usize {
    10
}

fn default_workers() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DataSource,
    pub seen: SeenClasses,
    pub n_train_per_class: usize,
    pub n_test_per_class: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub generation: GenerationConfig,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Maximum number of repetition x method cells run at once.
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(AsgError::InvalidConfig("repetitions must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(AsgError::InvalidConfig("method list is empty".into()));
        }
        if matches!(&self.seen, SeenClasses::List(v) if v.is_empty()) {
            return Err(AsgError::InvalidConfig("seen class list is empty".into()));
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(AsgError::InvalidConfig(format!(
                "nu must be in (0, 1], got {}",
                self.nu
            )));
        }
        self.generation.validate()
    }

    pub fn repetition_seed(&self, r: usize) -> u64 {
        self.master_seed.wrapping_add(r as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub repetition: usize,
    pub seed: u64,
    pub method: Method,
    /// Original labels of the seen classes, in relabeled order.
    pub seen: Vec<usize>,
    pub cost: Option<f64>,
    pub seconds: f64,
    pub metrics: Option<MetricsReport>,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    pub n: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Some(Self { mean, std, n })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: Method,
    pub runs: usize,
    pub failures: usize,
    pub metrics: BTreeMap<String, MeanStd>,
}

/// Scalar metrics aggregated across runs, by name.
pub fn scalar_metrics(m: &MetricsReport) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    out.insert("macro_f1".to_string(), m.macro_f1);
    out.insert("macro_f1_collapsed".to_string(), m.macro_f1_collapsed);
    if let Some(v) = m.macro_f1_original {
        out.insert("macro_f1_original".to_string(), v);
    }
    out.insert("accuracy".to_string(), m.accuracy);
    out.insert("empirical_risk".to_string(), m.empirical_risk);
    for (prefix, prf) in [("seen", m.seen_aggregate), ("unseen", m.unseen_aggregate)] {
        out.insert(format!("{prefix}_precision"), prf.precision);
        out.insert(format!("{prefix}_recall"), prf.recall);
        out.insert(format!("{prefix}_f1"), prf.f1);
    }
    out
}

pub fn aggregate(methods: &[Method], runs: &[RunReport]) -> Vec<AggregateRow> {
    methods
        .iter()
        .map(|&method| {
            let mine: Vec<&RunReport> = runs.iter().filter(|r| r.method == method).collect();
            let ok: Vec<BTreeMap<String, f64>> = mine
                .iter()
                .filter_map(|r| r.metrics.as_ref().map(scalar_metrics))
                .collect();
            let names: std::collections::BTreeSet<&String> =
                ok.iter().flat_map(|m| m.keys()).collect();
            let metrics = names
                .into_iter()
                .filter_map(|name| {
                    let values: Vec<f64> = ok.iter().filter_map(|m| m.get(name).copied()).collect();
                    MeanStd::of(&values).map(|s| (name.clone(), s))
                })
                .collect();
            AggregateRow {
                method,
                runs: mine.len(),
                failures: mine.len() - ok.len(),
                metrics,
            }
        })
        .collect()
}

/// Per-repetition data shared by every method.
struct Prepared {
    split: OpenSplit,
    cost: f64,
}

fn prepare(data: &Dataset, cfg: &ExperimentConfig, r: usize) -> Result<Prepared> {
    let seed = cfg.repetition_seed(r);
    let seen = cfg.seen.resolve(data.num_classes(), seed)?;
    let split = make_open_split(
        data,
        &seen,
        cfg.n_train_per_class,
        cfg.n_test_per_class,
        seed,
    )?;
    let (std_train, _) = split.train.standardize()?;
    let cost = tune_cost(&std_train, &cfg.generation.cost, seed)?;
    Ok(Prepared { split, cost })
}

/// Trains one method on a split's training data.
pub fn train_method(
    method: Method,
    train: &Dataset,
    generation: &GenerationConfig,
    cost: f64,
    nu: f64,
) -> Result<ModelBundle> {
    let (std_train, stats) = train.standardize()?;
    let kernel = KernelSpec::for_dim(train.dim());
    let smo = &generation.smo;
    Ok(match method {
        Method::Asg | Method::AsgNoPos => {
            let cfg = GenerationConfig {
                cost: CostSelection::Fixed(cost),
                ..generation.clone()
            };
            ModelBundle::Asg(train_asg(train, &cfg, method == Method::Asg)?.0)
        }
        Method::Ovr => ModelBundle::Ovr(Standardized {
            stats,
            model: train_ovr_open(&std_train, kernel, cost, smo)?,
        }),
        Method::Oc => ModelBundle::Oc(Standardized {
            stats,
            model: train_oc(&std_train, kernel, nu, cost, smo)?,
        }),
        Method::Moc => ModelBundle::Moc(Standardized {
            stats,
            model: train_moc(&std_train, kernel, nu, cost, smo)?,
        }),
    })
}

/// Scores a model on a split's test set, including the original-label macro F1.
pub fn evaluate(model: &dyn OpenClassifier, split: &OpenSplit) -> Result<MetricsReport> {
    let preds = model.predict_all(&split.test)?;
    let mut report = confusion_and_metrics(&split.test.labels(), &preds, split.seen.len())?;
    report.macro_f1_original = Some(macro_f1_original(
        &split.test_original,
        &preds,
        &split.seen,
    )?);
    Ok(report)
}

fn run_cell(
    cfg: &ExperimentConfig,
    prepared: &Result<Prepared>,
    r: usize,
    method: Method,
) -> RunReport {
    let seed = cfg.repetition_seed(r);
    let start = Instant::now();
    let generation = GenerationConfig {
        seed,
        ..cfg.generation.clone()
    };
    let outcome = prepared.as_ref().map_err(|e| e.to_string()).and_then(|p| {
        train_method(method, &p.split.train, &generation, p.cost, cfg.nu)
            .and_then(|m| evaluate(&m, &p.split))
            .map_err(|e| e.to_string())
    });
    let (seen, cost) = match prepared {
        Ok(p) => (p.split.seen.clone(), Some(p.cost)),
        Err(_) => (Vec::new(), None),
    };
    let (metrics, error) = match outcome {
        Ok(m) => (Some(m), None),
        Err(e) => (None, Some(e)),
    };
    RunReport {
        repetition: r,
        seed,
        method,
        seen,
        cost,
        seconds: start.elapsed().as_secs_f64(),
        metrics,
        error,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub runs: Vec<RunReport>,
    pub aggregate: Vec<AggregateRow>,
}

pub fn run_file_name(r: usize, method: Method) -> String {
    format!("rep{r}_{}.json", method.name())
}

/// Runs every repetition x method cell and writes `config.json`,
/// `runs/rep{r}_{method}.json`, `aggregate.json` and `aggregate.csv`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let data = cfg.dataset.load()?;
    let out = &cfg.output_dir;
    let runs_dir = out.join("runs");
    fs::create_dir_all(&runs_dir)?;
    fs::write(out.join("config.json"), serde_json::to_string_pretty(cfg)?)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| AsgError::Runtime(e.to_string()))?;
    let runs: Vec<RunReport> = pool.install(|| {
        let prepared: Vec<Result<Prepared>> = (0..cfg.repetitions)
            .into_par_iter()
            .map(|r| prepare(&data, cfg, r))
            .collect();
        let cells: Vec<(usize, Method)> = (0..cfg.repetitions)
            .flat_map(|r| cfg.methods.iter().map(move |&m| (r, m)))
            .collect();
        cells
            .into_par_iter()
            .map(|(r, m)| run_cell(cfg, &prepared[r], r, m))
            .collect()
    });
    for run in &runs {
        fs::write(
            runs_dir.join(run_file_name(run.repetition, run.method)),
            serde_json::to_string_pretty(run)?,
        )?;
    }

    let aggregate = aggregate(&cfg.methods, &runs);
    fs::write(
        out.join("aggregate.json"),
        serde_json::to_string_pretty(&aggregate)?,
    )?;
    write_aggregate_csv(&aggregate, &out.join("aggregate.csv"))?;
    Ok(ExperimentSummary { runs, aggregate })
}

fn write_aggregate_csv(rows: &[AggregateRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["method", "metric", "mean", "std", "n"])?;
    for row in rows {
        for (name, s) in &row.metrics {
            w.write_record([
                row.method.name().to_string(),
                name.clone(),
                s.mean.to_string(),
                s.std.to_string(),
                s.n.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
