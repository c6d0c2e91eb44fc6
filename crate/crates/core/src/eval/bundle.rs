//! Trained models on disk: a directory holding `manifest.json` plus one JSON
//! file per per-class SVM.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::baselines::{MocModel, OcOpenModel, OvrOpenModel, Standardized};
use crate::dataset::StandardizationStats;
use crate::error::{AsgError, Result};
use crate::open_classifier::{OpenCategoryModel, OpenClassifier, Prediction};
use crate::svm::{BinarySvmModel, OneClassSvmModel};

use super::experiment::Method;

pub const MANIFEST: &str = "manifest.json";

/// Any trained open-set model, ready to predict on raw features.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelBundle {
    Asg(OpenCategoryModel),
    Ovr(Standardized<OvrOpenModel>),
    Oc(Standardized<OcOpenModel>),
    Moc(Standardized<MocModel>),
}

impl ModelBundle {
    pub fn method_name(&self) -> &'static str {
        match self {
            ModelBundle::Asg(_) => "asg",
            ModelBundle::Ovr(_) => "ovr",
            ModelBundle::Oc(_) => "oc",
            ModelBundle::Moc(_) => "moc",
        }
    }

    fn inner(&self) -> &dyn OpenClassifier {
        match self {
            ModelBundle::Asg(m) => m,
            ModelBundle::Ovr(m) => m,
            ModelBundle::Oc(m) => m,
            ModelBundle::Moc(m) => m,
        }
    }
}

impl OpenClassifier for ModelBundle {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn num_classes(&self) -> usize {
        self.inner().num_classes()
    }

    fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.inner().predict(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Manifest {
    method: String,
    num_classes: usize,
    dim: usize,
    standardization: StandardizationStats,
    cost: Option<f64>,
    /// Per-class decision models, in class order.
    classes: Vec<String>,
    /// One-vs-rest models used to assign seen labels, in class order.
    fallback: Vec<String>,
    detector: Option<String>,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<String> {
    fs::write(dir.join(name), serde_json::to_string_pretty(value)?)?;
    Ok(name.to_string())
}

fn read_json<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join(name))?)?)
}

fn write_all<T: Serialize>(dir: &Path, prefix: &str, models: &[T]) -> Result<Vec<String>> {
    models
        .iter()
        .enumerate()
        .map(|(i, m)| write_json(dir, &format!("{prefix}_{}.json", i + 1), m))
        .collect()
}

fn read_all<T: DeserializeOwned>(dir: &Path, names: &[String]) -> Result<Vec<T>> {
    names.iter().map(|n| read_json(dir, n)).collect()
}

fn fallback_files(dir: &Path, ovr: Option<&OvrOpenModel>) -> Result<Vec<String>> {
    ovr.map_or(Ok(Vec::new()), |o| {
        write_all(dir, "ovr_class", &o.per_class)
    })
}

fn read_fallback(dir: &Path, names: &[String]) -> Result<Option<OvrOpenModel>> {
    if names.is_empty() {
        return Ok(None);
    }
    Ok(Some(OvrOpenModel {
        per_class: read_all(dir, names)?,
    }))
}

pub fn save_bundle(bundle: &ModelBundle, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest {
        method: bundle.method_name().to_string(),
        num_classes: bundle.num_classes(),
        dim: bundle.dim(),
        standardization: StandardizationStats::identity(bundle.dim()),
        cost: None,
        classes: Vec::new(),
        fallback: Vec::new(),
        detector: None,
    };
    match bundle {
        ModelBundle::Asg(m) => {
            manifest.standardization = m.standardization.clone();
            manifest.cost = Some(m.cost);
            manifest.classes = write_all(dir, "class", &m.per_class)?;
        }
        ModelBundle::Ovr(m) => {
            manifest.standardization = m.stats.clone();
            manifest.classes = write_all(dir, "class", &m.model.per_class)?;
        }
        ModelBundle::Oc(m) => {
            manifest.standardization = m.stats.clone();
            manifest.detector = Some(write_json(dir, "detector.json", &m.model.detector)?);
            manifest.fallback = fallback_files(dir, m.model.fallback_ovr.as_ref())?;
        }
        ModelBundle::Moc(m) => {
            manifest.standardization = m.stats.clone();
            manifest.classes = write_all(dir, "class", &m.model.per_class)?;
            manifest.fallback = fallback_files(dir, m.model.fallback_ovr.as_ref())?;
        }
    }
    write_json(dir, MANIFEST, &manifest)?;
    Ok(())
}

pub fn load_bundle(dir: &Path) -> Result<ModelBundle> {
    let manifest: Manifest = read_json(dir, MANIFEST)?;
    let stats = manifest.standardization;
    let method: Method =
        serde_json::from_value(serde_json::Value::String(manifest.method.clone()))?;
    let bundle = match method {
        Method::Asg | Method::AsgNoPos => {
            let per_class: Vec<BinarySvmModel> = read_all(dir, &manifest.classes)?;
            ModelBundle::Asg(OpenCategoryModel::new(
                per_class,
                stats,
                manifest.cost.unwrap_or(1.0),
            )?)
        }
        Method::Ovr => ModelBundle::Ovr(Standardized {
            stats,
            model: OvrOpenModel {
                per_class: read_all(dir, &manifest.classes)?,
            },
        }),
        Method::Oc => {
            let name = manifest
                .detector
                .ok_or_else(|| AsgError::InvalidConfig("oc bundle has no detector".into()))?;
            let detector: OneClassSvmModel = read_json(dir, &name)?;
            ModelBundle::Oc(Standardized {
                stats,
                model: OcOpenModel {
                    detector,
                    num_classes: manifest.num_classes,
                    fallback_ovr: read_fallback(dir, &manifest.fallback)?,
                },
            })
        }
        Method::Moc => ModelBundle::Moc(Standardized {
            stats,
            model: MocModel {
                per_class: read_all(dir, &manifest.classes)?,
                fallback_ovr: read_fallback(dir, &manifest.fallback)?,
            },
        }),
    };
    if bundle.num_classes() != manifest.num_classes || bundle.dim() != manifest.dim {
        return Err(AsgError::InvalidConfig(format!(
            "bundle in {} does not match its manifest",
            dir.display()
        )));
    }
    Ok(bundle)
}
