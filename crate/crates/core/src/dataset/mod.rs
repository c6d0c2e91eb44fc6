//! Labeled datasets, feature standardization and the geometric helpers the
//! sample generator relies on (bounding boxes, closest-pair distances).

mod csv_io;
mod synthetic;

pub use csv_io::{load_csv, parse_label, write_csv, NOVEL_TOKEN};
pub use synthetic::{
    make_gaussian_classes, make_three_moons, moon_arc_point, three_moons_pool, GaussianClassesSpec,
};

use serde::{Deserialize, Serialize};

use crate::error::{AsgError, Result};

/// Floor applied to standard deviations and box ranges.
pub const SCALE_FLOOR: f64 = 1e-12;

/// Class label: a seen class index in `1..=K`, or the novel option.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "usize", try_from = "usize")]
pub enum Label {
    Class(usize),
    Novel,
}

impl Label {
    pub fn is_novel(self) -> bool {
        matches!(self, Label::Novel)
    }

    pub fn class_index(self) -> Option<usize> {
        match self {
            Label::Class(k) => Some(k),
            Label::Novel => None,
        }
    }

    /// Integer code used in files: `0` is novel, seen classes keep their index.
    pub fn code(self) -> usize {
        match self {
            Label::Class(k) => k,
            Label::Novel => 0,
        }
    }
}

impl From<Label> for usize {
    fn from(label: Label) -> usize {
        label.code()
    }
}

impl TryFrom<usize> for Label {
    type Error = String;

    fn try_from(code: usize) -> std::result::Result<Self, String> {
        Ok(if code == 0 {
            Label::Novel
        } else {
            Label::Class(code)
        })
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Class(k) => write!(f, "{k}"),
            Label::Novel => f.write_str(NOVEL_TOKEN),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub features: Vec<f64>,
    pub label: Label,
}

impl LabeledInstance {
    pub fn new(features: Vec<f64>, label: Label) -> Self {
        Self { features, label }
    }
}

/// An ordered collection of labeled instances sharing one dimensionality.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    instances: Vec<LabeledInstance>,
    dim: usize,
    num_classes: usize,
}

impl Dataset {
    pub fn new(instances: Vec<LabeledInstance>, dim: usize, num_classes: usize) -> Result<Self> {
        if num_classes == 0 {
            return Err(AsgError::InvalidConfig(
                "dataset needs at least one class".into(),
            ));
        }
        for (i, inst) in instances.iter().enumerate() {
            if inst.features.len() != dim {
                return Err(AsgError::dimension(
                    dim,
                    inst.features.len(),
                    format!("instance {i}"),
                ));
            }
            match inst.label {
                Label::Class(k) if k == 0 || k > num_classes => {
                    return Err(AsgError::InvalidConfig(format!(
                        "instance {i} has label {k} outside 1..={num_classes}"
                    )));
                }
                _ => {}
            }
        }
        Ok(Self {
            instances,
            dim,
            num_classes,
        })
    }

    /// Builds a dataset whose class count is the largest seen label.
    pub fn from_parts(features: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(AsgError::dimension(
                features.len(),
                labels.len(),
                "label count",
            ));
        }
        let dim = features
            .first()
            .map(Vec::len)
            .ok_or_else(|| AsgError::EmptyInput("no instances".into()))?;
        let num_classes = labels
            .iter()
            .filter_map(|l| l.class_index())
            .max()
            .unwrap_or(1);
        let instances = features
            .into_iter()
            .zip(labels)
            .map(|(f, l)| LabeledInstance::new(f, l))
            .collect();
        Self::new(instances, dim, num_classes)
    }

    /// Points that all carry one label; used for generated pools.
    pub fn single_class(points: Vec<Vec<f64>>, dim: usize) -> Result<Self> {
        let instances = points
            .into_iter()
            .map(|p| LabeledInstance::new(p, Label::Class(1)))
            .collect();
        Self::new(instances, dim, 1)
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn instances(&self) -> &[LabeledInstance] {
        &self.instances
    }

    pub fn into_instances(self) -> Vec<LabeledInstance> {
        self.instances
    }

    pub fn features(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.instances.iter().map(|i| i.features.as_slice())
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.instances.iter().map(|i| i.features.clone()).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    /// Number of instances per seen class, index 0 holding class 1.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for inst in &self.instances {
            if let Label::Class(k) = inst.label {
                counts[k - 1] += 1;
            }
        }
        counts
    }

    /// Errors unless every seen class has at least `min` instances.
    pub fn require_class_sizes(&self, min: usize, why: &str) -> Result<()> {
        for (i, &c) in self.class_counts().iter().enumerate() {
            if c < min {
                return Err(AsgError::InsufficientData(format!(
                    "class {} has {c} instance(s), {why} needs at least {min}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// All and only the instances of class `k`, in original order.
    pub fn class_subset(&self, k: usize) -> Dataset {
        let instances = self
            .instances
            .iter()
            .filter(|i| i.label == Label::Class(k))
            .cloned()
            .collect();
        Dataset {
            instances,
            dim: self.dim,
            num_classes: self.num_classes,
        }
    }

    /// Keeps only the instances at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            dim: self.dim,
            num_classes: self.num_classes,
        }
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() == self.dim {
            Ok(())
        } else {
            Err(AsgError::dimension(self.dim, x.len(), "feature vector"))
        }
    }

    /// Standardizes every column to zero mean and unit (population) variance.
    pub fn standardize(&self) -> Result<(Dataset, StandardizationStats)> {
        let stats = StandardizationStats::fit(self)?;
        let out = stats.apply_dataset(self)?;
        Ok((out, stats))
    }

    pub fn min_pairwise_distance(&self) -> Result<f64> {
        let points: Vec<&[f64]> = self.features().collect();
        min_pairwise_distance(&points)
    }

    pub fn bounding_box(&self, margin_fraction: f64) -> Result<SearchBox> {
        let points: Vec<&[f64]> = self.features().collect();
        SearchBox::around(&points, margin_fraction)
    }
}

/// Per-column mean and standard deviation computed on training data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl StandardizationStats {
    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(AsgError::EmptyInput(
                "cannot standardize an empty dataset".into(),
            ));
        }
        let n = data.len() as f64;
        let d = data.dim();
        let mut mean = vec![0.0; d];
        for x in data.features() {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for x in data.features() {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| (s / n).sqrt().max(SCALE_FLOOR))
            .collect();
        Ok(Self { mean, scale })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(AsgError::dimension(self.dim(), x.len(), "standardization"));
        }
        Ok(x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect())
    }

    pub fn invert(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.dim() {
            return Err(AsgError::dimension(self.dim(), z.len(), "standardization"));
        }
        Ok(z.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| v * s + m)
            .collect())
    }

    pub fn apply_dataset(&self, data: &Dataset) -> Result<Dataset> {
        let instances = data
            .instances()
            .iter()
            .map(|i| Ok(LabeledInstance::new(self.apply(&i.features)?, i.label)))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(instances, data.dim(), data.num_classes())
    }
}

/// Axis-aligned search domain for the optimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(AsgError::dimension(
                lower.len(),
                upper.len(),
                "search box bounds",
            ));
        }
        if lower.is_empty() {
            return Err(AsgError::EmptyInput("search box has no dimensions".into()));
        }
        if let Some(j) = (0..lower.len()).find(|&j| !(lower[j] <= upper[j])) {
            return Err(AsgError::InvalidConfig(format!(
                "search box dimension {j}: lower {} exceeds upper {}",
                lower[j], upper[j]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Per-dimension `[min - m*range, max + m*range]` over `points`.
    pub fn around(points: &[&[f64]], margin_fraction: f64) -> Result<Self> {
        if !(margin_fraction >= 0.0) {
            return Err(AsgError::InvalidConfig(format!(
                "margin fraction must be >= 0, got {margin_fraction}"
            )));
        }
        let first = points
            .first()
            .ok_or_else(|| AsgError::EmptyInput("bounding box of no points".into()))?;
        let mut lo = first.to_vec();
        let mut hi = first.to_vec();
        for p in points {
            if p.len() != lo.len() {
                return Err(AsgError::dimension(lo.len(), p.len(), "bounding box"));
            }
            for j in 0..p.len() {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        for j in 0..lo.len() {
            let pad = margin_fraction * (hi[j] - lo[j]).max(SCALE_FLOOR);
            lo[j] -= pad;
            hi[j] += pad;
        }
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn diagonal(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| (u - l) * (u - l))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Distance of the closest pair among `points`; `0` when a point repeats.
pub fn min_pairwise_distance(points: &[&[f64]]) -> Result<f64> {
    if points.len() < 2 {
        return Err(AsgError::InsufficientData(format!(
            "closest pair needs at least 2 points, got {}",
            points.len()
        )));
    }
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            best = best.min(squared_distance(points[i], points[j]));
        }
    }
    Ok(best.sqrt())
}

/// Closest distance between two points that differ; `None` if all coincide.
pub fn min_distinct_distance(points: &[&[f64]]) -> Option<f64> {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d = squared_distance(points[i], points[j]);
            if d > 0.0 {
                best = best.min(d);
            }
        }
    }
    best.is_finite().then(|| best.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(points: &[&[f64]], labels: &[usize]) -> Dataset {
        Dataset::from_parts(
            points.iter().map(|p| p.to_vec()).collect(),
            labels
                .iter()
                .map(|&l| Label::try_from(l).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn standardize_two_points() {
        let d = ds(&[&[0.0], &[2.0]], &[1, 1]);
        let (z, stats) = d.standardize().unwrap();
        assert_eq!(stats.mean, vec![1.0]);
        assert_eq!(stats.scale, vec![1.0]);
        assert_eq!(z.points(), vec![vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn standardize_constant_column() {
        let d = ds(&[&[5.0, 1.0], &[5.0, 2.0], &[5.0, 3.0]], &[1, 1, 1]);
        let (z, stats) = d.standardize().unwrap();
        assert_eq!(stats.scale[0], SCALE_FLOOR);
        assert!(z.features().all(|x| x[0] == 0.0));
    }

    #[test]
    fn standardize_is_idempotent() {
        let d = ds(
            &[&[1.0, 10.0], &[2.0, -4.0], &[7.0, 3.0], &[0.5, 0.0]],
            &[1, 2, 1, 2],
        );
        let (z, _) = d.standardize().unwrap();
        let (zz, stats) = z.standardize().unwrap();
        for j in 0..2 {
            assert!(stats.mean[j].abs() < 1e-9);
            assert!((stats.scale[j] - 1.0).abs() < 1e-9);
        }
        for (a, b) in z.features().zip(zz.features()) {
            for (u, v) in a.iter().zip(b) {
                assert!((u - v).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn class_subset_filters_in_order() {
        let d = ds(&[&[1.0], &[2.0], &[3.0]], &[1, 2, 1]);
        assert_eq!(d.class_subset(1).points(), vec![vec![1.0], vec![3.0]]);
        assert_eq!(d.class_subset(2).points(), vec![vec![2.0]]);
        let d3 = ds(&[&[1.0], &[2.0]], &[1, 3]);
        assert!(d3.class_subset(2).is_empty());
    }

    #[test]
    fn closest_pair_by_hand() {
        let d = ds(&[&[0.0, 0.0], &[3.0, 4.0], &[0.0, 1.0]], &[1, 1, 1]);
        assert_eq!(d.min_pairwise_distance().unwrap(), 1.0);
        let dup = ds(&[&[0.0, 0.0], &[3.0, 4.0], &[0.0, 0.0]], &[1, 1, 1]);
        assert_eq!(dup.min_pairwise_distance().unwrap(), 0.0);
        assert_eq!(
            min_distinct_distance(&[&[0.0, 0.0], &[3.0, 4.0], &[0.0, 0.0]]),
            Some(5.0)
        );
        let one = ds(&[&[0.0]], &[1]);
        assert!(matches!(
            one.min_pairwise_distance(),
            Err(AsgError::InsufficientData(_))
        ));
    }

    #[test]
    fn bounding_box_formula() {
        let d = ds(&[&[0.0], &[10.0]], &[1, 1]);
        let b = d.bounding_box(0.1).unwrap();
        assert_eq!((b.lower()[0], b.upper()[0]), (-1.0, 11.0));
        let tight = d.bounding_box(0.0).unwrap();
        assert_eq!((tight.lower()[0], tight.upper()[0]), (0.0, 10.0));
        let flat = ds(&[&[3.0], &[3.0]], &[1, 1]).bounding_box(0.5).unwrap();
        assert!(flat.lower()[0] < 3.0 && flat.upper()[0] > 3.0);
        assert!(d.bounding_box(-0.1).is_err());
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        let bad = Dataset::new(
            vec![
                LabeledInstance::new(vec![1.0, 2.0], Label::Class(1)),
                LabeledInstance::new(vec![1.0], Label::Class(1)),
            ],
            2,
            1,
        );
        assert!(matches!(bad, Err(AsgError::Dimension { .. })));
        let label = Dataset::new(vec![LabeledInstance::new(vec![1.0], Label::Class(3))], 1, 2);
        assert!(label.is_err());
    }

    proptest! {
        #[test]
        fn closest_pair_matches_scan(raw in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..60)) {
            let pts: Vec<Vec<f64>> = raw.iter().map(|&(a, b)| vec![a, b]).collect();
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let mut scan = f64::INFINITY;
            for a in &pts {
                for b in &pts {
                    if !std::ptr::eq(a, b) {
                        scan = scan.min(((a[0]-b[0]).powi(2) + (a[1]-b[1]).powi(2)).sqrt());
                    }
                }
            }
            prop_assert!((min_pairwise_distance(&refs).unwrap() - scan).abs() <= 1e-12);
        }

        #[test]
        fn class_subsets_partition(labels in prop::collection::vec(1usize..5, 1..40)) {
            let pts: Vec<Vec<f64>> = (0..labels.len()).map(|i| vec![i as f64]).collect();
            let d = Dataset::from_parts(pts, labels.iter().map(|&l| Label::Class(l)).collect()).unwrap();
            let mut seen: Vec<f64> = Vec::new();
            for k in 1..=d.num_classes() {
                seen.extend(d.class_subset(k).features().map(|x| x[0]));
            }
            seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let all: Vec<f64> = (0..labels.len()).map(|i| i as f64).collect();
            prop_assert_eq!(seen, all);
        }

        #[test]
        fn box_contains_points(raw in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..30), margin in 0.0f64..2.0) {
            let pts: Vec<Vec<f64>> = raw.iter().map(|&(a, b)| vec![a, b]).collect();
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let b = SearchBox::around(&refs, margin).unwrap();
            prop_assert!(refs.iter().all(|p| b.contains(p)));
        }
    }
}
