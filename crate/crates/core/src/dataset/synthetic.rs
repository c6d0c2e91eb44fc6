use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Dataset, Label, LabeledInstance};
use crate::error::{AsgError, Result};

/// Point on the noise-free arc of moon `class` (1, 2 or 3) at angle `t`.
///
/// Moons 1 and 3 open downward, moon 2 opens upward and sits between them.
pub fn moon_arc_point(class: usize, t: f64) -> [f64; 2] {
    match class {
        1 => [t.cos(), t.sin()],
        2 => [1.0 - t.cos(), -0.25 - t.sin()],
        3 => [2.5 + t.cos(), t.sin()],
        _ => panic!("three moons has classes 1..=3, got {class}"),
    }
}

fn sample_moon(rng: &mut ChaCha8Rng, class: usize, noise: f64) -> Vec<f64> {
    let t = rng.gen_range(0.0..=PI);
    let [x, y] = moon_arc_point(class, t);
    if noise > 0.0 {
        let normal = Normal::new(0.0, noise).expect("noise is finite and positive");
        vec![x + normal.sample(rng), y + normal.sample(rng)]
    } else {
        vec![x, y]
    }
}

fn check_moons_args(n_per_class: usize, noise: f64) -> Result<()> {
    if n_per_class == 0 {
        return Err(AsgError::InvalidConfig("n_per_class must be >= 1".into()));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(AsgError::InvalidConfig(format!(
            "noise must be >= 0, got {noise}"
        )));
    }
    Ok(())
}

/// All three moons with labels 1, 2, 3 and `n_per_class` points each.
pub fn three_moons_pool(n_per_class: usize, noise: f64, seed: u64) -> Result<Dataset> {
    check_moons_args(n_per_class, noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(3 * n_per_class);
    for class in 1..=3 {
        for _ in 0..n_per_class {
            instances.push(LabeledInstance::new(
                sample_moon(&mut rng, class, noise),
                Label::Class(class),
            ));
        }
    }
    Dataset::new(instances, 2, 3)
}

/// Three interleaved moons: moons 1 and 2 are seen, moon 3 only shows up in
/// the test set, labeled novel.
pub fn make_three_moons(n_per_class: usize, noise: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    check_moons_args(n_per_class, noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::with_capacity(2 * n_per_class);
    for class in 1..=2 {
        for _ in 0..n_per_class {
            train.push(LabeledInstance::new(
                sample_moon(&mut rng, class, noise),
                Label::Class(class),
            ));
        }
    }
    let mut test = Vec::with_capacity(3 * n_per_class);
    for class in 1..=3 {
        let label = if class == 3 {
            Label::Novel
        } else {
            Label::Class(class)
        };
        for _ in 0..n_per_class {
            test.push(LabeledInstance::new(
                sample_moon(&mut rng, class, noise),
                label,
            ));
        }
    }
    Ok((Dataset::new(train, 2, 2)?, Dataset::new(test, 2, 2)?))
}

/// Multi-class tabular data: each class is a mixture of anisotropic Gaussian
/// clusters with randomly placed centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GaussianClassesSpec {
    pub num_classes: usize,
    pub dim: usize,
    pub clusters_per_class: usize,
    /// Standard deviation of the cluster-center distribution.
    pub class_sep: f64,
    /// Magnitude of the random shear applied to each cluster.
    pub shear: f64,
    pub n_per_class: usize,
    pub seed: u64,
}

impl Default for GaussianClassesSpec {
    fn default() -> Self {
        Self {
            num_classes: 10,
            dim: 16,
            clusters_per_class: 2,
            class_sep: 1.5,
            shear: 0.3,
            n_per_class: 200,
            seed: 0,
        }
    }
}

pub fn make_gaussian_classes(spec: &GaussianClassesSpec) -> Result<Dataset> {
    if spec.num_classes == 0
        || spec.dim == 0
        || spec.clusters_per_class == 0
        || spec.n_per_class == 0
    {
        return Err(AsgError::InvalidConfig(
            "gaussian classes need non-zero classes, dim, clusters and n_per_class".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let d = spec.dim;
    let clusters: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..spec.num_classes)
        .map(|_| {
            (0..spec.clusters_per_class)
                .map(|_| {
                    let center: Vec<f64> = (0..d)
                        .map(|_| spec.class_sep * rng.sample::<f64, _>(StandardNormal))
                        .collect();
                    let mut shear = vec![0.0; d * d];
                    for (idx, a) in shear.iter_mut().enumerate() {
                        let noise: f64 = rng.sample(StandardNormal);
                        *a = spec.shear * noise / (d as f64).sqrt();
                        if idx / d == idx % d {
                            *a += 1.0;
                        }
                    }
                    (center, shear)
                })
                .collect()
        })
        .collect();

    let mut instances = Vec::with_capacity(spec.num_classes * spec.n_per_class);
    for (c, class_clusters) in clusters.iter().enumerate() {
        for i in 0..spec.n_per_class {
            let (center, shear) = &class_clusters[i % class_clusters.len()];
            let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let x = (0..d)
                .map(|r| center[r] + (0..d).map(|k| shear[r * d + k] * z[k]).sum::<f64>())
                .collect();
            instances.push(LabeledInstance::new(x, Label::Class(c + 1)));
        }
    }
    Dataset::new(instances, d, spec.num_classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::euclidean;

    #[test]
    fn moons_deterministic() {
        let a = make_three_moons(30, 0.1, 7).unwrap();
        let b = make_three_moons(30, 0.1, 7).unwrap();
        assert_eq!(a, b);
        let c = make_three_moons(30, 0.1, 8).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn moons_shapes() {
        let (train, test) = make_three_moons(20, 0.1, 1).unwrap();
        assert_eq!((train.len(), train.num_classes()), (40, 2));
        assert_eq!(test.len(), 60);
        assert_eq!(test.labels().iter().filter(|l| l.is_novel()).count(), 20);
        assert!(train.labels().iter().all(|l| !l.is_novel()));
    }

    #[test]
    fn noise_free_points_lie_on_arcs() {
        let (train, test) = make_three_moons(50, 0.0, 3).unwrap();
        let centers = [(1, [0.0, 0.0]), (2, [1.0, -0.25]), (3, [2.5, 0.0])];
        let check = |class: usize, x: &[f64]| {
            let c = centers[class - 1].1;
            assert!((euclidean(x, &c) - 1.0).abs() < 1e-12);
        };
        for inst in train.instances() {
            check(inst.label.class_index().unwrap(), &inst.features);
        }
        for inst in test.instances() {
            check(inst.label.class_index().unwrap_or(3), &inst.features);
        }
    }

    #[test]
    fn nearest_centroid_separates_seen_moons() {
        let (train, _) = make_three_moons(100, 0.1, 11).unwrap();
        let centroid = |k: usize| {
            let sub = train.class_subset(k);
            let n = sub.len() as f64;
            let mut c = [0.0; 2];
            for x in sub.features() {
                c[0] += x[0] / n;
                c[1] += x[1] / n;
            }
            c
        };
        let (c1, c2) = (centroid(1), centroid(2));
        let correct = train
            .instances()
            .iter()
            .filter(|i| {
                let pred = if euclidean(&i.features, &c1) <= euclidean(&i.features, &c2) {
                    1
                } else {
                    2
                };
                i.label == Label::Class(pred)
            })
            .count();
        assert!(
            correct as f64 / train.len() as f64 > 0.9,
            "accuracy {}",
            correct
        );
    }

    #[test]
    fn gaussian_classes_shape() {
        let spec = GaussianClassesSpec {
            n_per_class: 12,
            ..Default::default()
        };
        let d = make_gaussian_classes(&spec).unwrap();
        assert_eq!((d.len(), d.dim(), d.num_classes()), (120, 16, 10));
        assert_eq!(d.class_counts(), vec![12; 10]);
        assert_eq!(d, make_gaussian_classes(&spec).unwrap());
    }
}
