use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, Label, LabeledInstance};
use crate::error::{AsgError, Result};

/// A train/test split with some classes held out of training.
#[derive(Clone, Debug, PartialEq)]
pub struct OpenSplit {
    /// Seen classes only, relabeled `1..=K` in the order of `seen`.
    pub train: Dataset,
    /// Every class; seen ones relabeled like `train`, the rest NOVEL.
    pub test: Dataset,
    /// Original class of every test instance.
    pub test_original: Vec<usize>,
    pub seen: Vec<usize>,
}

/// Samples `n_train` training and `n_test` test instances from every seen
/// class and `n_test` test instances from every other class.
pub fn make_open_split(
    data: &Dataset,
    seen: &[usize],
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> Result<OpenSplit> {
    if seen.is_empty() {
        return Err(AsgError::InvalidConfig("seen class list is empty".into()));
    }
    let mut sorted = seen.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(AsgError::InvalidConfig(
            "seen class list has duplicates".into(),
        ));
    }
    if data.labels().iter().any(|l| l.is_novel()) {
        return Err(AsgError::InvalidConfig(
            "split source must not contain novel labels".into(),
        ));
    }
    let counts = data.class_counts();
    if let Some(&c) = seen
        .iter()
        .find(|&&c| c == 0 || c > counts.len() || counts[c - 1] == 0)
    {
        return Err(AsgError::InvalidConfig(format!(
            "seen class {c} is not present in the data"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut test_original = Vec::new();
    for class in 1..=data.num_classes() {
        let mut members: Vec<usize> = (0..data.len())
            .filter(|&i| data.instances()[i].label == Label::Class(class))
            .collect();
        if members.is_empty() {
            continue;
        }
        let position = seen.iter().position(|&c| c == class);
        let want = n_test + if position.is_some() { n_train } else { 0 };
        if members.len() < want {
            return Err(AsgError::InsufficientData(format!(
                "class {class} has {} instance(s), split needs {want}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let features = |i: usize| data.instances()[i].features.clone();
        let test_label = match position {
            Some(p) => {
                for &i in &members[..n_train] {
                    train.push(LabeledInstance::new(features(i), Label::Class(p + 1)));
                }
                members.drain(..n_train);
                Label::Class(p + 1)
            }
            None => Label::Novel,
        };
        for &i in &members[..n_test] {
            test.push(LabeledInstance::new(features(i), test_label));
            test_original.push(class);
        }
    }
    let k = seen.len();
    Ok(OpenSplit {
        train: Dataset::new(train, data.dim(), k)?,
        test: Dataset::new(test, data.dim(), k)?,
        test_original,
        seen: seen.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(classes: usize, per: usize) -> Dataset {
        let mut f = Vec::new();
        let mut l = Vec::new();
        for c in 1..=classes {
            for i in 0..per {
                f.push(vec![c as f64, i as f64]);
                l.push(Label::Class(c));
            }
        }
        Dataset::from_parts(f, l).unwrap()
    }

    #[test]
    fn seen_235_of_ten() {
        let s = make_open_split(&pool(10, 30), &[2, 3, 5], 10, 5, 1).unwrap();
        assert_eq!(s.train.num_classes(), 3);
        assert_eq!(s.train.class_counts(), vec![10, 10, 10]);
        assert_eq!(s.test.len(), 50);
        assert_eq!(s.test.labels().iter().filter(|l| l.is_novel()).count(), 35);
        // relabeling follows the seen order
        assert!(s.train.instances().iter().all(|i| match i.label {
            Label::Class(1) => i.features[0] == 2.0,
            Label::Class(2) => i.features[0] == 3.0,
            Label::Class(3) => i.features[0] == 5.0,
            _ => false,
        }));
        // disjoint
        for t in s.test.instances() {
            assert!(!s.train.instances().iter().any(|r| r.features == t.features));
        }
    }

    #[test]
    fn too_many_test_points() {
        let err = make_open_split(&pool(3, 10), &[1], 5, 8, 0).unwrap_err();
        assert!(err.to_string().contains("class 1"), "{err}");
        let err = make_open_split(&pool(3, 10), &[1], 2, 11, 0).unwrap_err();
        assert!(err.to_string().contains("class 1"), "{err}");
    }

    #[test]
    fn deterministic() {
        let a = make_open_split(&pool(4, 20), &[4, 1], 5, 5, 9).unwrap();
        let b = make_open_split(&pool(4, 20), &[4, 1], 5, 5, 9).unwrap();
        assert_eq!(a, b);
        let c = make_open_split(&pool(4, 20), &[4, 1], 5, 5, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bad_seen_lists() {
        assert!(make_open_split(&pool(3, 10), &[], 1, 1, 0).is_err());
        assert!(make_open_split(&pool(3, 10), &[4], 1, 1, 0).is_err());
        assert!(make_open_split(&pool(3, 10), &[1, 1], 1, 1, 0).is_err());
    }
}
