mod common;

use asg::dataset::{make_three_moons, Dataset, Label};
use asg::eval::confusion_and_metrics;
use asg::generation::{GeneratedPool, GenerationConfig};
use asg::open_classifier::{
    empirical_risk, fit_open_classifiers, predict_from_scores, risk_of, train_asg, OpenClassifier,
    SINGLE_CLASS_COST,
};
use asg::svm::{KernelSpec, SmoParams};
use common::moons_generation;
use proptest::prelude::*;

fn small_moons(seed: u64) -> (Dataset, Dataset) {
    make_three_moons(30, 0.1, seed).unwrap()
}

fn quick(seed: u64) -> GenerationConfig {
    moons_generation(seed, 10, 80)
}

fn relabel(data: &Dataset, perm: &[usize]) -> Dataset {
    let labels = data
        .labels()
        .into_iter()
        .map(|l| match l {
            Label::Class(k) => Label::Class(perm[k - 1]),
            Label::Novel => Label::Novel,
        })
        .collect();
    Dataset::from_parts(data.points(), labels).unwrap()
}

#[test]
fn permuting_classes_permutes_scores() {
    let (train, test) = small_moons(0);
    let seen = train.select(
        &(0..train.len())
            .filter(|&i| train.labels()[i] != Label::Class(3))
            .collect::<Vec<_>>(),
    );
    let (std_train, _) = seen.standardize().unwrap();
    let (_, pool) = train_asg(&seen, &quick(0), true).unwrap();
    let (_, stats) = seen.standardize().unwrap();
    let pool = pool.map_features(|x| stats.apply(x)).unwrap();
    let perm = [2, 1];
    let swapped_pool = GeneratedPool {
        negatives: pool
            .negatives
            .iter()
            .map(|(k, v)| (perm[k - 1], v.clone()))
            .collect(),
        positives: pool
            .positives
            .iter()
            .map(|(k, v)| (perm[k - 1], v.clone()))
            .collect(),
    };
    let kernel = KernelSpec::for_dim(2);
    let a =
        fit_open_classifiers(&std_train, &pool, kernel, 1.0, &SmoParams::default(), true).unwrap();
    let b = fit_open_classifiers(
        &relabel(&std_train, &perm),
        &swapped_pool,
        kernel,
        1.0,
        &SmoParams::default(),
        true,
    )
    .unwrap();
    for x in test.features().take(40) {
        let z = stats.apply(x).unwrap();
        for k in 0..2 {
            let da = a[k].decision_value(&z).unwrap();
            let db = b[perm[k] - 1].decision_value(&z).unwrap();
            assert!((da - db).abs() < 1e-9, "{da} vs {db}");
        }
    }
}

#[test]
fn predictions_follow_the_score_rule_on_standardized_inputs() {
    let (train, test) = small_moons(1);
    let (model, pool) = train_asg(&train, &quick(1), false).unwrap();
    assert!(pool.positives.is_empty());
    assert_eq!(model.num_classes(), 2);
    for x in test.features() {
        let p = model.predict(x).unwrap();
        let z = model.standardization.apply(x).unwrap();
        let manual: Vec<f64> = model
            .per_class
            .iter()
            .map(|m| m.decision_value(&z).unwrap())
            .collect();
        assert_eq!(p.confidences, manual);
        assert_eq!(p.label, predict_from_scores(&manual));
    }
}

#[test]
fn pool_is_returned_in_input_units() {
    let (train, _) = small_moons(2);
    let shifted = Dataset::from_parts(
        train
            .points()
            .iter()
            .map(|p| vec![100.0 + 5.0 * p[0], -40.0 + 0.2 * p[1]])
            .collect(),
        train.labels(),
    )
    .unwrap();
    let (_, pool) = train_asg(&shifted, &quick(2), false).unwrap();
    for k in 1..=2 {
        let search = shifted.class_subset(k).bounding_box(0.25).unwrap();
        for x in pool.negative_features(k) {
            for (i, v) in x.iter().enumerate() {
                let slack = 1e-9 * (search.upper()[i].abs() + 1.0);
                assert!(v >= &(search.lower()[i] - slack) && v <= &(search.upper()[i] + slack));
            }
        }
    }
}

#[test]
fn generated_positives_are_ignored_when_disabled() {
    let (train, _) = small_moons(3);
    let (model, pool) = train_asg(&train, &quick(3), false).unwrap();
    let (std_train, stats) = train.standardize().unwrap();
    let std_pool = pool.map_features(|x| stats.apply(x)).unwrap();
    for (k, m) in model.per_class.iter().enumerate() {
        let class = std_train.class_subset(k + 1).points();
        let negs = std_pool.negative_features(k + 1);
        for sv in &m.support_vectors {
            let near = |set: &[Vec<f64>]| {
                set.iter()
                    .any(|p| p.iter().zip(sv).all(|(a, b)| (a - b).abs() < 1e-9))
            };
            assert!(near(&class) || near(&negs));
        }
    }
}

#[test]
fn single_class_model() {
    let (train, test) = small_moons(4);
    let one = train.class_subset(2);
    let one = Dataset::from_parts(one.points(), vec![Label::Class(1); one.len()]).unwrap();
    let (model, _) = train_asg(&one, &quick(4), false).unwrap();
    assert_eq!(model.cost, SINGLE_CLASS_COST);
    assert_eq!(model.num_classes(), 1);
    let preds = model.predict_all(&test).unwrap();
    assert!(preds
        .iter()
        .all(|l| matches!(l, Label::Class(1) | Label::Novel)));
}

#[test]
fn novel_training_labels_are_rejected() {
    let data = Dataset::from_parts(
        vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]],
        vec![Label::Class(1), Label::Class(1), Label::Novel, Label::Novel],
    );
    if let Ok(d) = data {
        assert!(train_asg(&d, &quick(0), false).is_err());
    }
}

#[test]
fn risk_is_one_minus_accuracy_on_a_model() {
    let (train, test) = small_moons(5);
    let (model, _) = train_asg(&train, &quick(5), false).unwrap();
    let truths = test.labels();
    assert!(truths.contains(&Label::Novel));
    let preds = model.predict_all(&test).unwrap();
    let report = confusion_and_metrics(&truths, &preds, 2).unwrap();
    let risk = empirical_risk(&model, &test).unwrap();
    assert!((risk - (1.0 - report.accuracy)).abs() < 1e-12);
}

fn label_strategy() -> impl Strategy<Value = Label> {
    prop_oneof![Just(Label::Novel), (1usize..5).prop_map(Label::Class)]
}

proptest! {
    #[test]
    fn risk_matches_accuracy(pairs in prop::collection::vec((label_strategy(), label_strategy()), 1..60)) {
        let (truths, preds): (Vec<Label>, Vec<Label>) = pairs.into_iter().unzip();
        let report = confusion_and_metrics(&truths, &preds, 4).unwrap();
        prop_assert!((risk_of(&truths, &preds) - (1.0 - report.accuracy)).abs() < 1e-12);
    }

    #[test]
    fn score_rule(scores in prop::collection::vec(-5.0f64..5.0, 1..8)) {
        let label = predict_from_scores(&scores);
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max < 0.0 {
            prop_assert_eq!(label, Label::Novel);
        } else {
            let first = scores.iter().position(|&s| s == max).unwrap() + 1;
            prop_assert_eq!(label, Label::Class(first));
        }
    }
}
