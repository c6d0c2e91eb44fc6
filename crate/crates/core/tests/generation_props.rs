mod common;

use asg::dataset::{euclidean, make_three_moons, Dataset, Label};
use asg::dfo::{minimize_random, OptBudget, Racos};
use asg::generation::{
    generate_negatives, generate_pool, nearest_distance, negative_objective, penalty_p1,
    penalty_p2, positive_objective, GenerationConfig, Radius, SvmTrainer,
};
use asg::svm::{train_binary_svm, KernelSpec, SmoParams};
use common::moons_generation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn standardized_moons(seed: u64) -> Dataset {
    let (train, _) = make_three_moons(100, 0.1, seed).unwrap();
    train.standardize().unwrap().0
}

fn trainer(data: &Dataset, cost: f64) -> SvmTrainer {
    SvmTrainer::for_data(data, cost, SmoParams::default()).unwrap()
}

fn tight_gaussian(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.3).unwrap();
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![normal.sample(&mut rng), normal.sample(&mut rng)])
        .collect();
    Dataset::from_parts(points, vec![Label::Class(1); n]).unwrap()
}

#[test]
fn negative_objective_composes_independent_terms() {
    let data = standardized_moons(0);
    let class = data.class_subset(1);
    let points = class.points();
    let cfg = GenerationConfig::default();
    let t = trainer(&data, 1.0);
    let negatives = vec![vec![3.0, 3.0], vec![-3.0, 2.5]];
    for x in [vec![6.0, -4.0], points[3].clone(), vec![0.2, 0.1]] {
        let terms = negative_objective(&x, &class, &negatives, &cfg, t).unwrap();
        // independent discriminator: cold training on the class against negatives + x
        let neg: Vec<Vec<f64>> = negatives.iter().cloned().chain([x.clone()]).collect();
        let fresh = train_binary_svm(
            &class,
            &Dataset::single_class(neg, 2).unwrap(),
            t.kernel,
            t.cost,
            &SmoParams::default(),
        )
        .unwrap();
        let p = fresh.predict_prob(&x).unwrap();
        assert!(
            (terms.probability - p).abs() < 2e-3,
            "{} vs {p}",
            terms.probability
        );
        let radii = cfg.radii_for(&points).unwrap();
        let p1 = penalty_p1(&x, &points, radii.c1);
        let p2 = penalty_p2(&x, &negatives, radii.c2);
        assert_eq!(terms.distance_penalty, p1);
        assert_eq!(terms.spread_penalty, p2);
        assert!((terms.value - (terms.probability + 0.1 * p1 + 0.1 * p2)).abs() < 1e-12);
    }
}

#[test]
fn far_candidate_is_dominated_by_distance() {
    let data = standardized_moons(1);
    let class = data.class_subset(1);
    let cfg = GenerationConfig::default();
    let far = negative_objective(&[40.0, -40.0], &class, &[], &cfg, trainer(&data, 1.0)).unwrap();
    assert!(far.probability <= 0.5 + 1e-9);
    assert!(0.1 * far.distance_penalty > far.probability);
    let member = class.points()[0].clone();
    let on = negative_objective(&member, &class, &[], &cfg, trainer(&data, 1.0)).unwrap();
    assert_eq!(on.distance_penalty, 0.0);
    assert!(on.probability > far.probability);
    assert!(on.value >= 0.1 * on.distance_penalty + 0.1 * on.spread_penalty);
}

#[test]
fn weightless_objectives_are_bare_probabilities() {
    let data = standardized_moons(2);
    let class = data.class_subset(2);
    let cfg = GenerationConfig {
        lambda1: 0.0,
        lambda2: 0.0,
        eta: 0.0,
        ..Default::default()
    };
    let negs = vec![vec![2.0, 2.0]];
    let x = [0.5, -0.5];
    let n = negative_objective(&x, &class, &negs, &cfg, trainer(&data, 1.0)).unwrap();
    assert_eq!(n.value, n.probability);
    let p = positive_objective(&x, &class, &negs, &[], &cfg, trainer(&data, 1.0)).unwrap();
    assert_eq!(p.value, -p.probability);
}

#[test]
fn positive_objective_grid_oracle_in_one_dimension() {
    let points: Vec<Vec<f64>> = [-1.0, -0.6, -0.1, 0.3, 0.8, 1.2]
        .iter()
        .map(|&v| vec![v])
        .collect();
    let class = Dataset::from_parts(points, vec![Label::Class(1); 6]).unwrap();
    let cfg = GenerationConfig {
        c3: Radius::Fixed(0.5),
        ..Default::default()
    };
    let t = SvmTrainer::new(KernelSpec::for_dim(1), 10.0, SmoParams::default()).unwrap();
    let positives = vec![vec![0.0]];
    let objective = |x: &[f64]| {
        positive_objective(x, &class, &positives, &[], &cfg, t)
            .unwrap()
            .value
    };
    let search = class.bounding_box(0.25).unwrap();
    let (lo, hi) = (search.lower()[0], search.upper()[0]);
    let steps = 2000;
    let h = (hi - lo) / steps as f64;
    let (grid_x, grid_v) = (0..=steps)
        .map(|i| lo + h * i as f64)
        .map(|x| (x, objective(&[x])))
        .fold(
            (lo, f64::INFINITY),
            |b, (x, v)| if v < b.1 { (x, v) } else { b },
        );
    let r = minimize_random(&mut |x| objective(x), &search, &OptBudget::new(4000, 5)).unwrap();
    assert!(
        (r.best_x[0] - grid_x).abs() <= 2.0 * h,
        "random {} grid {}",
        r.best_x[0],
        grid_x
    );
    assert!(r.best_value <= grid_v + 1e-6);
}

#[test]
fn pools_stay_in_boxes_and_repeat_bitwise() {
    let data = standardized_moons(3);
    let cfg = moons_generation(3, 12, 150);
    let t = trainer(&data, 10.0);
    let a = generate_pool(&data, &cfg, t, &Racos::default(), true).unwrap();
    let b = generate_pool(&data, &cfg, t, &Racos::default(), true).unwrap();
    assert_eq!(a, b);
    for k in 1..=2 {
        let search = data
            .class_subset(k)
            .bounding_box(cfg.margin_fraction)
            .unwrap();
        for s in a.negatives[&k].iter().chain(&a.positives[&k]) {
            assert!(search.contains(&s.features));
            assert_eq!(s.features.len(), 2);
        }
        assert_eq!(a.negatives[&k].len(), 12);
        assert_eq!(a.positives[&k].len(), 12);
    }
    let c = generate_pool(
        &data,
        &moons_generation(4, 12, 150),
        t,
        &Racos::default(),
        true,
    )
    .unwrap();
    assert_ne!(a, c);
}

#[test]
fn negatives_scatter_near_the_class() {
    let data = standardized_moons(5);
    let cfg = moons_generation(5, 30, 300);
    let negatives =
        generate_negatives(&data, &cfg, trainer(&data, 10.0), &Racos::default()).unwrap();
    for k in 1..=2 {
        let class = data.class_subset(k);
        let points = class.points();
        let search = class.bounding_box(cfg.margin_fraction).unwrap();
        let radii = cfg.radii_for(&points).unwrap();
        let feats: Vec<Vec<f64>> = negatives[&k].iter().map(|s| s.features.clone()).collect();
        let mean_nn = feats
            .iter()
            .enumerate()
            .map(|(i, x)| {
                feats
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, y)| euclidean(x, y))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / feats.len() as f64;
        assert!(mean_nn >= 0.5 * radii.c2, "class {k}: mean nn {mean_nn}");
        let slack = 0.25 * search.diagonal();
        let near = feats
            .iter()
            .filter(|x| nearest_distance(x, &points).unwrap() <= radii.c1 + slack)
            .count();
        assert!(
            near as f64 >= 0.8 * feats.len() as f64,
            "class {k}: {near} near"
        );
    }
}

#[test]
fn positives_of_a_tight_class_look_positive_and_spread() {
    let data = tight_gaussian(40, 8);
    let cfg = moons_generation(8, 20, 200);
    let pool = generate_pool(&data, &cfg, trainer(&data, 10.0), &Racos::default(), true).unwrap();
    let class = data.class_subset(1);
    let negs = Dataset::single_class(pool.negative_features(1), 2).unwrap();
    let disc = train_binary_svm(
        &class,
        &negs,
        KernelSpec::for_dim(2),
        10.0,
        &SmoParams::default(),
    )
    .unwrap();
    let positives = pool.positive_features(1);
    let accepted = positives
        .iter()
        .filter(|x| disc.decision_value(x).unwrap() > 0.0)
        .count();
    assert!(
        accepted as f64 >= 0.8 * positives.len() as f64,
        "{accepted}/{}",
        positives.len()
    );
    let c3 = cfg.radii_for(&class.points()).unwrap().c3;
    let mut pairs = 0;
    let mut far = 0;
    for i in 0..positives.len() {
        for j in i + 1..positives.len() {
            pairs += 1;
            if euclidean(&positives[i], &positives[j]) > 0.9 * c3 {
                far += 1;
            }
        }
    }
    assert!(far as f64 >= 0.9 * pairs as f64, "{far}/{pairs}");
}

#[test]
fn singleton_class_is_named() {
    let data = Dataset::from_parts(
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0]],
        vec![Label::Class(1), Label::Class(1), Label::Class(2)],
    )
    .unwrap();
    let err = generate_negatives(
        &data,
        &moons_generation(0, 1, 10),
        trainer(&data, 1.0),
        &Racos::default(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("class 2"), "{err}");
}
