mod common;

use proptest::prelude::*;
use rand::{Rng as _, SeedableRng};
use relval::rng::Rng;
use relval::validation::{
    bootstrap_plan, kfold_plan, walk_forward_from_sizes, walk_forward_plan, SplitPlan,
    TechniqueConfig,
};

fn labels(rng: &mut Rng, n: usize, rate: f64) -> Vec<bool> {
    let mut l: Vec<bool> = (0..n).map(|_| rng.random_bool(rate)).collect();
    l[0] = true;
    l[n - 1] = false;
    l
}

fn check_kfold(plan: &SplitPlan, labels: &[bool], folds: usize, repeats: usize, stratified: bool) {
    let n = labels.len();
    assert_eq!(plan.runs.len(), folds * repeats);
    for r in 0..repeats {
        let runs: Vec<_> = plan.runs.iter().filter(|x| x.repeat == r).collect();
        assert_eq!(runs.len(), folds);
        let mut seen = vec![0u8; n];
        let sizes: Vec<usize> = runs.iter().map(|x| x.test.len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for run in &runs {
            assert_eq!(run.train.len() + run.test.len(), n);
            let mut in_test = vec![false; n];
            for &i in &run.test {
                seen[i] += 1;
                in_test[i] = true;
            }
            assert!(run.train.iter().all(|&i| !in_test[i]));
            if stratified {
                let total = labels.iter().filter(|l| **l).count() as f64;
                let share = total * run.test.len() as f64 / n as f64;
                let got = run.test.iter().filter(|&&i| labels[i]).count() as f64;
                assert!((got - share).abs() <= 1.0 + 1e-9, "fold defects {got} vs share {share}");
            }
        }
        assert!(seen.iter().all(|&s| s == 1), "repeat {r} does not partition the rows");
    }
}

#[test]
fn kfold_partitions_across_1000_seeds() {
    let mut rng = Rng::seed_from_u64(1);
    for seed in 0..1000u64 {
        let n = rng.random_range(10..200);
        let l = labels(&mut rng, n, 0.25);
        let stratified = seed % 2 == 1;
        let plan = kfold_plan(&l, 10, 2, stratified, seed).unwrap();
        check_kfold(&plan, &l, 10, 2, stratified);
        assert_eq!(plan, kfold_plan(&l, 10, 2, stratified, seed).unwrap());
    }
}

#[test]
fn bootstrap_invariants_across_1000_seeds() {
    let mut rng = Rng::seed_from_u64(2);
    for seed in 0..1000u64 {
        let n = rng.random_range(20..150);
        let l = labels(&mut rng, n, 0.3);
        let plan = bootstrap_plan(&l, 5, seed).unwrap();
        assert_eq!(plan.runs.len(), 5);
        for run in &plan.runs {
            assert_eq!(run.train.len(), n);
            let mut drawn = vec![false; n];
            for &i in &run.train {
                assert!(i < n);
                drawn[i] = true;
            }
            let expected: Vec<usize> = (0..n).filter(|&i| !drawn[i]).collect();
            assert_eq!(run.test, expected);
            let pos = run.test.iter().filter(|&&i| l[i]).count();
            assert!(pos > 0 && pos < run.test.len());
        }
        assert_eq!(plan, bootstrap_plan(&l, 5, seed).unwrap());
    }
}

#[test]
fn bootstrap_holdout_fraction_near_e_inverse() {
    let mut rng = Rng::seed_from_u64(3);
    let l = labels(&mut rng, 1000, 0.2);
    let plan = bootstrap_plan(&l, 100, 42).unwrap();
    let mean = plan.runs.iter().map(|r| r.test.len() as f64 / 1000.0).sum::<f64>() / 100.0;
    assert!((mean - 0.368).abs() <= 0.02, "holdout fraction {mean}");
}

#[test]
fn walk_forward_trains_only_on_the_past() {
    let mut rng = Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let k = rng.random_range(2..8);
        let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..50)).collect();
        let plan = walk_forward_from_sizes(&sizes).unwrap();
        assert_eq!(plan.runs.len(), k - 1);
        assert_eq!(plan.seed, None);
        let mut start = sizes[0];
        for (i, run) in plan.runs.iter().enumerate() {
            assert_eq!(run.train, (0..start).collect::<Vec<_>>());
            assert_eq!(run.test, (start..start + sizes[i + 1]).collect::<Vec<_>>());
            start += sizes[i + 1];
        }
    }
    assert!(walk_forward_from_sizes(&[10]).is_err());
}

#[test]
fn walk_forward_plan_follows_release_order() {
    let d = common::Synth::new("wf", &[30, 40, 50]).build(9);
    let plan = walk_forward_plan(&d).unwrap();
    assert_eq!(plan.runs[0].train.len(), 30);
    assert_eq!(plan.runs[1].train.len(), 70);
    assert_eq!(plan.runs[1].test.len(), 50);
    assert_eq!(TechniqueConfig::WalkForward.plan(&d, 123).unwrap(), plan);
}

#[test]
fn bootstrap_exhausts_retries_when_no_holdout_can_mix() {
    // Two rows leave at most one out, so every holdout is single-class or empty.
    assert!(matches!(
        bootstrap_plan(&[true, false], 3, 1),
        Err(relval::Error::ExhaustedRetries { .. })
    ));
}

proptest! {
    #[test]
    fn kfold_any_shape(n in 4usize..120, folds in 2usize..8, repeats in 1usize..4, stratified: bool, seed: u64) {
        prop_assume!(n >= folds);
        let l: Vec<bool> = (0..n).map(|i| (i * 7 + seed as usize) % 5 == 0).collect();
        let plan = kfold_plan(&l, folds, repeats, stratified, seed).unwrap();
        check_kfold(&plan, &l, folds, repeats, stratified);
    }

    #[test]
    fn technique_ids_are_stable(folds in 2usize..20, repeats in 1usize..20, stratified: bool, iterations in 1usize..500, optimism_reduced: bool) {
        let k = TechniqueConfig::RepeatedKFold { folds, repeats, stratified };
        let b = TechniqueConfig::OutOfSampleBootstrap { iterations, optimism_reduced };
        let kid = k.id();
        let prefix = format!("kfold_{repeats}x{folds}");
        prop_assert!(kid.starts_with(&prefix));
        prop_assert_eq!(kid.ends_with("_stratified"), stratified);
        let prefix = format!("oos_bootstrap_{iterations}");
        prop_assert!(b.id().starts_with(&prefix));
        let back: TechniqueConfig = serde_json::from_str(&serde_json::to_string(&k).unwrap()).unwrap();
        prop_assert_eq!(back, k);
    }
}
