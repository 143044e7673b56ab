mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use relval::dataset::split_last_release;
use relval::metaval::{
    actual_auc_on_b, baselines, evaluate_selection, holdout_seed, select_classifier,
    select_from_estimates, TechniqueEvaluation,
};
use relval::validation::TechniqueConfig;

fn small_techniques() -> Vec<TechniqueConfig> {
    vec![
        TechniqueConfig::WalkForward,
        TechniqueConfig::RepeatedKFold { folds: 3, repeats: 2, stratified: false },
        TechniqueConfig::OutOfSampleBootstrap { iterations: 5, optimism_reduced: false },
        TechniqueConfig::OutOfSampleBootstrap { iterations: 5, optimism_reduced: true },
    ]
}

fn actual_map(d: &relval::Dataset, master: u64) -> BTreeMap<String, f64> {
    let (a, b) = split_last_release(d).unwrap();
    common::fast_roster()
        .iter()
        .filter_map(|s| {
            let seed = holdout_seed(master, &d.project_name, &s.name);
            actual_auc_on_b(s, &a, &b, seed).ok().map(|v| (s.name.clone(), v))
        })
        .collect()
}

#[test]
fn selected_actual_lies_between_worst_and_best() {
    let roster = common::fast_roster();
    for k in 0..6u64 {
        let d = common::Synth::new(&format!("p{k}"), &[60, 80, 90, 100])
            .drift(&[-1.2, -0.8, -1.0, -0.6])
            .build(100 + k);
        let actual = actual_map(&d, 7);
        let triple = baselines(&d.project_name, &actual).unwrap();
        assert!(triple.worst_auc <= triple.medium_auc && triple.medium_auc <= triple.best_auc);
        let (part_a, _) = split_last_release(&d).unwrap();
        for t in small_techniques() {
            let sel = select_classifier(&t, &part_a, &roster, 7).unwrap();
            let eval = evaluate_selection(&d.project_name, &sel, &actual).unwrap();
            assert!(
                triple.worst_auc <= eval.actual_auc && eval.actual_auc <= triple.best_auc,
                "{}: {} outside [{}, {}]",
                t.id(),
                eval.actual_auc,
                triple.worst_auc,
                triple.best_auc
            );
            assert_eq!(eval.bias, eval.estimated_auc - eval.actual_auc);
            assert_eq!(eval.absolute_bias, eval.bias.abs());
        }
    }
}

#[test]
fn perfect_oracle_selects_the_best_on_50_datasets() {
    for k in 0..50u64 {
        let signal = 0.5 + (k % 5) as f64 * 0.4;
        let d = common::Synth::new(&format!("o{k}"), &[40, 50, 70]).signal(signal).build(500 + k);
        let actual = actual_map(&d, 11);
        assert!(actual.len() >= 2, "dataset {k} lost its roster");
        let triple = baselines(&d.project_name, &actual).unwrap();
        for t in small_techniques() {
            let oracle: Vec<(String, relval::Result<f64>)> =
                actual.iter().map(|(n, v)| (n.clone(), Ok(*v))).collect();
            let sel = select_from_estimates(&t.id(), oracle).unwrap();
            let eval = evaluate_selection(&d.project_name, &sel, &actual).unwrap();
            assert_eq!(eval.actual_auc, triple.best_auc);
            assert_eq!(eval.selected, triple.best);
            assert_eq!(eval.bias, 0.0);
        }
    }
}

#[test]
fn selection_is_reproducible_for_a_fixed_master_seed() {
    let roster = common::fast_roster();
    let d = common::Synth::new("rep", &[50, 60, 70]).build(3);
    let (a, _) = split_last_release(&d).unwrap();
    let t = TechniqueConfig::OutOfSampleBootstrap { iterations: 4, optimism_reduced: false };
    let first = select_classifier(&t, &a, &roster, 99).unwrap();
    let second = select_classifier(&t, &a, &roster, 99).unwrap();
    assert_eq!(first, second);
}

fn auc_map() -> impl Strategy<Value = BTreeMap<String, f64>> {
    prop::collection::btree_map("[a-f]{1,3}", (0u8..=20).prop_map(|v| v as f64 / 20.0), 1..9)
}

proptest! {
    #[test]
    fn baseline_order_and_membership(actual in auc_map()) {
        let t = baselines("p", &actual).unwrap();
        prop_assert!(t.worst_auc <= t.medium_auc && t.medium_auc <= t.best_auc);
        prop_assert_eq!(actual[&t.best], t.best_auc);
        prop_assert_eq!(actual[&t.medium], t.medium_auc);
        prop_assert_eq!(actual[&t.worst], t.worst_auc);
        let below = actual.values().filter(|v| **v < t.medium_auc).count();
        let n = actual.len();
        prop_assert!(below <= (n - 1) / 2);
    }

    #[test]
    fn selection_is_argmax_with_alphabetical_ties(estimates in auc_map()) {
        let input = estimates.iter().map(|(k, v)| (k.clone(), Ok(*v))).collect();
        let sel = select_from_estimates("t", input).unwrap();
        let max = estimates.values().copied().fold(f64::MIN, f64::max);
        let first = estimates.iter().find(|(_, v)| **v == max).unwrap().0;
        prop_assert_eq!(&sel.selected, first);
        prop_assert_eq!(sel.selected_estimate, max);
    }

    #[test]
    fn selection_lies_between_baselines(estimates in auc_map(), actual in auc_map()) {
        let shared: BTreeMap<String, f64> = actual.keys().map(|k| (k.clone(), estimates.get(k).copied().unwrap_or(0.5))).collect();
        let input = shared.iter().map(|(k, v)| (k.clone(), Ok(*v))).collect();
        let sel = select_from_estimates("t", input).unwrap();
        let eval = evaluate_selection("p", &sel, &actual).unwrap();
        let t = baselines("p", &actual).unwrap();
        prop_assert!(t.worst_auc <= eval.actual_auc && eval.actual_auc <= t.best_auc);
    }

    #[test]
    fn bias_definition(est in 0.0f64..1.0, act in 0.0f64..1.0) {
        let e = TechniqueEvaluation::new("p", "t", "c", est, act);
        prop_assert_eq!(e.bias, est - act);
        prop_assert_eq!(e.absolute_bias, (est - act).abs());
    }
}

#[test]
fn failed_estimates_are_excluded_not_selected() {
    let sel = select_from_estimates(
        "t",
        vec![
            ("a".into(), Err(relval::Error::SingleClass)),
            ("b".into(), Ok(0.6)),
            ("c".into(), Ok(f64::NAN)),
        ],
    )
    .unwrap();
    assert_eq!(sel.selected, "b");
    assert_eq!(sel.excluded.len(), 2);
    assert!(matches!(
        select_from_estimates("t", vec![("a".into(), Err(relval::Error::SingleClass))]),
        Err(relval::Error::AllExcluded)
    ));
}
