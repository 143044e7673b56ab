//! Meta-validation: pick a classifier per technique on part A, score it on
//! part B, and compare against always picking the best, median or worst.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::classifiers::{train_until, ClassifierSpec, Deadline, LabeledMatrix};
use crate::dataset::{epv_group_datasets, split_last_release, EpvGroup, ProjectDataset, ReleaseTable};
use crate::error::{Error, Result};
use crate::metrics::{auc, confusion, precision_recall_mcc, ScoredSet};
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::validation::{estimate_auc, TechniqueConfig};

/// Threshold for the threshold-dependent metrics.
pub const THRESHOLD: f64 = 0.5;

/// Seed for a technique's split plan; shared by every classifier so they are
/// compared on identical splits.
pub fn plan_seed(master: u64, dataset: &str, technique: &str) -> u64 {
    derive_seed(master, &[dataset.into(), technique.into()])
}

/// Base training seed for one classifier under one technique.
pub fn estimate_seed(master: u64, dataset: &str, technique: &str, classifier: &str) -> u64 {
    derive_seed(master, &[dataset.into(), technique.into(), classifier.into()])
}

/// Training seed for the part-A model scored on part B.
pub fn holdout_seed(master: u64, dataset: &str, classifier: &str) -> u64 {
    derive_seed(master, &[dataset.into(), "part_b".into(), classifier.into()])
}

/// A classifier dropped from a selection or a baseline.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub classifier: String,
    pub reason: String,
    pub detail: String,
}

impl Exclusion {
    pub fn from_error(classifier: &str, e: &Error) -> Self {
        Exclusion {
            classifier: classifier.to_string(),
            reason: e.kind().to_string(),
            detail: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub technique: String,
    pub estimates: BTreeMap<String, f64>,
    pub excluded: Vec<Exclusion>,
    pub selected: String,
    pub selected_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueEvaluation {
    pub dataset: String,
    pub technique: String,
    pub selected: String,
    pub estimated_auc: f64,
    pub actual_auc: f64,
    pub bias: f64,
    pub absolute_bias: f64,
}

impl TechniqueEvaluation {
    pub fn new(dataset: &str, technique: &str, selected: &str, estimated: f64, actual: f64) -> Self {
        let bias = estimated - actual;
        TechniqueEvaluation {
            dataset: dataset.to_string(),
            technique: technique.to_string(),
            selected: selected.to_string(),
            estimated_auc: estimated,
            actual_auc: actual,
            bias,
            absolute_bias: bias.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineTriple {
    pub dataset: String,
    pub best: String,
    pub best_auc: f64,
    pub medium: String,
    pub medium_auc: f64,
    pub worst: String,
    pub worst_auc: f64,
}

/// AUC and threshold metrics of a part-A model on part B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoldoutScore {
    pub auc: f64,
    pub precision: f64,
    pub recall: f64,
    pub mcc: f64,
}

/// Train on all of part A and score part B.
pub fn score_on_b<T: Scalar>(
    spec: &ClassifierSpec,
    part_a: &LabeledMatrix<T>,
    part_b: &LabeledMatrix<T>,
    seed: u64,
    deadline: Option<Deadline>,
) -> Result<HoldoutScore> {
    let pos = part_b.positives();
    if pos == 0 || pos == part_b.len() {
        return Err(Error::SingleClassTestRelease);
    }
    let model = train_until(spec, part_a, seed, deadline)?;
    let scores = model
        .score_matrix(part_b)?
        .into_iter()
        .map(Scalar::f64)
        .collect();
    let set = ScoredSet::new(scores, part_b.labels().to_vec())?;
    let m = precision_recall_mcc(&confusion(&set, THRESHOLD));
    Ok(HoldoutScore {
        auc: auc(&set)?,
        precision: m.precision,
        recall: m.recall,
        mcc: m.mcc,
    })
}

pub fn actual_auc_on_b<T: Scalar>(
    spec: &ClassifierSpec,
    part_a: &ProjectDataset<T>,
    part_b: &ReleaseTable<T>,
    seed: u64,
) -> Result<f64> {
    let b = LabeledMatrix::from_releases([part_b]);
    score_on_b(spec, &part_a.to_matrix(), &b, seed, None).map(|s| s.auc)
}

/// Argmax of the computable estimates, ties going to the alphabetically first
/// name. Failed estimates are recorded as exclusions.
pub fn select_from_estimates(
    technique: &str,
    estimates: Vec<(String, Result<f64>)>,
) -> Result<SelectionResult> {
    let mut ok = BTreeMap::new();
    let mut excluded = Vec::new();
    for (name, e) in estimates {
        match e {
            Ok(v) if v.is_finite() => {
                ok.insert(name, v);
            }
            Ok(v) => excluded.push(Exclusion {
                classifier: name,
                reason: "non_finite".into(),
                detail: format!("estimate {v}"),
            }),
            Err(e) => excluded.push(Exclusion::from_error(&name, &e)),
        }
    }
    // BTreeMap iterates by name, so strict `>` keeps the first of equal maxima.
    let mut best: Option<(&String, f64)> = None;
    for (name, &v) in &ok {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((name, v));
        }
    }
    let (selected, selected_estimate) = best.ok_or(Error::AllExcluded)?;
    Ok(SelectionResult {
        technique: technique.to_string(),
        selected: selected.clone(),
        selected_estimate,
        estimates: ok.clone(),
        excluded,
    })
}

/// Estimate every roster member's AUC on part A under `technique` and select.
pub fn select_classifier<T: Scalar>(
    technique: &TechniqueConfig,
    part_a: &ProjectDataset<T>,
    roster: &[ClassifierSpec],
    master: u64,
) -> Result<SelectionResult> {
    if roster.is_empty() {
        return Err(Error::Config("empty roster".into()));
    }
    let id = technique.id();
    let dataset = &part_a.project_name;
    let plan = technique.plan(part_a, plan_seed(master, dataset, &id))?;
    let data = part_a.to_matrix();
    let estimates = roster
        .iter()
        .map(|spec| {
            let seed = estimate_seed(master, dataset, &id, &spec.name);
            let e = estimate_auc(&plan, spec, &data, seed, None).map(|e| e.auc);
            (spec.name.clone(), e)
        })
        .collect();
    select_from_estimates(&id, estimates)
}

/// Compose a selection with the B-side AUCs of the roster.
pub fn evaluate_selection(
    dataset: &str,
    selection: &SelectionResult,
    actual: &BTreeMap<String, f64>,
) -> Result<TechniqueEvaluation> {
    let actual_auc = *actual
        .get(&selection.selected)
        .ok_or(Error::SingleClassTestRelease)?;
    Ok(TechniqueEvaluation::new(
        dataset,
        &selection.technique,
        &selection.selected,
        selection.selected_estimate,
        actual_auc,
    ))
}

pub fn evaluate_technique<T: Scalar>(
    technique: &TechniqueConfig,
    dataset: &ProjectDataset<T>,
    roster: &[ClassifierSpec],
    master: u64,
) -> Result<TechniqueEvaluation> {
    let (part_a, part_b) = split_last_release(dataset)?;
    if part_a.n_releases() < 2 {
        return Err(Error::TooFewReleases {
            needed: 3,
            found: dataset.n_releases(),
        });
    }
    let selection = select_classifier(technique, &part_a, roster, master)?;
    let spec = roster
        .iter()
        .find(|s| s.name == selection.selected)
        .expect("selected from roster");
    let seed = holdout_seed(master, &dataset.project_name, &spec.name);
    let actual = actual_auc_on_b(spec, &part_a, &part_b, seed)?;
    Ok(TechniqueEvaluation::new(
        &dataset.project_name,
        &selection.technique,
        &selection.selected,
        selection.selected_estimate,
        actual,
    ))
}

/// Best, median and worst of the B-side AUCs. Even counts take the lower
/// middle; equal AUCs order by name.
pub fn baselines(dataset: &str, actual: &BTreeMap<String, f64>) -> Result<BaselineTriple> {
    let mut sorted: Vec<(&String, f64)> = actual
        .iter()
        .filter(|(_, v)| v.is_finite())
        .map(|(k, &v)| (k, v))
        .collect();
    if sorted.is_empty() {
        return Err(Error::AllExcluded);
    }
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let n = sorted.len();
    let mid = if n % 2 == 1 { n / 2 } else { n / 2 - 1 };
    let (worst, best, medium) = (sorted[0], sorted[n - 1], sorted[mid]);
    Ok(BaselineTriple {
        dataset: dataset.to_string(),
        best: best.0.clone(),
        best_auc: best.1,
        medium: medium.0.clone(),
        medium_auc: medium.1,
        worst: worst.0.clone(),
        worst_auc: worst.1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq1Row {
    pub dataset: String,
    pub classifier: String,
    pub epv_group: EpvGroup,
    pub auc: f64,
    pub precision: f64,
    pub recall: f64,
    pub mcc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq1Missing {
    pub dataset: String,
    pub exclusion: Exclusion,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Rq1Table {
    pub rows: Vec<Rq1Row>,
    pub missing: Vec<Rq1Missing>,
}

/// Per dataset and classifier, the part-A model's metrics on part B with the
/// dataset's EPV group. Failed cells are recorded, not fatal.
pub fn run_rq1<T: Scalar>(
    datasets: &[ProjectDataset<T>],
    roster: &[ClassifierSpec],
    master: u64,
) -> Result<Rq1Table> {
    if datasets.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            found: datasets.len(),
        });
    }
    let groups = epv_group_datasets(datasets);
    let mut table = Rq1Table::default();
    for dataset in datasets {
        let name = &dataset.project_name;
        let (a, b) = match split_last_release(dataset) {
            Ok((a, b)) => (a.to_matrix(), LabeledMatrix::from_releases([&b])),
            Err(e) => {
                for spec in roster {
                    table.missing.push(Rq1Missing {
                        dataset: name.clone(),
                        exclusion: Exclusion::from_error(&spec.name, &e),
                    });
                }
                continue;
            }
        };
        for spec in roster {
            let seed = holdout_seed(master, name, &spec.name);
            let result = score_on_b(spec, &a, &b, seed, None);
            match result {
                Ok(s) => table.rows.push(Rq1Row {
                    dataset: name.clone(),
                    classifier: spec.name.clone(),
                    epv_group: groups[name],
                    auc: s.auc,
                    precision: s.precision,
                    recall: s.recall,
                    mcc: s.mcc,
                }),
                Err(e) => table.missing.push(Rq1Missing {
                    dataset: name.clone(),
                    exclusion: Exclusion::from_error(&spec.name, &e),
                }),
            }
        }
    }
    Ok(table)
}
