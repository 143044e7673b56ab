//! Cell scheduling and the deterministic merge into an [`ExperimentReport`].

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rayon::prelude::*;

use super::config::RunConfig;
use super::report::{
    median, Comparison, ConfigEcho, DirectionalChecks, EstimateRow, ExclusionEntry, ExperimentReport,
    MetricAnova, RuntimeInfo,
};
use super::sanity::sanity_check;
use crate::classifiers::{ClassifierSpec, Deadline, LabeledMatrix};
use crate::dataset::{eligible_for_experiment, epv_group, split_last_release, ProjectDataset};
use crate::error::{Error, Result};
use crate::metaval::{
    baselines, estimate_seed, evaluate_selection, holdout_seed, plan_seed, score_on_b,
    select_from_estimates, HoldoutScore, Rq1Row, Rq1Table,
};
use crate::scalar::Scalar;
use crate::stats::{compare_paired, two_way_anova, AnovaObservation};
use crate::validation::{estimate_auc, EstimatedAccuracy, SplitPlan, TechniqueConfig};

struct Prepared<T> {
    name: String,
    part_a: LabeledMatrix<T>,
    part_b: LabeledMatrix<T>,
    plans: Vec<Result<SplitPlan>>,
}

enum Cell {
    Holdout { d: usize, c: usize },
    Estimate { d: usize, t: usize, c: usize },
}

enum Outcome {
    Holdout(Result<HoldoutScore>),
    Estimate(Result<EstimatedAccuracy>),
}

fn run_cell<T: Scalar>(
    cell: &Cell,
    data: &[Prepared<T>],
    roster: &[ClassifierSpec],
    techniques: &[TechniqueConfig],
    master: u64,
    budget: f64,
) -> (Outcome, f64) {
    let start = Instant::now();
    let deadline = Some(Deadline::after_secs(budget));
    let outcome = match *cell {
        Cell::Holdout { d, c } => {
            let p = &data[d];
            let spec = &roster[c];
            let seed = holdout_seed(master, &p.name, &spec.name);
            Outcome::Holdout(score_on_b(spec, &p.part_a, &p.part_b, seed, deadline))
        }
        Cell::Estimate { d, t, c } => {
            let p = &data[d];
            let spec = &roster[c];
            let plan = p.plans[t].as_ref().expect("cells are only built for valid plans");
            let seed = estimate_seed(master, &p.name, &techniques[t].id(), &spec.name);
            Outcome::Estimate(estimate_auc(plan, spec, &p.part_a, seed, deadline))
        }
    };
    (outcome, start.elapsed().as_secs_f64())
}

/// Hypothesis label for walk-forward against another technique.
fn hypothesis_for(other: &TechniqueConfig) -> &'static str {
    match other {
        TechniqueConfig::RepeatedKFold { .. } => "H02a",
        TechniqueConfig::OutOfSampleBootstrap { .. } => "H02b",
        TechniqueConfig::WalkForward => "H02",
    }
}

/// Run every cell on `workers` threads and merge in a fixed order.
pub fn run_experiment<T: Scalar>(
    config: &RunConfig,
    datasets: &[ProjectDataset<T>],
    workers: usize,
) -> Result<(ExperimentReport, RuntimeInfo)> {
    config.validate()?;
    let started = Instant::now();
    let roster = config.roster.resolve()?;
    let techniques = &config.techniques;
    let master = config.seed;

    let mut names = BTreeSet::new();
    for d in datasets {
        if !names.insert(d.project_name.as_str()) {
            return Err(Error::Config(format!("dataset {:?} listed twice", d.project_name)));
        }
    }

    let mut exclusions = Vec::new();
    let eligible: Vec<&ProjectDataset<T>> = datasets
        .iter()
        .filter(|d| {
            let ok = eligible_for_experiment(d);
            if !ok {
                let e = Error::TooFewReleases {
                    needed: 3,
                    found: d.n_releases(),
                };
                exclusions.push(ExclusionEntry::new(&d.project_name, None, None, &e));
            }
            ok
        })
        .collect();

    let mut prepared = Vec::with_capacity(eligible.len());
    for d in &eligible {
        let (a, b) = split_last_release(d)?;
        let plans: Vec<Result<SplitPlan>> = techniques
            .iter()
            .map(|t| t.plan(&a, plan_seed(master, &d.project_name, &t.id())))
            .collect();
        prepared.push(Prepared {
            name: d.project_name.clone(),
            part_a: a.to_matrix(),
            part_b: LabeledMatrix::from_releases([&b]),
            plans,
        });
    }

    let mut cells = Vec::new();
    for (d, p) in prepared.iter().enumerate() {
        for c in 0..roster.len() {
            cells.push(Cell::Holdout { d, c });
        }
        for (t, plan) in p.plans.iter().enumerate() {
            if plan.is_ok() {
                for c in 0..roster.len() {
                    cells.push(Cell::Estimate { d, t, c });
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let budget = config.cell_budget_secs;
    let outcomes: Vec<(Outcome, f64)> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| run_cell(cell, &prepared, &roster, techniques, master, budget))
            .collect()
    });

    // Merge, strictly in cell order.
    let n_c = roster.len();
    let mut holdout: Vec<Vec<Option<HoldoutScore>>> = vec![vec![None; n_c]; prepared.len()];
    let mut estimates: BTreeMap<(usize, usize), Vec<Result<EstimatedAccuracy>>> = BTreeMap::new();
    let mut timings = Vec::with_capacity(cells.len());
    for (cell, (outcome, secs)) in cells.iter().zip(outcomes) {
        match (cell, outcome) {
            (Cell::Holdout { d, c }, Outcome::Holdout(r)) => {
                timings.push((format!("{}/part_b/{}", prepared[*d].name, roster[*c].name), secs));
                match r {
                    Ok(s) => holdout[*d][*c] = Some(s),
                    Err(e) => exclusions.push(ExclusionEntry::new(
                        &prepared[*d].name,
                        Some("part_b"),
                        Some(&roster[*c].name),
                        &e,
                    )),
                }
            }
            (Cell::Estimate { d, t, c }, Outcome::Estimate(r)) => {
                timings.push((
                    format!("{}/{}/{}", prepared[*d].name, techniques[*t].id(), roster[*c].name),
                    secs,
                ));
                estimates.entry((*d, *t)).or_default().push(r);
            }
            _ => unreachable!("outcome kind matches its cell"),
        }
    }

    // Baselines and the RQ1 table come from the part-B cells.
    let epvs: Vec<(&str, f64)> = eligible.iter().map(|d| (d.project_name.as_str(), d.epv)).collect();
    let groups = epv_group(&epvs);
    let mut rq1 = Rq1Table::default();
    let mut actual_maps = Vec::with_capacity(prepared.len());
    let mut baseline_rows = Vec::new();
    for (d, p) in prepared.iter().enumerate() {
        let mut actual = BTreeMap::new();
        for (c, spec) in roster.iter().enumerate() {
            if let Some(s) = holdout[d][c] {
                actual.insert(spec.name.clone(), s.auc);
                rq1.rows.push(Rq1Row {
                    dataset: p.name.clone(),
                    classifier: spec.name.clone(),
                    epv_group: groups[&p.name],
                    auc: s.auc,
                    precision: s.precision,
                    recall: s.recall,
                    mcc: s.mcc,
                });
            }
        }
        match baselines(&p.name, &actual) {
            Ok(b) => baseline_rows.push(b),
            Err(e) => exclusions.push(ExclusionEntry::new(&p.name, Some("baselines"), None, &e)),
        }
        actual_maps.push(actual);
    }

    let mut estimate_rows = Vec::new();
    let mut selections = Vec::new();
    let mut evaluations = Vec::new();
    for (d, p) in prepared.iter().enumerate() {
        for (t, technique) in techniques.iter().enumerate() {
            let id = technique.id();
            if let Err(e) = &p.plans[t] {
                exclusions.push(ExclusionEntry::new(&p.name, Some(&id), None, e));
                continue;
            }
            let results = estimates.remove(&(d, t)).unwrap_or_default();
            let mut named = Vec::with_capacity(n_c);
            let mut rows = Vec::with_capacity(n_c);
            for (spec, r) in roster.iter().zip(results) {
                let (estimated, runs, skipped) = match &r {
                    Ok(e) => (Some(e.auc), e.runs.clone(), e.skipped),
                    Err(e) => {
                        exclusions.push(ExclusionEntry::new(&p.name, Some(&id), Some(&spec.name), e));
                        (None, Vec::new(), 0)
                    }
                };
                rows.push(EstimateRow {
                    dataset: p.name.clone(),
                    technique: id.clone(),
                    classifier: spec.name.clone(),
                    estimated_auc: estimated,
                    run_aucs: runs,
                    skipped_runs: skipped,
                    actual_auc: actual_maps[d].get(&spec.name).copied(),
                    selected: false,
                });
                named.push((spec.name.clone(), r.map(|e| e.auc)));
            }
            match select_from_estimates(&id, named)
                .and_then(|s| evaluate_selection(&p.name, &s, &actual_maps[d]).map(|e| (s, e)))
            {
                Ok((selection, evaluation)) => {
                    for row in &mut rows {
                        row.selected = row.classifier == selection.selected;
                    }
                    selections.push(selection);
                    evaluations.push(evaluation);
                }
                Err(e) => exclusions.push(ExclusionEntry::new(&p.name, Some(&id), Some("selection"), &e)),
            }
            estimate_rows.extend(rows);
        }
    }

    let anova = ["auc", "precision", "recall", "mcc"]
        .iter()
        .map(|&metric| {
            let obs: Vec<AnovaObservation> = rq1
                .rows
                .iter()
                .map(|r| {
                    let v = match metric {
                        "auc" => r.auc,
                        "precision" => r.precision,
                        "recall" => r.recall,
                        _ => r.mcc,
                    };
                    AnovaObservation::new(v, r.classifier.clone(), r.epv_group.to_string())
                })
                .collect();
            match two_way_anova(&obs, "classifier", "epv") {
                Ok(t) => MetricAnova {
                    metric: metric.to_string(),
                    table: Some(t),
                    error: None,
                },
                Err(e) => MetricAnova {
                    metric: metric.to_string(),
                    table: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let comparisons = comparisons(techniques, &evaluations, &baseline_rows);
    let directional = directional(techniques, &evaluations, &baseline_rows);

    let fatal: Vec<String> = techniques
        .iter()
        .map(TechniqueConfig::id)
        .filter(|id| !evaluations.iter().any(|e| &e.technique == id))
        .collect();

    let report = ExperimentReport {
        config: ConfigEcho::of(config)?,
        datasets: datasets.iter().map(ProjectDataset::summary).collect(),
        epv_groups: groups,
        rq1,
        anova,
        estimates: estimate_rows,
        selections,
        evaluations,
        baselines: baseline_rows,
        comparisons,
        sanity: sanity_check(datasets),
        exclusions,
        directional,
        fatal,
    };

    timings.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    timings.truncate(10);
    let runtime = RuntimeInfo {
        version: env!("CARGO_PKG_VERSION").to_string(),
        workers,
        cells: cells.len(),
        wall_secs: started.elapsed().as_secs_f64(),
        slowest_cells: timings,
    };
    Ok((report, runtime))
}

fn comparisons(
    techniques: &[TechniqueConfig],
    evaluations: &[crate::metaval::TechniqueEvaluation],
    baselines: &[crate::metaval::BaselineTriple],
) -> Vec<Comparison> {
    let Some(wf) = techniques.iter().find(|t| t.is_walk_forward()) else {
        return Vec::new();
    };
    let wf_id = wf.id();
    let by = |id: &str| -> BTreeMap<&str, &crate::metaval::TechniqueEvaluation> {
        evaluations
            .iter()
            .filter(|e| e.technique == id)
            .map(|e| (e.dataset.as_str(), e))
            .collect()
    };
    let wf_evals = by(&wf_id);
    let mut out = Vec::new();
    let mut push = |hypothesis: &str, metric: &str, y: &str, pairs: Vec<(f64, f64)>| {
        let (report, error) = match compare_paired(&wf_id, y, &pairs) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        out.push(Comparison {
            hypothesis: hypothesis.to_string(),
            metric: metric.to_string(),
            x: wf_id.clone(),
            y: y.to_string(),
            n: pairs.len(),
            report,
            error,
        });
    };
    for other in techniques.iter().filter(|t| !t.is_walk_forward()) {
        let other_id = other.id();
        let other_evals = by(&other_id);
        let paired: Vec<(&crate::metaval::TechniqueEvaluation, &crate::metaval::TechniqueEvaluation)> =
            wf_evals
                .iter()
                .filter_map(|(d, a)| other_evals.get(d).map(|b| (*a, *b)))
                .collect();
        let h = hypothesis_for(other);
        push(h, "auc", &other_id, paired.iter().map(|(a, b)| (a.actual_auc, b.actual_auc)).collect());
        push(h, "bias", &other_id, paired.iter().map(|(a, b)| (a.bias, b.bias)).collect());
        push(
            h,
            "absolute_bias",
            &other_id,
            paired.iter().map(|(a, b)| (a.absolute_bias, b.absolute_bias)).collect(),
        );
    }
    for (label, pick) in [
        ("best", (|b: &crate::metaval::BaselineTriple| b.best_auc) as fn(&_) -> f64),
        ("medium", |b| b.medium_auc),
        ("worst", |b| b.worst_auc),
    ] {
        let pairs: Vec<(f64, f64)> = baselines
            .iter()
            .filter_map(|b| wf_evals.get(b.dataset.as_str()).map(|e| (e.actual_auc, pick(b))))
            .collect();
        push("baseline", "auc", label, pairs);
    }
    out
}

fn directional(
    techniques: &[TechniqueConfig],
    evaluations: &[crate::metaval::TechniqueEvaluation],
    baselines: &[crate::metaval::BaselineTriple],
) -> Option<DirectionalChecks> {
    let wf_id = techniques.iter().find(|t| t.is_walk_forward())?.id();
    let medium: BTreeMap<&str, f64> = baselines.iter().map(|b| (b.dataset.as_str(), b.medium_auc)).collect();
    let pairs: Vec<(f64, f64)> = evaluations
        .iter()
        .filter(|e| e.technique == wf_id)
        .filter_map(|e| medium.get(e.dataset.as_str()).map(|m| (e.actual_auc, *m)))
        .collect();
    if pairs.is_empty() {
        return None;
    }
    let n = pairs.len();
    let wf_mean = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let med_mean = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let rel = pairs
        .iter()
        .map(|(w, m)| if *m > 0.0 { w / m - 1.0 } else { 0.0 })
        .sum::<f64>()
        / n as f64;
    let beating = pairs.iter().filter(|(w, m)| w > m).count();
    let mut median_bias = BTreeMap::new();
    for t in techniques {
        let id = t.id();
        let mut b: Vec<f64> = evaluations.iter().filter(|e| e.technique == id).map(|e| e.bias).collect();
        if !b.is_empty() {
            median_bias.insert(id, median(&mut b));
        }
    }
    Some(DirectionalChecks {
        walk_forward_mean_auc: wf_mean,
        medium_mean_auc: med_mean,
        mean_relative_improvement: rel,
        exceeds_medium: wf_mean > med_mean,
        datasets_beating_medium: beating,
        datasets_compared: n,
        beats_medium_on_three_quarters: 4 * beating >= 3 * n,
        all_median_bias_positive: !median_bias.is_empty() && median_bias.values().all(|m| *m > 0.0),
        median_bias,
    })
}

/// Load every manifest listed in `config` at precision `T`.
pub fn load_datasets<T: Scalar>(config: &RunConfig) -> Result<Vec<ProjectDataset<T>>> {
    config
        .dataset_paths()
        .iter()
        .map(|p| crate::dataset::DatasetManifest::load(p)?.load_dataset::<T>())
        .collect()
}

/// Load, run and write the report files plus `runtime.json`.
pub fn run_and_write<T: Scalar>(
    config: &RunConfig,
    workers: usize,
) -> Result<(ExperimentReport, RuntimeInfo, Vec<std::path::PathBuf>)> {
    let datasets = load_datasets::<T>(config)?;
    let (report, runtime) = run_experiment(config, &datasets, workers)?;
    let dir = config.out_path();
    let mut written = report.write_all(&dir, &config.formats)?;
    let path = dir.join("runtime.json");
    let body = serde_json::to_string_pretty(&runtime).map_err(|e| Error::json("runtime", e))?;
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok((report, runtime, written))
}
