//! Split generators for the three validation techniques and the
//! per-classifier AUC estimate they produce on part A.
//!
//! Row indices always refer to part A flattened in release-major order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classifiers::{train_until, ClassifierSpec, Deadline, LabeledMatrix};
use crate::dataset::ProjectDataset;
use crate::error::{Error, Result};
use crate::metrics::{auc, ScoredSet};
use crate::rng::{below, derive_seed, rng_from_seed, shuffle};
use crate::scalar::Scalar;

/// Regeneration attempts for a bootstrap run whose holdout cannot yield an AUC.
pub const BOOTSTRAP_RETRIES: usize = 10;

fn ten() -> usize {
    10
}

fn hundred() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TechniqueConfig {
    WalkForward,
    RepeatedKFold {
        #[serde(default = "ten")]
        folds: usize,
        #[serde(default = "ten")]
        repeats: usize,
        #[serde(default)]
        stratified: bool,
    },
    OutOfSampleBootstrap {
        #[serde(default = "hundred")]
        iterations: usize,
        #[serde(default)]
        optimism_reduced: bool,
    },
}

impl TechniqueConfig {
    pub fn ten_by_ten_fold() -> Self {
        TechniqueConfig::RepeatedKFold {
            folds: 10,
            repeats: 10,
            stratified: false,
        }
    }

    pub fn bootstrap() -> Self {
        TechniqueConfig::OutOfSampleBootstrap {
            iterations: 100,
            optimism_reduced: false,
        }
    }

    /// The paper-default trio: walk-forward, 10×10-fold, out-of-sample bootstrap.
    pub fn defaults() -> Vec<Self> {
        vec![
            TechniqueConfig::WalkForward,
            Self::ten_by_ten_fold(),
            Self::bootstrap(),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TechniqueConfig::WalkForward => Ok(()),
            TechniqueConfig::RepeatedKFold { folds, repeats, .. } => {
                if folds < 2 || repeats < 1 {
                    Err(Error::Config("k-fold needs folds >= 2 and repeats >= 1".into()))
                } else {
                    Ok(())
                }
            }
            TechniqueConfig::OutOfSampleBootstrap { iterations, .. } => {
                if iterations < 1 {
                    Err(Error::Config("bootstrap needs iterations >= 1".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Stable identifier used in reports and seed derivation.
    pub fn id(&self) -> String {
        match *self {
            TechniqueConfig::WalkForward => "walk_forward".into(),
            TechniqueConfig::RepeatedKFold {
                folds,
                repeats,
                stratified,
            } => format!(
                "kfold_{repeats}x{folds}{}",
                if stratified { "_stratified" } else { "" }
            ),
            TechniqueConfig::OutOfSampleBootstrap {
                iterations,
                optimism_reduced,
            } => format!(
                "oos_bootstrap_{iterations}{}",
                if optimism_reduced { "_optimism_reduced" } else { "" }
            ),
        }
    }

    pub fn is_walk_forward(&self) -> bool {
        matches!(self, TechniqueConfig::WalkForward)
    }

    fn optimism_reduced(&self) -> bool {
        matches!(
            self,
            TechniqueConfig::OutOfSampleBootstrap {
                optimism_reduced: true,
                ..
            }
        )
    }

    /// Build the plan for part A. `seed` is ignored by walk-forward.
    pub fn plan<T: Scalar>(&self, part_a: &ProjectDataset<T>, seed: u64) -> Result<SplitPlan> {
        self.validate()?;
        let labels: Vec<bool> = part_a.rows().map(|(_, u)| u.defective).collect();
        let mut plan = match *self {
            TechniqueConfig::WalkForward => walk_forward_plan(part_a)?,
            TechniqueConfig::RepeatedKFold {
                folds,
                repeats,
                stratified,
            } => kfold_plan(&labels, folds, repeats, stratified, seed)?,
            TechniqueConfig::OutOfSampleBootstrap { iterations, .. } => {
                bootstrap_plan(&labels, iterations, seed)?
            }
        };
        plan.technique = self.id();
        plan.config = self.clone();
        Ok(plan)
    }
}

impl fmt::Display for TechniqueConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRun {
    pub repeat: usize,
    pub index: usize,
    /// May contain duplicates (bootstrap training multisets).
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub technique: String,
    pub config: TechniqueConfig,
    /// `None` for plans that consume no randomness.
    pub seed: Option<u64>,
    pub n_rows: usize,
    pub runs: Vec<SplitRun>,
}

impl SplitPlan {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("split plan", e))
    }
}

/// Walk-forward over release sizes: run i trains on parts 1..=i and tests
/// part i+1.
pub fn walk_forward_from_sizes(sizes: &[usize]) -> Result<SplitPlan> {
    if sizes.len() < 2 {
        return Err(Error::TooFewReleases {
            needed: 2,
            found: sizes.len(),
        });
    }
    let mut offsets = vec![0];
    for s in sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let runs = (1..sizes.len())
        .map(|i| SplitRun {
            repeat: 0,
            index: i - 1,
            train: (0..offsets[i]).collect(),
            test: (offsets[i]..offsets[i + 1]).collect(),
        })
        .collect();
    Ok(SplitPlan {
        technique: TechniqueConfig::WalkForward.id(),
        config: TechniqueConfig::WalkForward,
        seed: None,
        n_rows: *offsets.last().unwrap(),
        runs,
    })
}

pub fn walk_forward_plan<T: Scalar>(part_a: &ProjectDataset<T>) -> Result<SplitPlan> {
    let sizes: Vec<usize> = part_a.releases.iter().map(|r| r.len()).collect();
    walk_forward_from_sizes(&sizes)
}

/// `repeats × folds` runs. Each repeat shuffles the rows with its own stream
/// and cuts them into folds whose sizes differ by at most one. Stratified
/// plans shuffle each class separately and deal rows round-robin so every
/// fold's defect count is within one of its share.
pub fn kfold_plan(
    labels: &[bool],
    folds: usize,
    repeats: usize,
    stratified: bool,
    seed: u64,
) -> Result<SplitPlan> {
    let n = labels.len();
    if folds < 2 || repeats < 1 {
        return Err(Error::Config("k-fold needs folds >= 2 and repeats >= 1".into()));
    }
    if n < folds {
        return Err(Error::TooFewRows {
            needed: folds,
            found: n,
        });
    }
    let mut runs = Vec::with_capacity(folds * repeats);
    for r in 0..repeats {
        let mut rng = rng_from_seed(derive_seed(seed, &["repeat".into(), r.into()]));
        let assignment: Vec<Vec<usize>> = if stratified {
            let mut pos: Vec<usize> = (0..n).filter(|&i| labels[i]).collect();
            let mut neg: Vec<usize> = (0..n).filter(|&i| !labels[i]).collect();
            shuffle(&mut rng, &mut pos);
            shuffle(&mut rng, &mut neg);
            let mut out = vec![Vec::new(); folds];
            for (k, i) in pos.into_iter().chain(neg).enumerate() {
                out[k % folds].push(i);
            }
            out
        } else {
            let mut order: Vec<usize> = (0..n).collect();
            shuffle(&mut rng, &mut order);
            let (base, extra) = (n / folds, n % folds);
            let mut out = Vec::with_capacity(folds);
            let mut start = 0;
            for f in 0..folds {
                let len = base + usize::from(f < extra);
                out.push(order[start..start + len].to_vec());
                start += len;
            }
            out
        };
        for (f, test) in assignment.iter().enumerate() {
            let mut in_test = vec![false; n];
            for &i in test {
                in_test[i] = true;
            }
            let mut test = test.clone();
            test.sort_unstable();
            runs.push(SplitRun {
                repeat: r,
                index: f,
                train: (0..n).filter(|&i| !in_test[i]).collect(),
                test,
            });
        }
    }
    Ok(SplitPlan {
        technique: format!(
            "kfold_{repeats}x{folds}{}",
            if stratified { "_stratified" } else { "" }
        ),
        config: TechniqueConfig::RepeatedKFold {
            folds,
            repeats,
            stratified,
        },
        seed: Some(seed),
        n_rows: n,
        runs,
    })
}

/// Rows never drawn, in ascending order.
pub fn out_of_sample(draws: &[usize], n: usize) -> Vec<usize> {
    let mut drawn = vec![false; n];
    for &d in draws {
        drawn[d] = true;
    }
    (0..n).filter(|&i| !drawn[i]).collect()
}

/// `iterations` runs of `n` draws with replacement; the holdout is every row
/// never drawn. A run whose holdout is empty or single-class is redrawn from
/// the same stream, at most [`BOOTSTRAP_RETRIES`] times.
pub fn bootstrap_plan(labels: &[bool], iterations: usize, seed: u64) -> Result<SplitPlan> {
    let n = labels.len();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, found: n });
    }
    if iterations < 1 {
        return Err(Error::Config("bootstrap needs iterations >= 1".into()));
    }
    let mut runs = Vec::with_capacity(iterations);
    for b in 0..iterations {
        let mut rng = rng_from_seed(derive_seed(seed, &["iteration".into(), b.into()]));
        let mut accepted = None;
        for _ in 0..=BOOTSTRAP_RETRIES {
            let train: Vec<usize> = (0..n).map(|_| below(&mut rng, n)).collect();
            let test = out_of_sample(&train, n);
            let pos = test.iter().filter(|&&i| labels[i]).count();
            if pos > 0 && pos < test.len() {
                accepted = Some((train, test));
                break;
            }
        }
        let (train, test) = accepted.ok_or(Error::ExhaustedRetries {
            run: b,
            retries: BOOTSTRAP_RETRIES,
        })?;
        runs.push(SplitRun {
            repeat: 0,
            index: b,
            train,
            test,
        });
    }
    Ok(SplitPlan {
        technique: TechniqueConfig::bootstrap().id(),
        config: TechniqueConfig::OutOfSampleBootstrap {
            iterations,
            optimism_reduced: false,
        },
        seed: Some(seed),
        n_rows: n,
        runs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedAccuracy {
    /// Unweighted mean over runs with a computable value.
    pub auc: f64,
    /// Per-run value in plan order; `None` for skipped runs.
    pub runs: Vec<Option<f64>>,
    pub skipped: usize,
}

/// Seed for training in one run of a plan.
pub fn run_seed(base: u64, run: &SplitRun) -> u64 {
    derive_seed(base, &[run.repeat.into(), run.index.into()])
}

fn auc_of<T: Scalar>(
    model: &crate::classifiers::TrainedModel<T>,
    data: &LabeledMatrix<T>,
    rows: &[usize],
) -> Result<Option<f64>> {
    let scores = rows
        .iter()
        .map(|&i| model.score(data.row(i)).map(Scalar::f64))
        .collect::<Result<Vec<f64>>>()?;
    let labels = rows.iter().map(|&i| data.label(i)).collect();
    let set = ScoredSet::new(scores, labels)?;
    Ok(if set.has_both_classes() {
        Some(auc(&set)?)
    } else {
        None
    })
}

/// Train per run, score the held-out rows and average the per-run AUCs.
///
/// Runs whose test rows are single-class are skipped and counted. With
/// `optimism_reduced`, a run's value is its held-out AUC minus the model's
/// optimism: AUC on its own training rows minus AUC on all of `data`.
pub fn estimate_auc<T: Scalar>(
    plan: &SplitPlan,
    spec: &ClassifierSpec,
    data: &LabeledMatrix<T>,
    seed: u64,
    deadline: Option<Deadline>,
) -> Result<EstimatedAccuracy> {
    let optimism = plan.config.optimism_reduced();
    let all: Vec<usize> = (0..data.len()).collect();
    let mut runs = Vec::with_capacity(plan.runs.len());
    for run in &plan.runs {
        if let Some(d) = deadline {
            d.check()?;
        }
        let train = data.select(&run.train);
        let model = train_until(spec, &train, run_seed(seed, run), deadline)?;
        let Some(test_auc) = auc_of(&model, data, &run.test)? else {
            runs.push(None);
            continue;
        };
        let value = if optimism {
            match (auc_of(&model, data, &run.train)?, auc_of(&model, data, &all)?) {
                (Some(apparent), Some(full)) => Some(test_auc - (apparent - full)),
                _ => None,
            }
        } else {
            Some(test_auc)
        };
        runs.push(value);
    }
    let values: Vec<f64> = runs.iter().flatten().copied().collect();
    let skipped = runs.len() - values.len();
    if values.is_empty() {
        return Err(Error::AllRunsSkipped { skipped });
    }
    Ok(EstimatedAccuracy {
        auc: values.iter().sum::<f64>() / values.len() as f64,
        runs,
        skipped,
    })
}

/// Mean of per-run AUCs with the skip rule applied; exposed for callers that
/// compute run AUCs themselves.
pub fn aggregate_runs(runs: Vec<Option<f64>>) -> Result<EstimatedAccuracy> {
    let values: Vec<f64> = runs.iter().flatten().copied().collect();
    let skipped = runs.len() - values.len();
    if values.is_empty() {
        return Err(Error::AllRunsSkipped { skipped });
    }
    Ok(EstimatedAccuracy {
        auc: values.iter().sum::<f64>() / values.len() as f64,
        runs,
        skipped,
    })
}
