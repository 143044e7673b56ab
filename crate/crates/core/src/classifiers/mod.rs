//! The nine binary defect classifiers behind one train/score contract.
//!
//! Every trained model maps a feature vector to a defect probability in
//! `[0, 1]`. Training is a pure function of `(spec, data, seed)`; only the
//! random forest consumes the seed.
//!
//! Distance- and margin-based kinds (IBk, IB1, VotedPerceptron) see features
//! min-max scaled with training statistics and clamped to `[0, 1]`; the other
//! kinds consume raw values.

mod hyperpipes;
mod knn;
mod logistic;
mod naive_bayes;
mod perceptron;
mod tree;
mod vfi;

pub mod forest;

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::ReleaseTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use forest::{bootstrap_sample, RandomForest};
pub use tree::DecisionTree;

/// Where a matrix row came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowOrigin {
    pub release_id: usize,
    pub unit_name: Arc<str>,
}

/// Row-major feature matrix with boolean defect labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix<T> {
    width: usize,
    values: Vec<T>,
    labels: Vec<bool>,
    origins: Vec<RowOrigin>,
}

impl<T: Scalar> LabeledMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>, labels: Vec<bool>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::DegenerateData("matrix has no rows".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::DegenerateData(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let width = rows[0].len();
        let mut values = Vec::with_capacity(rows.len() * width);
        for row in &rows {
            if row.len() != width {
                return Err(Error::WidthMismatch {
                    expected: width,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        let origins = (0..rows.len())
            .map(|i| RowOrigin {
                release_id: 0,
                unit_name: Arc::from(format!("row{i}")),
            })
            .collect();
        Ok(LabeledMatrix {
            width,
            values,
            labels,
            origins,
        })
    }

    pub fn from_releases<'a>(releases: impl IntoIterator<Item = &'a ReleaseTable<T>>) -> Self {
        let mut m = LabeledMatrix {
            width: 0,
            values: Vec::new(),
            labels: Vec::new(),
            origins: Vec::new(),
        };
        for release in releases {
            m.width = release.feature_names.len();
            for unit in &release.rows {
                m.values.extend_from_slice(&unit.features);
                m.labels.push(unit.defective);
                m.origins.push(RowOrigin {
                    release_id: release.release_id,
                    unit_name: Arc::from(unit.unit_name.as_str()),
                });
            }
        }
        m
    }

    /// Rows picked by index; duplicates are kept.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut values = Vec::with_capacity(rows.len() * self.width);
        for &i in rows {
            values.extend_from_slice(self.row(i));
        }
        LabeledMatrix {
            width: self.width,
            values,
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            origins: rows.iter().map(|&i| self.origins[i].clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks(self.width.max(1)).take(self.len())
    }

    pub fn label(&self, i: usize) -> bool {
        self.labels[i]
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn origin(&self, i: usize) -> &RowOrigin {
        &self.origins[i]
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |i| self.values[i * self.width + j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomForestParams {
    #[serde(default = "default_trees")]
    pub trees: usize,
    /// Features examined per split; `None` means ⌈√d⌉.
    #[serde(default)]
    pub features_per_split: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogisticParams {
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    #[serde(default = "default_logistic_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NaiveBayesParams {
    /// Per-feature variance floor as a fraction of the feature's training range.
    #[serde(default = "default_variance_floor")]
    pub variance_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IbkParams {
    #[serde(default = "default_k")]
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct J48Params {
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default = "default_min_leaf")]
    pub min_leaf: usize,
    #[serde(default = "default_true")]
    pub prune: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VotedPerceptronParams {
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Training stops once this many perceptrons have been stored.
    #[serde(default = "default_max_perceptrons")]
    pub max_perceptrons: usize,
}

fn default_trees() -> usize {
    100
}
fn default_ridge() -> f64 {
    1e-8
}
fn default_logistic_iterations() -> usize {
    200
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_variance_floor() -> f64 {
    1e-6
}
fn default_k() -> usize {
    3
}
fn default_confidence() -> f64 {
    0.25
}
fn default_min_leaf() -> usize {
    2
}
fn default_true() -> bool {
    true
}
fn default_epochs() -> usize {
    10
}
fn default_max_perceptrons() -> usize {
    10_000
}

impl Default for RandomForestParams {
    fn default() -> Self {
        RandomForestParams {
            trees: default_trees(),
            features_per_split: None,
        }
    }
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            ridge: default_ridge(),
            max_iterations: default_logistic_iterations(),
            tolerance: default_tolerance(),
        }
    }
}

impl Default for NaiveBayesParams {
    fn default() -> Self {
        NaiveBayesParams {
            variance_floor: default_variance_floor(),
        }
    }
}

impl Default for IbkParams {
    fn default() -> Self {
        IbkParams { k: default_k() }
    }
}

impl Default for J48Params {
    fn default() -> Self {
        J48Params {
            confidence: default_confidence(),
            min_leaf: default_min_leaf(),
            prune: true,
        }
    }
}

impl Default for VotedPerceptronParams {
    fn default() -> Self {
        VotedPerceptronParams {
            epochs: default_epochs(),
            max_perceptrons: default_max_perceptrons(),
        }
    }
}

/// Classifier family together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum ClassifierKind {
    RandomForest(RandomForestParams),
    Logistic(LogisticParams),
    NaiveBayes(NaiveBayesParams),
    HyperPipes,
    IBk(IbkParams),
    IB1,
    J48(J48Params),
    #[serde(rename = "VFI")]
    Vfi,
    VotedPerceptron(VotedPerceptronParams),
}

impl ClassifierKind {
    pub fn family(&self) -> &'static str {
        match self {
            ClassifierKind::RandomForest(_) => "RandomForest",
            ClassifierKind::Logistic(_) => "Logistic",
            ClassifierKind::NaiveBayes(_) => "NaiveBayes",
            ClassifierKind::HyperPipes => "HyperPipes",
            ClassifierKind::IBk(_) => "IBk",
            ClassifierKind::IB1 => "IB1",
            ClassifierKind::J48(_) => "J48",
            ClassifierKind::Vfi => "VFI",
            ClassifierKind::VotedPerceptron(_) => "VotedPerceptron",
        }
    }

    fn uses_scaled_input(&self) -> bool {
        matches!(
            self,
            ClassifierKind::IBk(_) | ClassifierKind::IB1 | ClassifierKind::VotedPerceptron(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSpec {
    pub name: String,
    pub classifier: ClassifierKind,
}

impl ClassifierSpec {
    pub fn new(name: impl Into<String>, classifier: ClassifierKind) -> Self {
        ClassifierSpec {
            name: name.into(),
            classifier,
        }
    }

    /// A spec named after its family.
    pub fn of(classifier: ClassifierKind) -> Self {
        Self::new(classifier.family(), classifier)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("{}: {msg}", self.name)));
        match &self.classifier {
            ClassifierKind::RandomForest(p) => {
                if p.trees == 0 {
                    return bad("trees must be >= 1".into());
                }
                if p.features_per_split == Some(0) {
                    return bad("features_per_split must be >= 1".into());
                }
            }
            ClassifierKind::Logistic(p) => {
                if !(p.ridge >= 0.0) || !(p.tolerance > 0.0) || p.max_iterations == 0 {
                    return bad("ridge >= 0, tolerance > 0 and max_iterations >= 1 required".into());
                }
            }
            ClassifierKind::NaiveBayes(p) => {
                if !(p.variance_floor > 0.0) {
                    return bad("variance_floor must be positive".into());
                }
            }
            ClassifierKind::IBk(p) => {
                if p.k == 0 {
                    return bad("k must be >= 1".into());
                }
            }
            ClassifierKind::J48(p) => {
                if !(p.confidence > 0.0 && p.confidence < 1.0) || p.min_leaf == 0 {
                    return bad("confidence in (0,1) and min_leaf >= 1 required".into());
                }
            }
            ClassifierKind::VotedPerceptron(p) => {
                if p.epochs == 0 || p.max_perceptrons == 0 {
                    return bad("epochs and max_perceptrons must be >= 1".into());
                }
            }
            ClassifierKind::HyperPipes | ClassifierKind::IB1 | ClassifierKind::Vfi => {}
        }
        Ok(())
    }
}

impl fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// The nine classifiers with their default parameters, ordered by name.
pub fn default_roster() -> Vec<ClassifierSpec> {
    let mut roster = vec![
        ClassifierSpec::of(ClassifierKind::RandomForest(RandomForestParams::default())),
        ClassifierSpec::of(ClassifierKind::Logistic(LogisticParams::default())),
        ClassifierSpec::of(ClassifierKind::NaiveBayes(NaiveBayesParams::default())),
        ClassifierSpec::of(ClassifierKind::HyperPipes),
        ClassifierSpec::of(ClassifierKind::IBk(IbkParams::default())),
        ClassifierSpec::of(ClassifierKind::IB1),
        ClassifierSpec::of(ClassifierKind::J48(J48Params::default())),
        ClassifierSpec::of(ClassifierKind::Vfi),
        ClassifierSpec::of(ClassifierKind::VotedPerceptron(VotedPerceptronParams::default())),
    ];
    roster.sort_by(|a, b| a.name.cmp(&b.name));
    roster
}

/// Per-feature `(min, max)` over the training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer<T> {
    pub min: Vec<T>,
    pub max: Vec<T>,
}

impl<T: Scalar> Normalizer<T> {
    pub fn fit(data: &LabeledMatrix<T>) -> Self {
        let mut min = vec![T::infinity(); data.width()];
        let mut max = vec![T::neg_infinity(); data.width()];
        for row in data.rows() {
            for (j, &v) in row.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Normalizer { min, max }
    }

    /// Scale into `[0, 1]`; constant training features map to 0.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| {
                let range = hi - lo;
                if range > T::zero() {
                    ((v - lo) / range).max(T::zero()).min(T::one())
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    pub fn apply_matrix(&self, data: &LabeledMatrix<T>) -> LabeledMatrix<T> {
        let mut out = data.clone();
        for i in 0..out.len() {
            let scaled = self.apply(data.row(i));
            out.values[i * out.width..(i + 1) * out.width].copy_from_slice(&scaled);
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Fitted<T> {
    Constant(T),
    NaiveBayes(naive_bayes::NaiveBayes<T>),
    Logistic(logistic::Logistic<T>),
    HyperPipes(hyperpipes::HyperPipes<T>),
    Knn(knn::Knn<T>),
    Tree(DecisionTree<T>),
    Forest(RandomForest<T>),
    Vfi(vfi::Vfi<T>),
    Perceptron(perceptron::VotedPerceptron<T>),
}

/// A trained scoring function.
#[derive(Debug, Clone)]
pub struct TrainedModel<T> {
    pub spec: ClassifierSpec,
    pub normalization: Normalizer<T>,
    width: usize,
    fitted: Fitted<T>,
}

impl<T: Scalar> TrainedModel<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    /// True when training saw a single class and the model is constant.
    pub fn is_constant(&self) -> bool {
        matches!(self.fitted, Fitted::Constant(_))
    }

    pub fn score(&self, instance: &[T]) -> Result<T> {
        if instance.len() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                found: instance.len(),
            });
        }
        let scaled;
        let x = if self.spec.classifier.uses_scaled_input() {
            scaled = self.normalization.apply(instance);
            &scaled[..]
        } else {
            instance
        };
        let s = match &self.fitted {
            Fitted::Constant(c) => *c,
            Fitted::NaiveBayes(m) => m.score(x),
            Fitted::Logistic(m) => m.score(x),
            Fitted::HyperPipes(m) => m.score(x),
            Fitted::Knn(m) => m.score(x),
            Fitted::Tree(m) => m.score(x),
            Fitted::Forest(m) => m.score(x),
            Fitted::Vfi(m) => m.score(x),
            Fitted::Perceptron(m) => m.score(x),
        };
        Ok(if s.is_nan() {
            T::of(0.5)
        } else {
            s.max(T::zero()).min(T::one())
        })
    }

    pub fn score_matrix(&self, data: &LabeledMatrix<T>) -> Result<Vec<T>> {
        data.rows().map(|r| self.score(r)).collect()
    }
}

/// Train with no time limit.
pub fn train<T: Scalar>(
    spec: &ClassifierSpec,
    data: &LabeledMatrix<T>,
    seed: u64,
) -> Result<TrainedModel<T>> {
    train_until(spec, data, seed, None)
}

/// Train, aborting with [`Error::BudgetExceeded`] once `deadline` passes
/// (checked between forest trees and before each fit).
pub fn train_until<T: Scalar>(
    spec: &ClassifierSpec,
    data: &LabeledMatrix<T>,
    seed: u64,
    deadline: Option<Deadline>,
) -> Result<TrainedModel<T>> {
    spec.validate()?;
    if data.is_empty() {
        return Err(Error::DegenerateData("training set has no rows".into()));
    }
    if let Some(d) = deadline {
        d.check()?;
    }
    let normalization = Normalizer::fit(data);
    let positives = data.positives();
    let fitted = if positives == 0 {
        Fitted::Constant(T::zero())
    } else if positives == data.len() {
        Fitted::Constant(T::one())
    } else {
        match &spec.classifier {
            ClassifierKind::NaiveBayes(p) => {
                Fitted::NaiveBayes(naive_bayes::NaiveBayes::fit(data, p.variance_floor))
            }
            ClassifierKind::Logistic(p) => Fitted::Logistic(logistic::Logistic::fit(data, p)),
            ClassifierKind::HyperPipes => Fitted::HyperPipes(hyperpipes::HyperPipes::fit(data)),
            ClassifierKind::IBk(p) => {
                Fitted::Knn(knn::Knn::fit(normalization.apply_matrix(data), p.k))
            }
            ClassifierKind::IB1 => Fitted::Knn(knn::Knn::fit(normalization.apply_matrix(data), 1)),
            ClassifierKind::J48(p) => Fitted::Tree(DecisionTree::fit_j48(data, p)),
            ClassifierKind::RandomForest(p) => {
                Fitted::Forest(RandomForest::fit(data, p, seed, deadline)?)
            }
            ClassifierKind::Vfi => Fitted::Vfi(vfi::Vfi::fit(data)),
            ClassifierKind::VotedPerceptron(p) => Fitted::Perceptron(
                perceptron::VotedPerceptron::fit(&normalization.apply_matrix(data), p),
            ),
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        normalization,
        width: data.width(),
        fitted,
    })
}

/// A wall-clock limit for one unit of work.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    pub at: Instant,
    pub budget_secs: f64,
}

impl Deadline {
    pub fn after_secs(secs: f64) -> Self {
        Deadline {
            at: Instant::now() + std::time::Duration::from_secs_f64(secs.max(0.0)),
            budget_secs: secs,
        }
    }

    pub fn check(&self) -> Result<()> {
        if Instant::now() > self.at {
            Err(Error::BudgetExceeded {
                secs: self.budget_secs,
            })
        } else {
            Ok(())
        }
    }
}

/// Binary entropy in bits of a `(pos, total)` count pair.
pub(crate) fn entropy(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let h = |c: f64| {
        if c <= 0.0 {
            0.0
        } else {
            let p = c / total;
            -p * p.log2()
        }
    };
    h(pos) + h(total - pos)
}
