//! Binary decision trees over numeric features.
//!
//! Two growers share one node type: the C4.5-style J48 tree (gain ratio,
//! pessimistic pruning, Laplace leaves) and the unpruned information-gain
//! tree that the random forest bags.

use std::cmp::Ordering;

use statrs::distribution::{ContinuousCDF, Normal};

use super::{entropy, J48Params, LabeledMatrix};
use crate::rng::{shuffle, Rng};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Node<T> {
    Leaf {
        pos: usize,
        n: usize,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: T,
        pos: usize,
        n: usize,
        left: Box<Node<T>>,
        right: Box<Node<T>>,
    },
}

impl<T> Node<T> {
    fn counts(&self) -> (usize, usize) {
        match self {
            Node::Leaf { pos, n } | Node::Split { pos, n, .. } => (*pos, *n),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree<T> {
    pub root: Node<T>,
    laplace: bool,
}

#[derive(Debug, Clone, Copy)]
struct Threshold<T> {
    feature: usize,
    threshold: T,
    gain: f64,
    split_info: f64,
}

/// Best information-gain threshold for one feature. Each side must keep at
/// least `min_side` rows. Also returns the number of admissible thresholds.
fn best_threshold<T: Scalar>(
    data: &LabeledMatrix<T>,
    idx: &[usize],
    feature: usize,
    min_side: usize,
) -> Option<(Threshold<T>, usize)> {
    let n = idx.len();
    let mut vals: Vec<(T, bool)> = idx
        .iter()
        .map(|&i| (data.row(i)[feature], data.label(i)))
        .collect();
    vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let total_pos = vals.iter().filter(|v| v.1).count() as f64;
    let nf = n as f64;
    let parent = entropy(total_pos, nf);
    let mut best: Option<Threshold<T>> = None;
    let mut candidates = 0;
    let mut left_pos = 0.0;
    for i in 0..n.saturating_sub(1) {
        if vals[i].1 {
            left_pos += 1.0;
        }
        let nl = i + 1;
        let nr = n - nl;
        if !(vals[i].0 < vals[i + 1].0) || nl < min_side || nr < min_side {
            continue;
        }
        candidates += 1;
        let (nlf, nrf) = (nl as f64, nr as f64);
        let child = nlf / nf * entropy(left_pos, nlf) + nrf / nf * entropy(total_pos - left_pos, nrf);
        let gain = parent - child;
        if best.is_none_or(|b| gain > b.gain) {
            let mut threshold = (vals[i].0 + vals[i + 1].0) / T::of(2.0);
            if !(threshold < vals[i + 1].0) {
                threshold = vals[i].0;
            }
            best = Some(Threshold {
                feature,
                threshold,
                gain,
                split_info: entropy(nlf, nf),
            });
        }
    }
    best.map(|b| (b, candidates))
}

fn partition<T: Scalar>(
    data: &LabeledMatrix<T>,
    idx: &[usize],
    feature: usize,
    threshold: T,
) -> (Vec<usize>, Vec<usize>) {
    idx.iter()
        .partition(|&&i| data.row(i)[feature] <= threshold)
}

fn count_pos<T: Scalar>(data: &LabeledMatrix<T>, idx: &[usize]) -> usize {
    idx.iter().filter(|&&i| data.label(i)).count()
}

/// C4.5's upper confidence bound on extra errors at a leaf of `n` rows with
/// `e` training errors.
fn added_errors(n: f64, e: f64, confidence: f64) -> f64 {
    if e < 1.0 {
        let base = n * (1.0 - confidence.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (added_errors(n, 1.0, confidence) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - confidence);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    r * n - e
}

fn leaf_errors(pos: usize, n: usize) -> f64 {
    pos.min(n - pos) as f64
}

impl<T: Scalar> DecisionTree<T> {
    /// C4.5-style tree with gain-ratio splits.
    pub fn fit_j48(data: &LabeledMatrix<T>, params: &J48Params) -> Self {
        let idx: Vec<usize> = (0..data.len()).collect();
        let mut root = grow_j48(data, &idx, params.min_leaf);
        if params.prune {
            prune(&mut root, params.confidence);
        }
        DecisionTree {
            root,
            laplace: true,
        }
    }

    /// Unpruned information-gain tree over the rows `idx` (duplicates count
    /// as repeated rows). With `rng`, each node examines `features_per_split`
    /// randomly ordered features, continuing through the rest only if none of
    /// those has positive gain. Without `rng`, all features are examined.
    pub fn fit_random(
        data: &LabeledMatrix<T>,
        idx: &[usize],
        features_per_split: usize,
        mut rng: Option<&mut Rng>,
    ) -> Self {
        let root = grow_random(data, idx, features_per_split.max(1), &mut rng);
        DecisionTree {
            root,
            laplace: false,
        }
    }

    pub fn score(&self, x: &[T]) -> T {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { pos, n } => {
                    let (pos, n) = (*pos as f64, *n as f64);
                    let p = if self.laplace {
                        (pos + 1.0) / (n + 2.0)
                    } else if n > 0.0 {
                        pos / n
                    } else {
                        0.5
                    };
                    return T::of(p);
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }
}

fn grow_j48<T: Scalar>(data: &LabeledMatrix<T>, idx: &[usize], min_leaf: usize) -> Node<T> {
    let n = idx.len();
    let pos = count_pos(data, idx);
    if pos == 0 || pos == n || n < 2 * min_leaf {
        return Node::Leaf { pos, n };
    }
    let min_side = ((0.1 * n as f64 / 2.0).max(min_leaf as f64).min(25.0)) as usize;
    let mut options = Vec::new();
    for j in 0..data.width() {
        if let Some((mut t, candidates)) = best_threshold(data, idx, j, min_side.max(1)) {
            t.gain -= (candidates as f64).log2() / n as f64;
            if t.gain > 0.0 {
                options.push(t);
            }
        }
    }
    if options.is_empty() {
        return Node::Leaf { pos, n };
    }
    let avg = options.iter().map(|t| t.gain).sum::<f64>() / options.len() as f64;
    let mut best: Option<(f64, Threshold<T>)> = None;
    for t in options {
        if t.gain < avg - 1e-3 || t.split_info <= 0.0 {
            continue;
        }
        let ratio = t.gain / t.split_info;
        if best.is_none_or(|(r, _)| ratio > r) {
            best = Some((ratio, t));
        }
    }
    let Some((_, t)) = best else {
        return Node::Leaf { pos, n };
    };
    let (l, r) = partition(data, idx, t.feature, t.threshold);
    Node::Split {
        feature: t.feature,
        threshold: t.threshold,
        pos,
        n,
        left: Box::new(grow_j48(data, &l, min_leaf)),
        right: Box::new(grow_j48(data, &r, min_leaf)),
    }
}

fn training_errors<T>(node: &Node<T>) -> f64 {
    match node {
        Node::Leaf { pos, n } => leaf_errors(*pos, *n),
        Node::Split { left, right, .. } => training_errors(left) + training_errors(right),
    }
}

/// Bottom-up subtree replacement; returns the estimated errors of `node`.
fn prune<T>(node: &mut Node<T>, confidence: f64) -> f64 {
    let (pos, n) = node.counts();
    let e = leaf_errors(pos, n);
    let as_leaf = e + added_errors(n as f64, e, confidence);
    let subtree = match node {
        Node::Leaf { .. } => return as_leaf,
        Node::Split { left, right, .. } => {
            if training_errors(left) + training_errors(right) >= e - 1e-3 {
                None
            } else {
                Some(prune(left, confidence) + prune(right, confidence))
            }
        }
    };
    match subtree {
        Some(est) if as_leaf > est + 0.1 => est,
        _ => {
            *node = Node::Leaf { pos, n };
            as_leaf
        }
    }
}

fn grow_random<T: Scalar>(
    data: &LabeledMatrix<T>,
    idx: &[usize],
    features_per_split: usize,
    rng: &mut Option<&mut Rng>,
) -> Node<T> {
    let n = idx.len();
    let pos = count_pos(data, idx);
    if pos == 0 || pos == n || n < 2 {
        return Node::Leaf { pos, n };
    }
    let mut order: Vec<usize> = (0..data.width()).collect();
    let examine = match rng.as_deref_mut() {
        Some(r) => {
            shuffle(r, &mut order);
            features_per_split.min(order.len())
        }
        None => order.len(),
    };
    let better = |cand: &Threshold<T>, best: &Option<Threshold<T>>| match best {
        None => true,
        Some(b) => cand.gain > b.gain || (cand.gain == b.gain && cand.feature < b.feature),
    };
    let mut best: Option<Threshold<T>> = None;
    for (k, &j) in order.iter().enumerate() {
        if k >= examine && best.is_some_and(|b| b.gain > 0.0) {
            break;
        }
        if let Some((t, _)) = best_threshold(data, idx, j, 1) {
            if better(&t, &best) {
                best = Some(t);
            }
        }
    }
    let Some(t) = best.filter(|b| b.gain > 0.0) else {
        return Node::Leaf { pos, n };
    };
    let (l, r) = partition(data, idx, t.feature, t.threshold);
    Node::Split {
        feature: t.feature,
        threshold: t.threshold,
        pos,
        n,
        left: Box::new(grow_random(data, &l, features_per_split, rng)),
        right: Box::new(grow_random(data, &r, features_per_split, rng)),
    }
}
