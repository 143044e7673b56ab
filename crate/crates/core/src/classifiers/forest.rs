//! Bagged information-gain trees.
//!
//! Tree `t` draws its bootstrap sample and its per-node feature orders from
//! the stream `derive_seed(seed, ["tree", t])`, so a forest is a pure
//! function of `(data, params, seed)` and trees are independent of each
//! other's consumption.

use super::{Deadline, DecisionTree, LabeledMatrix, RandomForestParams};
use crate::error::Result;
use crate::rng::{below, derive_seed, rng_from_seed, Rng};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct RandomForest<T> {
    pub trees: Vec<DecisionTree<T>>,
}

fn tree_rng(seed: u64, tree: usize) -> Rng {
    rng_from_seed(derive_seed(seed, &["tree".into(), tree.into()]))
}

fn draw(rng: &mut Rng, n: usize) -> Vec<usize> {
    (0..n).map(|_| below(rng, n)).collect()
}

/// The bootstrap row sample used by tree `tree` of a forest seeded `seed`.
pub fn bootstrap_sample(seed: u64, tree: usize, n: usize) -> Vec<usize> {
    draw(&mut tree_rng(seed, tree), n)
}

impl<T: Scalar> RandomForest<T> {
    pub fn fit(
        data: &LabeledMatrix<T>,
        params: &RandomForestParams,
        seed: u64,
        deadline: Option<Deadline>,
    ) -> Result<Self> {
        let d = data.width();
        let m = params
            .features_per_split
            .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
            .clamp(1, d.max(1));
        let mut trees = Vec::with_capacity(params.trees);
        for t in 0..params.trees {
            if let Some(dl) = deadline {
                dl.check()?;
            }
            let mut rng = tree_rng(seed, t);
            let idx = draw(&mut rng, data.len());
            trees.push(DecisionTree::fit_random(data, &idx, m, Some(&mut rng)));
        }
        Ok(RandomForest { trees })
    }

    pub fn score(&self, x: &[T]) -> T {
        let sum: f64 = self.trees.iter().map(|t| t.score(x).f64()).sum();
        T::of(sum / self.trees.len() as f64)
    }
}
