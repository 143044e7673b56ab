use std::cmp::Ordering;

use super::LabeledMatrix;
use crate::scalar::Scalar;

/// k-nearest neighbours over min-max scaled features; the score is the
/// defective fraction among the k closest training rows. Distance ties go to
/// the earlier training row.
#[derive(Debug, Clone)]
pub(crate) struct Knn<T> {
    train: LabeledMatrix<T>,
    k: usize,
}

impl<T: Scalar> Knn<T> {
    pub(crate) fn fit(scaled: LabeledMatrix<T>, k: usize) -> Self {
        Knn { train: scaled, k }
    }

    pub(crate) fn score(&self, x: &[T]) -> T {
        let mut dist: Vec<(T, usize)> = self
            .train
            .rows()
            .enumerate()
            .map(|(i, r)| {
                let d = r
                    .iter()
                    .zip(x)
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .fold(T::zero(), |acc, v| acc + v);
                (d, i)
            })
            .collect();
        let k = self.k.min(dist.len());
        let cmp = |a: &(T, usize), b: &(T, usize)| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
        };
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, cmp);
        }
        let pos = dist[..k].iter().filter(|&&(_, i)| self.train.label(i)).count();
        T::of_usize(pos) / T::of_usize(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_go_to_earlier_rows() {
        // Two rows equidistant from 0.5; the earlier one (negative) wins for k=1.
        let data = LabeledMatrix::new(vec![vec![0.0], vec![1.0]], vec![false, true]).unwrap();
        let knn = Knn::fit(data.clone(), 1);
        assert_eq!(knn.score(&[0.5]), 0.0);
        let data = LabeledMatrix::new(vec![vec![1.0], vec![0.0]], vec![true, false]).unwrap();
        assert_eq!(Knn::fit(data, 1).score(&[0.5]), 1.0);
    }

    #[test]
    fn k_larger_than_training_uses_all() {
        let data =
            LabeledMatrix::new(vec![vec![0.0], vec![1.0], vec![0.2]], vec![false, true, true]).unwrap();
        assert!((Knn::fit(data, 10).score(&[0.0f64]) - 2.0 / 3.0).abs() < 1e-12);
    }
}
