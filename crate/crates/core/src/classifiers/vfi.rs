use std::cmp::Ordering;

use super::LabeledMatrix;
use crate::scalar::Scalar;

/// Voting feature intervals.
///
/// Per feature, the class minima and maxima become interval endpoints. Each
/// endpoint is a point interval and the gaps between endpoints are range
/// intervals. A training row adds one count to its class in the interval it
/// falls in; an interval's vote for a class is that class's count divided by
/// the class size, normalised over the two classes. The final score is the
/// positive share of the votes summed over features.
#[derive(Debug, Clone)]
pub(crate) struct Vfi<T> {
    features: Vec<FeatureIntervals<T>>,
}

#[derive(Debug, Clone)]
struct FeatureIntervals<T> {
    endpoints: Vec<T>,
    /// `2 * endpoints.len() + 1` entries of `[neg_vote, pos_vote]`.
    votes: Vec<[f64; 2]>,
}

impl<T: Scalar> FeatureIntervals<T> {
    fn locate(&self, v: T) -> usize {
        match self
            .endpoints
            .binary_search_by(|e| e.partial_cmp(&v).unwrap_or(Ordering::Less))
        {
            Ok(i) => 2 * i + 1,
            Err(i) => 2 * i,
        }
    }
}

impl<T: Scalar> Vfi<T> {
    pub(crate) fn fit(data: &LabeledMatrix<T>) -> Self {
        let class_size = [
            (data.len() - data.positives()) as f64,
            data.positives() as f64,
        ];
        let features = (0..data.width())
            .map(|j| {
                let mut ends = Vec::with_capacity(4);
                for c in [false, true] {
                    let vals = (0..data.len())
                        .filter(|&i| data.label(i) == c)
                        .map(|i| data.row(i)[j]);
                    let (lo, hi) = vals.fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    });
                    ends.push(lo);
                    ends.push(hi);
                }
                ends.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
                ends.dedup();
                let mut fi = FeatureIntervals {
                    votes: vec![[0.0; 2]; 2 * ends.len() + 1],
                    endpoints: ends,
                };
                let mut counts = vec![[0usize; 2]; fi.votes.len()];
                for i in 0..data.len() {
                    counts[fi.locate(data.row(i)[j])][usize::from(data.label(i))] += 1;
                }
                for (vote, count) in fi.votes.iter_mut().zip(&counts) {
                    let raw = [0, 1].map(|c| count[c] as f64 / class_size[c]);
                    let total = raw[0] + raw[1];
                    if total > 0.0 {
                        *vote = [raw[0] / total, raw[1] / total];
                    }
                }
                fi
            })
            .collect();
        Vfi { features }
    }

    pub(crate) fn score(&self, x: &[T]) -> T {
        let mut sum = [0.0; 2];
        for (f, &v) in self.features.iter().zip(x) {
            let vote = f.votes[f.locate(v)];
            sum[0] += vote[0];
            sum[1] += vote[1];
        }
        let total = sum[0] + sum[1];
        T::of(if total > 0.0 { sum[1] / total } else { 0.5 })
    }
}
