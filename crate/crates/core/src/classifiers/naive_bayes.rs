use super::LabeledMatrix;
use crate::scalar::Scalar;

/// Gaussian naive Bayes with Laplace-smoothed class priors.
#[derive(Debug, Clone)]
pub(crate) struct NaiveBayes<T> {
    log_prior: [T; 2],
    /// Per class, per feature `(mean, variance)`; `None` for features that
    /// were constant in training and carry no information.
    moments: [Vec<Option<(T, T)>>; 2],
}

impl<T: Scalar> NaiveBayes<T> {
    pub(crate) fn fit(data: &LabeledMatrix<T>, floor_fraction: f64) -> Self {
        let n = data.len();
        let counts = [n - data.positives(), data.positives()];
        let log_prior = [0, 1].map(|c| T::of(((counts[c] + 1) as f64 / (n + 2) as f64).ln()));
        let mut moments: [Vec<Option<(T, T)>>; 2] = [Vec::new(), Vec::new()];
        for j in 0..data.width() {
            let (lo, hi) = data
                .column(j)
                .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let range = hi - lo;
            for (c, slot) in moments.iter_mut().enumerate() {
                if !(range > T::zero()) {
                    slot.push(None);
                    continue;
                }
                let vals: Vec<T> = (0..n)
                    .filter(|&i| data.label(i) == (c == 1))
                    .map(|i| data.row(i)[j])
                    .collect();
                let m = T::of_usize(vals.len());
                let mean = vals.iter().copied().sum::<T>() / m;
                let var = vals.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / m;
                let floor = T::of(floor_fraction) * range;
                slot.push(Some((mean, var.max(floor))));
            }
        }
        NaiveBayes { log_prior, moments }
    }

    fn log_joint(&self, c: usize, x: &[T]) -> T {
        let two_pi = T::of(2.0 * std::f64::consts::PI);
        let half = T::of(0.5);
        let mut acc = self.log_prior[c];
        for (&v, m) in x.iter().zip(&self.moments[c]) {
            if let Some((mean, var)) = *m {
                let d = v - mean;
                acc = acc - half * (two_pi * var).ln() - d * d / (T::of(2.0) * var);
            }
        }
        acc
    }

    pub(crate) fn score(&self, x: &[T]) -> T {
        let diff = self.log_joint(0, x) - self.log_joint(1, x);
        // P(pos | x) = 1 / (1 + exp(log p(neg,x) - log p(pos,x)))
        T::one() / (T::one() + diff.exp())
    }
}
