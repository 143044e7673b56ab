use super::LabeledMatrix;
use crate::scalar::Scalar;

/// One axis-aligned box per class; the score compares how many attributes of
/// an instance fall inside each class's box.
#[derive(Debug, Clone)]
pub(crate) struct HyperPipes<T> {
    bounds: [Vec<(T, T)>; 2],
}

impl<T: Scalar> HyperPipes<T> {
    pub(crate) fn fit(data: &LabeledMatrix<T>) -> Self {
        let empty = vec![(T::infinity(), T::neg_infinity()); data.width()];
        let mut bounds = [empty.clone(), empty];
        for i in 0..data.len() {
            let c = usize::from(data.label(i));
            for (b, &v) in bounds[c].iter_mut().zip(data.row(i)) {
                b.0 = b.0.min(v);
                b.1 = b.1.max(v);
            }
        }
        HyperPipes { bounds }
    }

    #[cfg(test)]
    pub(crate) fn from_bounds(neg: Vec<(T, T)>, pos: Vec<(T, T)>) -> Self {
        HyperPipes { bounds: [neg, pos] }
    }

    fn containment(&self, c: usize, x: &[T]) -> T {
        let inside = self.bounds[c]
            .iter()
            .zip(x)
            .filter(|(b, v)| **v >= b.0 && **v <= b.1)
            .count();
        T::of_usize(inside) / T::of_usize(x.len().max(1))
    }

    pub(crate) fn score(&self, x: &[T]) -> T {
        let neg = self.containment(0, x);
        let pos = self.containment(1, x);
        let total = neg + pos;
        if total > T::zero() {
            pos / total
        } else {
            T::of(0.5)
        }
    }
}
