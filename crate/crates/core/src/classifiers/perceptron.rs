use super::{LabeledMatrix, VotedPerceptronParams};
use crate::scalar::Scalar;

/// Freund–Schapire voted perceptron on scaled features with a bias input.
///
/// Each stored perceptron carries its survival count. The score is
/// `(1 + Σ cₖ·sign(vₖ·x) / Σ cₖ) / 2`.
#[derive(Debug, Clone)]
pub(crate) struct VotedPerceptron<T> {
    perceptrons: Vec<(Vec<T>, u64)>,
}

fn dot<T: Scalar>(w: &[T], x: &[T]) -> T {
    // w carries the bias as its last element.
    let n = x.len();
    x.iter()
        .zip(&w[..n])
        .fold(w[n], |acc, (&a, &b)| acc + a * b)
}

impl<T: Scalar> VotedPerceptron<T> {
    pub(crate) fn fit(data: &LabeledMatrix<T>, params: &VotedPerceptronParams) -> Self {
        let d = data.width();
        let mut v = vec![T::zero(); d + 1];
        let mut c = 0u64;
        let mut perceptrons = Vec::new();
        'outer: for _ in 0..params.epochs {
            for i in 0..data.len() {
                let x = data.row(i);
                let y = if data.label(i) { T::one() } else { -T::one() };
                if y * dot(&v, x) > T::zero() {
                    c += 1;
                } else {
                    perceptrons.push((v.clone(), c));
                    if perceptrons.len() >= params.max_perceptrons {
                        break 'outer;
                    }
                    for (w, &xi) in v.iter_mut().zip(x) {
                        *w = *w + y * xi;
                    }
                    v[d] = v[d] + y;
                    c = 1;
                }
            }
        }
        perceptrons.push((v, c));
        perceptrons.retain(|(_, c)| *c > 0);
        VotedPerceptron { perceptrons }
    }

    pub(crate) fn score(&self, x: &[T]) -> T {
        let mut vote = 0.0;
        let mut total = 0.0;
        for (w, c) in &self.perceptrons {
            let s = dot(w, x);
            let sign = if s > T::zero() {
                1.0
            } else if s < T::zero() {
                -1.0
            } else {
                0.0
            };
            vote += *c as f64 * sign;
            total += *c as f64;
        }
        if total == 0.0 {
            return T::of(0.5);
        }
        T::of((1.0 + vote / total) / 2.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_counts_by_hand() {
        // Rows (scaled): x=0 neg, x=1 pos. Epoch 1:
        //  row0: v=0 -> y*v.x = 0 -> mistake, store (0,0); v = -(0,1) = (0,-1), c=1
        //  row1: v.x = 0*1 - 1 = -1, y=+1 -> mistake, store ((0,-1),1); v = (1,0), c=1
        // Epoch 2: row0: v.x = 0 -> mistake, store ((1,0),1); v = (1,-1), c=1
        //  row1: 1-1 = 0 -> mistake, store ((1,-1),1); v = (2,0), c=1
        // Epoch 3: row0: 0 -> mistake, store ((2,0),1); v = (2,-1) c=1
        //  row1: 2-1 = 1 > 0 -> c=2; then it never errs again.
        let data = LabeledMatrix::new(vec![vec![0.0], vec![1.0]], vec![false, true]).unwrap();
        let p = VotedPerceptron::fit(
            &data,
            &VotedPerceptronParams {
                epochs: 3,
                max_perceptrons: 100,
            },
        );
        let counts: Vec<u64> = p.perceptrons.iter().map(|(_, c)| *c).collect();
        assert_eq!(counts, vec![1, 1, 1, 1, 2]);
        // At x=1: signs of (0,-1):-1, (1,0):+1, (1,-1):0, (2,0):+1, (2,-1):+1 (x2)
        // vote = -1 + 1 + 0 + 1 + 2 = 3 of 6 -> (1 + 0.5)/2
        assert!((p.score(&[1.0f64]) - 0.75).abs() < 1e-12);
    }
}
