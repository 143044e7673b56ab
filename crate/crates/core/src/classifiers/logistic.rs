use super::{LabeledMatrix, LogisticParams};
use crate::linalg::solve;
use crate::scalar::Scalar;

/// Ridge-penalised logistic regression fitted by IRLS (Newton steps with
/// step halving). Features are standardised internally; the penalty does not
/// apply to the intercept.
#[derive(Debug, Clone)]
pub(crate) struct Logistic<T> {
    mean: Vec<T>,
    scale: Vec<T>,
    /// Intercept first.
    beta: Vec<T>,
}

/// `ln σ(z)` without overflow.
fn log_sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

fn sigmoid<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

impl<T: Scalar> Logistic<T> {
    pub(crate) fn fit(data: &LabeledMatrix<T>, params: &LogisticParams) -> Self {
        let n = data.len();
        let d = data.width();
        let nf = T::of_usize(n);
        let mut mean = vec![T::zero(); d];
        let mut scale = vec![T::zero(); d];
        for j in 0..d {
            let m = data.column(j).sum::<T>() / nf;
            let var = data.column(j).map(|v| (v - m) * (v - m)).sum::<T>() / nf;
            mean[j] = m;
            // Constant columns get scale 0 and drop out of the design.
            scale[j] = if var > T::zero() { var.sqrt() } else { T::zero() };
        }
        let design: Vec<Vec<T>> = data
            .rows()
            .map(|r| {
                let mut z = Vec::with_capacity(d + 1);
                z.push(T::one());
                for j in 0..d {
                    z.push(if scale[j] > T::zero() {
                        (r[j] - mean[j]) / scale[j]
                    } else {
                        T::zero()
                    });
                }
                z
            })
            .collect();
        let y: Vec<T> = data
            .labels()
            .iter()
            .map(|&l| if l { T::one() } else { T::zero() })
            .collect();
        let p = d + 1;
        let ridge = T::of(params.ridge);
        let tol = T::of(params.tolerance);

        let objective = |beta: &[T]| -> T {
            let mut ll = T::zero();
            for (z, &yi) in design.iter().zip(&y) {
                let eta = dot(beta, z);
                ll = ll + if yi > T::zero() { log_sigmoid(eta) } else { log_sigmoid(-eta) };
            }
            let penalty = beta[1..].iter().map(|&b| b * b).sum::<T>();
            ll - T::of(0.5) * ridge * penalty
        };

        let mut beta = vec![T::zero(); p];
        let mut current = objective(&beta);
        for _ in 0..params.max_iterations {
            let mut grad = vec![T::zero(); p];
            let mut hess = vec![T::zero(); p * p];
            for (z, &yi) in design.iter().zip(&y) {
                let mu = sigmoid(dot(&beta, z));
                let w = mu * (T::one() - mu);
                let r = yi - mu;
                for a in 0..p {
                    grad[a] = grad[a] + z[a] * r;
                    let wa = w * z[a];
                    for b in a..p {
                        hess[a * p + b] = hess[a * p + b] + wa * z[b];
                    }
                }
            }
            for a in 0..p {
                for b in 0..a {
                    hess[a * p + b] = hess[b * p + a];
                }
            }
            for a in 1..p {
                grad[a] = grad[a] - ridge * beta[a];
                hess[a * p + a] = hess[a * p + a] + ridge;
            }
            let Some(step) = solve(hess, grad) else {
                break;
            };
            let mut t = T::one();
            let mut accepted = None;
            for _ in 0..30 {
                let cand: Vec<T> = beta.iter().zip(&step).map(|(&b, &s)| b + t * s).collect();
                let value = objective(&cand);
                if value.is_finite() && value >= current {
                    accepted = Some((cand, value));
                    break;
                }
                t = t * T::of(0.5);
            }
            let Some((cand, value)) = accepted else {
                break;
            };
            let change = cand
                .iter()
                .zip(&beta)
                .map(|(&a, &b)| (a - b).abs())
                .fold(T::zero(), T::max);
            beta = cand;
            current = value;
            if change < tol {
                break;
            }
        }
        Logistic { mean, scale, beta }
    }

    pub(crate) fn score(&self, x: &[T]) -> T {
        let mut eta = self.beta[0];
        for (j, &v) in x.iter().enumerate() {
            if self.scale[j] > T::zero() {
                eta = eta + self.beta[j + 1] * (v - self.mean[j]) / self.scale[j];
            }
        }
        sigmoid(eta)
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}
