//! Binary logistic regression fit by Newton's method.
//!
//! Features are z-scored with statistics taken from the training rows, and
//! the model keeps those statistics so prediction applies the identical
//! transform. A tiny L2 penalty (excluding the bias) keeps the Hessian
//! positive definite on separable data; step halving guards each Newton
//! update against overshooting.

use serde::{Deserialize, Serialize};

use crate::ingest::Label;
use crate::readability::sigmoid;

pub const L2_PENALTY: f64 = 1e-8;
pub const TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 500;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub bias: f64,
    /// One weight per feature, in the z-scored space.
    pub weights: Vec<f64>,
    /// Per-feature training means and standard deviations used for scaling.
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl LogisticModel {
    /// Probability of Unresolved for a raw (unscaled) feature row.
    pub fn predict_prob(&self, features: &[f64]) -> f64 {
        let mut z = self.bias;
        for ((&x, &m), (&s, &w)) in features
            .iter()
            .zip(&self.means)
            .zip(self.stds.iter().zip(&self.weights))
        {
            z += w * (x - m) / s;
        }
        sigmoid(z)
    }
}

/// Column means and standard deviations (population form). A constant
/// column gets std 1.0 so its z-scores come out exactly 0.
fn scaling(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let dims = x[0].len();
    let mut means = vec![0.0; dims];
    for row in x {
        for (m, &v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut stds = vec![0.0; dims];
    for row in x {
        for ((s, &v), &m) in stds.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut stds {
        *s = (*s / n).sqrt();
        if *s <= 1e-12 {
            *s = 1.0;
        }
    }
    (means, stds)
}

/// Penalised negative log-likelihood. `theta[0]` is the bias and is not
/// penalised. Uses log1p(exp(-|z|)) + max(z, 0) for log(1 + e^z).
fn nll(z_rows: &[Vec<f64>], y: &[f64], theta: &[f64], l2: f64) -> f64 {
    let mut total = 0.0;
    for (row, &label) in z_rows.iter().zip(y) {
        let z = theta[0] + row.iter().zip(&theta[1..]).map(|(a, b)| a * b).sum::<f64>();
        let log1p_exp = z.max(0.0) + (-z.abs()).exp().ln_1p();
        total += log1p_exp - label * z;
    }
    total + 0.5 * l2 * theta[1..].iter().map(|w| w * w).sum::<f64>()
}

/// Solve `a * x = b` by Gaussian elimination with partial pivoting.
/// Returns None when the system is numerically singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite matrix")
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut v = b[col];
        for k in col + 1..n {
            v -= a[col][k] * x[k];
        }
        x[col] = v / a[col][col];
    }
    Some(x)
}

/// Fit on dense rows `x` (raw scale) with labels `y`; Unresolved is the
/// positive class.
pub fn train_logistic(x: &[Vec<f64>], y: &[Label]) -> LogisticModel {
    assert_eq!(x.len(), y.len(), "rows and labels must align");
    assert!(!x.is_empty(), "cannot train on an empty matrix");
    let dims = x[0].len();
    let (means, stds) = scaling(x);
    let z_rows: Vec<Vec<f64>> = x
        .iter()
        .map(|row| {
            row.iter()
                .zip(means.iter().zip(&stds))
                .map(|(&v, (&m, &s))| (v - m) / s)
                .collect()
        })
        .collect();
    let targets: Vec<f64> =
        y.iter().map(|&l| if l == Label::Unresolved { 1.0 } else { 0.0 }).collect();

    // theta = [bias, w_1, .., w_d]
    let mut theta = vec![0.0; dims + 1];
    let mut converged = false;
    let mut iterations = 0;
    let mut current_nll = nll(&z_rows, &targets, &theta, L2_PENALTY);

    for iter in 0..MAX_ITERATIONS {
        iterations = iter + 1;

        let mut grad = vec![0.0; dims + 1];
        let mut hess = vec![vec![0.0; dims + 1]; dims + 1];
        for (row, &label) in z_rows.iter().zip(&targets) {
            let z = theta[0] + row.iter().zip(&theta[1..]).map(|(a, b)| a * b).sum::<f64>();
            let p = sigmoid(z);
            let residual = p - label;
            let weight = (p * (1.0 - p)).max(1e-12);
            grad[0] += residual;
            hess[0][0] += weight;
            for (j, &xj) in row.iter().enumerate() {
                grad[j + 1] += residual * xj;
                hess[0][j + 1] += weight * xj;
                for (k, &xk) in row.iter().enumerate().skip(j) {
                    hess[j + 1][k + 1] += weight * xj * xk;
                }
            }
        }
        for j in 1..=dims {
            grad[j] += L2_PENALTY * theta[j];
            hess[j][j] += L2_PENALTY;
            for k in 0..j {
                hess[j][k] = hess[k][j];
            }
        }

        let Some(delta) = solve_linear(hess, grad.clone()) else {
            break;
        };

        // Step halving: back off until the objective stops increasing.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let candidate: Vec<f64> =
                theta.iter().zip(&delta).map(|(t, d)| t - step * d).collect();
            let candidate_nll = nll(&z_rows, &targets, &candidate, L2_PENALTY);
            if candidate_nll <= current_nll {
                let max_move = delta.iter().map(|d| (step * d).abs()).fold(0.0, f64::max);
                theta = candidate;
                current_nll = candidate_nll;
                accepted = true;
                if max_move < TOLERANCE {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = false;
            break;
        }
        if converged {
            break;
        }
    }

    LogisticModel {
        bias: theta[0],
        weights: theta[1..].to_vec(),
        means,
        stds,
        converged,
        iterations,
    }
}
