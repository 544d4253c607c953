//! Gaussian naive Bayes for two classes.
//!
//! Per class and per feature a normal density is fit by maximum likelihood
//! (population variance), with a small floor on the variance so constant
//! columns stay usable. Posteriors are computed from log-densities through
//! the logistic of their difference, which keeps the pair summing to one.

use serde::{Deserialize, Serialize};

use crate::ingest::Label;
use crate::readability::sigmoid;

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDensity {
    pub prior: f64,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl ClassDensity {
    fn log_joint(&self, features: &[f64]) -> f64 {
        let mut total = self.prior.ln();
        for ((&x, &mean), &var) in features.iter().zip(&self.means).zip(&self.variances) {
            let diff = x - mean;
            total += -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + diff * diff / var);
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesModel {
    /// Densities for the Unresolved (positive) and Resolved classes.
    pub unresolved: ClassDensity,
    pub resolved: ClassDensity,
}

impl BayesModel {
    /// Posterior probability of Unresolved.
    pub fn predict_prob(&self, features: &[f64]) -> f64 {
        let lp_pos = self.unresolved.log_joint(features);
        let lp_neg = self.resolved.log_joint(features);
        sigmoid(lp_pos - lp_neg)
    }
}

fn fit_class(rows: &[&Vec<f64>], prior: f64, dims: usize) -> ClassDensity {
    let n = rows.len() as f64;
    let mut means = vec![0.0; dims];
    for row in rows {
        for (m, &v) in means.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut variances = vec![0.0; dims];
    for row in rows {
        for ((s, &v), &m) in variances.iter_mut().zip(row.iter()).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut variances {
        *s = (*s / n).max(VARIANCE_FLOOR);
    }
    ClassDensity { prior, means, variances }
}

/// Fit on dense rows `x` with labels `y`. Both classes must be present.
pub fn train_bayes(x: &[Vec<f64>], y: &[Label]) -> BayesModel {
    assert_eq!(x.len(), y.len(), "rows and labels must align");
    assert!(!x.is_empty(), "cannot train on an empty matrix");
    let dims = x[0].len();
    let pos: Vec<&Vec<f64>> = x
        .iter()
        .zip(y)
        .filter(|(_, &l)| l == Label::Unresolved)
        .map(|(row, _)| row)
        .collect();
    let neg: Vec<&Vec<f64>> = x
        .iter()
        .zip(y)
        .filter(|(_, &l)| l == Label::Resolved)
        .map(|(row, _)| row)
        .collect();
    assert!(!pos.is_empty() && !neg.is_empty(), "both classes must appear in training data");
    let n = x.len() as f64;
    BayesModel {
        unresolved: fit_class(&pos, pos.len() as f64 / n, dims),
        resolved: fit_class(&neg, neg.len() as f64 / n, dims),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_model(pos_mean: f64, neg_mean: f64, prior_pos: f64) -> BayesModel {
        BayesModel {
            unresolved: ClassDensity {
                prior: prior_pos,
                means: vec![pos_mean],
                variances: vec![1.0],
            },
            resolved: ClassDensity {
                prior: 1.0 - prior_pos,
                means: vec![neg_mean],
                variances: vec![1.0],
            },
        }
    }

    #[test]
    fn midpoint_between_symmetric_classes_is_half() {
        let model = unit_model(0.0, 2.0, 0.5);
        let p = model.predict_prob(&[1.0]);
        assert!((p - 0.5).abs() < 1e-12, "p = {p}");
    }

    #[test]
    fn posterior_at_class_mean() {
        // Unit-variance classes centred at 0 and 2 with equal priors: at
        // x = 0 the log-density gap is 2, so the posterior is e^2/(1+e^2).
        let model = unit_model(0.0, 2.0, 0.5);
        let p = model.predict_prob(&[0.0]);
        let expected = 2.0_f64.exp() / (1.0 + 2.0_f64.exp());
        assert!((p - expected).abs() < 1e-12);
        assert!((p - 0.8808).abs() < 1e-4);
    }

    #[test]
    fn identical_likelihoods_return_the_prior() {
        let model = unit_model(1.0, 1.0, 0.9);
        let p = model.predict_prob(&[5.0]);
        assert!((p - 0.9).abs() < 1e-9, "p = {p}");
    }

    #[test]
    fn posteriors_sum_to_one() {
        let model = BayesModel {
            unresolved: ClassDensity {
                prior: 0.3,
                means: vec![1.0, -2.0],
                variances: vec![0.5, 4.0],
            },
            resolved: ClassDensity {
                prior: 0.7,
                means: vec![-1.0, 3.0],
                variances: vec![2.0, 0.25],
            },
        };
        for point in [[0.0, 0.0], [1.5, -2.5], [-3.0, 4.0], [10.0, 10.0]] {
            let p = model.predict_prob(&point);
            let q = sigmoid(
                model.resolved.log_joint(&point) - model.unresolved.log_joint(&point),
            );
            assert!((p + q - 1.0).abs() < 1e-12, "p + q = {}", p + q);
        }
    }

    #[test]
    fn fit_recovers_moments() {
        let x = vec![
            vec![1.0, 10.0],
            vec![3.0, 14.0],
            vec![0.0, 0.0],
            vec![2.0, 2.0],
            vec![4.0, 4.0],
            vec![6.0, 6.0],
        ];
        let y = vec![
            Label::Unresolved,
            Label::Unresolved,
            Label::Resolved,
            Label::Resolved,
            Label::Resolved,
            Label::Resolved,
        ];
        let model = train_bayes(&x, &y);
        assert!((model.unresolved.prior - 2.0 / 6.0).abs() < 1e-12);
        assert!((model.unresolved.means[0] - 2.0).abs() < 1e-12);
        assert!((model.unresolved.means[1] - 12.0).abs() < 1e-12);
        // Population variance of {1, 3} is 1; of {10, 14} is 4.
        assert!((model.unresolved.variances[0] - 1.0).abs() < 1e-12);
        assert!((model.unresolved.variances[1] - 4.0).abs() < 1e-12);
        assert!((model.resolved.means[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_feature_hits_the_floor() {
        let x = vec![vec![5.0], vec![5.0], vec![5.0], vec![5.0]];
        let y = vec![
            Label::Unresolved,
            Label::Unresolved,
            Label::Resolved,
            Label::Resolved,
        ];
        let model = train_bayes(&x, &y);
        assert_eq!(model.unresolved.variances[0], VARIANCE_FLOOR);
        let p = model.predict_prob(&[5.0]);
        assert!((p - 0.5).abs() < 1e-9);
    }
}
