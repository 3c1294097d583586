//! Ordinary least squares with intercept.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_arity, common_arity, RegressionSample};
use crate::Result;

/// Diagonal jitter added to the normal equations of a singular design,
/// relative to the largest diagonal entry (at least 1).
pub const RIDGE_JITTER: f64 = 1e-8;

/// A Cholesky pivot below this fraction of its diagonal entry marks the
/// design as numerically singular.
const PIVOT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Whether the jittered system had to be solved.
    pub jittered: bool,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        check_arity(self.coefficients.len(), x)?;
        Ok(self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(b, x)| b * x)
                .sum::<f64>())
    }
}

/// Least squares fit via the normal equations on centered data; the
/// intercept is recovered from the means. Rank-deficient designs (for
/// example a duplicated column) are solved with [`RIDGE_JITTER`] on the
/// diagonal.
pub fn train_linear_regression(samples: &[RegressionSample]) -> Result<LinearModel> {
    let k = common_arity(samples.iter().map(|s| s.features.as_slice()))?;
    let n = samples.len();
    let nf = n as f64;
    let x_mean: Vec<f64> = (0..k)
        .map(|j| samples.iter().map(|s| s.features[j]).sum::<f64>() / nf)
        .collect();
    let y_mean = samples.iter().map(|s| s.target).sum::<f64>() / nf;
    let xc = DMatrix::from_fn(n, k, |i, j| samples[i].features[j] - x_mean[j]);
    let yc = DVector::from_iterator(n, samples.iter().map(|s| s.target - y_mean));
    let gram = xc.transpose() * &xc;
    let rhs = xc.transpose() * yc;

    let well_posed = |g: &DMatrix<f64>| {
        let chol = g.clone().cholesky()?;
        let l = chol.l();
        let ok = (0..k).all(|i| {
            let diag = g[(i, i)];
            diag > 0.0 && l[(i, i)] * l[(i, i)] >= PIVOT_TOLERANCE * diag
        });
        ok.then_some(chol)
    };

    let (beta, jittered) = match well_posed(&gram) {
        Some(chol) => (chol.solve(&rhs), false),
        None => {
            let scale = (0..k).map(|i| gram[(i, i)]).fold(1.0, f64::max);
            let mut g = gram.clone();
            for i in 0..k {
                g[(i, i)] += RIDGE_JITTER * scale;
            }
            let chol = g
                .cholesky()
                .expect("jittered Gram matrix is positive definite");
            (chol.solve(&rhs), true)
        }
    };
    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&x_mean)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    Ok(LinearModel {
        intercept,
        coefficients,
        jittered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(rows: &[(&[f64], f64)]) -> Vec<RegressionSample> {
        rows.iter()
            .map(|(x, y)| RegressionSample {
                features: x.to_vec(),
                target: *y,
            })
            .collect()
    }

    #[test]
    fn two_point_interpolation() {
        let m = train_linear_regression(&samples(&[(&[0.0], 1.0), (&[1.0], 3.0)])).unwrap();
        assert!((m.intercept - 1.0).abs() < 1e-6);
        assert!((m.coefficients[0] - 2.0).abs() < 1e-6);
        assert!(!m.jittered);
    }

    #[test]
    fn constant_targets() {
        let m = train_linear_regression(&samples(&[
            (&[1.0, 5.0], 0.3),
            (&[2.0, 1.0], 0.3),
            (&[4.0, 7.0], 0.3),
            (&[3.0, 2.0], 0.3),
        ]))
        .unwrap();
        assert!((m.intercept - 0.3).abs() < 1e-9);
        assert!(m.coefficients.iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn duplicated_column_matches_single_column_fit() {
        let xs = [1.0, 2.0, 4.0, 7.0, 8.0];
        let ys = [2.1, 3.9, 8.2, 13.8, 16.1];
        let single: Vec<_> = xs
            .iter()
            .zip(ys)
            .map(|(&x, y)| RegressionSample {
                features: vec![x],
                target: y,
            })
            .collect();
        let dup: Vec<_> = xs
            .iter()
            .zip(ys)
            .map(|(&x, y)| RegressionSample {
                features: vec![x, x],
                target: y,
            })
            .collect();
        let a = train_linear_regression(&single).unwrap();
        let b = train_linear_regression(&dup).unwrap();
        assert!(b.jittered);
        assert!(b.coefficients.iter().all(|c| c.is_finite()));
        for x in [0.0, 3.0, 5.5, 10.0] {
            let pa = a.predict(&[x]).unwrap();
            let pb = b.predict(&[x, x]).unwrap();
            assert!((pa - pb).abs() < 1e-4, "{pa} vs {pb}");
        }
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let rows = samples(&[
            (&[1.0, 0.5], 1.0),
            (&[2.0, -1.0], 2.5),
            (&[3.0, 2.0], 2.0),
            (&[4.0, 1.0], 4.5),
            (&[5.0, -2.0], 6.0),
            (&[6.0, 0.0], 5.0),
        ]);
        let m = train_linear_regression(&rows).unwrap();
        assert!(!m.jittered);
        let resid: Vec<f64> = rows
            .iter()
            .map(|s| s.target - m.predict(&s.features).unwrap())
            .collect();
        assert!(resid.iter().sum::<f64>().abs() < 1e-6);
        for j in 0..2 {
            let dot: f64 = rows
                .iter()
                .zip(&resid)
                .map(|(s, r)| s.features[j] * r)
                .sum();
            assert!(dot.abs() < 1e-6, "column {j}: {dot}");
        }
    }

    #[test]
    fn single_sample_is_solvable() {
        let m = train_linear_regression(&samples(&[(&[3.0], 0.7)])).unwrap();
        assert!((m.predict(&[10.0]).unwrap() - 0.7).abs() < 1e-12);
    }
}
