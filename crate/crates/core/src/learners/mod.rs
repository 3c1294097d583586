//! Run-time mapping models from dataset features to versions.
//!
//! Two families are provided:
//!
//! - **Direct classification**: a label per dataset (the best available
//!   version) learned with a decision tree ([`tree`]) or an ordered rule
//!   list ([`rules`]).
//! - **Performance prediction**: one regressor per version predicting the
//!   log speedup over the baseline ([`tree`] regression trees or
//!   [`linear`] least squares); selection takes the argmax ([`ppm`]).
//!
//! All split thresholds are midpoints between consecutive distinct
//! feature values and every comparison is `feature <= threshold` going
//! left, the same convention the dispatcher uses.

pub mod cv;
pub mod linear;
pub mod ppm;
pub mod rules;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::model::{Scenario, SpeedupMatrix, VersionId};
use crate::{Error, Result};

pub use cv::{cross_validate, CvData, CvReport, LearnerSpec};
pub use linear::{train_linear_regression, LinearModel};
pub use ppm::{ppm_select, PpmModel, Regressor};
pub use rules::{train_rule_list, RuleConfig, RuleList};
pub use tree::{
    train_regression_tree, train_tree_classifier, RegTreeConfig, Tree, TreeConfig, TreeNode,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: VersionId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSample {
    pub features: Vec<f64>,
    pub target: f64,
}

fn check_aligned(scenario: &Scenario, matrix: &SpeedupMatrix) -> Result<()> {
    let same = scenario.datasets().len() == matrix.n_datasets()
        && scenario
            .datasets()
            .iter()
            .zip(matrix.dataset_ids())
            .all(|(d, id)| d.id == *id);
    if same {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            left: scenario.datasets().len(),
            right: matrix.n_datasets(),
        })
    }
}

/// One training pair per dataset, labeled with the best version among the
/// representatives and the baseline.
///
/// Exact speedup ties go to the smaller version, then the smaller id.
pub fn make_dc_labels(
    scenario: &Scenario,
    matrix: &SpeedupMatrix,
    representative: &[VersionId],
) -> Result<Vec<LabeledSample>> {
    check_aligned(scenario, matrix)?;
    let mut pool = vec![matrix.baseline_index()];
    for &id in representative {
        let idx = matrix.version_index(id).ok_or(Error::UnknownVersion(id))?;
        if !pool.contains(&idx) {
            pool.push(idx);
        }
    }
    Ok(scenario
        .datasets()
        .iter()
        .enumerate()
        .map(|(d, rec)| {
            let best = pool
                .iter()
                .copied()
                .reduce(|a, b| {
                    let (sa, sb) = (matrix.speedup(d, a), matrix.speedup(d, b));
                    let key = |v: usize| (matrix.code_size(v), v);
                    if sb > sa || (sb == sa && key(b) < key(a)) {
                        b
                    } else {
                        a
                    }
                })
                .expect("pool holds the baseline");
            LabeledSample {
                features: rec.features.clone(),
                label: matrix.version_ids()[best],
            }
        })
        .collect())
}

/// Training pairs for one version's performance model: features against
/// the log speedup of `version` over the baseline.
pub fn make_regression_samples(
    scenario: &Scenario,
    matrix: &SpeedupMatrix,
    version: VersionId,
) -> Result<Vec<RegressionSample>> {
    check_aligned(scenario, matrix)?;
    let v = matrix
        .version_index(version)
        .ok_or(Error::UnknownVersion(version))?;
    Ok(scenario
        .datasets()
        .iter()
        .enumerate()
        .map(|(d, rec)| RegressionSample {
            features: rec.features.clone(),
            target: matrix.log_speedup(d, v),
        })
        .collect())
}

/// Fraction of mismatching labels.
pub fn error_rate(predicted: &[VersionId], actual: &[VersionId]) -> Result<f64> {
    if predicted.len() != actual.len() || actual.is_empty() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    let wrong = predicted.iter().zip(actual).filter(|(p, a)| p != a).count();
    Ok(wrong as f64 / actual.len() as f64)
}

/// Root relative squared error, in percent, against a predictor that
/// always answers `train_mean`.
pub fn rrse(predicted: &[f64], actual: &[f64], train_mean: f64) -> Result<f64> {
    if predicted.len() != actual.len() || actual.is_empty() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    let num: f64 = predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a).powi(2))
        .sum();
    let den: f64 = actual.iter().map(|a| (train_mean - a).powi(2)).sum();
    if den == 0.0 {
        return Err(Error::DegenerateActuals);
    }
    Ok(100.0 * (num / den).sqrt())
}

pub(crate) fn check_arity(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::FeatureArity {
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

/// Uniform arity across samples; returns it.
pub(crate) fn common_arity<'a>(mut rows: impl Iterator<Item = &'a [f64]>) -> Result<usize> {
    let first = rows.next().ok_or(Error::NoTrainingData)?.len();
    for r in rows {
        check_arity(first, r)?;
    }
    Ok(first)
}
