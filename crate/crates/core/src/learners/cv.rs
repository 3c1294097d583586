//! k-fold cross validation for the four learners.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    error_rate, rrse, train_linear_regression, train_regression_tree, train_rule_list,
    train_tree_classifier, LabeledSample, RegTreeConfig, RegressionSample, RuleConfig, TreeConfig,
};
use crate::model::VersionId;
use crate::rng::SeededRng;
use crate::{Error, Result};

const FOLD_STREAM: u64 = 0x666f_6c64;

/// Which learner to train, with its hyperparameters.
///
/// Parsed from a key/value document such as
///
/// ```text
/// algorithm = "tree"
/// max_depth = 8
/// prune = true
/// seed = 3
/// ```
///
/// Unspecified hyperparameters take their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum LearnerSpec {
    Tree(TreeConfig),
    Rules(RuleConfig),
    Regtree(RegTreeConfig),
    Linreg,
}

impl LearnerSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("learner descriptor: {e}")))
    }

    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("learner descriptors serialize")
    }

    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Tree(_) => "tree",
            LearnerSpec::Rules(_) => "rules",
            LearnerSpec::Regtree(_) => "regtree",
            LearnerSpec::Linreg => "linreg",
        }
    }

    /// Direct classification learners; the others predict performance.
    pub fn is_classifier(&self) -> bool {
        matches!(self, LearnerSpec::Tree(_) | LearnerSpec::Rules(_))
    }
}

#[derive(Debug, Clone, Copy)]
pub enum CvData<'a> {
    Classification(&'a [LabeledSample]),
    Regression(&'a [RegressionSample]),
}

impl CvData<'_> {
    fn len(&self) -> usize {
        match self {
            CvData::Classification(s) => s.len(),
            CvData::Regression(s) => s.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    ErrorRate,
    RrsePercent,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::ErrorRate => "error_rate",
            Metric::RrsePercent => "rrse_percent",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// `None` when RRSE is undefined on the fold (all test targets equal
    /// the training mean).
    pub metric: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub k: usize,
    pub seed: u64,
    pub learner: LearnerSpec,
    pub metric: Metric,
    pub folds: Vec<FoldResult>,
    /// Mean of the defined per-fold metrics.
    pub aggregate: Option<f64>,
    /// `(actual, predicted) -> count`, classification only.
    pub confusion: BTreeMap<(VersionId, VersionId), usize>,
    /// Test fold of every sample.
    pub assignment: Vec<usize>,
}

fn check_folds(n: usize, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if n < k {
        return Err(Error::TooFewSamples {
            samples: n,
            folds: k,
        });
    }
    Ok(())
}

/// Stratified fold assignment: classes in ascending id order, each class
/// shuffled with the seed, dealt round-robin with the dealing position
/// carried across classes.
pub fn stratified_folds(labels: &[VersionId], k: usize, seed: u64) -> Result<Vec<usize>> {
    check_folds(labels.len(), k)?;
    let mut classes: Vec<VersionId> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut rng = SeededRng::new(seed, FOLD_STREAM);
    let mut fold = vec![0; labels.len()];
    let mut pos = 0;
    for c in classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        rng.shuffle(&mut members);
        for m in members {
            fold[m] = pos % k;
            pos += 1;
        }
    }
    Ok(fold)
}

/// Plain seeded shuffle dealt round-robin.
pub fn plain_folds(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    check_folds(n, k)?;
    let mut rng = SeededRng::new(seed, FOLD_STREAM);
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut fold = vec![0; n];
    for (pos, i) in order.into_iter().enumerate() {
        fold[i] = pos % k;
    }
    Ok(fold)
}

fn split<T: Clone>(items: &[T], assignment: &[usize], fold: usize) -> (Vec<T>, Vec<T>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (item, &f) in items.iter().zip(assignment) {
        if f == fold {
            test.push(item.clone());
        } else {
            train.push(item.clone());
        }
    }
    (train, test)
}

/// Classifier prediction helper shared with the CLI.
pub(crate) fn classify_all(
    learner: &LearnerSpec,
    train: &[LabeledSample],
    test: &[LabeledSample],
) -> Result<Vec<VersionId>> {
    match learner {
        LearnerSpec::Tree(cfg) => {
            let model = train_tree_classifier(train, cfg)?;
            test.iter()
                .map(|s| model.predict(&s.features).map(|p| p.0))
                .collect()
        }
        LearnerSpec::Rules(cfg) => {
            let model = train_rule_list(train, cfg)?;
            test.iter()
                .map(|s| model.predict(&s.features).map(|p| p.0))
                .collect()
        }
        _ => Err(Error::Config(format!(
            "{} is a regression learner; classification data given",
            learner.name()
        ))),
    }
}

fn regress_all(
    learner: &LearnerSpec,
    train: &[RegressionSample],
    test: &[RegressionSample],
) -> Result<Vec<f64>> {
    match learner {
        LearnerSpec::Regtree(cfg) => {
            let model = train_regression_tree(train, cfg)?;
            test.iter()
                .map(|s| model.predict(&s.features).map(|p| p.0))
                .collect()
        }
        LearnerSpec::Linreg => {
            let model = train_linear_regression(train)?;
            test.iter().map(|s| model.predict(&s.features)).collect()
        }
        _ => Err(Error::Config(format!(
            "{} is a classifier; regression data given",
            learner.name()
        ))),
    }
}

/// k-fold cross validation. Classification folds are stratified and scored
/// by error rate; regression folds are plain and scored by RRSE against
/// the fold's training mean. Deterministic for a given seed.
pub fn cross_validate(
    learner: &LearnerSpec,
    data: CvData<'_>,
    k: usize,
    seed: u64,
) -> Result<CvReport> {
    check_folds(data.len(), k)?;
    let mut folds = Vec::with_capacity(k);
    let mut confusion = BTreeMap::new();
    let (assignment, metric) = match data {
        CvData::Classification(samples) => {
            let labels: Vec<VersionId> = samples.iter().map(|s| s.label).collect();
            let assignment = stratified_folds(&labels, k, seed)?;
            for fold in 0..k {
                let (train, test) = split(samples, &assignment, fold);
                let predicted = classify_all(learner, &train, &test)?;
                let actual: Vec<VersionId> = test.iter().map(|s| s.label).collect();
                for (a, p) in actual.iter().zip(&predicted) {
                    *confusion.entry((*a, *p)).or_insert(0) += 1;
                }
                folds.push(FoldResult {
                    fold,
                    train_size: train.len(),
                    test_size: test.len(),
                    metric: Some(error_rate(&predicted, &actual)?),
                });
            }
            (assignment, Metric::ErrorRate)
        }
        CvData::Regression(samples) => {
            let assignment = plain_folds(samples.len(), k, seed)?;
            for fold in 0..k {
                let (train, test) = split(samples, &assignment, fold);
                let predicted = regress_all(learner, &train, &test)?;
                let actual: Vec<f64> = test.iter().map(|s| s.target).collect();
                let mean = train.iter().map(|s| s.target).sum::<f64>() / train.len() as f64;
                let metric = match rrse(&predicted, &actual, mean) {
                    Ok(r) => Some(r),
                    Err(Error::DegenerateActuals) => None,
                    Err(e) => return Err(e),
                };
                folds.push(FoldResult {
                    fold,
                    train_size: train.len(),
                    test_size: test.len(),
                    metric,
                });
            }
            (assignment, Metric::RrsePercent)
        }
    };
    let defined: Vec<f64> = folds.iter().filter_map(|f| f.metric).collect();
    let aggregate =
        (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(CvReport {
        k,
        seed,
        learner: *learner,
        metric,
        folds,
        aggregate,
        confusion,
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VersionId {
        VersionId(i)
    }

    fn sizes(assignment: &[usize], k: usize) -> Vec<usize> {
        let mut s = vec![0; k];
        for &f in assignment {
            s[f] += 1;
        }
        s
    }

    #[test]
    fn fold_sizes() {
        assert_eq!(sizes(&plain_folds(20, 10, 1).unwrap(), 10), vec![2; 10]);
        let s = sizes(&plain_folds(23, 10, 1).unwrap(), 10);
        assert_eq!(s.iter().max().unwrap() - s.iter().min().unwrap(), 1);
        assert!(s.iter().all(|&x| x == 2 || x == 3));
        assert!(matches!(
            plain_folds(5, 10, 1),
            Err(Error::TooFewSamples { .. })
        ));
        assert!(plain_folds(5, 1, 1).is_err());
    }

    #[test]
    fn stratified_keeps_class_proportions() {
        let labels: Vec<VersionId> = (0..47)
            .map(|i| v(if i % 5 == 0 { 1 } else { 2 + i % 2 }))
            .collect();
        let k = 10;
        let folds = stratified_folds(&labels, k, 9).unwrap();
        let s = sizes(&folds, k);
        assert!(s.iter().max().unwrap() - s.iter().min().unwrap() <= 1);
        for c in [1, 2, 3] {
            let per: Vec<usize> = (0..k)
                .map(|f| {
                    (0..labels.len())
                        .filter(|&i| folds[i] == f && labels[i] == v(c))
                        .count()
                })
                .collect();
            assert!(
                per.iter().max().unwrap() - per.iter().min().unwrap() <= 1,
                "class {c}: {per:?}"
            );
        }
        assert_eq!(stratified_folds(&labels, k, 9).unwrap(), folds);
    }

    #[test]
    fn learner_descriptor_parsing() {
        let spec =
            LearnerSpec::parse("algorithm = \"tree\"\nmax_depth = 8\nprune = true\n").unwrap();
        assert_eq!(
            spec,
            LearnerSpec::Tree(TreeConfig {
                max_depth: 8,
                prune: true,
                ..Default::default()
            })
        );
        assert_eq!(
            LearnerSpec::parse("algorithm = \"linreg\"").unwrap(),
            LearnerSpec::Linreg
        );
        assert_eq!(LearnerSpec::parse(&spec.to_text()).unwrap(), spec);
        assert!(LearnerSpec::parse("algorithm = \"svm\"").is_err());
    }

    #[test]
    fn separable_classification_has_zero_error() {
        let samples: Vec<LabeledSample> = (0..40)
            .map(|i| LabeledSample {
                // A gap between the classes keeps held-out points clear of
                // the learned midpoint.
                features: vec![if i < 20 { i as f64 } else { i as f64 + 30.0 }],
                label: v(if i < 20 { 1 } else { 2 }),
            })
            .collect();
        let spec = LearnerSpec::Tree(TreeConfig::default());
        let r = cross_validate(&spec, CvData::Classification(&samples), 10, 4).unwrap();
        assert_eq!(r.aggregate, Some(0.0));
        assert_eq!(r.confusion.values().sum::<usize>(), 40);
        assert_eq!(
            r,
            cross_validate(&spec, CvData::Classification(&samples), 10, 4).unwrap()
        );
    }

    #[test]
    fn regression_cv_reports_rrse() {
        let samples: Vec<RegressionSample> = (0..30)
            .map(|i| RegressionSample {
                features: vec![i as f64],
                target: 0.5 * i as f64 + 1.0,
            })
            .collect();
        let r = cross_validate(&LearnerSpec::Linreg, CvData::Regression(&samples), 5, 2).unwrap();
        assert_eq!(r.metric, Metric::RrsePercent);
        assert!(r.aggregate.unwrap() < 1e-6);
        let wrong = cross_validate(&LearnerSpec::Linreg, CvData::Classification(&[]), 5, 2);
        assert!(wrong.is_err());
    }
}
