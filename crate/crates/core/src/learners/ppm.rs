//! Performance prediction model: one regressor per version, pick the
//! version with the highest predicted log speedup.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::linear::LinearModel;
use super::tree::Tree;
use crate::model::VersionId;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regressor {
    RegressionTree(Tree<f64>),
    Linear(LinearModel),
}

impl Regressor {
    /// Prediction and the number of comparisons it took.
    pub fn predict(&self, x: &[f64]) -> Result<(f64, usize)> {
        match self {
            Regressor::RegressionTree(t) => t.predict(x),
            Regressor::Linear(m) => Ok((m.predict(x)?, 0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpmModel {
    pub baseline: VersionId,
    /// One model per representative; the baseline is the constant 0.
    #[serde(with = "pairs")]
    pub models: BTreeMap<VersionId, Regressor>,
    #[serde(with = "pairs")]
    pub code_sizes: BTreeMap<VersionId, u64>,
}

/// Id-keyed maps as `[id, value]` pairs, so they survive formats and
/// enclosing enums that only allow string keys.
mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::model::VersionId;

    pub fn serialize<S: Serializer, T: Serialize>(
        map: &BTreeMap<VersionId, T>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        s.collect_seq(map.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Deserialize<'de>>(
        d: D,
    ) -> Result<BTreeMap<VersionId, T>, D::Error> {
        Ok(Vec::<(VersionId, T)>::deserialize(d)?.into_iter().collect())
    }
}

impl PpmModel {
    /// Checks that every representative has a model and a known size.
    pub fn new(
        baseline: VersionId,
        representative: &[VersionId],
        mut models: BTreeMap<VersionId, Regressor>,
        code_sizes: BTreeMap<VersionId, u64>,
    ) -> Result<Self> {
        for &v in representative {
            if v == baseline {
                continue;
            }
            if !models.contains_key(&v) {
                return Err(Error::ModelIncomplete(v));
            }
        }
        models.retain(|v, _| representative.contains(v) && *v != baseline);
        for v in models.keys().chain(std::iter::once(&baseline)) {
            if !code_sizes.contains_key(v) {
                return Err(Error::UnknownVersion(*v));
            }
        }
        Ok(PpmModel {
            baseline,
            models,
            code_sizes,
        })
    }

    pub fn representatives(&self) -> Vec<VersionId> {
        self.models.keys().copied().collect()
    }

    pub fn select(&self, x: &[f64]) -> Result<(VersionId, usize)> {
        let mut best = (self.baseline, 0.0f64);
        let mut comparisons = 0;
        let key = |v: VersionId| (self.code_sizes[&v], v);
        for (&v, model) in &self.models {
            let (pred, c) = model.predict(x)?;
            comparisons += c;
            if pred > best.1 || (pred == best.1 && key(v) < key(best.0)) {
                best = (v, pred);
            }
        }
        Ok((best.0, comparisons))
    }
}

/// Version with the highest predicted log speedup at `x`; ties go to the
/// smaller version, then the smaller id. Fails if a representative has no
/// model.
pub fn ppm_select(
    models: &BTreeMap<VersionId, Regressor>,
    x: &[f64],
    representative: &[VersionId],
    baseline: VersionId,
    code_sizes: &BTreeMap<VersionId, u64>,
) -> Result<VersionId> {
    let model = PpmModel::new(baseline, representative, models.clone(), code_sizes.clone())?;
    Ok(model.select(x)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VersionId {
        VersionId(i)
    }

    fn constant(c: f64) -> Regressor {
        Regressor::Linear(LinearModel {
            intercept: c,
            coefficients: vec![0.0],
            jittered: false,
        })
    }

    fn sizes(s: &[(u32, u64)]) -> BTreeMap<VersionId, u64> {
        s.iter().map(|&(i, c)| (v(i), c)).collect()
    }

    #[test]
    fn argmax_and_baseline_fallback() {
        let cs = sizes(&[(0, 100), (1, 10), (2, 20)]);
        let models = BTreeMap::from([(v(1), constant(0.2)), (v(2), constant(0.5))]);
        assert_eq!(
            ppm_select(&models, &[1.0], &[v(1), v(2)], v(0), &cs).unwrap(),
            v(2)
        );

        let models = BTreeMap::from([(v(1), constant(-0.2)), (v(2), constant(-0.01))]);
        assert_eq!(
            ppm_select(&models, &[1.0], &[v(1), v(2)], v(0), &cs).unwrap(),
            v(0)
        );
    }

    #[test]
    fn exact_tie_goes_to_smaller_code() {
        let cs = sizes(&[(0, 100), (1, 30), (2, 20)]);
        let models = BTreeMap::from([(v(1), constant(0.4)), (v(2), constant(0.4))]);
        assert_eq!(
            ppm_select(&models, &[1.0], &[v(1), v(2)], v(0), &cs).unwrap(),
            v(2)
        );
        let cs = sizes(&[(0, 100), (1, 10), (2, 20)]);
        assert_eq!(
            ppm_select(&models, &[1.0], &[v(1), v(2)], v(0), &cs).unwrap(),
            v(1)
        );
    }

    #[test]
    fn missing_model_rejected() {
        let cs = sizes(&[(0, 100), (1, 10), (2, 20)]);
        let models = BTreeMap::from([(v(1), constant(0.4))]);
        assert!(matches!(
            ppm_select(&models, &[1.0], &[v(1), v(2)], v(0), &cs),
            Err(Error::ModelIncomplete(VersionId(2)))
        ));
    }
}
