//! Code growth accounting and simulated execution of an adaptive binary.

use std::collections::{BTreeMap, BTreeSet};

use super::DispatcherSpec;
use crate::learners::PpmModel;
use crate::model::{DatasetId, Scenario, VersionId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeGrowth {
    pub baseline_binary_size: u64,
    pub selector_bytes: u64,
    pub versions_bytes: u64,
    /// Dispatcher size over the baseline binary size.
    pub selector_growth: f64,
    /// Extra versions' code over the baseline binary size.
    pub multiversioning_growth: f64,
}

/// Growth caused by shipping `representative` plus `spec`. The baseline
/// is already part of the binary and is not counted if listed.
pub fn code_growth(
    representative: &[VersionId],
    baseline: VersionId,
    code_sizes: &BTreeMap<VersionId, u64>,
    baseline_binary_size: u64,
    spec: &DispatcherSpec,
) -> Result<CodeGrowth> {
    if baseline_binary_size == 0 {
        return Err(Error::ZeroBaselineSize);
    }
    let distinct: BTreeSet<VersionId> = representative
        .iter()
        .copied()
        .filter(|&v| v != baseline)
        .collect();
    let mut versions_bytes = 0;
    for v in distinct {
        versions_bytes += code_sizes.get(&v).ok_or(Error::UnknownVersion(v))?;
    }
    let selector_bytes = spec.byte_size() as u64;
    let base = baseline_binary_size as f64;
    Ok(CodeGrowth {
        baseline_binary_size,
        selector_bytes,
        versions_bytes,
        selector_growth: selector_bytes as f64 / base,
        multiversioning_growth: versions_bytes as f64 / base,
    })
}

/// How the simulated binary picks a version.
#[derive(Debug, Clone, Copy)]
pub enum Selector<'a> {
    /// A compiled direct-classification dispatcher.
    Dispatcher(&'a DispatcherSpec),
    /// Per-version performance models.
    Ppm(&'a PpmModel),
    /// Perfect knowledge of the test runtimes, restricted to the
    /// representative set.
    Oracle,
    /// Always the same version.
    Fixed(VersionId),
}

impl Selector<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Selector::Dispatcher(_) => "dispatcher",
            Selector::Ppm(_) => "ppm",
            Selector::Oracle => "oracle",
            Selector::Fixed(_) => "fixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetOutcome {
    pub dataset: DatasetId,
    pub chosen: VersionId,
    /// Speedup of the chosen version on this dataset.
    pub speedup: f64,
    /// Best version of the representative set on this dataset.
    pub ideal: VersionId,
    pub ideal_speedup: f64,
    /// Best speedup over all versions.
    pub oracle_speedup: f64,
    pub comparisons: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub selector: &'static str,
    /// Representative set, ascending, baseline included.
    pub available: Vec<VersionId>,
    pub outcomes: Vec<DatasetOutcome>,
    pub geomean_realized: f64,
    /// `G(S)`: geometric mean of the per-dataset best over the set.
    pub geomean_ideal: f64,
    /// `G*`: geometric mean of the per-dataset best over all versions.
    pub geomean_oracle: f64,
    pub fraction_of_representative_oracle: f64,
    pub fraction_of_full_oracle: f64,
    /// Share of datasets whose chosen version is strictly slower than the
    /// best of the set.
    pub mispick_rate: f64,
    pub mean_comparisons: f64,
    pub max_comparisons: usize,
    /// Test dataset ids that also occur in the training scenario.
    pub overlapping_ids: Vec<DatasetId>,
    pub code_growth: Option<CodeGrowth>,
}

fn geomean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v.ln(), n + 1));
    (sum / n as f64).exp()
}

/// Runs every test dataset through `selector` and scores the realized
/// speedups against the best of the representative set and the best of
/// all versions.
///
/// `representative` may or may not list the baseline; it is always
/// available. When `train_ids` is given, test ids that also occur there
/// are reported in `overlapping_ids`.
pub fn simulate(
    test: &Scenario,
    selector: Selector<'_>,
    representative: &[VersionId],
    train_ids: Option<&[DatasetId]>,
) -> Result<SimulationReport> {
    let matrix = test.speedups();
    let baseline = matrix.baseline_id();
    let mut available: Vec<VersionId> = representative.to_vec();
    available.push(baseline);
    available.sort_unstable();
    available.dedup();
    let mut pool = Vec::with_capacity(available.len());
    for &v in &available {
        pool.push(matrix.version_index(v).ok_or(Error::MissingFromTest(v))?);
    }
    let allowed = |v: VersionId| available.binary_search(&v).is_ok();

    match selector {
        Selector::Dispatcher(spec) => {
            if spec.arity() != test.arity() {
                return Err(Error::FeatureArity {
                    expected: spec.arity(),
                    got: test.arity(),
                });
            }
            if let Some(v) = spec.versions().into_iter().find(|&v| !allowed(v)) {
                return Err(Error::InvalidDispatcher(format!(
                    "leaf version {v} is not in the representative set"
                )));
            }
        }
        Selector::Ppm(model) => {
            if let Some(v) = model.representatives().into_iter().find(|&v| !allowed(v)) {
                return Err(Error::InvalidDispatcher(format!(
                    "model for version {v}, which is not in the representative set"
                )));
            }
        }
        Selector::Fixed(v) if !allowed(v) => {
            return Err(Error::InvalidDispatcher(format!(
                "fixed version {v} is not in the representative set"
            )))
        }
        _ => {}
    }

    let mut outcomes = Vec::with_capacity(matrix.n_datasets());
    for (d, rec) in test.datasets().iter().enumerate() {
        // Best of the set; exact ties go to the smaller version, then id.
        let ideal = pool
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
        let (chosen, comparisons) = match selector {
            Selector::Dispatcher(spec) => spec.eval(&rec.features)?,
            Selector::Ppm(model) => model.select(&rec.features)?,
            Selector::Oracle => (matrix.version_ids()[ideal], 0),
            Selector::Fixed(v) => (v, 0),
        };
        let c = matrix
            .version_index(chosen)
            .ok_or(Error::MissingFromTest(chosen))?;
        let oracle_speedup = (0..matrix.n_versions())
            .map(|v| matrix.speedup(d, v))
            .fold(1.0, f64::max);
        outcomes.push(DatasetOutcome {
            dataset: rec.id,
            chosen,
            speedup: matrix.speedup(d, c),
            ideal: matrix.version_ids()[ideal],
            ideal_speedup: matrix.speedup(d, ideal),
            oracle_speedup,
            comparisons,
        });
    }

    let n = outcomes.len() as f64;
    let geomean_realized = geomean(outcomes.iter().map(|o| o.speedup));
    let geomean_ideal = geomean(outcomes.iter().map(|o| o.ideal_speedup));
    let geomean_oracle = geomean(outcomes.iter().map(|o| o.oracle_speedup));
    let mispicks = outcomes
        .iter()
        .filter(|o| o.speedup < o.ideal_speedup)
        .count();
    let overlapping_ids = match train_ids {
        Some(ids) => {
            let train: BTreeSet<DatasetId> = ids.iter().copied().collect();
            outcomes
                .iter()
                .map(|o| o.dataset)
                .filter(|d| train.contains(d))
                .collect()
        }
        None => Vec::new(),
    };
    Ok(SimulationReport {
        selector: selector.name(),
        available,
        geomean_realized,
        geomean_ideal,
        geomean_oracle,
        fraction_of_representative_oracle: geomean_realized / geomean_ideal,
        fraction_of_full_oracle: geomean_realized / geomean_oracle,
        mispick_rate: mispicks as f64 / n,
        mean_comparisons: outcomes.iter().map(|o| o.comparisons as f64).sum::<f64>() / n,
        max_comparisons: outcomes.iter().map(|o| o.comparisons).max().unwrap_or(0),
        outcomes,
        overlapping_ids,
        code_growth: None,
    })
}

#[cfg(test)]
mod tests {
    use super::super::compile_tree;
    use super::*;
    use crate::learners::{Tree, TreeNode};
    use crate::model::load_scenario;

    fn v(i: u32) -> VersionId {
        VersionId(i)
    }

    const VERSIONS: &str = "id,name,code_size,is_baseline\n0,base,1000,1\n1,a,40,0\n2,b,60,0\n";
    const DATASETS: &str = "id,f0\n0,1\n1,2\n2,8\n3,9\n";
    // v1 wins on small f0, v2 on large f0.
    const RUNTIMES: &str = "dataset_id,version_id,runtime_seconds
0,0,2\n0,1,1\n0,2,4
1,0,2\n1,1,1\n1,2,4
2,0,3\n2,1,6\n2,2,1
3,0,3\n3,1,6\n3,2,1
";

    fn scenario(runtimes: &str) -> Scenario {
        load_scenario(
            VERSIONS.as_bytes(),
            DATASETS.as_bytes(),
            runtimes.as_bytes(),
        )
        .unwrap()
    }

    fn split_at_5() -> DispatcherSpec {
        compile_tree(
            &Tree::from_nodes(
                1,
                vec![
                    TreeNode::Split {
                        feature: 0,
                        threshold: 5.0,
                        left: 1,
                        right: 2,
                    },
                    TreeNode::Leaf { value: v(1) },
                    TreeNode::Leaf { value: v(2) },
                ],
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn growth_arithmetic() {
        let sizes = BTreeMap::from([(v(0), 1000), (v(1), 40), (v(2), 60)]);
        let leaf = compile_tree(&Tree::leaf(1, v(0))).unwrap();
        let z = leaf.byte_size() as f64;
        let g = code_growth(&[], v(0), &sizes, 1000, &leaf).unwrap();
        assert_eq!(g.multiversioning_growth, 0.0);
        assert_eq!(g.selector_growth, z / 1000.0);
        let g = code_growth(&[v(1), v(2)], v(0), &sizes, 1000, &leaf).unwrap();
        assert!((g.multiversioning_growth - 0.10).abs() < 1e-15);
        assert!(matches!(
            code_growth(&[v(1)], v(0), &sizes, 0, &leaf),
            Err(Error::ZeroBaselineSize)
        ));
        assert!(matches!(
            code_growth(&[v(5)], v(0), &sizes, 10, &leaf),
            Err(Error::UnknownVersion(_))
        ));
    }

    #[test]
    fn oracle_and_baseline_selectors() {
        let s = scenario(RUNTIMES);
        let r = simulate(&s, Selector::Oracle, &[v(1), v(2)], None).unwrap();
        assert_eq!(r.fraction_of_representative_oracle, 1.0);
        assert_eq!(r.mispick_rate, 0.0);
        let r = simulate(&s, Selector::Fixed(v(0)), &[v(1), v(2)], None).unwrap();
        assert!((r.geomean_realized - 1.0).abs() < 1e-15);
        assert_eq!(r.mispick_rate, 1.0);
    }

    #[test]
    fn dispatcher_matches_oracle_and_reports_overlap() {
        let s = scenario(RUNTIMES);
        let spec = split_at_5();
        let ids = [DatasetId(3), DatasetId(7)];
        let r = simulate(&s, Selector::Dispatcher(&spec), &[v(1), v(2)], Some(&ids)).unwrap();
        assert_eq!(r.fraction_of_representative_oracle, 1.0);
        assert_eq!(r.fraction_of_full_oracle, 1.0);
        assert_eq!(r.mispick_rate, 0.0);
        assert_eq!(r.mean_comparisons, 1.0);
        assert_eq!(r.overlapping_ids, vec![DatasetId(3)]);
        // 2x, 2x, 3x, 3x
        assert!((r.geomean_realized - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn fractions_are_scale_invariant() {
        let s = scenario(RUNTIMES);
        let scaled = scenario(&RUNTIMES.replace("2,0,3\n2,1,6\n2,2,1", "2,0,30\n2,1,60\n2,2,10"));
        let spec = split_at_5();
        let a = simulate(&s, Selector::Fixed(v(1)), &[v(1), v(2)], None).unwrap();
        let b = simulate(&scaled, Selector::Fixed(v(1)), &[v(1), v(2)], None).unwrap();
        assert!((a.fraction_of_full_oracle - b.fraction_of_full_oracle).abs() < 1e-12);
        let a = simulate(&s, Selector::Dispatcher(&spec), &[v(1), v(2)], None).unwrap();
        let b = simulate(&scaled, Selector::Dispatcher(&spec), &[v(1), v(2)], None).unwrap();
        assert_eq!(a.mispick_rate, b.mispick_rate);
    }

    #[test]
    fn leaves_outside_set_and_missing_versions_rejected() {
        let s = scenario(RUNTIMES);
        let spec = split_at_5();
        assert!(matches!(
            simulate(&s, Selector::Dispatcher(&spec), &[v(1)], None),
            Err(Error::InvalidDispatcher(_))
        ));
        assert!(matches!(
            simulate(&s, Selector::Oracle, &[v(1), v(9)], None),
            Err(Error::MissingFromTest(VersionId(9)))
        ));
    }
}
