//! Representative set selection.
//!
//! The quality of a set `S` of candidate versions is the log-sum objective
//!
//! ```text
//! f(S) = sum over datasets d of  max over v in S ∪ {baseline} of ln s(v, d)
//! ```
//!
//! i.e. `|D|` times the log of the geometric-mean speedup obtained when
//! every dataset runs its best version from `S`, with the baseline always
//! available. Because `ln s(baseline, d) = 0`, `f(∅) = 0`; `f` is
//! monotone and submodular, so the greedy loop in [`greedy_select`] is
//! within `1 - 1/e` of the best set of the same size.
//!
//! Selection proceeds in two phases: greedy growth under the count, size
//! and loss constraints, then [`prune_redundant`] removes members whose
//! contribution became negligible once later picks were added. All ties
//! are broken deterministically by code size, then id.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::model::{SpeedupMatrix, VersionId};
use crate::{Error, Result};

/// Largest candidate pool [`exhaustive_select`] will enumerate.
pub const ORACLE_LIMIT: usize = 20;

pub const DEFAULT_MIN_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Maximize the objective within the version count and size budget.
    #[default]
    PerfPriority,
    /// Stop adding versions as soon as every dataset is within the loss
    /// tolerance of its full-oracle speedup.
    SizePriority,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::PerfPriority => "perf_priority",
            Mode::SizePriority => "size_priority",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perf" | "perf_priority" => Ok(Mode::PerfPriority),
            "size" | "size_priority" => Ok(Mode::SizePriority),
            other => Err(Error::Constraints(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraints {
    /// Maximum number of non-baseline representatives.
    pub max_versions: usize,
    /// Allowed total code size of the selected versions, as a fraction of
    /// the baseline binary size. May be infinite.
    pub size_budget: f64,
    /// Maximum tolerated per-dataset relative loss against the full oracle
    /// (size priority mode).
    pub loss_tolerance: f64,
    /// Objective gain below which growth stops and removal is allowed.
    pub min_gain: f64,
    pub mode: Mode,
}

impl Constraints {
    pub fn new(max_versions: usize) -> Self {
        Constraints {
            max_versions,
            size_budget: f64::INFINITY,
            loss_tolerance: 0.0,
            min_gain: DEFAULT_MIN_GAIN,
            mode: Mode::PerfPriority,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_versions == 0 {
            return Err(Error::Constraints("max_versions must be at least 1".into()));
        }
        for (name, value) in [
            ("size_budget", self.size_budget),
            ("loss_tolerance", self.loss_tolerance),
            ("min_gain", self.min_gain),
        ] {
            if value.is_nan() || value < 0.0 {
                return Err(Error::Constraints(format!(
                    "{name} must be non-negative, got {value}"
                )));
            }
        }
        if self.loss_tolerance.is_infinite() || self.min_gain.is_infinite() {
            return Err(Error::Constraints(
                "loss_tolerance and min_gain must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub picked: VersionId,
    pub gain: f64,
    /// Objective after the pick.
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Removal {
    pub removed: VersionId,
    /// Objective decrease caused by the removal.
    pub loss: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxVersions,
    BelowMinGain,
    NoFit,
    LossReached,
    Exhausted,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::MaxVersions => "max_versions",
            StopReason::BelowMinGain => "below_min_gain",
            StopReason::NoFit => "size_budget",
            StopReason::LossReached => "loss_tolerance_reached",
            StopReason::Exhausted => "candidates_exhausted",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentativeSet {
    pub baseline: VersionId,
    /// Surviving picks, in greedy pick order. Never contains the baseline.
    pub selected: Vec<VersionId>,
    pub objective_value: f64,
    pub geomean_speedup: f64,
    pub oracle_geomean: f64,
    pub max_dataset_loss: f64,
    pub covered_count: usize,
    pub size_bytes: u64,
    /// `size_bytes` over the baseline binary size.
    pub size_fraction: f64,
    /// `size_fraction` over the size budget; 0 for an unbounded budget.
    pub budget_used: f64,
    pub trace: Vec<TraceStep>,
    pub removals: Vec<Removal>,
    pub stop_reason: StopReason,
    pub constraints: Constraints,
}

impl RepresentativeSet {
    pub fn count(&self) -> usize {
        self.selected.len()
    }

    /// Number of versions shipped in the binary, counting the baseline.
    pub fn count_with_baseline(&self) -> usize {
        self.selected.len() + 1
    }

    /// Selected versions plus the baseline, ascending.
    pub fn available(&self) -> Vec<VersionId> {
        let mut all: Vec<VersionId> = self.selected.clone();
        all.push(self.baseline);
        all.sort_unstable();
        all
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetMetrics {
    pub geomean_speedup: f64,
    pub per_dataset_loss: Vec<f64>,
    pub max_loss: f64,
    pub covered_count: usize,
    pub oracle_geomean: f64,
}

fn resolve(matrix: &SpeedupMatrix, subset: &[VersionId]) -> Result<Vec<usize>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(subset.len());
    for &id in subset {
        let idx = matrix.version_index(id).ok_or(Error::UnknownVersion(id))?;
        if idx != matrix.baseline_index() && seen.insert(idx) {
            out.push(idx);
        }
    }
    Ok(out)
}

/// Per-dataset best log speedup over `members` plus the baseline.
fn best_logs(matrix: &SpeedupMatrix, members: &[usize]) -> Vec<f64> {
    (0..matrix.n_datasets())
        .map(|d| {
            members
                .iter()
                .map(|&v| matrix.log_speedup(d, v))
                .fold(0.0, f64::max)
        })
        .collect()
}

fn best_speedups(matrix: &SpeedupMatrix, members: &[usize]) -> Vec<f64> {
    (0..matrix.n_datasets())
        .map(|d| {
            members
                .iter()
                .map(|&v| matrix.speedup(d, v))
                .fold(1.0, f64::max)
        })
        .collect()
}

fn oracle_speedups(matrix: &SpeedupMatrix) -> Vec<f64> {
    let all: Vec<usize> = (0..matrix.n_versions()).collect();
    best_speedups(matrix, &all)
}

fn max_loss(oracle: &[f64], best: &[f64]) -> f64 {
    oracle
        .iter()
        .zip(best)
        .map(|(o, b)| o / b - 1.0)
        .fold(0.0, f64::max)
}

fn objective_of(matrix: &SpeedupMatrix, members: &[usize]) -> f64 {
    best_logs(matrix, members).iter().sum()
}

/// `f(S)`; the baseline is implicitly part of every set.
pub fn objective(matrix: &SpeedupMatrix, subset: &[VersionId]) -> Result<f64> {
    Ok(objective_of(matrix, &resolve(matrix, subset)?))
}

/// Marginal gain of adding `v` on top of the current per-dataset best.
fn gain(matrix: &SpeedupMatrix, best: &[f64], v: usize) -> f64 {
    best.iter()
        .enumerate()
        .map(|(d, &b)| (matrix.log_speedup(d, v) - b).max(0.0))
        .sum()
}

/// Objective decrease from dropping `members[drop]`, summed per dataset.
fn removal_loss(matrix: &SpeedupMatrix, members: &[usize], drop: usize) -> f64 {
    let rest: Vec<usize> = members
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != drop)
        .map(|(_, &v)| v)
        .collect();
    let with = best_logs(matrix, members);
    let without = best_logs(matrix, &rest);
    with.iter().zip(&without).map(|(a, b)| a - b).sum()
}

/// Runs the greedy growth phase only and returns the per-step trace.
///
/// This is the pre-prune sequence that the `1 - 1/e` guarantee speaks
/// about; [`greedy_select`] prunes and summarizes it.
pub fn greedy_picks(
    matrix: &SpeedupMatrix,
    baseline_binary_size: u64,
    constraints: &Constraints,
) -> Result<(Vec<TraceStep>, StopReason)> {
    constraints.validate()?;
    if baseline_binary_size == 0 {
        return Err(Error::ZeroBaselineSize);
    }
    let candidates: Vec<usize> = (0..matrix.n_versions())
        .filter(|&v| v != matrix.baseline_index())
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let cap = constraints.size_budget * baseline_binary_size as f64;
    let oracle = oracle_speedups(matrix);

    let mut members: Vec<usize> = Vec::new();
    let mut best = vec![0.0; matrix.n_datasets()];
    let mut used: u64 = 0;
    let mut trace = Vec::new();

    let stop = loop {
        if constraints.mode == Mode::SizePriority
            && max_loss(&oracle, &best_speedups(matrix, &members)) <= constraints.loss_tolerance
        {
            break StopReason::LossReached;
        }
        if members.len() >= constraints.max_versions {
            break StopReason::MaxVersions;
        }
        let remaining: Vec<usize> = candidates
            .iter()
            .copied()
            .filter(|v| !members.contains(v))
            .collect();
        if remaining.is_empty() {
            break StopReason::Exhausted;
        }
        let fitting: Vec<usize> = remaining
            .into_iter()
            .filter(|&v| (used + matrix.code_size(v)) as f64 <= cap)
            .collect();
        // Highest gain, then smaller code size, then smaller id (index order
        // equals id order).
        let Some((pick, pick_gain)) =
            fitting
                .iter()
                .map(|&v| (v, gain(matrix, &best, v)))
                .reduce(|a, b| {
                    let better =
                        b.1 > a.1 || (b.1 == a.1 && matrix.code_size(b.0) < matrix.code_size(a.0));
                    if better {
                        b
                    } else {
                        a
                    }
                })
        else {
            break StopReason::NoFit;
        };
        if pick_gain < constraints.min_gain {
            break StopReason::BelowMinGain;
        }
        members.push(pick);
        used += matrix.code_size(pick);
        for (d, b) in best.iter_mut().enumerate() {
            *b = b.max(matrix.log_speedup(d, pick));
        }
        trace.push(TraceStep {
            picked: matrix.version_ids()[pick],
            gain: pick_gain,
            objective: best.iter().sum(),
        });
    };
    Ok((trace, stop))
}

fn prune_indices(
    matrix: &SpeedupMatrix,
    mut members: Vec<usize>,
    constraints: &Constraints,
) -> (Vec<usize>, Vec<Removal>) {
    let oracle = oracle_speedups(matrix);
    let mut removals = Vec::new();
    while !members.is_empty() {
        let mut choice: Option<(usize, f64)> = None;
        for i in 0..members.len() {
            let loss = removal_loss(matrix, &members, i);
            let allowed = match constraints.mode {
                Mode::PerfPriority => loss < constraints.min_gain,
                Mode::SizePriority => {
                    let rest: Vec<usize> = members
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, &v)| v)
                        .collect();
                    loss < constraints.min_gain
                        || max_loss(&oracle, &best_speedups(matrix, &rest))
                            <= constraints.loss_tolerance
                }
            };
            if !allowed {
                continue;
            }
            // Least loss first; on ties the larger version, then larger id.
            let better = match choice {
                None => true,
                Some((j, best_loss)) => {
                    let (a, b) = (members[i], members[j]);
                    loss < best_loss
                        || (loss == best_loss
                            && (matrix.code_size(a), a) > (matrix.code_size(b), b))
                }
            };
            if better {
                choice = Some((i, loss));
            }
        }
        let Some((i, loss)) = choice else { break };
        let removed = members.remove(i);
        removals.push(Removal {
            removed: matrix.version_ids()[removed],
            loss,
            objective: objective_of(matrix, &members),
        });
    }
    (members, removals)
}

/// Removes members whose contribution is below `min_gain` (perf priority)
/// or whose removal keeps every dataset within the loss tolerance (size
/// priority), least damaging first. Order of the survivors is preserved.
pub fn prune_redundant(
    matrix: &SpeedupMatrix,
    selected: &[VersionId],
    constraints: &Constraints,
) -> Result<Vec<VersionId>> {
    let members = resolve(matrix, selected)?;
    let (kept, _) = prune_indices(matrix, members, constraints);
    Ok(kept.into_iter().map(|v| matrix.version_ids()[v]).collect())
}

/// Greedy representative set selection followed by pruning.
pub fn greedy_select(
    matrix: &SpeedupMatrix,
    baseline_binary_size: u64,
    constraints: &Constraints,
) -> Result<RepresentativeSet> {
    let (trace, stop_reason) = greedy_picks(matrix, baseline_binary_size, constraints)?;
    let picked: Vec<usize> = trace
        .iter()
        .map(|t| matrix.version_index(t.picked).unwrap())
        .collect();
    let (kept, removals) = prune_indices(matrix, picked, constraints);
    let selected: Vec<VersionId> = kept.iter().map(|&v| matrix.version_ids()[v]).collect();
    let metrics = evaluate_set(matrix, &selected)?;
    let size_bytes: u64 = kept.iter().map(|&v| matrix.code_size(v)).sum();
    let size_fraction = size_bytes as f64 / baseline_binary_size as f64;
    let budget_used = if constraints.size_budget.is_infinite() {
        0.0
    } else if constraints.size_budget == 0.0 {
        if size_bytes == 0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        size_fraction / constraints.size_budget
    };
    Ok(RepresentativeSet {
        baseline: matrix.baseline_id(),
        objective_value: objective_of(matrix, &kept),
        geomean_speedup: metrics.geomean_speedup,
        oracle_geomean: metrics.oracle_geomean,
        max_dataset_loss: metrics.max_loss,
        covered_count: metrics.covered_count,
        selected,
        size_bytes,
        size_fraction,
        budget_used,
        trace,
        removals,
        stop_reason,
        constraints: *constraints,
    })
}

/// Brute-force best subset of at most `k` candidates.
///
/// Ties on the objective go to the smaller total code size, then to the
/// lexicographically smaller sorted id list. Returns the ids ascending.
pub fn exhaustive_select(matrix: &SpeedupMatrix, k: usize) -> Result<(Vec<VersionId>, f64)> {
    let candidates: Vec<usize> = (0..matrix.n_versions())
        .filter(|&v| v != matrix.baseline_index())
        .collect();
    let n = candidates.len();
    if n == 0 {
        return Err(Error::NoCandidates);
    }
    if n > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge {
            candidates: n,
            limit: ORACLE_LIMIT,
        });
    }
    if k == 0 {
        return Err(Error::Constraints("k must be at least 1".into()));
    }
    let k = k.min(n);
    let mut best: Option<(f64, u64, Vec<VersionId>)> = None;
    let mut members = Vec::with_capacity(n);
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize > k {
            continue;
        }
        members.clear();
        members.extend(
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| candidates[i]),
        );
        let f = objective_of(matrix, &members);
        let size: u64 = members.iter().map(|&v| matrix.code_size(v)).sum();
        let better = match &best {
            None => true,
            Some((bf, bs, bids)) => {
                f > *bf
                    || (f == *bf
                        && (size < *bs
                            || (size == *bs && {
                                let ids: Vec<VersionId> =
                                    members.iter().map(|&v| matrix.version_ids()[v]).collect();
                                ids < *bids
                            })))
            }
        };
        if better {
            let ids = members.iter().map(|&v| matrix.version_ids()[v]).collect();
            best = Some((f, size, ids));
        }
    }
    let (f, _, ids) = best.expect("the empty subset is always enumerated");
    Ok((ids, f))
}

/// Geometric-mean speedup, per-dataset loss against the full oracle and
/// coverage of a candidate subset.
pub fn evaluate_set(matrix: &SpeedupMatrix, subset: &[VersionId]) -> Result<SetMetrics> {
    let members = resolve(matrix, subset)?;
    let nd = matrix.n_datasets() as f64;
    let oracle = oracle_speedups(matrix);
    let best = best_speedups(matrix, &members);
    let per_dataset_loss: Vec<f64> = oracle.iter().zip(&best).map(|(o, b)| o / b - 1.0).collect();
    let covered_count = oracle
        .iter()
        .zip(&best)
        .filter(|(o, b)| (*o - *b).abs() <= 1e-9)
        .count();
    let all: Vec<usize> = (0..matrix.n_versions()).collect();
    Ok(SetMetrics {
        geomean_speedup: (objective_of(matrix, &members) / nd).exp(),
        max_loss: per_dataset_loss.iter().copied().fold(0.0, f64::max),
        per_dataset_loss,
        covered_count,
        oracle_geomean: (objective_of(matrix, &all) / nd).exp(),
    })
}
