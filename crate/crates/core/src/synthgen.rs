//! Seeded synthetic scenarios with a planted feature-to-winner structure.
//!
//! Features are drawn uniformly from the box `[0, 1000)^k`. The box is cut
//! into an axis-aligned grid of `n_regions` cells: `n_regions` is factored
//! across the features, and a feature with `c` cells gets `c - 1` cut
//! points, cut `i` drawn from `[(i - 1/4) / c, (i + 1/4) / c]` of the
//! range. A point belongs to the cell left of a cut when it is `<=` the
//! cut. Each region gets a distinct winning candidate.
//!
//! In each dataset the region's winner draws its noiseless speedup from
//! the winner range and every other candidate from the loser range; the
//! baseline is 1. Runtimes are `base(d) / s(v, d) * exp(sigma * N(0, 1))`,
//! with the baseline's runtime jittered too.
//!
//! Randomness comes from [`SeededRng`] (ChaCha8) on separate streams:
//! the grid, winners and code sizes depend on `seed` only, the datasets
//! and their runtimes on `sample_seed`, and the noise on its own stream so
//! changing `noise_sigma` leaves everything else unchanged. A held-out
//! test set with the same regions is generated by keeping `seed` and
//! changing `sample_seed` and `first_dataset_id`.

use std::fmt::Write as _;
use std::path::Path;

use crate::model::{
    DatasetId, DatasetRecord, RawScenario, RuntimeCell, Scenario, Version, VersionId,
};
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Upper end of every feature's range.
pub const FEATURE_MAX: f64 = 1000.0;

const GRID_STREAM: u64 = 1;
const WINNER_STREAM: u64 = 2;
const SIZE_STREAM: u64 = 3;
const FEATURE_STREAM: u64 = 4;
const SPEEDUP_STREAM: u64 = 5;
const NOISE_STREAM: u64 = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Versions including the baseline.
    pub n_versions: usize,
    pub n_datasets: usize,
    pub feature_arity: usize,
    pub n_regions: usize,
    pub winner_speedup_range: (f64, f64),
    pub loser_speedup_range: (f64, f64),
    /// Standard deviation of the log-normal runtime noise.
    pub noise_sigma: f64,
    pub base_runtime_range: (f64, f64),
    pub code_size_range: (u64, u64),
    /// Drives the grid, the winners and the code sizes.
    pub seed: u64,
    /// Drives the datasets and runtimes; defaults to `seed`.
    pub sample_seed: Option<u64>,
    pub first_dataset_id: u32,
    /// Datasets are kept at least this fraction of a cell's nominal width
    /// away from every cut.
    pub cut_margin: f64,
}

impl SynthConfig {
    pub fn new(
        n_versions: usize,
        n_datasets: usize,
        feature_arity: usize,
        n_regions: usize,
        seed: u64,
    ) -> Self {
        SynthConfig {
            n_versions,
            n_datasets,
            feature_arity,
            n_regions,
            winner_speedup_range: (1.2, 2.0),
            loser_speedup_range: (0.7, 1.1),
            noise_sigma: 0.0,
            base_runtime_range: (0.5, 2.0),
            code_size_range: (1000, 5000),
            seed,
            sample_seed: None,
            first_dataset_id: 0,
            cut_margin: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::SynthConfig(m));
        if self.n_versions < 2 {
            return fail(format!(
                "n_versions must be at least 2, got {}",
                self.n_versions
            ));
        }
        if self.n_datasets == 0 {
            return fail("n_datasets must be at least 1".into());
        }
        if self.feature_arity == 0 {
            return fail("feature_arity must be at least 1".into());
        }
        if self.n_regions == 0 || self.n_regions > self.n_versions - 1 {
            return fail(format!(
                "n_regions must be between 1 and n_versions - 1 = {}, got {}",
                self.n_versions - 1,
                self.n_regions
            ));
        }
        for (name, (lo, hi)) in [
            ("winner_speedup_range", self.winner_speedup_range),
            ("loser_speedup_range", self.loser_speedup_range),
            ("base_runtime_range", self.base_runtime_range),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
                return fail(format!(
                    "{name} must satisfy 0 < lo <= hi, got ({lo}, {hi})"
                ));
            }
        }
        if self.winner_speedup_range.0 <= 1.0 {
            return fail("winner speedups must exceed 1".into());
        }
        if self.loser_speedup_range.1 >= self.winner_speedup_range.0 {
            return fail("loser speedups must stay below winner speedups".into());
        }
        let (lo, hi) = self.code_size_range;
        if lo == 0 || lo > hi {
            return fail(format!(
                "code_size_range must satisfy 0 < lo <= hi, got ({lo}, {hi})"
            ));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return fail(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            ));
        }
        if !(0.0..=0.2).contains(&self.cut_margin) {
            return fail(format!(
                "cut_margin must be in [0, 0.2], got {}",
                self.cut_margin
            ));
        }
        if u32::try_from(self.n_versions).is_err()
            || u64::from(self.first_dataset_id) + self.n_datasets as u64 > u64::from(u32::MAX) + 1
        {
            return fail("ids do not fit in 32 bits".into());
        }
        Ok(())
    }
}

/// The planted structure, for checking learners against.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    /// Per feature, sorted cut points.
    pub cuts: Vec<Vec<f64>>,
    /// Winning version of each region, indexed by [`GroundTruth::region_of`].
    pub winners: Vec<VersionId>,
    pub datasets: Vec<DatasetId>,
    /// Noiseless speedups, `[dataset][version]` with versions in id order.
    pub speedups: Vec<Vec<f64>>,
}

impl GroundTruth {
    /// Mixed-radix index of the grid cell containing `x`, feature 0 least
    /// significant.
    pub fn region_of(&self, x: &[f64]) -> usize {
        let mut region = 0;
        for (j, cuts) in self.cuts.iter().enumerate().rev() {
            let cell = cuts.iter().filter(|&&c| x[j] > c).count();
            region = region * (cuts.len() + 1) + cell;
        }
        region
    }

    pub fn winner_at(&self, x: &[f64]) -> VersionId {
        self.winners[self.region_of(x)]
    }

    /// Planted winner per generated dataset, in dataset order.
    pub fn best_versions(&self) -> Vec<VersionId> {
        self.speedups
            .iter()
            .map(|row| {
                let best = (0..row.len())
                    .max_by(|&a, &b| row[a].total_cmp(&row[b]))
                    .expect("at least two versions");
                VersionId(best as u32)
            })
            .collect()
    }

    /// `dataset_id,true_best_version_id` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset_id,true_best_version_id\n");
        for (d, v) in self.datasets.iter().zip(self.best_versions()) {
            writeln!(out, "{d},{v}").expect("writing to a String");
        }
        out
    }
}

/// Cells per feature: prime factors of `n`, largest first, each given to
/// the feature with the fewest cells so far (lowest index on ties).
fn grid_shape(n: usize, k: usize) -> Vec<usize> {
    let mut factors = Vec::new();
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        while m.is_multiple_of(p) {
            factors.push(p);
            m /= p;
        }
        p += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    factors.sort_unstable_by(|a, b| b.cmp(a));
    let mut shape = vec![1; k];
    for f in factors {
        let j = (0..k).min_by_key(|&j| (shape[j], j)).unwrap();
        shape[j] *= f;
    }
    shape
}

/// Generates a scenario and its ground truth. The scenario has version
/// ids `0..n_versions` with 0 the baseline, and dataset ids counting up
/// from `first_dataset_id`.
pub fn generate(config: &SynthConfig) -> Result<(Scenario, GroundTruth)> {
    config.validate()?;
    let k = config.feature_arity;
    let nv = config.n_versions;
    let sample_seed = config.sample_seed.unwrap_or(config.seed);

    let shape = grid_shape(config.n_regions, k);
    let mut grid_rng = SeededRng::new(config.seed, GRID_STREAM);
    let cuts: Vec<Vec<f64>> = shape
        .iter()
        .map(|&c| {
            (1..c)
                .map(|i| {
                    let centre = i as f64 + grid_rng.uniform(-0.25, 0.25);
                    centre / c as f64 * FEATURE_MAX
                })
                .collect()
        })
        .collect();

    let mut candidates: Vec<VersionId> = (1..nv as u32).map(VersionId).collect();
    SeededRng::new(config.seed, WINNER_STREAM).shuffle(&mut candidates);
    let winners = candidates[..config.n_regions].to_vec();

    let mut size_rng = SeededRng::new(config.seed, SIZE_STREAM);
    let versions: Vec<Version> = (0..nv as u32)
        .map(|i| Version {
            id: VersionId(i),
            name: if i == 0 {
                "base".into()
            } else {
                format!("v{i}")
            },
            code_size: size_rng.int_inclusive(config.code_size_range.0, config.code_size_range.1),
            is_baseline: i == 0,
        })
        .collect();

    let mut truth = GroundTruth {
        cuts,
        winners,
        datasets: Vec::with_capacity(config.n_datasets),
        speedups: Vec::with_capacity(config.n_datasets),
    };

    let mut feature_rng = SeededRng::new(sample_seed, FEATURE_STREAM);
    let mut speed_rng = SeededRng::new(sample_seed, SPEEDUP_STREAM);
    let mut noise_rng = SeededRng::new(sample_seed, NOISE_STREAM);
    let mut datasets = Vec::with_capacity(config.n_datasets);
    let mut runtimes = Vec::with_capacity(config.n_datasets * nv);
    for n in 0..config.n_datasets {
        let id = DatasetId(config.first_dataset_id + n as u32);
        let features: Vec<f64> = (0..k)
            .map(|j| {
                let cells = shape[j] as f64;
                let margin = config.cut_margin * FEATURE_MAX / cells;
                loop {
                    let x = feature_rng.uniform(0.0, FEATURE_MAX);
                    if truth.cuts[j].iter().all(|c| (x - c).abs() >= margin) {
                        break x;
                    }
                }
            })
            .collect();
        let winner = truth.winner_at(&features);
        let (wlo, whi) = config.winner_speedup_range;
        let (llo, lhi) = config.loser_speedup_range;
        let speedups: Vec<f64> = versions
            .iter()
            .map(|v| {
                if v.is_baseline {
                    1.0
                } else if v.id == winner {
                    speed_rng.uniform(wlo, whi)
                } else {
                    speed_rng.uniform(llo, lhi)
                }
            })
            .collect();
        let base = speed_rng.uniform(config.base_runtime_range.0, config.base_runtime_range.1);
        for (v, s) in versions.iter().zip(&speedups) {
            let jitter = (config.noise_sigma * noise_rng.standard_normal()).exp();
            runtimes.push(RuntimeCell {
                dataset: id,
                version: v.id,
                seconds: base / s * jitter,
            });
        }
        truth.datasets.push(id);
        truth.speedups.push(speedups);
        datasets.push(DatasetRecord { id, features });
    }

    let scenario = Scenario::from_raw(RawScenario {
        versions,
        datasets,
        runtimes,
    })?;
    Ok((scenario, truth))
}

/// Writes the three scenario tables and `ground_truth.csv` into `dir`.
pub fn write_dir(scenario: &Scenario, truth: &GroundTruth, dir: &Path) -> Result<()> {
    scenario.write_dir(dir)?;
    let path = dir.join("ground_truth.csv");
    std::fs::write(&path, truth.to_csv()).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_follow_config() {
        let (s, truth) = generate(&SynthConfig::new(4, 100, 2, 3, 1)).unwrap();
        assert_eq!(s.versions().len(), 4);
        assert_eq!(s.datasets().len(), 100);
        assert_eq!(s.runtimes_csv().lines().count(), 401);
        assert!(s.validate().is_empty());
        assert_eq!(truth.winners.len(), 3);
        assert!(truth.winners.iter().all(|w| w.0 >= 1 && w.0 < 4));
        assert!(s
            .datasets()
            .iter()
            .all(|d| d.features.iter().all(|&x| (0.0..FEATURE_MAX).contains(&x))));
    }

    #[test]
    fn grid_factoring() {
        assert_eq!(grid_shape(4, 2), vec![2, 2]);
        assert_eq!(grid_shape(6, 2), vec![3, 2]);
        assert_eq!(grid_shape(5, 3), vec![5, 1, 1]);
        assert_eq!(grid_shape(1, 2), vec![1, 1]);
        assert_eq!(grid_shape(8, 2), vec![4, 2]);
    }

    #[test]
    fn noise_free_argmax_is_planted_winner() {
        let (s, truth) = generate(&SynthConfig::new(6, 300, 2, 4, 9)).unwrap();
        let m = s.speedups();
        for (d, rec) in s.datasets().iter().enumerate() {
            let best = (0..m.n_versions())
                .max_by(|&a, &b| m.speedup(d, a).total_cmp(&m.speedup(d, b)))
                .unwrap();
            assert_eq!(m.version_ids()[best], truth.winner_at(&rec.features));
        }
        assert_eq!(
            truth.best_versions(),
            s.datasets()
                .iter()
                .map(|d| truth.winner_at(&d.features))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let cfg = SynthConfig::new(4, 50, 3, 3, 7);
        let (a, ta) = generate(&cfg).unwrap();
        let (b, tb) = generate(&cfg).unwrap();
        assert_eq!(a.datasets_csv(), b.datasets_csv());
        assert_eq!(a.runtimes_csv(), b.runtimes_csv());
        assert_eq!(ta.to_csv(), tb.to_csv());
        let (c, _) = generate(&SynthConfig {
            seed: 8,
            ..cfg.clone()
        })
        .unwrap();
        assert_ne!(a.datasets_csv(), c.datasets_csv());
    }

    #[test]
    fn held_out_set_shares_structure() {
        let cfg = SynthConfig::new(5, 40, 2, 4, 3);
        let test_cfg = SynthConfig {
            sample_seed: Some(99),
            first_dataset_id: 1000,
            noise_sigma: 0.05,
            ..cfg.clone()
        };
        let (train, t1) = generate(&cfg).unwrap();
        let (test, t2) = generate(&test_cfg).unwrap();
        assert_eq!(t1.cuts, t2.cuts);
        assert_eq!(t1.winners, t2.winners);
        assert_eq!(train.versions(), test.versions());
        assert_eq!(test.datasets()[0].id, DatasetId(1000));
        assert_ne!(train.datasets()[0].features, test.datasets()[0].features);
    }

    #[test]
    fn noise_does_not_move_features() {
        let cfg = SynthConfig::new(4, 30, 2, 2, 5);
        let noisy = SynthConfig {
            noise_sigma: 0.1,
            ..cfg.clone()
        };
        let (a, _) = generate(&cfg).unwrap();
        let (b, _) = generate(&noisy).unwrap();
        assert_eq!(a.datasets_csv(), b.datasets_csv());
        assert_ne!(a.runtimes_csv(), b.runtimes_csv());
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            SynthConfig::new(1, 10, 2, 1, 0),
            SynthConfig::new(4, 0, 2, 1, 0),
            SynthConfig::new(4, 10, 0, 1, 0),
            SynthConfig::new(4, 10, 2, 4, 0),
            SynthConfig {
                winner_speedup_range: (0.9, 2.0),
                ..SynthConfig::new(4, 10, 2, 2, 0)
            },
            SynthConfig {
                winner_speedup_range: (2.0, 1.5),
                ..SynthConfig::new(4, 10, 2, 2, 0)
            },
        ] {
            assert!(
                matches!(generate(&cfg), Err(Error::SynthConfig(_))),
                "{cfg:?}"
            );
        }
    }
}
