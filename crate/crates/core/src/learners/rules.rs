//! Ordered rule lists learned by sequential covering.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{check_arity, common_arity, LabeledSample};
use crate::model::VersionId;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `x[feature] <= threshold`
    Le,
    /// `x[feature] > threshold`
    Gt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: usize,
    pub direction: Direction,
    pub threshold: f64,
}

impl Condition {
    pub fn holds(&self, x: &[f64]) -> bool {
        match self.direction {
            Direction::Le => x[self.feature] <= self.threshold,
            Direction::Gt => x[self.feature] > self.threshold,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.direction {
            Direction::Le => "<=",
            Direction::Gt => ">",
        };
        write!(f, "f{} {} {}", self.feature, op, self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub label: VersionId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleList {
    pub arity: usize,
    pub rules: Vec<Rule>,
    pub default_label: VersionId,
}

impl RuleList {
    /// First rule whose conditions all hold, else the default. Also returns
    /// how many conditions were evaluated (short-circuiting per rule).
    pub fn predict(&self, x: &[f64]) -> Result<(VersionId, usize)> {
        check_arity(self.arity, x)?;
        let mut evaluated = 0;
        for rule in &self.rules {
            let mut fired = true;
            for c in &rule.conditions {
                evaluated += 1;
                if !c.holds(x) {
                    fired = false;
                    break;
                }
            }
            if fired {
                return Ok((rule.label, evaluated));
            }
        }
        Ok((self.default_label, evaluated))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    /// Minimum number of samples an accepted rule must cover.
    pub min_cover: usize,
    /// Minimum precision an accepted rule must reach.
    pub min_precision: f64,
    /// Accepted for configuration symmetry; the covering loop itself is
    /// deterministic.
    pub seed: u64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            min_cover: 2,
            min_precision: 0.7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Score {
    precision: f64,
    coverage: usize,
}

fn score(samples: &[LabeledSample], covered: &[usize], label: VersionId) -> Score {
    let pos = covered
        .iter()
        .filter(|&&i| samples[i].label == label)
        .count();
    Score {
        precision: if covered.is_empty() {
            0.0
        } else {
            pos as f64 / covered.len() as f64
        },
        coverage: covered.len(),
    }
}

/// Grows one rule for `label` over the `pool` of not-yet-covered samples.
fn grow_rule(
    samples: &[LabeledSample],
    pool: &[usize],
    label: VersionId,
    arity: usize,
) -> (Vec<Condition>, Vec<usize>, Score) {
    let mut conditions = Vec::new();
    let mut covered = pool.to_vec();
    let mut current = score(samples, &covered, label);
    while current.precision < 1.0 {
        let mut best: Option<(Condition, Vec<usize>, Score)> = None;
        for feature in 0..arity {
            let mut values: Vec<f64> = covered
                .iter()
                .map(|&i| samples[i].features[feature])
                .collect();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for w in values.windows(2) {
                let m = w[0] + (w[1] - w[0]) / 2.0;
                let threshold = if m < w[1] { m } else { w[0] };
                for direction in [Direction::Le, Direction::Gt] {
                    let cond = Condition {
                        feature,
                        direction,
                        threshold,
                    };
                    let sub: Vec<usize> = covered
                        .iter()
                        .copied()
                        .filter(|&i| cond.holds(&samples[i].features))
                        .collect();
                    let s = score(samples, &sub, label);
                    // Candidates are visited by feature, threshold, then
                    // direction, so only strict improvements replace.
                    let better = match &best {
                        None => true,
                        Some((_, _, b)) => {
                            s.precision > b.precision
                                || (s.precision == b.precision && s.coverage > b.coverage)
                        }
                    };
                    if better {
                        best = Some((cond, sub, s));
                    }
                }
            }
        }
        match best {
            Some((cond, sub, s)) if s.precision > current.precision => {
                conditions.push(cond);
                covered = sub;
                current = s;
            }
            _ => break,
        }
    }
    (conditions, covered, current)
}

/// Sequential covering.
///
/// Classes are handled from least to most frequent (ties to the smaller
/// id). For each class, rules are grown greedily by appending the
/// condition with the best precision on the still-uncovered samples (ties:
/// higher coverage, lower feature, lower threshold, `<=` before `>`) until
/// the rule is exact or stops improving. A rule is kept only if it has at
/// least one condition, covers `min_cover` samples and reaches
/// `min_precision`; its samples are then removed from the pool. The first
/// rejected rule ends the class. The default label is the majority of what
/// remains uncovered, or of all samples if nothing remains.
pub fn train_rule_list(samples: &[LabeledSample], cfg: &RuleConfig) -> Result<RuleList> {
    let arity = common_arity(samples.iter().map(|s| s.features.as_slice()))?;
    let majority = |idx: &mut dyn Iterator<Item = usize>| {
        let mut counts = std::collections::BTreeMap::<VersionId, usize>::new();
        for i in idx {
            *counts.entry(samples[i].label).or_default() += 1;
        }
        // BTreeMap iterates ascending, so `>` keeps the smaller id on ties.
        counts
            .into_iter()
            .fold(None, |acc: Option<(VersionId, usize)>, (l, c)| match acc {
                Some((_, bc)) if bc >= c => acc,
                _ => Some((l, c)),
            })
            .map(|(l, _)| l)
    };

    let mut freq = std::collections::BTreeMap::<VersionId, usize>::new();
    for s in samples {
        *freq.entry(s.label).or_default() += 1;
    }
    let mut classes: Vec<(VersionId, usize)> = freq.into_iter().collect();
    classes.sort_by_key(|&(l, c)| (c, l));

    let mut pool: Vec<usize> = (0..samples.len()).collect();
    let mut rules = Vec::new();
    for &(label, _) in &classes {
        while pool.iter().any(|&i| samples[i].label == label) {
            let (conditions, covered, s) = grow_rule(samples, &pool, label, arity);
            let accept = !conditions.is_empty()
                && s.coverage >= cfg.min_cover
                && s.precision >= cfg.min_precision;
            if !accept {
                break;
            }
            pool.retain(|i| covered.binary_search(i).is_err());
            rules.push(Rule { conditions, label });
        }
    }
    let default_label = majority(&mut pool.iter().copied())
        .or_else(|| majority(&mut (0..samples.len())))
        .expect("non-empty samples");
    Ok(RuleList {
        arity,
        rules,
        default_label,
    })
}
