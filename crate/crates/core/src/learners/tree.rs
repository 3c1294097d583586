//! Binary decision trees: an entropy-based classifier with optional
//! reduced-error pruning, and a variance-reduction regression tree.

use serde::{Deserialize, Serialize};

use super::{check_arity, common_arity, LabeledSample, RegressionSample};
use crate::model::VersionId;
use crate::rng::SeededRng;
use crate::{Error, Result};

/// Splits whose impurity reduction does not exceed this are treated as no
/// improvement; it only absorbs floating-point residue.
const MIN_IMPROVEMENT: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode<T> {
    /// `x[feature] <= threshold` continues at `left`, otherwise `right`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: T,
    },
}

/// A flat binary tree rooted at node 0, children stored after parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<T> {
    arity: usize,
    nodes: Vec<TreeNode<T>>,
}

impl<T: Copy> Tree<T> {
    pub fn leaf(arity: usize, value: T) -> Self {
        Tree {
            arity,
            nodes: vec![TreeNode::Leaf { value }],
        }
    }

    /// Builds a tree from raw nodes, checking that they form a tree rooted
    /// at 0 with every child index after its parent.
    pub fn from_nodes(arity: usize, nodes: Vec<TreeNode<T>>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidDispatcher("empty tree".into()));
        }
        let mut parents = vec![0usize; nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            if let TreeNode::Split {
                feature,
                left,
                right,
                ..
            } = *n
            {
                if feature >= arity {
                    return Err(Error::InvalidDispatcher(format!(
                        "node {i}: feature {feature} out of range for arity {arity}"
                    )));
                }
                for c in [left, right] {
                    if c <= i || c >= nodes.len() {
                        return Err(Error::InvalidDispatcher(format!(
                            "node {i}: child {c} out of order or range"
                        )));
                    }
                    parents[c] += 1;
                }
            }
        }
        if parents.iter().skip(1).any(|&p| p != 1) {
            return Err(Error::InvalidDispatcher(
                "node with zero or multiple parents".into(),
            ));
        }
        Ok(Tree { arity, nodes })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nodes(&self) -> &[TreeNode<T>] {
        &self.nodes
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, TreeNode::Leaf { .. }))
            .count()
    }

    /// Number of splits on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[TreeNode<T>], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => {
                    1 + walk(nodes, left).max(walk(nodes, right))
                }
            }
        }
        walk(&self.nodes, 0)
    }

    /// Routes `x` to a leaf; returns its value and the number of
    /// comparisons made on the way.
    pub fn predict(&self, x: &[f64]) -> Result<(T, usize)> {
        check_arity(self.arity, x)?;
        Ok(self.route(x))
    }

    fn route(&self, x: &[f64]) -> (T, usize) {
        let mut i = 0;
        let mut comparisons = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { value } => return (value, comparisons),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    comparisons += 1;
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Index of the leaf `x` lands in.
    fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        while let TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } = self.nodes[i]
        {
            i = if x[feature] <= threshold { left } else { right };
        }
        i
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    pub min_split: usize,
    pub max_depth: usize,
    pub prune: bool,
    pub prune_holdout: f64,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            min_split: 2,
            max_depth: 64,
            prune: false,
            prune_holdout: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegTreeConfig {
    pub min_split: usize,
    pub max_depth: usize,
}

impl Default for RegTreeConfig {
    fn default() -> Self {
        RegTreeConfig {
            min_split: 4,
            max_depth: 64,
        }
    }
}

/// Midpoint of two consecutive distinct values, kept strictly below `hi`
/// so that `lo` goes left and `hi` goes right.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m < hi {
        m
    } else {
        lo
    }
}

fn entropy(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Information gain in bits of splitting `parent` counts into `left` and
/// the remainder.
pub fn information_gain(parent: &[usize], left: &[usize]) -> f64 {
    let n: usize = parent.iter().sum();
    let nl: usize = left.iter().sum();
    let right: Vec<usize> = parent.iter().zip(left).map(|(p, l)| p - l).collect();
    let nr = n - nl;
    entropy(parent, n)
        - (nl as f64 / n as f64) * entropy(left, nl)
        - (nr as f64 / n as f64) * entropy(&right, nr)
}

#[derive(Debug, Clone, Copy)]
struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

/// Candidate thresholds for `feature` over `idx`, in ascending order, with
/// the number of samples at or below each.
fn sweep(rows: &[&[f64]], idx: &mut [usize], feature: usize) -> Vec<(usize, f64)> {
    idx.sort_by(|&a, &b| {
        rows[a][feature]
            .total_cmp(&rows[b][feature])
            .then(a.cmp(&b))
    });
    let values: Vec<f64> = idx.iter().map(|&i| rows[i][feature]).collect();
    (0..values.len().saturating_sub(1))
        .filter(|&p| values[p] < values[p + 1])
        .map(|p| (p + 1, midpoint(values[p], values[p + 1])))
        .collect()
}

/// Dense class indices for labels, plus the sorted label table.
fn encode(labels: impl Iterator<Item = VersionId>) -> (Vec<usize>, Vec<VersionId>) {
    let labels: Vec<VersionId> = labels.collect();
    let mut classes = labels.clone();
    classes.sort_unstable();
    classes.dedup();
    let codes = labels
        .iter()
        .map(|l| classes.binary_search(l).unwrap())
        .collect();
    (codes, classes)
}

fn counts_of(codes: &[usize], idx: &[usize], n_classes: usize) -> Vec<usize> {
    let mut c = vec![0; n_classes];
    for &i in idx {
        c[codes[i]] += 1;
    }
    c
}

/// Most frequent class; ties go to the smaller class index (smaller id).
fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

struct ClassBuilder<'a> {
    rows: Vec<&'a [f64]>,
    codes: Vec<usize>,
    classes: Vec<VersionId>,
    cfg: TreeConfig,
    nodes: Vec<TreeNode<VersionId>>,
    /// Training majority at every node, leaves and splits alike.
    majority: Vec<VersionId>,
}

impl ClassBuilder<'_> {
    fn best_split(&self, idx: &[usize], parent: &[usize]) -> Option<Split> {
        let nc = self.classes.len();
        let mut best: Option<Split> = None;
        let mut order = idx.to_vec();
        for feature in 0..self.rows[0].len() {
            let mut left = vec![0usize; nc];
            let mut filled = 0;
            for (count, threshold) in sweep(&self.rows, &mut order, feature) {
                while filled < count {
                    left[self.codes[order[filled]]] += 1;
                    filled += 1;
                }
                let gain = information_gain(parent, &left);
                if best.is_none_or(|b| gain > b.score) {
                    best = Some(Split {
                        feature,
                        threshold,
                        score: gain,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let counts = counts_of(&self.codes, &idx, self.classes.len());
        let label = self.classes[majority(&counts)];
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value: label });
        self.majority.push(label);

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || idx.len() < self.cfg.min_split || depth >= self.cfg.max_depth {
            return at;
        }
        let Some(split) = self.best_split(&idx, &counts) else {
            return at;
        };
        if split.score <= MIN_IMPROVEMENT {
            return at;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }
}

/// Copies the subtree reachable from the root into a fresh preorder array.
fn compact<T: Copy>(nodes: &[TreeNode<T>]) -> Vec<TreeNode<T>> {
    fn copy<T: Copy>(src: &[TreeNode<T>], i: usize, out: &mut Vec<TreeNode<T>>) -> usize {
        let at = out.len();
        match src[i] {
            TreeNode::Leaf { value } => out.push(TreeNode::Leaf { value }),
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                out.push(TreeNode::Leaf {
                    value: leftmost(src, left),
                });
                let l = copy(src, left, out);
                let r = copy(src, right, out);
                out[at] = TreeNode::Split {
                    feature,
                    threshold,
                    left: l,
                    right: r,
                };
            }
        }
        at
    }
    fn leftmost<T: Copy>(src: &[TreeNode<T>], mut i: usize) -> T {
        loop {
            match src[i] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split { left, .. } => i = left,
            }
        }
    }
    let mut out = Vec::with_capacity(nodes.len());
    copy(nodes, 0, &mut out);
    out
}

/// Reduced-error pruning: bottom-up, a subtree becomes a leaf with its
/// training majority when that does not increase holdout error. Returns
/// the holdout error count of the (possibly replaced) subtree.
fn rep_prune(
    nodes: &mut [TreeNode<VersionId>],
    majority: &[VersionId],
    i: usize,
    holdout: &[&LabeledSample],
) -> usize {
    match nodes[i] {
        TreeNode::Leaf { value } => holdout.iter().filter(|s| s.label != value).count(),
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let (l, r): (Vec<&LabeledSample>, Vec<&LabeledSample>) = holdout
                .iter()
                .partition(|s| s.features[feature] <= threshold);
            let subtree =
                rep_prune(nodes, majority, left, &l) + rep_prune(nodes, majority, right, &r);
            let as_leaf = holdout.iter().filter(|s| s.label != majority[i]).count();
            if as_leaf <= subtree {
                nodes[i] = TreeNode::Leaf { value: majority[i] };
                as_leaf
            } else {
                subtree
            }
        }
    }
}

/// Stratified seeded holdout: from every class (ascending id) a shuffled
/// `fraction` of its samples, rounded to nearest, is held out. Returns
/// `(train, holdout)` index lists, each ascending.
pub fn stratified_holdout(
    samples: &[LabeledSample],
    fraction: f64,
    seed: u64,
) -> (Vec<usize>, Vec<usize>) {
    let (codes, classes) = encode(samples.iter().map(|s| s.label));
    let mut rng = SeededRng::new(seed, 0x686f_6c64);
    let mut holdout = Vec::new();
    for c in 0..classes.len() {
        let mut members: Vec<usize> = (0..samples.len()).filter(|&i| codes[i] == c).collect();
        rng.shuffle(&mut members);
        let take = (members.len() as f64 * fraction).round() as usize;
        holdout.extend_from_slice(&members[..take.min(members.len())]);
    }
    holdout.sort_unstable();
    let train = (0..samples.len())
        .filter(|i| holdout.binary_search(i).is_err())
        .collect();
    (train, holdout)
}

fn grow_classifier(
    samples: &[&LabeledSample],
    cfg: TreeConfig,
    arity: usize,
) -> (Vec<TreeNode<VersionId>>, Vec<VersionId>) {
    let (codes, classes) = encode(samples.iter().map(|s| s.label));
    let mut b = ClassBuilder {
        rows: samples.iter().map(|s| s.features.as_slice()).collect(),
        codes,
        classes,
        cfg,
        nodes: Vec::new(),
        majority: Vec::new(),
    };
    debug_assert!(b.rows.iter().all(|r| r.len() == arity));
    b.grow((0..samples.len()).collect(), 0);
    (b.nodes, b.majority)
}

/// Top-down decision tree induction with information gain in bits.
///
/// Among equally good splits the lower feature index, then the lower
/// threshold wins. Growth stops on pure nodes, nodes smaller than
/// `min_split`, at `max_depth`, or when no split has positive gain; a
/// leaf predicts the majority label (ties to the smaller id). With
/// `prune`, a stratified `prune_holdout` share of the data is set aside
/// and used for reduced-error pruning of the tree grown on the rest.
pub fn train_tree_classifier(
    samples: &[LabeledSample],
    cfg: &TreeConfig,
) -> Result<Tree<VersionId>> {
    let arity = common_arity(samples.iter().map(|s| s.features.as_slice()))?;
    let all: Vec<&LabeledSample> = samples.iter().collect();
    if cfg.prune {
        let (train, holdout) = stratified_holdout(samples, cfg.prune_holdout, cfg.seed);
        if !train.is_empty() && !holdout.is_empty() {
            let train: Vec<&LabeledSample> = train.iter().map(|&i| &samples[i]).collect();
            let holdout: Vec<&LabeledSample> = holdout.iter().map(|&i| &samples[i]).collect();
            let (mut nodes, majority) = grow_classifier(&train, *cfg, arity);
            rep_prune(&mut nodes, &majority, 0, &holdout);
            return Ok(Tree {
                arity,
                nodes: compact(&nodes),
            });
        }
    }
    let (nodes, _) = grow_classifier(&all, *cfg, arity);
    Ok(Tree { arity, nodes })
}

struct RegBuilder<'a> {
    rows: Vec<&'a [f64]>,
    targets: Vec<f64>,
    cfg: RegTreeConfig,
    nodes: Vec<TreeNode<f64>>,
}

fn sse(targets: &[f64], idx: &[usize]) -> f64 {
    let n = idx.len() as f64;
    let mean = idx.iter().map(|&i| targets[i]).sum::<f64>() / n;
    idx.iter().map(|&i| (targets[i] - mean).powi(2)).sum()
}

impl RegBuilder<'_> {
    fn best_split(&self, idx: &[usize], parent_sse: f64) -> Option<Split> {
        let mut best: Option<Split> = None;
        let mut order = idx.to_vec();
        let n = idx.len();
        for feature in 0..self.rows[0].len() {
            let splits = sweep(&self.rows, &mut order, feature);
            // Prefix sums over targets shifted by the node mean keep the
            // one-pass SSE well conditioned.
            let shift = order.iter().map(|&i| self.targets[i]).sum::<f64>() / n as f64;
            let mut prefix = Vec::with_capacity(n + 1);
            let mut prefix_sq = Vec::with_capacity(n + 1);
            prefix.push(0.0);
            prefix_sq.push(0.0);
            for &i in &order {
                let y = self.targets[i] - shift;
                prefix.push(prefix.last().unwrap() + y);
                prefix_sq.push(prefix_sq.last().unwrap() + y * y);
            }
            for (count, threshold) in splits {
                let side = |s: f64, sq: f64, m: usize| (sq - s * s / m as f64).max(0.0);
                let left = side(prefix[count], prefix_sq[count], count);
                let right = side(
                    prefix[n] - prefix[count],
                    prefix_sq[n] - prefix_sq[count],
                    n - count,
                );
                let reduction = parent_sse - left - right;
                if best.is_none_or(|b| reduction > b.score) {
                    best = Some(Split {
                        feature,
                        threshold,
                        score: reduction,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let mean = idx.iter().map(|&i| self.targets[i]).sum::<f64>() / idx.len() as f64;
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value: mean });
        let first = self.targets[idx[0]];
        let constant = idx.iter().all(|&i| self.targets[i] == first);
        if constant || idx.len() < self.cfg.min_split || depth >= self.cfg.max_depth {
            return at;
        }
        let parent_sse = sse(&self.targets, &idx);
        let Some(split) = self.best_split(&idx, parent_sse) else {
            return at;
        };
        if split.score <= MIN_IMPROVEMENT * parent_sse.max(1.0) {
            return at;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.rows[i][split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        at
    }
}

/// CART-style regression tree maximizing the reduction in squared error;
/// leaves predict the mean target. Same threshold and tie conventions as
/// the classifier.
pub fn train_regression_tree(
    samples: &[RegressionSample],
    cfg: &RegTreeConfig,
) -> Result<Tree<f64>> {
    let arity = common_arity(samples.iter().map(|s| s.features.as_slice()))?;
    let mut b = RegBuilder {
        rows: samples.iter().map(|s| s.features.as_slice()).collect(),
        targets: samples.iter().map(|s| s.target).collect(),
        cfg: *cfg,
        nodes: Vec::new(),
    };
    b.grow((0..samples.len()).collect(), 0);
    Ok(Tree {
        arity,
        nodes: b.nodes,
    })
}

/// Holdout misclassifications of `tree` over `samples`.
pub fn count_errors(tree: &Tree<VersionId>, samples: &[LabeledSample]) -> usize {
    samples
        .iter()
        .filter(|s| tree.nodes[tree.leaf_index(&s.features)] != TreeNode::Leaf { value: s.label })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VersionId {
        VersionId(i)
    }

    fn labeled(points: &[(f64, u32)]) -> Vec<LabeledSample> {
        points
            .iter()
            .map(|&(x, l)| LabeledSample {
                features: vec![x],
                label: v(l),
            })
            .collect()
    }

    #[test]
    fn single_midpoint_split() {
        let s = labeled(&[(1.0, 1), (2.0, 1), (10.0, 2), (11.0, 2)]);
        let t = train_tree_classifier(&s, &TreeConfig::default()).unwrap();
        assert_eq!(
            t.nodes()[0],
            TreeNode::Split {
                feature: 0,
                threshold: 6.0,
                left: 1,
                right: 2
            }
        );
        assert_eq!(t.nodes().len(), 3);
        assert_eq!(count_errors(&t, &s), 0);
        assert_eq!(t.predict(&[3.0]).unwrap(), (v(1), 1));
        assert_eq!(t.predict(&[6.0]).unwrap(), (v(1), 1));
        assert_eq!(t.predict(&[6.0000001]).unwrap(), (v(2), 1));
        assert!(matches!(
            t.predict(&[1.0, 2.0]),
            Err(Error::FeatureArity { .. })
        ));
    }

    #[test]
    fn pure_data_single_leaf() {
        let s = labeled(&[(1.0, 4), (2.0, 4), (3.0, 4)]);
        let t = train_tree_classifier(&s, &TreeConfig::default()).unwrap();
        assert_eq!(t.nodes(), &[TreeNode::Leaf { value: v(4) }]);
        assert_eq!(t.predict(&[100.0]).unwrap(), (v(4), 0));
    }

    #[test]
    fn perfect_split_gain_is_one_bit() {
        assert!((information_gain(&[2, 2], &[2, 0]) - 1.0).abs() < 1e-15);
        assert_eq!(information_gain(&[2, 2], &[1, 1]), 0.0);
    }

    #[test]
    fn tie_break_lower_feature_then_lower_threshold() {
        // Both features separate the classes perfectly.
        let s = vec![
            LabeledSample {
                features: vec![1.0, 1.0],
                label: v(1),
            },
            LabeledSample {
                features: vec![2.0, 2.0],
                label: v(2),
            },
        ];
        let t = train_tree_classifier(&s, &TreeConfig::default()).unwrap();
        assert!(matches!(t.nodes()[0], TreeNode::Split { feature: 0, .. }));
    }

    #[test]
    fn majority_tie_goes_to_smaller_id() {
        let s = labeled(&[(1.0, 7), (1.0, 3)]);
        let t = train_tree_classifier(&s, &TreeConfig::default()).unwrap();
        assert_eq!(t.nodes(), &[TreeNode::Leaf { value: v(3) }]);
    }

    #[test]
    fn depth_cap_and_min_split() {
        let s = labeled(&[(1.0, 1), (2.0, 2), (3.0, 1), (4.0, 2)]);
        let cfg = TreeConfig {
            max_depth: 1,
            ..Default::default()
        };
        assert_eq!(train_tree_classifier(&s, &cfg).unwrap().depth(), 1);
        let cfg = TreeConfig {
            min_split: 5,
            ..Default::default()
        };
        assert_eq!(train_tree_classifier(&s, &cfg).unwrap().leaf_count(), 1);
        let t = train_tree_classifier(&s, &TreeConfig::default()).unwrap();
        assert_eq!(count_errors(&t, &s), 0);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            train_tree_classifier(&[], &TreeConfig::default()),
            Err(Error::NoTrainingData)
        ));
        assert!(matches!(
            train_regression_tree(&[], &RegTreeConfig::default()),
            Err(Error::NoTrainingData)
        ));
    }

    #[test]
    fn pruning_collapses_noise_splits() {
        // A clean split at 50 plus isolated label noise on the left.
        let mut pts: Vec<(f64, u32)> = (0..40).map(|i| (i as f64, 1)).collect();
        pts.extend((60..100).map(|i| (i as f64, 2)));
        for i in [5, 17, 29] {
            pts[i].1 = 2;
        }
        let s = labeled(&pts);
        let full = train_tree_classifier(&s, &TreeConfig::default()).unwrap();
        let cfg = TreeConfig {
            prune: true,
            seed: 11,
            ..Default::default()
        };
        let pruned = train_tree_classifier(&s, &cfg).unwrap();
        assert!(pruned.leaf_count() < full.leaf_count());
        assert_eq!(pruned.predict(&[10.0]).unwrap().0, v(1));
        assert_eq!(pruned.predict(&[80.0]).unwrap().0, v(2));
    }

    #[test]
    fn stratified_holdout_shares() {
        let pts: Vec<(f64, u32)> = (0..50)
            .map(|i| (i as f64, if i < 30 { 1 } else { 2 }))
            .collect();
        let s = labeled(&pts);
        let (train, hold) = stratified_holdout(&s, 0.2, 3);
        assert_eq!(train.len() + hold.len(), 50);
        let ones = hold.iter().filter(|&&i| s[i].label == v(1)).count();
        assert_eq!((ones, hold.len() - ones), (6, 4));
        assert_eq!(stratified_holdout(&s, 0.2, 3), (train, hold));
    }

    fn reg(points: &[(f64, f64)]) -> Vec<RegressionSample> {
        points
            .iter()
            .map(|&(x, y)| RegressionSample {
                features: vec![x],
                target: y,
            })
            .collect()
    }

    #[test]
    fn regression_split_and_routing() {
        let s = reg(&[(1.0, 0.0), (2.0, 0.0), (10.0, 1.0), (11.0, 1.0)]);
        let t = train_regression_tree(&s, &RegTreeConfig::default()).unwrap();
        assert_eq!(
            t.nodes(),
            &[
                TreeNode::Split {
                    feature: 0,
                    threshold: 6.0,
                    left: 1,
                    right: 2
                },
                TreeNode::Leaf { value: 0.0 },
                TreeNode::Leaf { value: 1.0 },
            ]
        );
        assert_eq!(t.predict(&[10.5]).unwrap(), (1.0, 1));
    }

    #[test]
    fn constant_targets_single_leaf() {
        let s = reg(&[
            (1.0, 0.25),
            (5.0, 0.25),
            (9.0, 0.25),
            (12.0, 0.25),
            (20.0, 0.25),
        ]);
        let t = train_regression_tree(&s, &RegTreeConfig::default()).unwrap();
        assert_eq!(t.nodes(), &[TreeNode::Leaf { value: 0.25 }]);
    }

    #[test]
    fn from_nodes_checks_structure() {
        let bad = vec![
            TreeNode::Split {
                feature: 0,
                threshold: 1.0,
                left: 1,
                right: 1,
            },
            TreeNode::Leaf { value: v(1) },
        ];
        assert!(Tree::from_nodes(1, bad).is_err());
        let bad_feature = vec![
            TreeNode::Split {
                feature: 3,
                threshold: 1.0,
                left: 1,
                right: 2,
            },
            TreeNode::Leaf { value: v(1) },
            TreeNode::Leaf { value: v(2) },
        ];
        assert!(Tree::from_nodes(1, bad_feature).is_err());
    }
}
