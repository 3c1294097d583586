//! Dispatchers: the compiled run-time selection procedure.
//!
//! A [`DispatcherSpec`] is a flat array of nodes entered at node 0. A
//! branch sends `x` to `left` when `x[feature] <= threshold` and to `right`
//! otherwise; a leaf names the version to run. Decision trees compile node
//! for node, rule lists are lowered to an equivalent tree first, so one
//! evaluator, one text format and one template renderer serve both.
//!
//! The canonical text form is
//!
//! ```text
//! MVDISPATCH v1; arity=2; nodes=3
//! B 0 6 1 2
//! L 1
//! L 2
//! ```
//!
//! with one node per line in index order. Thresholds are printed with 17
//! significant digits in shortest `%g` style, so every `f64` round-trips
//! exactly. The length of this text in bytes is the dispatcher's size.

mod simulate;
mod template;

use std::fmt::Write as _;

use crate::learners::rules::{Condition, Direction, RuleList};
use crate::learners::{Tree, TreeNode};
use crate::model::VersionId;
use crate::{Error, Result};

pub use simulate::{code_growth, simulate, CodeGrowth, DatasetOutcome, Selector, SimulationReport};
pub use template::{render_template, RenderedProgram, REFERENCE_TEMPLATE};

/// Header tag of the canonical text format.
pub const FORMAT_TAG: &str = "MVDISPATCH v1";

/// Lowered rule lists larger than this are rejected.
pub const MAX_NODES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Branch {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        version: VersionId,
    },
}

/// Which learner a dispatcher was compiled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Tree,
    /// A rule list lowered to a tree.
    Rules,
}

#[derive(Debug, Clone)]
pub struct DispatcherSpec {
    arity: usize,
    nodes: Vec<Node>,
    source: Option<ModelKind>,
    text: String,
}

/// Two specs are equal when they have the same arity and the same nodes;
/// the source tag is not part of the artifact.
impl PartialEq for DispatcherSpec {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.nodes == other.nodes
    }
}

impl DispatcherSpec {
    /// Validates the nodes: in-range features and children, finite
    /// thresholds, no cycles reachable from the entry.
    pub fn new(arity: usize, nodes: Vec<Node>) -> Result<Self> {
        validate(arity, &nodes)?;
        let text = serialize_nodes(arity, &nodes);
        Ok(DispatcherSpec {
            arity,
            nodes,
            source: None,
            text,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Always 0; kept for symmetry with the node indices.
    pub fn entry(&self) -> usize {
        0
    }

    /// `None` for specs read back from text.
    pub fn source(&self) -> Option<ModelKind> {
        self.source
    }

    /// Length of the canonical serialization.
    pub fn byte_size(&self) -> usize {
        self.text.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Branches on the longest path from the entry.
    pub fn depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        // Children always have larger indices in compiled specs, but parsed
        // ones need not; iterate to a fixed point over a topological order.
        for &i in topo_order(&self.nodes).iter().rev() {
            if let Node::Branch { left, right, .. } = self.nodes[i] {
                depth[i] = 1 + depth[left].max(depth[right]);
            }
        }
        depth[0]
    }

    /// Distinct versions named by leaves, ascending.
    pub fn versions(&self) -> Vec<VersionId> {
        let mut out: Vec<VersionId> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { version } => Some(*version),
                Node::Branch { .. } => None,
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Canonical text form.
    pub fn serialize(&self) -> &str {
        &self.text
    }

    /// Parses the canonical text form. Blank lines and trailing whitespace
    /// are tolerated; errors name the 1-based line.
    pub fn deserialize(text: &str) -> Result<Self> {
        parse(text)
    }

    /// The selected version and the number of branches taken.
    pub fn eval(&self, x: &[f64]) -> Result<(VersionId, usize)> {
        if x.len() != self.arity {
            return Err(Error::FeatureArity {
                expected: self.arity,
                got: x.len(),
            });
        }
        let mut i = 0;
        let mut comparisons = 0;
        // A validated spec is acyclic; the guard only protects against a
        // spec mutated behind our back.
        for _ in 0..=self.nodes.len() {
            match self.nodes[i] {
                Node::Leaf { version } => return Ok((version, comparisons)),
                Node::Branch {
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
        Err(Error::InvalidDispatcher(
            "evaluation did not reach a leaf".into(),
        ))
    }
}

/// Free-function form of [`DispatcherSpec::eval`].
pub fn eval_dispatcher(spec: &DispatcherSpec, x: &[f64]) -> Result<(VersionId, usize)> {
    spec.eval(x)
}

fn validate(arity: usize, nodes: &[Node]) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::InvalidDispatcher("no nodes".into()));
    }
    for (i, n) in nodes.iter().enumerate() {
        if let Node::Branch {
            feature,
            threshold,
            left,
            right,
        } = *n
        {
            if feature >= arity {
                return Err(Error::InvalidDispatcher(format!(
                    "node {i}: feature {feature} out of range for arity {arity}"
                )));
            }
            if !threshold.is_finite() {
                return Err(Error::InvalidDispatcher(format!(
                    "node {i}: non-finite threshold {threshold}"
                )));
            }
            for c in [left, right] {
                if c >= nodes.len() {
                    return Err(Error::InvalidDispatcher(format!(
                        "node {i}: child {c} out of range ({} nodes)",
                        nodes.len()
                    )));
                }
            }
        }
    }
    if topo_order(nodes).len() != reachable(nodes) {
        return Err(Error::InvalidDispatcher(
            "cycle reachable from entry".into(),
        ));
    }
    Ok(())
}

fn children(n: &Node) -> Option<[usize; 2]> {
    match *n {
        Node::Branch { left, right, .. } => Some([left, right]),
        Node::Leaf { .. } => None,
    }
}

fn reachable(nodes: &[Node]) -> usize {
    let mut seen = vec![false; nodes.len()];
    let mut stack = vec![0];
    let mut count = 0;
    while let Some(i) = stack.pop() {
        if std::mem::replace(&mut seen[i], true) {
            continue;
        }
        count += 1;
        stack.extend(children(&nodes[i]).into_iter().flatten());
    }
    count
}

/// Kahn's algorithm over the nodes reachable from 0. Shorter than the
/// reachable set exactly when there is a cycle.
fn topo_order(nodes: &[Node]) -> Vec<usize> {
    let mut seen = vec![false; nodes.len()];
    let mut indegree = vec![0usize; nodes.len()];
    let mut stack = vec![0];
    while let Some(i) = stack.pop() {
        if std::mem::replace(&mut seen[i], true) {
            continue;
        }
        for c in children(&nodes[i]).into_iter().flatten() {
            indegree[c] += 1;
            stack.push(c);
        }
    }
    let mut order = Vec::new();
    let mut ready: Vec<usize> = if indegree[0] == 0 { vec![0] } else { vec![] };
    while let Some(i) = ready.pop() {
        order.push(i);
        for c in children(&nodes[i]).into_iter().flatten() {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    order
}

/// One node per tree node, same indices.
pub fn compile_tree(tree: &Tree<VersionId>) -> Result<DispatcherSpec> {
    let nodes = tree
        .nodes()
        .iter()
        .map(|n| match *n {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => Node::Branch {
                feature,
                threshold,
                left,
                right,
            },
            TreeNode::Leaf { value } => Node::Leaf { version: value },
        })
        .collect();
    let mut spec = DispatcherSpec::new(tree.arity(), nodes)?;
    spec.source = Some(ModelKind::Tree);
    Ok(spec)
}

/// Lowers a rule list to a tree: each rule becomes a chain of branches
/// ending in its label, and every failed condition falls through to a copy
/// of the lowering of the remaining rules.
///
/// Conditions already decided by the branches above are not tested again,
/// and a branch whose two sides are the same leaf collapses into that
/// leaf, which keeps the duplicated fall-through subtrees small.
pub fn compile_rules(rules: &RuleList) -> Result<DispatcherSpec> {
    for rule in &rules.rules {
        for c in &rule.conditions {
            if c.feature >= rules.arity {
                return Err(Error::InvalidDispatcher(format!(
                    "rule condition on feature {} out of range for arity {}",
                    c.feature, rules.arity
                )));
            }
        }
    }
    let mut lower = Lowering {
        rules,
        nodes: Vec::new(),
    };
    let mut bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); rules.arity];
    lower.build(0, 0, &mut bounds)?;
    let mut spec = DispatcherSpec::new(rules.arity, lower.nodes)?;
    spec.source = Some(ModelKind::Rules);
    Ok(spec)
}

/// Compiles either direct-classification model.
pub enum DcModel<'a> {
    Tree(&'a Tree<VersionId>),
    Rules(&'a RuleList),
}

pub fn compile_dispatcher(model: DcModel<'_>) -> Result<DispatcherSpec> {
    match model {
        DcModel::Tree(t) => compile_tree(t),
        DcModel::Rules(r) => compile_rules(r),
    }
}

struct Lowering<'a> {
    rules: &'a RuleList,
    nodes: Vec<Node>,
}

/// What the path so far implies about a condition, given per-feature
/// bounds `lo < x <= hi`.
fn implied(c: &Condition, bounds: &[(f64, f64)]) -> Option<bool> {
    let (lo, hi) = bounds[c.feature];
    let le = if hi <= c.threshold {
        Some(true)
    } else if lo >= c.threshold {
        Some(false)
    } else {
        None
    };
    match c.direction {
        Direction::Le => le,
        Direction::Gt => le.map(|b| !b),
    }
}

impl Lowering<'_> {
    /// Emits the subtree for "rule `r`, from condition `c` on" and returns
    /// its root index.
    fn build(&mut self, r: usize, c: usize, bounds: &mut [(f64, f64)]) -> Result<usize> {
        if self.nodes.len() >= MAX_NODES {
            return Err(Error::InvalidDispatcher(format!(
                "lowered rule list exceeds {MAX_NODES} nodes"
            )));
        }
        let Some(rule) = self.rules.rules.get(r) else {
            return Ok(self.leaf(self.rules.default_label));
        };
        let Some(cond) = rule.conditions.get(c) else {
            return Ok(self.leaf(rule.label));
        };
        match implied(cond, bounds) {
            Some(true) => return self.build(r, c + 1, bounds),
            Some(false) => return self.build(r + 1, 0, bounds),
            None => {}
        }
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf {
            version: VersionId(0),
        });
        let saved = bounds[cond.feature];
        // Left side: x <= threshold.
        bounds[cond.feature].1 = saved.1.min(cond.threshold);
        let left = match cond.direction {
            Direction::Le => self.build(r, c + 1, bounds)?,
            Direction::Gt => self.build(r + 1, 0, bounds)?,
        };
        bounds[cond.feature] = (saved.0.max(cond.threshold), saved.1);
        let right = match cond.direction {
            Direction::Le => self.build(r + 1, 0, bounds)?,
            Direction::Gt => self.build(r, c + 1, bounds)?,
        };
        bounds[cond.feature] = saved;

        if let (Node::Leaf { version: a }, Node::Leaf { version: b }) =
            (self.nodes[left], self.nodes[right])
        {
            if a == b && left + 1 == right && right + 1 == self.nodes.len() {
                self.nodes.truncate(at);
                return Ok(self.leaf(a));
            }
        }
        self.nodes[at] = Node::Branch {
            feature: cond.feature,
            threshold: cond.threshold,
            left,
            right,
        };
        Ok(at)
    }

    fn leaf(&mut self, version: VersionId) -> usize {
        self.nodes.push(Node::Leaf { version });
        self.nodes.len() - 1
    }
}

/// C `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// below 1e-4 and from 1e17 up.
pub fn format_threshold(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn serialize_nodes(arity: usize, nodes: &[Node]) -> String {
    let mut out = format!("{FORMAT_TAG}; arity={arity}; nodes={}\n", nodes.len());
    for n in nodes {
        match *n {
            Node::Branch {
                feature,
                threshold,
                left,
                right,
            } => writeln!(
                out,
                "B {feature} {} {left} {right}",
                format_threshold(threshold)
            ),
            Node::Leaf { version } => writeln!(out, "L {version}"),
        }
        .expect("writing to a String");
    }
    out
}

fn parse(text: &str) -> Result<DispatcherSpec> {
    let err = |line: usize, message: String| Error::DispatcherParse { line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty dispatcher file".into()))?;
    let fields: Vec<&str> = header.split(';').map(str::trim).collect();
    let (arity, count) = match fields.as_slice() {
        [tag, a, n] if *tag == FORMAT_TAG => {
            let num = |field: &str, key: &str| -> Result<usize> {
                field
                    .strip_prefix(key)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| err(hl, format!("expected {key}<count>, found {field:?}")))
            };
            (num(a, "arity=")?, num(n, "nodes=")?)
        }
        _ => {
            return Err(err(
                hl,
                format!("expected header \"{FORMAT_TAG}; arity=<k>; nodes=<n>\""),
            ))
        }
    };

    let mut nodes = Vec::with_capacity(count.min(MAX_NODES));
    for (ln, line) in lines {
        if nodes.len() == count {
            return Err(err(ln, format!("more than the declared {count} nodes")));
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        let index = |s: &str, what: &str| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| err(ln, format!("bad {what} {s:?}")))?;
            if what != "feature" && v >= count {
                return Err(err(ln, format!("{what} {v} out of range ({count} nodes)")));
            }
            if what == "feature" && v >= arity {
                return Err(err(
                    ln,
                    format!("feature {v} out of range for arity {arity}"),
                ));
            }
            Ok(v)
        };
        let node = match tok.as_slice() {
            ["B", f, t, l, r] => {
                let threshold: f64 = t
                    .parse()
                    .ok()
                    .filter(|t: &f64| t.is_finite())
                    .ok_or_else(|| err(ln, format!("bad threshold {t:?}")))?;
                Node::Branch {
                    feature: index(f, "feature")?,
                    threshold,
                    left: index(l, "left child")?,
                    right: index(r, "right child")?,
                }
            }
            ["L", v] => Node::Leaf {
                version: VersionId(
                    v.parse()
                        .map_err(|_| err(ln, format!("bad version id {v:?}")))?,
                ),
            },
            _ => {
                return Err(err(
                    ln,
                    "expected \"B <feat> <threshold> <left> <right>\" or \"L <version>\"".into(),
                ))
            }
        };
        nodes.push(node);
    }
    if nodes.len() != count {
        return Err(err(
            text.lines().count().max(1),
            format!("declared {count} nodes, found {}", nodes.len()),
        ));
    }
    validate(arity, &nodes).map_err(|e| err(hl, e.to_string()))?;
    DispatcherSpec::new(arity, nodes)
}
