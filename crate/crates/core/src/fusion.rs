//! Combining several methods' scores for the same pair.
//!
//! Average and weighted fusion are convex combinations of the member scores.
//! Decision-tree fusion trains a C4.5 classifier on labeled score vectors;
//! its per-pair score is the match fraction of the leaf a vector lands in,
//! which keeps the threshold-sweep protocol applicable unchanged.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::evaluation::DistanceMatrix;
use crate::methods::MethodId;

/// Per-method scores for one pair, with an optional match label for training.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<(MethodId, f64)>,
    pub label: Option<bool>,
}

impl ScoreVector {
    pub fn new(scores: Vec<(MethodId, f64)>, label: Option<bool>) -> Result<Self> {
        for (i, (m, s)) in scores.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::InvalidArgument(format!("score for {m} is not finite")));
            }
            if scores[..i].iter().any(|(other, _)| other == m) {
                return Err(Error::InvalidArgument(format!("method {m} appears twice")));
            }
        }
        Ok(ScoreVector { scores, label })
    }

    pub fn labeled(scores: Vec<(MethodId, f64)>, is_match: bool) -> Result<Self> {
        ScoreVector::new(scores, Some(is_match))
    }

    pub fn get(&self, method: MethodId) -> Option<f64> {
        self.scores.iter().find(|(m, _)| *m == method).map(|(_, s)| *s)
    }

    pub fn scores(&self) -> &[(MethodId, f64)] {
        &self.scores
    }

    pub fn methods(&self) -> impl Iterator<Item = MethodId> + '_ {
        self.scores.iter().map(|(m, _)| *m)
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }
}

/// Nonnegative method weights, normalized to sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionWeights {
    weights: BTreeMap<MethodId, f64>,
}

impl FusionWeights {
    pub fn new(weights: impl IntoIterator<Item = (MethodId, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (m, w) in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidWeights(format!("weight {w} for {m}")));
            }
            if map.insert(m, w).is_some() {
                return Err(Error::InvalidWeights(format!("{m} weighted twice")));
            }
        }
        let total: f64 = map.values().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::InvalidWeights("at least one weight must be positive".into()));
        }
        for w in map.values_mut() {
            *w /= total;
        }
        Ok(FusionWeights { weights: map })
    }

    pub fn uniform(methods: &[MethodId]) -> Result<Self> {
        FusionWeights::new(methods.iter().map(|&m| (m, 1.0)))
    }

    pub fn get(&self, method: MethodId) -> Option<f64> {
        self.weights.get(&method).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (MethodId, f64)> + '_ {
        self.weights.iter().map(|(m, w)| (*m, *w))
    }

    /// Parses `method <TAB> weight` lines.
    pub fn parse(text: &str, context: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (m, w) = line
                .split_once('\t')
                .ok_or_else(|| Error::malformed(context, i + 1, "expected `method<TAB>weight`"))?;
            let m: MethodId = m.parse().map_err(|e: Error| Error::malformed(context, i + 1, e.to_string()))?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|e| Error::malformed(context, i + 1, format!("bad weight: {e}")))?;
            entries.push((m, w));
        }
        FusionWeights::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_tsv(&self) -> String {
        self.iter().map(|(m, w)| format!("{m}\t{w}\n")).collect()
    }
}

/// Equal-weight fusion: `Σ s_i · (1/n)`.
pub fn average_fusion(v: &ScoreVector) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("cannot fuse an empty score vector".into()));
    }
    let w = 1.0 / v.len() as f64;
    Ok(v.scores.iter().map(|(_, s)| s * w).sum())
}

/// `Σ w_i · s_i` over the methods present in `v`.
pub fn weighted_fusion(v: &ScoreVector, weights: &FusionWeights) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("cannot fuse an empty score vector".into()));
    }
    v.scores
        .iter()
        .map(|(m, s)| {
            weights
                .get(*m)
                .map(|w| s * w)
                .ok_or_else(|| Error::InvalidWeights(format!("no fusion weight for {m}")))
        })
        .sum()
}

/// Fuses same-layout per-method matrices with `weights`.
pub fn weighted_fused_matrix(
    parts: &[(MethodId, &DistanceMatrix)],
    weights: &FusionWeights,
    label: &str,
) -> Result<DistanceMatrix> {
    let w: Vec<f64> = parts
        .iter()
        .map(|(m, _)| weights.get(*m).ok_or_else(|| Error::InvalidWeights(format!("no fusion weight for {m}"))))
        .collect::<Result<_>>()?;
    let matrices: Vec<&DistanceMatrix> = parts.iter().map(|(_, d)| *d).collect();
    DistanceMatrix::combine(&matrices, label, |s| s.iter().zip(&w).map(|(s, w)| s * w).sum())
}

/// Equal-weight fusion of same-layout matrices.
pub fn average_fused_matrix(parts: &[(MethodId, &DistanceMatrix)], label: &str) -> Result<DistanceMatrix> {
    let methods: Vec<MethodId> = parts.iter().map(|(m, _)| *m).collect();
    weighted_fused_matrix(parts, &FusionWeights::uniform(&methods)?, label)
}

/// Parameters of C4.5 training.
#[derive(Debug, Clone, PartialEq)]
pub struct C45Params {
    /// Minimum number of rows on each side of a split.
    pub min_leaf: usize,
    /// Confidence factor of pessimistic error pruning, in `(0, 0.5]`.
    pub confidence: f64,
    pub prune: bool,
}

impl Default for C45Params {
    fn default() -> Self {
        C45Params {
            min_leaf: 2,
            confidence: 0.25,
            prune: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Vectors with `attribute <= threshold` go left.
    Split {
        attribute: MethodId,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf { matches: usize, mismatches: usize },
}

impl Node {
    fn leaf(matches: usize, mismatches: usize) -> Node {
        Node::Leaf { matches, mismatches }
    }

    fn route(&self, value: &impl Fn(MethodId) -> Option<f64>) -> Result<(usize, usize)> {
        let mut node = self;
        loop {
            match node {
                Node::Leaf { matches, mismatches } => return Ok((*matches, *mismatches)),
                Node::Split {
                    attribute,
                    threshold,
                    left,
                    right,
                } => {
                    let v = value(*attribute).ok_or(Error::MissingAttribute(attribute.name()))?;
                    node = if v <= *threshold { left } else { right };
                }
            }
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf { .. } => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Node::Leaf { .. } => 1,
            Node::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

/// Class of a leaf distribution: match only on a strict majority.
fn leaf_class(matches: usize, mismatches: usize) -> bool {
    matches > mismatches
}

/// A trained binary match/mismatch classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub root: Node,
}

impl DecisionTree {
    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn leaves(&self) -> usize {
        self.root.leaves()
    }

    /// Match fraction of the leaf `v` lands in.
    pub fn match_probability(&self, v: &ScoreVector) -> Result<f64> {
        let (m, n) = self.root.route(&|a| v.get(a))?;
        Ok(m as f64 / (m + n) as f64)
    }

    /// Indented text, one node per line: `METHOD <= threshold` for splits
    /// (left child first) and `class (matches, mismatches)` for leaves.
    pub fn to_text(&self) -> String {
        fn walk(node: &Node, depth: usize, out: &mut String) {
            let pad = "  ".repeat(depth);
            match node {
                Node::Leaf { matches, mismatches } => {
                    let class = if leaf_class(*matches, *mismatches) { "match" } else { "mismatch" };
                    let _ = writeln!(out, "{pad}{class} ({matches}, {mismatches})");
                }
                Node::Split {
                    attribute,
                    threshold,
                    left,
                    right,
                } => {
                    let _ = writeln!(out, "{pad}{attribute} <= {threshold}");
                    walk(left, depth + 1, out);
                    walk(right, depth + 1, out);
                }
            }
        }
        let mut out = String::new();
        walk(&self.root, 0, &mut out);
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let lines: Vec<(usize, usize, &str)> = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let indent = l.len() - l.trim_start_matches(' ').len();
                (i + 1, indent, l.trim())
            })
            .collect();
        let mut pos = 0;
        let root = parse_node(&lines, &mut pos, 0)?;
        if pos != lines.len() {
            return Err(Error::malformed("tree", lines[pos].0, "unexpected trailing node"));
        }
        Ok(DecisionTree { root })
    }
}

fn parse_node(lines: &[(usize, usize, &str)], pos: &mut usize, depth: usize) -> Result<Node> {
    let &(lineno, indent, text) = lines
        .get(*pos)
        .ok_or_else(|| Error::malformed("tree", lines.last().map_or(1, |l| l.0), "tree ends early"))?;
    if indent != depth * 2 {
        return Err(Error::malformed("tree", lineno, format!("expected indent {}", depth * 2)));
    }
    *pos += 1;
    if let Some((attr, thr)) = text.split_once(" <= ") {
        let attribute: MethodId = attr.parse().map_err(|e: Error| Error::malformed("tree", lineno, e.to_string()))?;
        let threshold: f64 = thr
            .parse()
            .map_err(|e| Error::malformed("tree", lineno, format!("bad threshold: {e}")))?;
        let left = parse_node(lines, pos, depth + 1)?;
        let right = parse_node(lines, pos, depth + 1)?;
        return Ok(Node::Split {
            attribute,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        });
    }
    let bad = || Error::malformed("tree", lineno, "expected `METHOD <= t` or `class (matches, mismatches)`");
    let (class, counts) = text.split_once(' ').ok_or_else(bad)?;
    let counts = counts.strip_prefix('(').and_then(|c| c.strip_suffix(')')).ok_or_else(bad)?;
    let (m, n) = counts.split_once(',').ok_or_else(bad)?;
    let matches: usize = m.trim().parse().map_err(|_| bad())?;
    let mismatches: usize = n.trim().parse().map_err(|_| bad())?;
    if matches + mismatches == 0 {
        return Err(Error::malformed("tree", lineno, "empty leaf distribution"));
    }
    let expected = if leaf_class(matches, mismatches) { "match" } else { "mismatch" };
    if class != expected {
        return Err(Error::malformed("tree", lineno, format!("leaf class `{class}` disagrees with its counts")));
    }
    Ok(Node::leaf(matches, mismatches))
}

/// Routes `v` down the tree; returns the leaf's majority class and the
/// fraction of the leaf's rows in that class.
pub fn classify(tree: &DecisionTree, v: &ScoreVector) -> Result<(bool, f64)> {
    let (m, n) = tree.root.route(&|a| v.get(a))?;
    let class = leaf_class(m, n);
    let majority = if class { m } else { n };
    Ok((class, majority as f64 / (m + n) as f64))
}

/// Distinct attributes tested on levels `0..depth`, breadth first.
pub fn root_attributes(tree: &DecisionTree, depth: usize) -> Vec<MethodId> {
    let mut out = Vec::new();
    let mut queue = VecDeque::from([(&tree.root, 0usize)]);
    while let Some((node, level)) = queue.pop_front() {
        if level >= depth {
            continue;
        }
        if let Node::Split {
            attribute, left, right, ..
        } = node
        {
            if !out.contains(attribute) {
                out.push(*attribute);
            }
            queue.push_back((left, level + 1));
            queue.push_back((right, level + 1));
        }
    }
    out
}

fn entropy(pos: usize, neg: usize) -> f64 {
    let n = (pos + neg) as f64;
    [pos, neg]
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// `(information gain, split information)` in bits of a binary partition,
/// given `(matches, mismatches)` on each side.
fn gain_and_split_info(left: (usize, usize), right: (usize, usize)) -> (f64, f64) {
    let nl = (left.0 + left.1) as f64;
    let nr = (right.0 + right.1) as f64;
    let n = nl + nr;
    let parent = entropy(left.0 + right.0, left.1 + right.1);
    let children = (nl / n) * entropy(left.0, left.1) + (nr / n) * entropy(right.0, right.1);
    let split_info = entropy(left.0 + left.1, right.0 + right.1);
    (parent - children, split_info)
}

/// Information gain of the split `attribute <= threshold` divided by its
/// split information; 0 when the split information is 0.
pub fn gain_ratio(rows: &[ScoreVector], attribute: MethodId, threshold: f64) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::InvalidTrainingData("no rows".into()));
    }
    let (mut left, mut right) = ((0, 0), (0, 0));
    for row in rows {
        let label = row
            .label
            .ok_or_else(|| Error::InvalidTrainingData("unlabeled row".into()))?;
        let v = row.get(attribute).ok_or(Error::MissingAttribute(attribute.name()))?;
        let side = if v <= threshold { &mut left } else { &mut right };
        if label {
            side.0 += 1;
        } else {
            side.1 += 1;
        }
    }
    let (gain, split_info) = gain_and_split_info(left, right);
    Ok(if split_info == 0.0 { 0.0 } else { (gain / split_info).max(0.0) })
}

/// Gains at or below this are treated as no gain.
const MIN_GAIN: f64 = 1e-10;

struct Table {
    attributes: Vec<MethodId>,
    /// column-major values: `columns[a][row]`
    columns: Vec<Vec<f64>>,
    labels: Vec<bool>,
}

struct Candidate {
    attr: usize,
    threshold: f64,
    ratio: f64,
}

/// Trains a C4.5 tree.
///
/// At each node every attribute's candidate thresholds (midpoints between
/// consecutive distinct values) are scored by gain ratio; splits must leave
/// `min_leaf` rows on each side and have positive gain. Ties go to the
/// earlier method, then the lower threshold. Growing stops at pure nodes and
/// nodes with fewer than `2 * min_leaf` rows. With `prune`, subtrees are
/// replaced by leaves when that does not raise the pessimistic error estimate.
pub fn train_c45(rows: &[ScoreVector], params: &C45Params) -> Result<DecisionTree> {
    if rows.is_empty() {
        return Err(Error::InvalidTrainingData("no rows".into()));
    }
    if params.min_leaf == 0 {
        return Err(Error::InvalidArgument("min_leaf must be at least 1".into()));
    }
    if params.prune && !(params.confidence > 0.0 && params.confidence <= 0.5) {
        return Err(Error::InvalidArgument("pruning confidence must lie in (0, 0.5]".into()));
    }
    let mut attributes: Vec<MethodId> = rows[0].methods().collect();
    attributes.sort();
    let mut columns = vec![Vec::with_capacity(rows.len()); attributes.len()];
    let mut labels = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != attributes.len() {
            return Err(Error::InvalidTrainingData("rows have different method sets".into()));
        }
        for (a, col) in attributes.iter().zip(columns.iter_mut()) {
            col.push(
                row.get(*a)
                    .ok_or_else(|| Error::InvalidTrainingData("rows have different method sets".into()))?,
            );
        }
        labels.push(
            row.label
                .ok_or_else(|| Error::InvalidTrainingData("unlabeled row".into()))?,
        );
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(Error::InvalidTrainingData("training rows contain a single class".into()));
    }
    let table = Table {
        attributes,
        columns,
        labels,
    };
    let indices: Vec<usize> = (0..rows.len()).collect();
    let mut root = grow(&table, indices, params);
    if params.prune {
        let z = Normal::new(0.0, 1.0)
            .expect("standard normal")
            .inverse_cdf(1.0 - params.confidence);
        prune(&mut root, params.confidence, z);
    }
    Ok(DecisionTree { root })
}

fn counts(table: &Table, indices: &[usize]) -> (usize, usize) {
    let m = indices.iter().filter(|&&i| table.labels[i]).count();
    (m, indices.len() - m)
}

fn grow(table: &Table, indices: Vec<usize>, params: &C45Params) -> Node {
    let (m, n) = counts(table, &indices);
    if m == 0 || n == 0 || indices.len() < 2 * params.min_leaf {
        return Node::leaf(m, n);
    }
    let Some(best) = best_split(table, &indices, (m, n), params.min_leaf) else {
        return Node::leaf(m, n);
    };
    let column = &table.columns[best.attr];
    let (left, right): (Vec<usize>, Vec<usize>) = indices.into_iter().partition(|&i| column[i] <= best.threshold);
    Node::Split {
        attribute: table.attributes[best.attr],
        threshold: best.threshold,
        left: Box::new(grow(table, left, params)),
        right: Box::new(grow(table, right, params)),
    }
}

fn best_split(table: &Table, indices: &[usize], total: (usize, usize), min_leaf: usize) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    let mut sorted = indices.to_vec();
    for (a, column) in table.columns.iter().enumerate() {
        sorted.sort_by(|&i, &j| column[i].total_cmp(&column[j]));
        let mut left = (0usize, 0usize);
        for k in 0..sorted.len() - 1 {
            if table.labels[sorted[k]] {
                left.0 += 1;
            } else {
                left.1 += 1;
            }
            let (lo, hi) = (column[sorted[k]], column[sorted[k + 1]]);
            if lo == hi {
                continue;
            }
            let n_left = k + 1;
            if n_left < min_leaf || sorted.len() - n_left < min_leaf {
                continue;
            }
            let right = (total.0 - left.0, total.1 - left.1);
            let (gain, split_info) = gain_and_split_info(left, right);
            if gain <= MIN_GAIN || split_info == 0.0 {
                continue;
            }
            let ratio = gain / split_info;
            if best.as_ref().is_none_or(|b| ratio > b.ratio) {
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Candidate { attr: a, threshold, ratio });
            }
        }
    }
    best
}

/// Extra errors to add to `e` observed errors among `n` rows for the upper
/// confidence limit at level `cf` (C4.5's pessimistic estimate).
pub fn added_errors(n: f64, e: f64, cf: f64, z: f64) -> f64 {
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (added_errors(n, 1.0, cf, z) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * ((f / n) - (f * f / n) + (z * z / (4.0 * n * n))).sqrt()) / (1.0 + z * z / n);
    r * n - e
}

fn leaf_estimate(matches: usize, mismatches: usize, cf: f64, z: f64) -> f64 {
    let n = (matches + mismatches) as f64;
    let e = matches.min(mismatches) as f64;
    e + added_errors(n, e, cf, z)
}

/// Returns `(matches, mismatches, estimated errors)` of the (pruned) subtree.
fn prune(node: &mut Node, cf: f64, z: f64) -> (usize, usize, f64) {
    match node {
        Node::Leaf { matches, mismatches } => (*matches, *mismatches, leaf_estimate(*matches, *mismatches, cf, z)),
        Node::Split { left, right, .. } => {
            let (lm, ln, le) = prune(left, cf, z);
            let (rm, rn, re) = prune(right, cf, z);
            let (m, n) = (lm + rm, ln + rn);
            let subtree = le + re;
            let as_leaf = leaf_estimate(m, n, cf, z);
            if as_leaf <= subtree + 0.1 {
                *node = Node::leaf(m, n);
                (m, n, as_leaf)
            } else {
                (m, n, subtree)
            }
        }
    }
}

/// Labeled rows from same-layout per-method matrices of one fold: every
/// relevant cell is a positive; negatives are drawn without replacement from
/// the other cells, `negatives_per_positive` times as many as positives.
pub fn training_rows(
    parts: &[(MethodId, &DistanceMatrix)],
    negatives_per_positive: f64,
    seed: u64,
) -> Result<Vec<ScoreVector>> {
    let (_, first) = parts
        .first()
        .ok_or_else(|| Error::InvalidArgument("no member matrices".into()))?;
    let matrices: Vec<&DistanceMatrix> = parts.iter().map(|(_, m)| *m).collect();
    // validates the shared layout
    DistanceMatrix::combine(&matrices, "check", |_| 0.0)?;
    let mask = first.relevant_mask();
    let (pos, neg): (Vec<usize>, Vec<usize>) = (0..mask.len()).partition(|&c| mask[c]);
    let wanted = ((pos.len() as f64) * negatives_per_positive).round() as usize;
    let neg: Vec<usize> = if wanted >= neg.len() {
        neg
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = index::sample(&mut rng, neg.len(), wanted).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| neg[i]).collect()
    };
    pos.iter()
        .map(|&c| (c, true))
        .chain(neg.iter().map(|&c| (c, false)))
        .map(|(cell, label)| {
            let scores = parts.iter().map(|(m, d)| (*m, d.scores()[cell])).collect();
            ScoreVector::labeled(scores, label)
        })
        .collect()
}

/// Replaces every cell by the tree's match probability for its score vector.
pub fn tree_fused_matrix(tree: &DecisionTree, parts: &[(MethodId, &DistanceMatrix)], label: &str) -> Result<DistanceMatrix> {
    let methods: Vec<MethodId> = parts.iter().map(|(m, _)| *m).collect();
    let mut used = Vec::new();
    collect_attributes(&tree.root, &mut used);
    if let Some(missing) = used.iter().find(|a| !methods.contains(a)) {
        return Err(Error::MissingAttribute(missing.name()));
    }
    let matrices: Vec<&DistanceMatrix> = parts.iter().map(|(_, d)| *d).collect();
    DistanceMatrix::combine(&matrices, label, |s| {
        let (m, n) = tree
            .root
            .route(&|a| methods.iter().position(|x| *x == a).map(|i| s[i]))
            .expect("attributes checked above");
        m as f64 / (m + n) as f64
    })
}

fn collect_attributes(node: &Node, out: &mut Vec<MethodId>) {
    if let Node::Split {
        attribute, left, right, ..
    } = node
    {
        if !out.contains(attribute) {
            out.push(*attribute);
        }
        collect_attributes(left, out);
        collect_attributes(right, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use MethodId::*;

    fn sv(scores: &[(MethodId, f64)], label: bool) -> ScoreVector {
        ScoreVector::labeled(scores.to_vec(), label).unwrap()
    }

    #[test]
    fn average_and_weighted() {
        let v = ScoreVector::new(vec![(ClC3g, 0.4), (ClAsa, 0.6)], None).unwrap();
        assert_eq!(average_fusion(&v).unwrap(), 0.5);
        let single = ScoreVector::new(vec![(ClWes, 0.37)], None).unwrap();
        assert_eq!(average_fusion(&single).unwrap(), 0.37);

        let three = ScoreVector::new(vec![(ClC3g, 0.1), (ClWes, 0.2), (ClAsa, 0.7)], None).unwrap();
        let uniform = FusionWeights::uniform(&[ClC3g, ClWes, ClAsa]).unwrap();
        assert_eq!(average_fusion(&three).unwrap(), weighted_fusion(&three, &uniform).unwrap());

        let sel = FusionWeights::new([(ClC3g, 1.0), (ClAsa, 0.0)]).unwrap();
        let v = ScoreVector::new(vec![(ClC3g, 0.3), (ClAsa, 0.9)], None).unwrap();
        assert_eq!(weighted_fusion(&v, &sel).unwrap(), 0.3);

        let w = FusionWeights::new([(ClC3g, 0.25), (ClAsa, 0.75)]).unwrap();
        let v = ScoreVector::new(vec![(ClC3g, 0.2), (ClAsa, 0.6)], None).unwrap();
        assert!((weighted_fusion(&v, &w).unwrap() - 0.5).abs() < 1e-15);

        let partial = FusionWeights::new([(ClC3g, 1.0)]).unwrap();
        assert!(weighted_fusion(&v, &partial).is_err());
        assert!(average_fusion(&ScoreVector::new(vec![], None).unwrap()).is_err());
    }

    #[test]
    fn weights_validation_and_file() {
        assert!(FusionWeights::new([(ClC3g, 0.0)]).is_err());
        assert!(FusionWeights::new([(ClC3g, -1.0), (ClWes, 2.0)]).is_err());
        let w = FusionWeights::new([(ClC3g, 2.0), (ClWes, 6.0)]).unwrap();
        assert_eq!(w.get(ClC3g), Some(0.25));
        let back = FusionWeights::parse(&w.to_tsv(), "t").unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn score_vector_rejects_duplicates() {
        assert!(ScoreVector::new(vec![(ClC3g, 0.1), (ClC3g, 0.2)], None).is_err());
        assert!(ScoreVector::new(vec![(ClC3g, f64::NAN)], None).is_err());
    }

    #[test]
    fn gain_ratio_textbook_cases() {
        let rows = vec![
            sv(&[(ClC3g, 0.1)], false),
            sv(&[(ClC3g, 0.2)], false),
            sv(&[(ClC3g, 0.8)], true),
            sv(&[(ClC3g, 0.9)], true),
        ];
        assert_eq!(gain_ratio(&rows, ClC3g, 0.5).unwrap(), 1.0);
        assert_eq!(gain_ratio(&rows, ClC3g, 5.0).unwrap(), 0.0);
        assert!(gain_ratio(&rows, ClWes, 0.5).is_err());
    }

    #[test]
    fn separable_single_attribute() {
        let mut rows = Vec::new();
        for i in 0..10 {
            rows.push(sv(&[(ClC3g, 0.6 + i as f64 * 0.03), (ClWes, (i % 3) as f64)], true));
            rows.push(sv(&[(ClC3g, 0.1 + i as f64 * 0.03), (ClWes, (i % 3) as f64)], false));
        }
        let tree = train_c45(&rows, &C45Params::default()).unwrap();
        match &tree.root {
            Node::Split {
                attribute, threshold, left, right,
            } => {
                assert_eq!(*attribute, ClC3g);
                assert!((threshold - 0.5).abs() < 0.1, "{threshold}");
                assert!(matches!(**left, Node::Leaf { matches: 0, mismatches: 10 }));
                assert!(matches!(**right, Node::Leaf { matches: 10, mismatches: 0 }));
            }
            other => panic!("expected a split, got {other:?}"),
        }
        for r in &rows {
            assert_eq!(classify(&tree, r).unwrap().0, r.label.unwrap());
        }
        assert_eq!(root_attributes(&tree, 1), vec![ClC3g]);
    }

    #[test]
    fn uninformative_rows_give_majority_leaf() {
        let mut rows = vec![sv(&[(ClC3g, 0.5)], true); 3];
        rows.extend(vec![sv(&[(ClC3g, 0.5)], false); 5]);
        let tree = train_c45(&rows, &C45Params::default()).unwrap();
        assert_eq!(tree.root, Node::Leaf { matches: 3, mismatches: 5 });
        let probe = ScoreVector::new(vec![(ClC3g, 0.9)], None).unwrap();
        assert_eq!(classify(&tree, &probe).unwrap(), (false, 5.0 / 8.0));
        assert!(root_attributes(&tree, 3).is_empty());
    }

    #[test]
    fn training_errors() {
        assert!(train_c45(&[], &C45Params::default()).is_err());
        let one_class = vec![sv(&[(ClC3g, 0.1)], true), sv(&[(ClC3g, 0.2)], true)];
        assert!(train_c45(&one_class, &C45Params::default()).is_err());
        let mixed = vec![sv(&[(ClC3g, 0.1)], true), sv(&[(ClWes, 0.2)], false)];
        assert!(train_c45(&mixed, &C45Params::default()).is_err());
    }

    #[test]
    fn leaf_lookup_and_boundary() {
        let tree = DecisionTree {
            root: Node::Leaf { matches: 3, mismatches: 1 },
        };
        let v = ScoreVector::new(vec![(ClAsa, 0.2)], None).unwrap();
        assert_eq!(classify(&tree, &v).unwrap(), (true, 0.75));

        let tree = DecisionTree {
            root: Node::Split {
                attribute: ClAsa,
                threshold: 0.2,
                left: Box::new(Node::leaf(0, 4)),
                right: Box::new(Node::leaf(4, 0)),
            },
        };
        assert!(!classify(&tree, &v).unwrap().0);
        let missing = ScoreVector::new(vec![(ClWes, 0.2)], None).unwrap();
        assert!(matches!(classify(&tree, &missing), Err(Error::MissingAttribute("CL-ASA"))));
    }

    #[test]
    fn text_roundtrip() {
        let tree = DecisionTree {
            root: Node::Split {
                attribute: ClC3g,
                threshold: 0.41250000000000003,
                left: Box::new(Node::Split {
                    attribute: ClWess,
                    threshold: -0.3,
                    left: Box::new(Node::leaf(3, 40)),
                    right: Box::new(Node::leaf(20, 1)),
                }),
                right: Box::new(Node::leaf(50, 2)),
            },
        };
        let text = tree.to_text();
        assert_eq!(
            text,
            "CL-C3G <= 0.41250000000000003\n  CL-WESS <= -0.3\n    mismatch (3, 40)\n    match (20, 1)\n  match (50, 2)\n"
        );
        assert_eq!(DecisionTree::parse(&text).unwrap(), tree);
        assert!(DecisionTree::parse("CL-C3G <= 0.5\n  match (1, 0)\n").is_err());
        assert!(DecisionTree::parse("match (0, 3)\n").is_err());
    }

    #[test]
    fn added_errors_matches_reference_values() {
        let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.75);
        assert!((z - 0.6744897501960817).abs() < 1e-12);
        // zero errors: n * (1 - cf^(1/n))
        assert!((added_errors(6.0, 0.0, 0.25, z) - 6.0 * (1.0 - 0.25f64.powf(1.0 / 6.0))).abs() < 1e-12);
        // Quinlan's example: 16 rows, 1 error -> U_25%(1,16) ≈ 0.157
        let u = (1.0 + added_errors(16.0, 1.0, 0.25, z)) / 16.0;
        assert!((u - 0.157).abs() < 0.005, "{u}");
        assert_eq!(added_errors(4.0, 3.8, 0.25, z), 4.0 - 3.8);
    }

    #[test]
    fn pruning_textbook_example() {
        // Leaves of 6, 9 and 1 rows estimate 6*0.206 + 9*0.143 + 1*0.750 = 3.27
        // errors; one leaf of 16 rows with 1 error estimates 16*0.157 = 2.51.
        let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.75);
        let mut root = Node::Split {
            attribute: ClC3g,
            threshold: 0.3,
            left: Box::new(Node::leaf(6, 0)),
            right: Box::new(Node::Split {
                attribute: ClWes,
                threshold: 0.5,
                left: Box::new(Node::leaf(9, 0)),
                right: Box::new(Node::leaf(0, 1)),
            }),
        };
        let (m, n, est) = prune(&mut root, 0.25, z);
        assert_eq!((m, n), (15, 1));
        assert_eq!(root, Node::leaf(15, 1));
        // the normal approximation lands slightly below the exact binomial bound
        assert!((est - 2.51).abs() < 0.05, "{est}");

        // the inner split alone survives: 9*0.143 + 0.750 < U(1, 10) * 10
        let mut inner = Node::Split {
            attribute: ClWes,
            threshold: 0.5,
            left: Box::new(Node::leaf(9, 0)),
            right: Box::new(Node::leaf(0, 1)),
        };
        let (_, _, est) = prune(&mut inner, 0.25, z);
        assert!(matches!(inner, Node::Split { .. }));
        assert!((est - (9.0 * 0.143 + 0.750)).abs() < 0.01, "{est}");
    }
}
