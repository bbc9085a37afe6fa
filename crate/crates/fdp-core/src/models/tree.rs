//! Binary CART-style decision tree split on Gini impurity.

use std::io::{self, Write};

use crate::dataset::Label;
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf { label: Label },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtModel {
    nodes: Vec<Node>,
}

pub(super) struct DtParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

/// Majority label; exact ties go to the positive class.
fn majority(pos: usize, total: usize) -> Label {
    if 2 * pos >= total {
        Label::Distress
    } else {
        Label::Healthy
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Scans every feature for the weighted-Gini-minimizing threshold.
///
/// Candidate thresholds are midpoints between adjacent distinct values, so
/// the search depends only on the multiset of (value, label) pairs and is
/// invariant to sample order. Ties keep the lowest feature index, then the
/// lowest threshold.
fn best_split(x: &Matrix, y: &[Label], rows: &[usize], min_leaf: usize) -> Option<BestSplit> {
    let total = rows.len();
    let total_pos = rows.iter().filter(|&&k| y[k].is_positive()).count();
    let parent = gini(total_pos, total);
    let mut best: Option<BestSplit> = None;

    for feature in 0..x.cols() {
        let mut pairs: Vec<(f64, bool)> = rows
            .iter()
            .map(|&k| (x.get(k, feature), y[k].is_positive()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        // Group equal values so splits only land between distinct values.
        let mut groups: Vec<(f64, usize, usize)> = Vec::new(); // (value, count, pos)
        for (v, is_pos) in pairs {
            match groups.last_mut() {
                Some((gv, count, pos)) if *gv == v => {
                    *count += 1;
                    *pos += usize::from(is_pos);
                }
                _ => groups.push((v, 1, usize::from(is_pos))),
            }
        }

        let mut left_count = 0usize;
        let mut left_pos = 0usize;
        for g in 0..groups.len().saturating_sub(1) {
            left_count += groups[g].1;
            left_pos += groups[g].2;
            let right_count = total - left_count;
            if left_count < min_leaf || right_count < min_leaf {
                continue;
            }
            let right_pos = total_pos - left_pos;
            let weighted = (left_count as f64 * gini(left_pos, left_count)
                + right_count as f64 * gini(right_pos, right_count))
                / total as f64;
            if weighted >= parent {
                continue; // no impurity decrease
            }
            let threshold = (groups[g].0 + groups[g + 1].0) / 2.0;
            let replace = match &best {
                None => true,
                Some(b) => weighted < b.impurity,
            };
            if replace {
                best = Some(BestSplit { feature, threshold, impurity: weighted });
            }
        }
    }
    best
}

pub(super) fn train_dt(x: &Matrix, y: &[Label], p: &DtParams) -> DtModel {
    let mut nodes = Vec::new();
    let rows: Vec<usize> = (0..x.rows()).collect();
    build(x, y, &rows, 0, p, &mut nodes);
    DtModel { nodes }
}

/// Appends the subtree for `rows` and returns its root index.
fn build(
    x: &Matrix,
    y: &[Label],
    rows: &[usize],
    depth: usize,
    p: &DtParams,
    nodes: &mut Vec<Node>,
) -> usize {
    let total = rows.len();
    let pos = rows.iter().filter(|&&k| y[k].is_positive()).count();
    let pure = pos == 0 || pos == total;
    let leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf { label: majority(pos, total) });
        nodes.len() - 1
    };
    if pure || depth >= p.max_depth || total < 2 * p.min_leaf {
        return leaf(nodes);
    }
    let Some(split) = best_split(x, y, rows, p.min_leaf) else {
        return leaf(nodes);
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&k| x.get(k, split.feature) <= split.threshold);
    let idx = nodes.len();
    nodes.push(Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: 0,
        right: 0,
    });
    let left = build(x, y, &left_rows, depth + 1, p, nodes);
    let right = build(x, y, &right_rows, depth + 1, p, nodes);
    if let Node::Split { left: l, right: r, .. } = &mut nodes[idx] {
        *l = left;
        *r = right;
    }
    idx
}

impl DtModel {
    pub fn predict_one(&self, x: &[f64]) -> Label {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { label } => return *label,
                Node::Split { feature, threshold, left, right } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_batch(&self, x: &Matrix) -> Vec<Label> {
        (0..x.rows()).map(|i| self.predict_one(x.row(i))).collect()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize) -> usize {
            match &nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub(super) fn write_text(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "nodes: {}", self.nodes.len())?;
        for (i, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Leaf { label } => writeln!(w, "node[{i}]: leaf {}", label.sign())?,
                Node::Split { feature, threshold, left, right } => {
                    writeln!(w, "node[{i}]: split f{feature} <= {threshold} ? {left} : {right}")?
                }
            }
        }
        Ok(())
    }
}
