use rand::seq::index::sample;
use rand::Rng;

use super::{BaselineParams, SparseVector};
use crate::corpus::Label;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Fraction of positive training samples that reached the leaf.
    Leaf { positive: f64 },
}

/// CART tree stored as a node array, root at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub dim: usize,
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    /// Positive fraction of the leaf reached by `x`.
    pub fn leaf_score(&self, x: &SparseVector) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                TreeNode::Leaf { positive } => return positive,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => k = if x.get(feature) <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], k: usize) -> usize {
            match nodes[k] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Every child index points forward and is reached exactly once.
    pub fn is_well_formed(&self) -> bool {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(k) = stack.pop() {
            if k >= self.nodes.len() || seen[k] {
                return false;
            }
            seen[k] = true;
            if let TreeNode::Split { left, right, .. } = self.nodes[k] {
                if left <= k || right <= k {
                    return false;
                }
                stack.extend([left, right]);
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Column-major view of the training set.
pub(crate) struct Columns {
    cols: Vec<Vec<(usize, f64)>>,
    positive: Vec<bool>,
}

impl Columns {
    pub(crate) fn new(xs: &[SparseVector], ys: &[Label], dim: usize) -> Self {
        let mut cols = vec![Vec::new(); dim];
        for (s, x) in xs.iter().enumerate() {
            for &(i, v) in x.entries() {
                cols[i].push((s, v));
            }
        }
        Columns {
            cols,
            positive: ys.iter().map(|&y| y == Label::Positive).collect(),
        }
    }

    fn dim(&self) -> usize {
        self.cols.len()
    }
}

/// Per-split feature subsampling for forests.
pub(crate) struct FeatureSampler<'a, R: Rng> {
    pub rng: &'a mut R,
    pub per_split: usize,
}

struct Split {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

fn gini(pos: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = pos / total;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct Builder<'a> {
    data: &'a Columns,
    params: &'a BaselineParams,
    nodes: Vec<TreeNode>,
    /// Multiplicity of each training sample in the current node.
    mult: Vec<u32>,
}

impl Builder<'_> {
    /// Best split on `feature` for the node whose multiplicities are in
    /// `self.mult`, or None when the feature is constant there.
    fn best_on_feature(&self, feature: usize, pos: f64, total: f64) -> Option<Split> {
        let mut vals: Vec<(f64, f64, f64)> = Vec::new();
        let (mut nz_pos, mut nz_total) = (0.0, 0.0);
        for &(s, v) in &self.data.cols[feature] {
            let m = self.mult[s] as f64;
            if m > 0.0 {
                let p = if self.data.positive[s] { m } else { 0.0 };
                vals.push((v, p, m));
                nz_pos += p;
                nz_total += m;
            }
        }
        if nz_total < total {
            vals.push((0.0, pos - nz_pos, total - nz_total));
        }
        vals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best: Option<Split> = None;
        let (mut lp, mut lt) = (0.0, 0.0);
        for k in 0..vals.len() {
            lp += vals[k].1;
            lt += vals[k].2;
            let Some(next) = vals.get(k + 1) else { break };
            if next.0 == vals[k].0 {
                continue;
            }
            let rt = total - lt;
            let impurity = (lt * gini(lp, lt) + rt * gini(pos - lp, rt)) / total;
            if best.as_ref().map_or(true, |b| impurity < b.impurity) {
                let mid = 0.5 * (vals[k].0 + next.0);
                let threshold = if mid < next.0 { mid } else { vals[k].0 };
                best = Some(Split {
                    impurity,
                    feature,
                    threshold,
                });
            }
        }
        best
    }

    fn best_split(&self, features: &[usize], pos: f64, total: f64) -> Option<Split> {
        let mut best: Option<Split> = None;
        for &f in features {
            if let Some(s) = self.best_on_feature(f, pos, total) {
                if best.as_ref().map_or(true, |b| s.impurity < b.impurity) {
                    best = Some(s);
                }
            }
        }
        best
    }

    fn grow<R: Rng>(&mut self, samples: Vec<usize>, depth: usize, sampler: &mut Option<FeatureSampler<R>>) -> usize {
        let total = samples.len() as f64;
        let pos = samples.iter().filter(|&&s| self.data.positive[s]).count() as f64;
        let me = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            positive: if total > 0.0 { pos / total } else { 0.0 },
        });
        if pos == 0.0 || pos == total || depth >= self.params.max_depth || samples.len() < self.params.min_node_size {
            return me;
        }
        for &s in &samples {
            self.mult[s] += 1;
        }
        let dim = self.data.dim();
        let split = match sampler {
            None => self.best_split(&(0..dim).collect::<Vec<_>>(), pos, total),
            Some(fs) => {
                let k = fs.per_split.min(dim);
                let mut chosen = sample(fs.rng, dim, k).into_vec();
                chosen.sort_unstable();
                self.best_split(&chosen, pos, total).or_else(|| {
                    let rest: Vec<usize> = (0..dim).filter(|f| chosen.binary_search(f).is_err()).collect();
                    self.best_split(&rest, pos, total)
                })
            }
        };
        let sides = split.as_ref().map(|sp| {
            let mut goes_left = vec![0.0 <= sp.threshold; self.mult.len()];
            for &(s, v) in &self.data.cols[sp.feature] {
                goes_left[s] = v <= sp.threshold;
            }
            goes_left
        });
        for &s in &samples {
            self.mult[s] = 0;
        }
        let (Some(sp), Some(goes_left)) = (split, sides) else {
            return me;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples.into_iter().partition(|&s| goes_left[s]);
        let l = self.grow(left, depth + 1, sampler);
        let r = self.grow(right, depth + 1, sampler);
        self.nodes[me] = TreeNode::Split {
            feature: sp.feature,
            threshold: sp.threshold,
            left: l,
            right: r,
        };
        me
    }
}

/// Grows a CART tree on `samples` (repeats allowed). Without a sampler every
/// feature is searched at every split.
pub(crate) fn grow_tree<R: Rng>(
    data: &Columns,
    samples: Vec<usize>,
    params: &BaselineParams,
    mut sampler: Option<FeatureSampler<R>>,
) -> DecisionTree {
    let mut b = Builder {
        data,
        params,
        nodes: Vec::new(),
        mult: vec![0; data.positive.len()],
    };
    b.grow(samples, 0, &mut sampler);
    DecisionTree {
        dim: data.dim(),
        nodes: b.nodes,
    }
}
