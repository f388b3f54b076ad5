use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tree::{grow_tree, Columns, DecisionTree, FeatureSampler};
use super::{BaselineParams, SparseVector};
use crate::corpus::Label;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<DecisionTree>,
    /// Seed each tree was grown from.
    pub seeds: Vec<u64>,
}

/// Tree `k` is grown from `seed + k`.
pub fn fit_forest(xs: &[SparseVector], ys: &[Label], dim: usize, p: &BaselineParams, seed: u64) -> RandomForest {
    let data = Columns::new(xs, ys, dim);
    let n = xs.len();
    let per_split = ((dim as f64).sqrt() as usize).max(1);
    let mut trees = Vec::with_capacity(p.trees);
    let mut seeds = Vec::with_capacity(p.trees);
    for k in 0..p.trees {
        let tree_seed = seed.wrapping_add(k as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
        let samples: Vec<usize> = if p.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let sampler = (!p.full_features).then_some(FeatureSampler {
            rng: &mut rng,
            per_split,
        });
        trees.push(grow_tree(&data, samples, p, sampler));
        seeds.push(tree_seed);
    }
    RandomForest { trees, seeds }
}

impl RandomForest {
    /// Fraction of trees whose leaf is majority-positive.
    pub fn vote_fraction(&self, x: &SparseVector) -> f64 {
        let votes = self.trees.iter().filter(|t| t.leaf_score(x) > 0.5).count();
        votes as f64 / self.trees.len() as f64
    }
}
