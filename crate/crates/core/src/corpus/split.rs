use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, LabeledReview};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_ratio: f64,
    pub val_ratio: f64,
    pub test_ratio: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_ratio: 0.72,
            val_ratio: 0.18,
            test_ratio: 0.10,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        for (name, r) in [
            ("train", self.train_ratio),
            ("val", self.val_ratio),
            ("test", self.test_ratio),
        ] {
            if !(r > 0.0 && r < 1.0) {
                return Err(CorpusError::RatiosInvalid(format!(
                    "{name} ratio {r} outside (0, 1)"
                )));
            }
        }
        let sum = self.train_ratio + self.val_ratio + self.test_ratio;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::RatiosInvalid(format!("ratios sum to {sum}")));
        }
        Ok(())
    }

    /// `(train, val, test)` sizes for a corpus of `n`: validation and test
    /// take the ceiling of their share, training keeps the remainder.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize), CorpusError> {
        self.validate()?;
        // Tolerance keeps products like 0.1 * 30 = 3.0000000000000004 at 3.
        let part = |r: f64| ((r * n as f64) - 1e-9).ceil().max(0.0) as usize;
        let val = part(self.val_ratio);
        let test = part(self.test_ratio);
        if n < 3 || val == 0 || test == 0 || val + test >= n {
            return Err(CorpusError::CorpusTooSmall(n));
        }
        Ok((n - val - test, val, test))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Vec<LabeledReview>,
    pub val: Vec<LabeledReview>,
    pub test: Vec<LabeledReview>,
}

/// Seeded shuffle followed by contiguous train / val / test slices.
pub fn split_corpus(corpus: &[LabeledReview], spec: &SplitSpec) -> Result<Splits, CorpusError> {
    let (n_train, n_val, _) = spec.sizes(corpus.len())?;
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let pick = |idx: &[usize]| idx.iter().map(|&i| corpus[i].clone()).collect::<Vec<_>>();
    Ok(Splits {
        train: pick(&order[..n_train]),
        val: pick(&order[n_train..n_train + n_val]),
        test: pick(&order[n_train + n_val..]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn corpus(n: usize) -> Vec<LabeledReview> {
        (0..n)
            .map(|i| LabeledReview::new(format!("r{i}"), "ক খ গ", Label::from_bool(i % 2 == 0)))
            .collect()
    }

    #[test]
    fn reported_split_sizes() {
        assert_eq!(SplitSpec::default().sizes(8435).unwrap(), (6072, 1519, 844));
    }

    #[test]
    fn ten_items() {
        let spec = SplitSpec {
            train_ratio: 0.8,
            val_ratio: 0.1,
            test_ratio: 0.1,
            seed: 3,
        };
        let s = split_corpus(&corpus(10), &spec).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (8, 1, 1));
    }

    #[test]
    fn bad_ratios() {
        let spec = SplitSpec {
            train_ratio: 0.5,
            val_ratio: 0.3,
            test_ratio: 0.3,
            seed: 0,
        };
        assert!(matches!(spec.validate(), Err(CorpusError::RatiosInvalid(_))));
        let spec = SplitSpec {
            train_ratio: 1.0,
            val_ratio: 0.0,
            test_ratio: 0.0,
            seed: 0,
        };
        assert!(matches!(spec.validate(), Err(CorpusError::RatiosInvalid(_))));
    }

    #[test]
    fn too_small() {
        assert_eq!(
            split_corpus(&corpus(2), &SplitSpec::default()),
            Err(CorpusError::CorpusTooSmall(2))
        );
    }

    #[test]
    fn same_seed_same_split() {
        let c = corpus(50);
        let spec = SplitSpec {
            seed: 11,
            ..SplitSpec::default()
        };
        assert_eq!(split_corpus(&c, &spec).unwrap(), split_corpus(&c, &spec).unwrap());
    }

    proptest! {
        #[test]
        fn partition_is_exact(n in 3usize..400, seed in any::<u64>()) {
            let c = corpus(n);
            let spec = SplitSpec { seed, ..SplitSpec::default() };
            let Ok(s) = split_corpus(&c, &spec) else { return Ok(()); };
            let (nt, nv, ne) = spec.sizes(n).unwrap();
            prop_assert_eq!((s.train.len(), s.val.len(), s.test.len()), (nt, nv, ne));
            prop_assert_eq!(nv, (0.18 * n as f64 - 1e-9).ceil() as usize);
            let ids: HashSet<&str> = s.train.iter().chain(&s.val).chain(&s.test).map(|r| r.id.as_str()).collect();
            prop_assert_eq!(ids.len(), n);
        }
    }
}
