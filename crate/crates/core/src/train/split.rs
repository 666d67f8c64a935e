use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// 80/10/10 by the floor rule: `train = ⌊0.8n⌋`, `val = ⌊0.1n⌋`, rest test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitSpec {
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn sizes(n: usize) -> (usize, usize, usize) {
        // integer arithmetic keeps the floor exact
        let train = n * 8 / 10;
        let val = n / 10;
        (train, val, n - train - val)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitPart {
    Train,
    Val,
    Test,
}

impl SplitPart {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitPart::Train),
            "val" | "validation" => Ok(SplitPart::Val),
            "test" => Ok(SplitPart::Test),
            other => Err(Error::Config(format!("unknown split '{other}' (train, val, test)"))),
        }
    }
}

impl Split {
    pub fn part(&self, which: SplitPart) -> &[usize] {
        match which {
            SplitPart::Train => &self.train,
            SplitPart::Val => &self.val,
            SplitPart::Test => &self.test,
        }
    }
}

/// Seeded shuffle of `0..n`, then partition (unstratified).
pub fn split_dataset(n: usize, spec: SplitSpec) -> Result<Split> {
    if n < 3 {
        return Err(Error::Config(format!("cannot split {n} items three ways (need at least 3)")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let (tr, va, _) = SplitSpec::sizes(n);
    let test = idx.split_off(tr + va);
    let val = idx.split_off(tr);
    Ok(Split { train: idx, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_sizes() {
        let s = split_dataset(634, SplitSpec::new(1)).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (507, 63, 64));
        let s = split_dataset(10, SplitSpec::new(1)).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (8, 1, 1));
    }

    #[test]
    fn too_small() {
        assert!(matches!(split_dataset(2, SplitSpec::new(0)), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(split_dataset(50, SplitSpec::new(4)).unwrap(), split_dataset(50, SplitSpec::new(4)).unwrap());
        assert_ne!(split_dataset(50, SplitSpec::new(4)).unwrap(), split_dataset(50, SplitSpec::new(5)).unwrap());
    }

    proptest! {
        #[test]
        fn partitions_index_set(n in 3usize..2000, seed in any::<u64>()) {
            let s = split_dataset(n, SplitSpec::new(seed)).unwrap();
            prop_assert_eq!(s.train.len(), (n as f64 * 0.8).floor() as usize);
            prop_assert_eq!(s.val.len(), (n as f64 * 0.1).floor() as usize);
            let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
