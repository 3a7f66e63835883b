use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::GraphDataset;
use crate::error::{Error, Result};

/// Attempts per split before giving up on covering every class in train.
pub const MAX_SPLIT_REDRAWS: usize = 100;

/// Train / validation / test node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn new(train: Vec<usize>, val: Vec<usize>, test: Vec<usize>) -> Self {
        Split { train, val, test }
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.val.len(), self.test.len())
    }

    /// Checks disjointness, range, non-emptiness and train class coverage.
    pub fn validate(&self, ds: &GraphDataset) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (part, ids) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            if ids.is_empty() {
                return Err(Error::Split(format!("{part} part is empty")));
            }
            for &i in ids {
                if i >= ds.n() {
                    return Err(Error::Split(format!("node {i} in {part} is out of range")));
                }
                if !seen.insert(i) {
                    return Err(Error::Split(format!("node {i} appears in more than one part")));
                }
            }
        }
        if !covers_all_classes(&self.train, ds) {
            return Err(Error::Split("train part misses a class".into()));
        }
        Ok(())
    }

    pub(crate) fn to_text(&self) -> String {
        let mut out = String::new();
        for (part, ids) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            let joined: Vec<String> = ids.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{part}: {}", joined.join(" "));
        }
        out
    }
}

/// How many nodes go to each part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitSizes {
    /// Fractions of `n`; train and val are floored, test takes the rest.
    Ratios([f64; 3]),
    /// Explicit part sizes; nodes beyond their sum are left out.
    Absolute([usize; 3]),
}

impl SplitSizes {
    pub const STANDARD: SplitSizes = SplitSizes::Ratios([0.48, 0.32, 0.20]);

    pub fn part_sizes(&self, n: usize) -> Result<[usize; 3]> {
        match *self {
            SplitSizes::Ratios(r) => {
                if r.iter().any(|x| !(0.0..=1.0).contains(x)) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!("split ratios {r:?} must sum to 1")));
                }
                let train = (r[0] * n as f64).floor() as usize;
                let val = (r[1] * n as f64).floor() as usize;
                Ok([train, val, n - train - val])
            }
            SplitSizes::Absolute(s) => {
                if s.iter().sum::<usize>() > n {
                    return Err(Error::InvalidParameter(format!(
                        "split sizes {s:?} exceed {n} nodes"
                    )));
                }
                Ok(s)
            }
        }
    }
}

/// `count` random splits. Split `i` draws from a ChaCha stream derived from
/// `(seed, i)` and is redrawn until its train part covers every class.
pub fn generate_splits(ds: &GraphDataset, sizes: SplitSizes, count: usize, seed: u64) -> Result<Vec<Split>> {
    let [n_train, n_val, n_test] = sizes.part_sizes(ds.n())?;
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::InvalidParameter(format!(
            "split sizes {n_train}/{n_val}/{n_test} leave a part empty"
        )));
    }
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut ids: Vec<usize> = (0..ds.n()).collect();
            for _ in 0..MAX_SPLIT_REDRAWS {
                ids.shuffle(&mut rng);
                let train = &ids[..n_train];
                if covers_all_classes(train, ds) {
                    return Ok(Split::new(
                        train.to_vec(),
                        ids[n_train..n_train + n_val].to_vec(),
                        ids[n_train + n_val..n_train + n_val + n_test].to_vec(),
                    ));
                }
            }
            Err(Error::Split(format!(
                "split {i}: no draw in {MAX_SPLIT_REDRAWS} attempts put every class in train"
            )))
        })
        .collect()
}

fn covers_all_classes(ids: &[usize], ds: &GraphDataset) -> bool {
    let mut seen = vec![false; ds.num_classes()];
    for &i in ids {
        seen[ds.labels()[i]] = true;
    }
    seen.into_iter().all(|s| s)
}
