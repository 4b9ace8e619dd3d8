//! Frequency stores: an exact table and a count-min sketch.

use std::collections::HashMap;

use crate::hashing::{derive_seed, keyed_hash};
use crate::{Error, Result};

pub const DEFAULT_SKETCH_WIDTH: usize = 1 << 18;
pub const DEFAULT_SKETCH_DEPTH: usize = 4;

pub trait FrequencyStore: Send {
    /// Estimated number of increments of `key`.
    fn query(&self, key: &[u8]) -> u64;
    fn increment(&mut self, key: &[u8]);
    /// Total increments across all keys.
    fn total(&self) -> u64;
}

#[derive(Debug, Clone, Default)]
pub struct ExactStore {
    counts: HashMap<Vec<u8>, u64>,
    total: u64,
}

impl ExactStore {
    pub fn new() -> Self {
        Self::default()
    }
}

impl FrequencyStore for ExactStore {
    fn query(&self, key: &[u8]) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    fn increment(&mut self, key: &[u8]) {
        match self.counts.get_mut(key) {
            Some(c) => *c += 1,
            None => {
                self.counts.insert(key.to_vec(), 1);
            }
        }
        self.total += 1;
    }

    fn total(&self) -> u64 {
        self.total
    }
}

/// `depth` rows of `width` counters; row `i` indexes with
/// `keyed_hash(seeds[i], key) % width`. Queries return the row minimum and
/// never undercount.
#[derive(Debug, Clone)]
pub struct CountMinSketch {
    width: usize,
    depth: usize,
    seeds: Vec<u64>,
    counters: Vec<u64>,
    total: u64,
}

impl CountMinSketch {
    /// Row seeds are `derive_seed(master_seed, row)`.
    pub fn new(width: usize, depth: usize, master_seed: u64) -> Result<Self> {
        if width == 0 || depth == 0 {
            return Err(Error::Argument(
                "sketch width and depth must be positive".into(),
            ));
        }
        Ok(Self {
            width,
            depth,
            seeds: (0..depth as u64)
                .map(|r| derive_seed(master_seed, r))
                .collect(),
            counters: vec![0; width * depth],
            total: 0,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    #[inline]
    fn slot(&self, row: usize, key: &[u8]) -> usize {
        row * self.width + (keyed_hash(self.seeds[row], key) % self.width as u64) as usize
    }
}

impl FrequencyStore for CountMinSketch {
    fn query(&self, key: &[u8]) -> u64 {
        (0..self.depth)
            .map(|r| self.counters[self.slot(r, key)])
            .min()
            .unwrap_or(0)
    }

    fn increment(&mut self, key: &[u8]) {
        for r in 0..self.depth {
            let i = self.slot(r, key);
            self.counters[i] += 1;
        }
        self.total += 1;
    }

    fn total(&self) -> u64 {
        self.total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StoreConfig {
    Exact,
    CountMin {
        width: usize,
        depth: usize,
        seed: u64,
    },
}

impl StoreConfig {
    pub fn build(&self) -> Result<Box<dyn FrequencyStore>> {
        Ok(match *self {
            StoreConfig::Exact => Box::new(ExactStore::new()),
            StoreConfig::CountMin { width, depth, seed } => {
                Box::new(CountMinSketch::new(width, depth, seed)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fresh_sketch_is_zero() {
        let s = CountMinSketch::new(64, 4, 1).unwrap();
        assert_eq!(s.query(b"k"), 0);
        assert!(CountMinSketch::new(0, 4, 1).is_err());
    }

    #[test]
    fn single_key_exact() {
        let mut s = CountMinSketch::new(64, 4, 1).unwrap();
        for _ in 0..5 {
            s.increment(b"k");
        }
        assert_eq!(s.query(b"k"), 5);
        assert_eq!(s.total(), 5);
    }

    #[test]
    fn exact_store_counts() {
        let mut s = ExactStore::new();
        s.increment(b"a");
        s.increment(b"a");
        s.increment(b"b");
        assert_eq!((s.query(b"a"), s.query(b"b"), s.query(b"c")), (2, 1, 0));
        assert_eq!(s.total(), 3);
    }

    proptest! {
        #[test]
        fn never_underestimates(keys in proptest::collection::vec(0u16..300, 0..400), seed in any::<u64>()) {
            let mut sketch = CountMinSketch::new(32, 3, seed).unwrap();
            let mut exact = ExactStore::new();
            for k in &keys {
                let key = k.to_le_bytes();
                sketch.increment(&key);
                exact.increment(&key);
                prop_assert!(sketch.query(&key) >= exact.query(&key));
            }
            for k in 0u16..300 {
                let key = k.to_le_bytes();
                prop_assert!(sketch.query(&key) >= exact.query(&key));
            }
        }
    }
}
