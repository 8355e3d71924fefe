//! Partitions of an index range into consecutive levels.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing bounds `0 < M_1 < … < M_r`; level `k` (0-based) covers
/// `M_{k-1}..M_k` with `M_{-1} = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LevelStructure {
    bounds: Vec<usize>,
}

impl LevelStructure {
    pub fn new(bounds: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::invalid("a level structure needs at least one level"));
        }
        let mut prev = 0;
        for &b in &bounds {
            if b <= prev {
                return Err(Error::invalid(alloc::format!(
                    "level bounds must be strictly increasing and positive, got {bounds:?}"
                )));
            }
            prev = b;
        }
        Ok(LevelStructure { bounds })
    }

    /// A single level covering `0..n`.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(alloc::vec![n])
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    pub fn num_levels(&self) -> usize {
        self.bounds.len()
    }

    pub fn total(&self) -> usize {
        *self.bounds.last().expect("non-empty")
    }

    pub fn range(&self, k: usize) -> core::ops::Range<usize> {
        let lo = if k == 0 { 0 } else { self.bounds[k - 1] };
        lo..self.bounds[k]
    }

    pub fn width(&self, k: usize) -> usize {
        self.range(k).len()
    }

    pub fn level_of(&self, i: usize) -> Option<usize> {
        self.bounds.iter().position(|&b| i < b)
    }

    pub fn ranges(&self) -> impl Iterator<Item = core::ops::Range<usize>> + '_ {
        (0..self.num_levels()).map(move |k| self.range(k))
    }
}

impl TryFrom<Vec<usize>> for LevelStructure {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LevelStructure> for Vec<usize> {
    fn from(l: LevelStructure) -> Vec<usize> {
        l.bounds
    }
}
