use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Inclusive index range of receivers (or transmitters) over which
/// asymptotic claims are checked exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

impl Window {
    pub fn new(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi {
            return Err(CoreError::InvalidWindow(format!("[{lo}, {hi}] is empty")));
        }
        Ok(Self { lo, hi })
    }

    /// Every index of a `k`-pair network.
    pub fn all(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(CoreError::InvalidWindow("network has no receivers".into()));
        }
        Self::new(0, k - 1)
    }

    /// `[2·reach, K − 2·reach − 1]`: far enough from both edges that boundary
    /// truncation cannot touch the indices inside.
    pub fn interior(k: usize, reach: usize) -> Result<Self> {
        let lo = 2 * reach;
        let hi = (k as isize) - 2 * reach as isize - 1;
        if hi < lo as isize {
            return Err(CoreError::InvalidWindow(format!(
                "K = {k} too small for an interior window with reach {reach}"
            )));
        }
        Self::new(lo, hi as usize)
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.lo..=self.hi).contains(&i)
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}
