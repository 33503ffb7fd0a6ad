use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ExactScalar;
use crate::error::{CoreError, Result};

/// Largest numerator/denominator used when sampling channel gains.
pub const GAIN_POOL_MAX: i64 = 997;

/// Wyner network of `K` transmitter/receiver pairs. Transmitter `k` reaches
/// receivers `k` and `k+1`; the direct link has unit gain and the cross link
/// `k -> k+1` has gain `h_{k,k+1} = channels[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkConfig {
    k: usize,
    channels: Vec<ExactScalar>,
    seed: u64,
}

impl NetworkConfig {
    pub fn new(k: usize, channels: Vec<ExactScalar>, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(CoreError::InvalidConfig("K must be positive".into()));
        }
        if channels.len() != k - 1 {
            return Err(CoreError::Shape {
                what: "channel gains",
                expected: k - 1,
                got: channels.len(),
            });
        }
        if let Some(j) = channels.iter().position(ExactScalar::is_zero) {
            return Err(CoreError::InvalidConfig(format!("channel h_{{{j},{}}} is zero", j + 1)));
        }
        Ok(Self { k, channels, seed })
    }

    /// Number of transmitter/receiver pairs.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn channels(&self) -> &[ExactScalar] {
        &self.channels
    }

    /// `h_{j,j+1}`.
    pub fn gain(&self, j: usize) -> &ExactScalar {
        &self.channels[j]
    }
}

/// Deterministic channel draw for `(k, seed)`.
///
/// Gains are signed ratios `±a/b` with `a, b` in `[1, 997]`, pairwise
/// distinct after reduction.
pub fn sample_channels(k: usize, seed: u64) -> Result<NetworkConfig> {
    if k == 0 {
        return Err(CoreError::InvalidConfig("K must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut channels = Vec::with_capacity(k - 1);
    while channels.len() < k - 1 {
        let a = rng.gen_range(1..=GAIN_POOL_MAX);
        let b = rng.gen_range(1..=GAIN_POOL_MAX);
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        let g = ExactScalar::ratio(sign * a, b);
        if seen.insert(g.clone()) {
            channels.push(g);
        }
    }
    NetworkConfig::new(k, channels, seed)
}

/// Library of `N` files of `F` bits, each split into `S` equal subfiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryConfig {
    files: usize,
    file_bits: usize,
    subpackets: usize,
}

impl LibraryConfig {
    pub fn new(files: usize, file_bits: usize, subpackets: usize) -> Result<Self> {
        if files == 0 {
            return Err(CoreError::InvalidConfig("N must be at least 1".into()));
        }
        if subpackets == 0 || file_bits == 0 {
            return Err(CoreError::InvalidConfig("F and S must be positive".into()));
        }
        if !file_bits.is_multiple_of(subpackets) {
            return Err(CoreError::InvalidConfig(format!(
                "S = {subpackets} does not divide F = {file_bits}"
            )));
        }
        Ok(Self {
            files,
            file_bits,
            subpackets,
        })
    }

    pub fn files(&self) -> usize {
        self.files
    }

    pub fn file_bits(&self) -> usize {
        self.file_bits
    }

    pub fn subpackets(&self) -> usize {
        self.subpackets
    }

    pub fn subfile_bits(&self) -> usize {
        self.file_bits / self.subpackets
    }
}

/// Demanded file of every receiver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandMap(Vec<usize>);

impl DemandMap {
    pub fn new(demands: Vec<usize>, files: usize) -> Result<Self> {
        if let Some(&bad) = demands.iter().find(|&&d| d >= files) {
            return Err(CoreError::InvalidConfig(format!(
                "demand {bad} outside library of {files} files"
            )));
        }
        Ok(Self(demands))
    }

    /// Worst-case demands: pairwise distinct when `files >= k`, uniformly
    /// random (with repeats) otherwise.
    pub fn worst_case(k: usize, files: usize, seed: u64) -> Result<Self> {
        if files == 0 {
            return Err(CoreError::InvalidConfig("N must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD3AA_D5E7_0000_0001);
        let demands = if files >= k {
            let mut all: Vec<usize> = (0..files).collect();
            all.shuffle(&mut rng);
            all.truncate(k);
            all
        } else {
            (0..k).map(|_| rng.gen_range(0..files)).collect()
        };
        Self::new(demands, files)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `r_k`.
    pub fn file(&self, receiver: usize) -> usize {
        self.0[receiver]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}
