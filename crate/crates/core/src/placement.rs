//! Placement phase: library payloads and receiver cache contents.

use std::collections::{BTreeMap, BTreeSet};

use bitvec::prelude::*;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::net::{ExactScalar, LibraryConfig, SubfileId, XorSymbol};

pub type Bits = BitVec<u64, Lsb0>;

/// Bitwise XOR of two equal-length bit strings.
pub fn xor_bits(a: &BitSlice<u64, Lsb0>, b: &BitSlice<u64, Lsb0>) -> Bits {
    assert_eq!(a.len(), b.len(), "XOR of unequal-length subfiles");
    let mut out = a.to_bitvec();
    out ^= b;
    out
}

/// Pseudorandom file contents; subfile `i` of file `n` is the `i`-th
/// contiguous block of `F/S` bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileStore {
    lib: LibraryConfig,
    files: Vec<Bits>,
}

impl FileStore {
    pub fn random(lib: LibraryConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let words = lib.file_bits().div_ceil(64);
        let files = (0..lib.files())
            .map(|_| {
                let raw: Vec<u64> = (0..words).map(|_| rng.next_u64()).collect();
                let mut bits = Bits::from_vec(raw);
                bits.truncate(lib.file_bits());
                bits
            })
            .collect();
        Self { lib, files }
    }

    /// Wraps explicit file contents; every file must be `F` bits long with
    /// `S | F`.
    pub fn from_files(files: Vec<Bits>, subpackets: usize) -> Result<Self> {
        let file_bits = files.first().map(|f| f.len()).unwrap_or(0);
        if files.iter().any(|f| f.len() != file_bits) {
            return Err(CoreError::InvalidConfig("files differ in length".into()));
        }
        let lib = LibraryConfig::new(files.len(), file_bits, subpackets)?;
        Ok(Self { lib, files })
    }

    pub fn lib(&self) -> LibraryConfig {
        self.lib
    }

    pub fn file(&self, n: usize) -> &BitSlice<u64, Lsb0> {
        &self.files[n]
    }

    pub fn subfile(&self, id: SubfileId) -> &BitSlice<u64, Lsb0> {
        let len = self.lib.subfile_bits();
        &self.files[id.file][id.part * len..(id.part + 1) * len]
    }

    /// Payload carried by a symbol: the XOR of its parts.
    pub fn symbol_payload(&self, symbol: &XorSymbol) -> Bits {
        match symbol.parts() {
            [a] => self.subfile(*a).to_bitvec(),
            [a, b] => xor_bits(self.subfile(*a), self.subfile(*b)),
            _ => unreachable!("XorSymbol holds one or two parts"),
        }
    }
}

/// Contents of one receiver's cache.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheState {
    pub receiver: usize,
    pub gamma: ExactScalar,
    pub entries: BTreeSet<SubfileId>,
    pub payload: Option<BTreeMap<SubfileId, Bits>>,
}

impl CacheState {
    /// A receiver with no cache.
    pub fn empty(receiver: usize) -> Self {
        Self {
            receiver,
            gamma: ExactScalar::zero(),
            entries: BTreeSet::new(),
            payload: None,
        }
    }

    pub fn holds(&self, id: &SubfileId) -> bool {
        self.entries.contains(id)
    }

    pub fn cached_bits(&self, lib: &LibraryConfig) -> usize {
        self.entries.len() * lib.subfile_bits()
    }

    pub fn payload_of(&self, id: &SubfileId) -> Option<&Bits> {
        self.payload.as_ref().and_then(|p| p.get(id))
    }

    /// Part index shared by all cached subfiles (uniform placement only).
    pub fn cached_part(&self) -> Option<usize> {
        let mut parts = self.entries.iter().map(|id| id.part);
        let first = parts.next()?;
        parts.all(|p| p == first).then_some(first)
    }
}

/// Uniform placement: receiver `k` stores part `[k]_S` of every file.
///
/// `gamma` must be exactly `1/S` with `S = lib.subpackets()`; other cache
/// sizes go through memory sharing. `gamma = 1` (S = 1) caches everything,
/// which memory sharing uses for a fully cached sub-library.
pub fn place_caches(
    k: usize,
    lib: &LibraryConfig,
    gamma: &ExactScalar,
    store: Option<&FileStore>,
) -> Result<Vec<CacheState>> {
    let s = gamma
        .unit_fraction_denominator()
        .ok_or_else(|| CoreError::UnsupportedDirectPlacement(gamma.clone()))?;
    if s as usize != lib.subpackets() {
        return Err(CoreError::InvalidConfig(format!(
            "gamma = {gamma} needs S = {s}, library has S = {}",
            lib.subpackets()
        )));
    }
    if let Some(store) = store {
        if store.lib() != *lib {
            return Err(CoreError::InvalidConfig("file store does not match library".into()));
        }
    }
    let s = s as usize;
    Ok((0..k)
        .map(|receiver| {
            let part = receiver % s;
            let entries: BTreeSet<SubfileId> =
                (0..lib.files()).map(|n| SubfileId::new(n, part)).collect();
            let payload = store.map(|st| {
                entries
                    .iter()
                    .map(|&id| (id, st.subfile(id).to_bitvec()))
                    .collect()
            });
            CacheState {
                receiver,
                gamma: gamma.clone(),
                entries,
                payload,
            }
        })
        .collect())
}
