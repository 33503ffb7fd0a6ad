//! Slot-by-slot reception, zero-forcing checks, XOR resolution against the
//! caches and bit-exact file reassembly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::net::{receive, DemandMap, NetworkConfig, RxObservation, SubfileId};
use crate::placement::{xor_bits, Bits, CacheState, FileStore};
use crate::schedule::{Intent, Schedule};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum DecodeFailure {
    /// More than one symbol survived at a receiver expecting a subfile.
    ResidualInterference { terms: usize },
    /// Neither part of the surviving XOR is cached.
    UnresolvableXor,
    /// The resolved subfile is not the scheduled one (`got` is `None` when
    /// every part of the symbol was already cached).
    WrongSubfile {
        got: Option<SubfileId>,
        expected: SubfileId,
    },
    UnexpectedSilence,
}

impl fmt::Display for DecodeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeFailure::ResidualInterference { terms } => {
                write!(f, "residual interference ({terms} terms)")
            }
            DecodeFailure::UnresolvableXor => f.write_str("unresolvable XOR"),
            DecodeFailure::WrongSubfile { got: Some(g), expected } => {
                write!(f, "wrong subfile: got {g}, expected {expected}")
            }
            DecodeFailure::WrongSubfile { got: None, expected } => {
                write!(f, "nothing new received, expected {expected}")
            }
            DecodeFailure::UnexpectedSilence => f.write_str("unexpected silence"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Recovered(SubfileId),
    Idle,
    /// Non-empty observation at a receiver with nothing scheduled; discarded.
    Overheard,
    Failure(DecodeFailure),
}

/// Decodes one observation.
///
/// Returns the outcome and, on recovery with payloads available, the bits
/// of the recovered subfile.
pub fn decode_slot(
    obs: &RxObservation,
    cache: &CacheState,
    demand: usize,
    expected: &Intent,
    store: Option<&FileStore>,
) -> Result<(Outcome, Option<Bits>)> {
    let Intent::Deliver(want) = *expected else {
        let outcome = if obs.is_empty() {
            Outcome::Idle
        } else {
            Outcome::Overheard
        };
        return Ok((outcome, None));
    };
    debug_assert_eq!(want.file, demand);
    let fail = |f| Ok((Outcome::Failure(f), None));
    if obs.is_empty() {
        return fail(DecodeFailure::UnexpectedSilence);
    }
    let Some((symbol, coeff)) = obs.sole_term() else {
        return fail(DecodeFailure::ResidualInterference { terms: obs.terms().len() });
    };
    let uncached: Vec<SubfileId> = symbol
        .parts()
        .iter()
        .copied()
        .filter(|id| !cache.holds(id))
        .collect();
    let got = match uncached.as_slice() {
        [] => return fail(DecodeFailure::WrongSubfile { got: None, expected: want }),
        [one] => *one,
        _ => return fail(DecodeFailure::UnresolvableXor),
    };
    if got != want || got.file != demand {
        return fail(DecodeFailure::WrongSubfile {
            got: Some(got),
            expected: want,
        });
    }
    // The receiver sees `coeff · payload`; scaling by the exact inverse
    // leaves the symbol payload itself.
    let unit = coeff * &coeff.inv()?;
    debug_assert!(unit.is_one());

    let payload = store.map(|st| {
        let mut bits = st.symbol_payload(symbol);
        for id in symbol.parts().iter().filter(|id| **id != got) {
            let side = cache
                .payload_of(id)
                .map(|b| b.as_bitslice())
                .unwrap_or_else(|| st.subfile(*id));
            bits = xor_bits(&bits, side);
        }
        bits
    });
    Ok((Outcome::Recovered(got), payload))
}

/// A decode failure located in the schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocatedFailure {
    pub slot: usize,
    pub receiver: usize,
    pub failure: DecodeFailure,
}

impl fmt::Display for LocatedFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "slot {}, receiver {}: {}", self.slot, self.receiver, self.failure)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeReport {
    /// `outcomes[slot][receiver]`
    pub outcomes: Vec<Vec<Outcome>>,
    pub recovered: Vec<BTreeSet<SubfileId>>,
    /// Subfiles recovered more than once (should stay empty).
    pub duplicates: Vec<(usize, SubfileId)>,
    /// Recovered plus cached parts cover the whole demanded file.
    pub complete: Vec<bool>,
    /// For complete receivers with payloads, whether the reassembled file
    /// equals the library file bit for bit.
    pub bit_exact: Vec<Option<bool>>,
    subfile_bits: usize,
}

impl DecodeReport {
    pub fn failures(&self) -> Vec<LocatedFailure> {
        let mut out = Vec::new();
        for (slot, row) in self.outcomes.iter().enumerate() {
            for (receiver, o) in row.iter().enumerate() {
                if let Outcome::Failure(failure) = o {
                    out.push(LocatedFailure {
                        slot,
                        receiver,
                        failure: failure.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn recovered_bits(&self, receiver: usize) -> usize {
        self.recovered[receiver].len() * self.subfile_bits
    }

    pub fn subfile_bits(&self) -> usize {
        self.subfile_bits
    }

    pub fn slots(&self) -> usize {
        self.outcomes.len()
    }
}

/// Runs every slot of `schedule` through the channel and the decoders.
pub fn run_delivery(
    schedule: &Schedule,
    cfg: &NetworkConfig,
    caches: &[CacheState],
    demands: &DemandMap,
    store: Option<&FileStore>,
) -> Result<DecodeReport> {
    let k = cfg.k();
    if schedule.k != k {
        return Err(CoreError::Shape {
            what: "schedule transmitters",
            expected: k,
            got: schedule.k,
        });
    }
    if caches.len() != k {
        return Err(CoreError::Shape {
            what: "caches",
            expected: k,
            got: caches.len(),
        });
    }
    if demands.len() != k {
        return Err(CoreError::Shape {
            what: "demands",
            expected: k,
            got: demands.len(),
        });
    }
    let s = schedule.subpackets;
    let subfile_bits = store.map(|st| st.lib().subfile_bits()).unwrap_or(1);

    let mut outcomes = Vec::with_capacity(schedule.slots.len());
    let mut recovered = vec![BTreeSet::new(); k];
    let mut payloads: Vec<BTreeMap<usize, Bits>> = vec![BTreeMap::new(); k];
    let mut duplicates = Vec::new();
    for slot in &schedule.slots {
        let obs = receive(&slot.signals, cfg)?;
        let mut row = Vec::with_capacity(k);
        for q in 0..k {
            let (outcome, bits) =
                decode_slot(&obs[q], &caches[q], demands.file(q), &slot.intended[q], store)?;
            if let Outcome::Recovered(id) = outcome {
                if !recovered[q].insert(id) {
                    duplicates.push((q, id));
                }
                if let Some(bits) = bits {
                    payloads[q].insert(id.part, bits);
                }
            }
            row.push(outcome);
        }
        outcomes.push(row);
    }

    let mut complete = Vec::with_capacity(k);
    let mut bit_exact = Vec::with_capacity(k);
    for q in 0..k {
        let file = demands.file(q);
        let have = |part: usize| {
            let id = SubfileId::new(file, part);
            recovered[q].contains(&id) || caches[q].holds(&id)
        };
        let done = (0..s).all(have);
        complete.push(done);
        let exact = match store {
            Some(st) if done => {
                let mut whole = Bits::with_capacity(st.lib().file_bits());
                for part in 0..s {
                    let id = SubfileId::new(file, part);
                    let piece = payloads[q]
                        .get(&part)
                        .map(|b| b.as_bitslice())
                        .or_else(|| caches[q].payload_of(&id).map(|b| b.as_bitslice()));
                    match piece {
                        Some(p) => whole.extend_from_bitslice(p),
                        None => break,
                    }
                }
                Some(whole.as_bitslice() == st.file(file))
            }
            _ => None,
        };
        bit_exact.push(exact);
    }

    Ok(DecodeReport {
        outcomes,
        recovered,
        duplicates,
        complete,
        bit_exact,
        subfile_bits,
    })
}

/// An observation with more than one surviving symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZfViolation {
    pub slot: usize,
    pub receiver: usize,
    pub terms: usize,
}

/// Which receivers the zero-forcing check covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZfScope {
    All,
    /// Skips receivers the schedule deliberately deactivates.
    ExcludeDeactivated,
}

pub fn check_zero_forcing(
    schedule: &Schedule,
    cfg: &NetworkConfig,
    scope: ZfScope,
) -> Result<Vec<ZfViolation>> {
    let mut out = Vec::new();
    for (idx, slot) in schedule.slots.iter().enumerate() {
        let obs = receive(&slot.signals, cfg)?;
        for (q, o) in obs.iter().enumerate() {
            if scope == ZfScope::ExcludeDeactivated && slot.intended[q] == Intent::Deactivated {
                continue;
            }
            if o.terms().len() > 1 {
                out.push(ZfViolation {
                    slot: idx,
                    receiver: q,
                    terms: o.terms().len(),
                });
            }
        }
    }
    Ok(out)
}

/// `(slot, receiver)` pairs observing a symbol with two uncached parts.
pub fn check_cache_resolvable(
    schedule: &Schedule,
    cfg: &NetworkConfig,
    caches: &[CacheState],
) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (idx, slot) in schedule.slots.iter().enumerate() {
        let obs = receive(&slot.signals, cfg)?;
        for (q, o) in obs.iter().enumerate() {
            let bad = o
                .terms()
                .keys()
                .any(|sym| sym.parts().iter().filter(|id| !caches[q].holds(id)).count() > 1);
            if bad {
                out.push((idx, q));
            }
        }
    }
    Ok(out)
}

/// Number of structurally deactivated receivers in each slot.
pub fn deactivated_per_slot(schedule: &Schedule) -> Vec<usize> {
    schedule
        .slots
        .iter()
        .map(|s| s.intended.iter().filter(|i| **i == Intent::Deactivated).count())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{ExactScalar, LibraryConfig, TxSignal, XorSymbol};
    use crate::placement::place_caches;
    use crate::schedule::{build_cached_schedule, SchemeTag};

    fn fifth() -> (NetworkConfig, LibraryConfig, DemandMap, FileStore, Vec<CacheState>) {
        let k = 50;
        let cfg = crate::net::sample_channels(k, 1).unwrap();
        let lib = LibraryConfig::new(k, 500, 5).unwrap();
        let demands = DemandMap::worst_case(k, k, 1).unwrap();
        let store = FileStore::random(lib, 1);
        let caches = place_caches(k, &lib, &ExactScalar::ratio(1, 5), Some(&store)).unwrap();
        (cfg, lib, demands, store, caches)
    }

    #[test]
    fn receiver_two_resolves_its_own_part() {
        let (_, lib, _, store, caches) = fifth();
        let _ = lib;
        // receiver 2 demands file 2; receiver 0 demands file 0
        let sym = XorSymbol::pair(SubfileId::new(0, 2), SubfileId::new(2, 0)).unwrap();
        let obs = RxObservation {
            receiver: 2,
            signal: TxSignal::from_terms([(sym, ExactScalar::ratio(-6, 35))]),
        };
        let want = Intent::Deliver(SubfileId::new(2, 0));
        let (o, bits) = decode_slot(&obs, &caches[2], 2, &want, Some(&store)).unwrap();
        assert_eq!(o, Outcome::Recovered(SubfileId::new(2, 0)));
        assert_eq!(bits.unwrap().as_bitslice(), store.subfile(SubfileId::new(2, 0)));
    }

    #[test]
    fn taxonomy() {
        let (_, _, _, _, caches) = fifth();
        let empty = RxObservation {
            receiver: 3,
            signal: TxSignal::silent(),
        };
        let want = Intent::Deliver(SubfileId::new(3, 1));
        let (o, _) = decode_slot(&empty, &caches[3], 3, &Intent::Idle, None).unwrap();
        assert_eq!(o, Outcome::Idle);
        let (o, _) = decode_slot(&empty, &caches[3], 3, &want, None).unwrap();
        assert_eq!(o, Outcome::Failure(DecodeFailure::UnexpectedSilence));

        let two = RxObservation {
            receiver: 3,
            signal: TxSignal::from_terms([
                (XorSymbol::single(SubfileId::new(3, 1)), ExactScalar::one()),
                (XorSymbol::single(SubfileId::new(4, 1)), ExactScalar::one()),
            ]),
        };
        let (o, _) = decode_slot(&two, &caches[3], 3, &want, None).unwrap();
        assert_eq!(o, Outcome::Failure(DecodeFailure::ResidualInterference { terms: 2 }));

        let both_uncached = RxObservation {
            receiver: 3,
            signal: TxSignal::from_terms([(
                XorSymbol::pair(SubfileId::new(3, 1), SubfileId::new(4, 2)).unwrap(),
                ExactScalar::one(),
            )]),
        };
        let (o, _) = decode_slot(&both_uncached, &caches[3], 3, &want, None).unwrap();
        assert_eq!(o, Outcome::Failure(DecodeFailure::UnresolvableXor));

        let wrong = RxObservation {
            receiver: 3,
            signal: TxSignal::from_terms([(XorSymbol::single(SubfileId::new(3, 2)), ExactScalar::one())]),
        };
        let (o, _) = decode_slot(&wrong, &caches[3], 3, &want, None).unwrap();
        assert!(matches!(o, Outcome::Failure(DecodeFailure::WrongSubfile { .. })));
    }

    #[test]
    fn fifth_of_library_pipeline() {
        let (cfg, lib, demands, store, caches) = fifth();
        let sched = build_cached_schedule(&cfg, &lib, &ExactScalar::ratio(1, 5), &demands).unwrap();
        let report = run_delivery(&sched, &cfg, &caches, &demands, Some(&store)).unwrap();
        assert!(report.failures().is_empty(), "{:?}", report.failures());
        assert!(report.duplicates.is_empty());
        for q in 4..=45 {
            assert!(report.complete[q], "receiver {q}");
            assert_eq!(report.bit_exact[q], Some(true));
            assert_eq!(report.recovered[q].len(), 4);
        }
    }

    #[test]
    fn silent_schedule_is_all_idle() {
        let (cfg, _, demands, _, _) = fifth();
        let caches: Vec<_> = (0..50).map(CacheState::empty).collect();
        let sched = Schedule::silent(SchemeTag::NocacheB, 50, 2, 3);
        let report = run_delivery(&sched, &cfg, &caches, &demands, None).unwrap();
        assert!(report.outcomes.iter().flatten().all(|o| *o == Outcome::Idle));
        assert!(report.complete.iter().all(|c| !c));
    }
}
