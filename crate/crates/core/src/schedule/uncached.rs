//! Delivery without receiver caches.
//!
//! Both schemes time-share a subnetwork pattern of `P` consecutive pairs
//! that shifts by one position per slot. Transmitter `k` in slot `t` sits at
//! position `[k−t]_P`:
//!
//! * positions `0 .. F`: forward chain
//!   `Σ_{i=0}^{pos} (−1)^i ∏_{j=k−i}^{k−1} h_{j,j+1} · W^{r_{k−i}}_{Next(k−i)}`;
//! * positions `F .. P−1`: backward chain
//!   `Σ_{i=1}^{n} (−1)^{i−1} ∏_{j=k+1}^{k+i−1} h_{j−1,j}^{-1} · W^{r_{k+i}}_{Next(k+i)}`;
//! * position `P−1`: silent, isolating the next subnetwork.
//!
//! Scheme A (`S = 4x−1`): `P = 4x`, `F = 2x`, `n = 2x − L` with
//! `L = pos − 2x + 1`. Scheme B (`S = 2x`): `P = 2x+1`, `F = x`, `n = x − L`
//! with `L = pos − x`. In both, the receiver at position `F` is the one left
//! unserved.

use super::{
    check_demands, concretize_signals, Intent, RawTerm, Role, Schedule, SchemeTag, Slot, SlotLabel,
    SymbolicTerm,
};
use crate::error::{CoreError, Result};
use crate::net::{DemandMap, LibraryConfig, NetworkConfig, SubfileId};

/// Smallest not-yet-delivered subfile index of each receiver's demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NextTracker {
    next: Vec<usize>,
    subpackets: usize,
}

impl NextTracker {
    pub fn new(k: usize, subpackets: usize) -> Self {
        Self {
            next: vec![0; k],
            subpackets,
        }
    }

    pub fn next(&self, receiver: usize) -> usize {
        self.next[receiver]
    }

    /// Marks the current subfile of `receiver` as delivered.
    pub fn advance(&mut self, receiver: usize) -> Result<()> {
        let n = &mut self.next[receiver];
        if *n >= self.subpackets {
            return Err(CoreError::Domain(format!(
                "receiver {receiver} already has all {} subfiles scheduled",
                self.subpackets
            )));
        }
        *n += 1;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Pattern {
    scheme: SchemeTag,
    x: usize,
    period: usize,
    forward: usize,
}

impl Pattern {
    /// Length of the backward chain at position `pos`.
    fn backward_count(&self, pos: usize) -> usize {
        match self.scheme {
            SchemeTag::NocacheA => {
                let l = pos - 2 * self.x + 1;
                2 * self.x - l
            }
            SchemeTag::NocacheB => {
                let l = pos - self.x;
                self.x - l
            }
            SchemeTag::Cached => unreachable!("cached scheme has its own builder"),
        }
    }
}

/// Scheme A: `4x` slots, `S = 4x−1`, `M_T = 4x²/(4x−1)`.
pub fn build_nocache_a(
    cfg: &NetworkConfig,
    lib: &LibraryConfig,
    x: usize,
    demands: &DemandMap,
) -> Result<Schedule> {
    if x == 0 {
        return Err(CoreError::Domain("x must be at least 1".into()));
    }
    build(
        cfg,
        lib,
        demands,
        Pattern {
            scheme: SchemeTag::NocacheA,
            x,
            period: 4 * x,
            forward: 2 * x,
        },
    )
}

/// Scheme B: `2x+1` slots, `S = 2x`, `M_T = (x+1)/2`.
pub fn build_nocache_b(
    cfg: &NetworkConfig,
    lib: &LibraryConfig,
    x: usize,
    demands: &DemandMap,
) -> Result<Schedule> {
    if x == 0 {
        return Err(CoreError::Domain("x must be at least 1".into()));
    }
    build(
        cfg,
        lib,
        demands,
        Pattern {
            scheme: SchemeTag::NocacheB,
            x,
            period: 2 * x + 1,
            forward: x,
        },
    )
}

fn build(
    cfg: &NetworkConfig,
    lib: &LibraryConfig,
    demands: &DemandMap,
    pat: Pattern,
) -> Result<Schedule> {
    let s = pat.period - 1;
    if lib.subpackets() != s {
        return Err(CoreError::InvalidConfig(format!(
            "{} with x = {} needs S = {s}, library has S = {}",
            pat.scheme,
            pat.x,
            lib.subpackets()
        )));
    }
    let k_total = cfg.k();
    if k_total < pat.period {
        return Err(CoreError::NetworkTooSmall {
            k: k_total,
            needed: pat.period,
        });
    }
    check_demands(demands, cfg)?;

    let mut tracker = NextTracker::new(k_total, s);
    let mut slots = Vec::with_capacity(pat.period);
    for t in 0..pat.period {
        let position = |k: usize| (k + pat.period - t % pat.period) % pat.period;
        let next = |r: isize| {
            if (0..k_total as isize).contains(&r) {
                tracker.next(r as usize)
            } else {
                0
            }
        };

        let intended: Vec<Intent> = (0..k_total)
            .map(|q| {
                let pos = position(q);
                let served = pos < pat.forward || (pos > pat.forward && q > 0);
                if served {
                    Intent::Deliver(SubfileId::new(demands.file(q), tracker.next(q)))
                } else {
                    Intent::Deactivated
                }
            })
            .collect();

        let mut roles = Vec::with_capacity(k_total);
        let mut symbolic: Vec<Vec<SymbolicTerm>> = Vec::with_capacity(k_total);
        for k in 0..k_total {
            let pos = position(k);
            let ki = k as isize;
            let raw: Vec<RawTerm> = if pos < pat.forward {
                roles.push(Role::Forward);
                (0..=pos)
                    .map(|i| {
                        let r = ki - i as isize;
                        RawTerm {
                            parts: vec![(r, next(r))],
                            negative: i % 2 == 1,
                            factors: (r..ki).map(|j| (j, false)).collect(),
                        }
                    })
                    .collect()
            } else if pos < pat.period - 1 {
                roles.push(Role::Nulling);
                (1..=pat.backward_count(pos))
                    .map(|i| {
                        let r = ki + i as isize;
                        RawTerm {
                            parts: vec![(r, next(r))],
                            negative: (i - 1) % 2 == 1,
                            // ∏_{j=k+1}^{k+i−1} 1/h_{j−1,j}
                            factors: (ki..ki + i as isize - 1).map(|j| (j, true)).collect(),
                        }
                    })
                    .collect()
            } else {
                roles.push(Role::Silent);
                Vec::new()
            };
            symbolic.push(raw.into_iter().filter_map(|r| r.truncate(k_total)).collect());
        }

        let signals = concretize_signals(&symbolic, demands, cfg)?;
        for (q, intent) in intended.iter().enumerate() {
            if matches!(intent, Intent::Deliver(_)) {
                tracker.advance(q)?;
            }
        }
        slots.push(Slot {
            label: SlotLabel::Time { t },
            roles,
            symbolic,
            signals,
            intended,
        });
    }
    Ok(Schedule {
        scheme: pat.scheme,
        x: pat.x,
        subpackets: s,
        k: k_total,
        slots,
    })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::net::{sample_channels, XorSymbol};
    use crate::schedule::PartRef;

    fn setup(k: usize, s: usize) -> (NetworkConfig, LibraryConfig, DemandMap) {
        let cfg = sample_channels(k, 17).unwrap();
        let lib = LibraryConfig::new(k, 4 * s, s).unwrap();
        let demands = DemandMap::new((0..k).collect(), k).unwrap();
        (cfg, lib, demands)
    }

    fn receivers_carried(slot: &Slot, k: usize) -> BTreeSet<usize> {
        slot.symbolic[k]
            .iter()
            .flat_map(|t| t.parts.iter().map(|p| p.receiver))
            .collect()
    }

    #[test]
    fn scheme_a_first_slot_matches_worked_case() {
        let (cfg, lib, d) = setup(12, 3);
        let sched = build_nocache_a(&cfg, &lib, 1, &d).unwrap();
        let slot = &sched.slots[0];
        assert_eq!(receivers_carried(slot, 0), BTreeSet::from([0]));
        assert_eq!(receivers_carried(slot, 1), BTreeSet::from([0, 1]));
        assert_eq!(receivers_carried(slot, 2), BTreeSet::from([3]));
        assert!(slot.signals[3].is_silent());
        let h01 = cfg.gain(0);
        let w = |f, p| XorSymbol::single(SubfileId::new(f, p));
        assert_eq!(slot.signals[1].coefficient(&w(0, 0)), Some(&-h01));
        assert!(slot.signals[1].coefficient(&w(1, 0)).unwrap().is_one());
    }

    #[test]
    fn scheme_a_roles_rotate() {
        let (cfg, lib, d) = setup(16, 7);
        let sched = build_nocache_a(&cfg, &lib, 2, &d).unwrap();
        assert_eq!(sched.slots.len(), 8);
        assert_eq!(sched.slots[1].roles[0], Role::Silent);
        for t in 0..7 {
            for k in 0..15 {
                assert_eq!(sched.slots[t].roles[k], sched.slots[t + 1].roles[k + 1]);
            }
        }
    }

    #[test]
    fn scheme_a_second_slot_uses_next_subfiles() {
        let (cfg, lib, d) = setup(12, 3);
        let sched = build_nocache_a(&cfg, &lib, 1, &d).unwrap();
        let slot = &sched.slots[1];
        let parts = |k: usize| -> BTreeSet<PartRef> {
            slot.symbolic[k].iter().flat_map(|t| t.parts.clone()).collect()
        };
        let pr = |receiver, part| PartRef { receiver, part };
        assert_eq!(parts(1), BTreeSet::from([pr(1, 1)]));
        assert_eq!(parts(2), BTreeSet::from([pr(1, 1), pr(2, 0)]));
        assert_eq!(parts(3), BTreeSet::from([pr(4, 1)]));
        assert!(parts(4).is_empty());
    }

    #[test]
    fn scheme_b_worked_case_x2() {
        let (cfg, lib, d) = setup(10, 4);
        let sched = build_nocache_b(&cfg, &lib, 2, &d).unwrap();
        let slot = &sched.slots[0];
        assert_eq!(receivers_carried(slot, 2), BTreeSet::from([3, 4]));
        assert_eq!(receivers_carried(slot, 3), BTreeSet::from([4]));
        assert!(slot.signals[4].is_silent());
        assert_eq!(slot.intended[2], Intent::Deactivated);
    }

    #[test]
    fn scheme_b_fetches_x_times_x_plus_one_per_subnetwork() {
        let (cfg, lib, d) = setup(45, 8);
        let sched = build_nocache_b(&cfg, &lib, 4, &d).unwrap();
        for (t, slot) in sched.slots.iter().enumerate() {
            // a full subnetwork well inside the network
            let start = 18 + t;
            let total: usize = (start..start + 9).map(|k| slot.fetched_by(k).len()).sum();
            assert_eq!(total, 20, "slot {t}");
        }
    }

    #[test]
    fn too_small_network_rejected() {
        let (cfg, lib, d) = setup(7, 7);
        assert!(matches!(
            build_nocache_a(&cfg, &lib, 2, &d),
            Err(CoreError::NetworkTooSmall { k: 7, needed: 8 })
        ));
        let (cfg, lib, d) = setup(4, 4);
        assert!(matches!(
            build_nocache_b(&cfg, &lib, 2, &d),
            Err(CoreError::NetworkTooSmall { k: 4, needed: 5 })
        ));
    }

    #[test]
    fn next_tracker_never_exceeds_subpacketization() {
        let mut t = NextTracker::new(2, 2);
        t.advance(0).unwrap();
        t.advance(0).unwrap();
        assert!(t.advance(0).is_err());
        assert_eq!(t.next(1), 0);
    }
}
