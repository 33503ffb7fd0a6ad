//! Cache-aided delivery for `γ = 1/(2x+1)`.
//!
//! Delivery network `DN_m` (m = 1..x) uses two slots, phase `p ∈ {0, m}`.
//! In each slot transmitter `k` looks at `[k+p]_{2m}`:
//!
//! * `< m`: sends `Σ_{i=0}^{[k+p]_{2m}} (−1)^i ∏_{j=k−i}^{k−1} h_{j,j+1} ·
//!   (W^{r_{k−i}}_{[k+m−i]_S} ⊕ W^{r_{k+m−i}}_{[k−i]_S})`;
//! * `m ..= 2m−2`: the same summand for `i = [k+1]_m ..= m−1`;
//! * `2m−1`: silent.
//!
//! The symbol with base `a` serves receiver `a` (part `[a+m]_S`) and
//! receiver `a+m` (part `[a]_S`); each side resolves the other part from
//! its cache.

use super::{
    check_demands, concretize_signals, Intent, PartRef, RawTerm, Role, Schedule, SchemeTag, Slot,
    SlotLabel, SymbolicTerm,
};
use crate::error::{CoreError, Result};
use crate::net::{DemandMap, ExactScalar, LibraryConfig, NetworkConfig, SubfileId};

fn modulo(a: isize, n: usize) -> usize {
    a.rem_euclid(n as isize) as usize
}

/// Summand `i` of transmitter `k` in `DN_m`.
fn xor_term(k: usize, i: usize, m: usize, s: usize) -> RawTerm {
    let base = k as isize - i as isize;
    let partner = base + m as isize;
    RawTerm {
        parts: vec![
            (base, modulo(base + m as isize, s)),
            (partner, modulo(base, s)),
        ],
        negative: i % 2 == 1,
        factors: (base..k as isize).map(|j| (j, false)).collect(),
    }
}

/// Builds the `2x`-slot cache-aided schedule.
///
/// `gamma` must be `1/(2x+1)`; `gamma = 1` (x = 0, everything cached) yields
/// an empty schedule.
pub fn build_cached_schedule(
    cfg: &NetworkConfig,
    lib: &LibraryConfig,
    gamma: &ExactScalar,
    demands: &DemandMap,
) -> Result<Schedule> {
    let s = gamma
        .unit_fraction_denominator()
        .filter(|s| s % 2 == 1)
        .ok_or_else(|| CoreError::UnsupportedGamma(gamma.clone()))? as usize;
    if lib.subpackets() != s {
        return Err(CoreError::InvalidConfig(format!(
            "gamma = {gamma} needs S = {s}, library has S = {}",
            lib.subpackets()
        )));
    }
    check_demands(demands, cfg)?;
    let x = (s - 1) / 2;
    let k_total = cfg.k();

    let mut slots = Vec::with_capacity(2 * x);
    for m in 1..=x {
        for phase in [0, m] {
            let mut roles = Vec::with_capacity(k_total);
            let mut symbolic: Vec<Vec<SymbolicTerm>> = Vec::with_capacity(k_total);
            for k in 0..k_total {
                let pos = (k + phase) % (2 * m);
                let (role, summands) = if pos < m {
                    (Role::Forward, Some(0..=pos))
                } else if pos < 2 * m - 1 {
                    (Role::Nulling, Some((k + 1) % m..=m - 1))
                } else {
                    (Role::Silent, None)
                };
                roles.push(role);
                symbolic.push(
                    summands
                        .into_iter()
                        .flatten()
                        .filter_map(|i| xor_term(k, i, m, s).truncate(k_total))
                        .collect(),
                );
            }
            prune_receiver_zero(&mut symbolic);
            let intended = (0..k_total)
                .map(|q| intent(q, m, phase, s, &symbolic, demands))
                .collect();
            let signals = concretize_signals(&symbolic, demands, cfg)?;
            slots.push(Slot {
                label: SlotLabel::DeliveryNetwork { m, phase },
                roles,
                symbolic,
                signals,
                intended,
            });
        }
    }
    Ok(Schedule {
        scheme: SchemeTag::Cached,
        x,
        subpackets: s,
        k: k_total,
        slots,
    })
}

/// Receiver 0 hears transmitter 0 alone, so every chain entering from
/// outside the network that transmitter 0 carries reaches it un-nulled.
/// Only the term nearest to the edge is kept; the others are removed from
/// every transmitter of the slot (their receivers go idle for the slot).
fn prune_receiver_zero(symbolic: &mut [Vec<SymbolicTerm>]) {
    let Some(first) = symbolic.first() else {
        return;
    };
    if first.len() <= 1 {
        return;
    }
    // Summands are generated in increasing `i`, so the first is the nearest.
    let dropped: Vec<Vec<PartRef>> = first[1..].iter().map(|t| t.parts.clone()).collect();
    for terms in symbolic.iter_mut() {
        terms.retain(|t| !dropped.contains(&t.parts));
    }
}

fn intent(
    q: usize,
    m: usize,
    phase: usize,
    s: usize,
    symbolic: &[Vec<SymbolicTerm>],
    demands: &DemandMap,
) -> Intent {
    let part = if (q + phase) % (2 * m) < m {
        (q + m) % s
    } else {
        modulo(q as isize - m as isize, s)
    };
    let wanted = PartRef { receiver: q, part };
    let carried = |k: usize| symbolic[k].iter().any(|t| t.contains(&wanted));
    if carried(q) || (q > 0 && carried(q - 1)) {
        Intent::Deliver(SubfileId::new(demands.file(q), part))
    } else {
        Intent::Idle
    }
}
