//! Delivery schedules.
//!
//! A schedule is an ordered list of slots. Each slot assigns every
//! transmitter a linear combination of XOR symbols, kept in two forms: a
//! symbolic one (receiver-relative subfile labels, signed products of channel
//! gains) used for transcripts, and the exact [`TxSignal`] evaluated against
//! the sampled channels that goes through [`crate::net::receive`].

mod cached;
mod uncached;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use cached::build_cached_schedule;
pub use uncached::{build_nocache_a, build_nocache_b, NextTracker};

use crate::error::Result;
use crate::net::{DemandMap, ExactScalar, NetworkConfig, SubfileId, TxSignal, XorSymbol};
use crate::window::Window;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeTag {
    Cached,
    NocacheA,
    NocacheB,
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeTag::Cached => "cached",
            SchemeTag::NocacheA => "nocache-A",
            SchemeTag::NocacheB => "nocache-B",
        })
    }
}

/// Slot position inside its scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotLabel {
    /// Slot `phase ∈ {0, m}` of delivery network `DN_m`.
    DeliveryNetwork { m: usize, phase: usize },
    /// Time slot `t` of a no-caching cycle.
    Time { t: usize },
}

impl fmt::Display for SlotLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotLabel::DeliveryNetwork { m, phase } => write!(f, "DN_{m} phase {phase}"),
            SlotLabel::Time { t } => write!(f, "t={t}"),
        }
    }
}

/// What a transmitter does in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    /// New messages plus forward interference nulling.
    Forward,
    /// Nulls interference created by the forward set.
    Nulling,
    Silent,
}

/// What a receiver is scheduled to get in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Intent {
    Deliver(SubfileId),
    /// Nothing addressed to this receiver; any observation is discarded.
    Idle,
    /// Switched off to isolate neighbouring subnetworks; it may observe
    /// interference, which is not constrained.
    Deactivated,
}

impl Intent {
    pub fn expected(&self) -> Option<SubfileId> {
        match self {
            Intent::Deliver(id) => Some(*id),
            _ => None,
        }
    }
}

/// `W^{r_receiver}_part`, labelled by the demanding receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartRef {
    pub receiver: usize,
    pub part: usize,
}

impl fmt::Display for PartRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W^{{r{}}}_{}", self.receiver, self.part)
    }
}

/// Channel-gain factor of a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gain {
    /// `h_{j,j+1}`
    Cross(usize),
    /// `1/h_{j,j+1}`
    InverseCross(usize),
}

impl fmt::Display for Gain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gain::Cross(j) => write!(f, "h_{{{},{}}}", j, j + 1),
            Gain::InverseCross(j) => write!(f, "h_{{{},{}}}^-1", j, j + 1),
        }
    }
}

/// `±∏ factors`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub negative: bool,
    pub factors: Vec<Gain>,
}

impl Monomial {
    pub fn eval(&self, cfg: &NetworkConfig) -> Result<ExactScalar> {
        let mut acc = if self.negative {
            -ExactScalar::one()
        } else {
            ExactScalar::one()
        };
        for g in &self.factors {
            match g {
                Gain::Cross(j) => acc *= cfg.gain(*j),
                Gain::InverseCross(j) => acc *= &cfg.gain(*j).inv()?,
            }
        }
        Ok(acc)
    }

    fn render_magnitude(&self) -> String {
        self.factors
            .iter()
            .map(Gain::to_string)
            .collect::<Vec<_>>()
            .join("·")
    }
}

/// A symbolic term `coeff · (parts XOR-ed)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolicTerm {
    /// One or two parts, sorted by receiver.
    pub parts: Vec<PartRef>,
    pub coeff: Monomial,
}

impl SymbolicTerm {
    pub fn contains(&self, part: &PartRef) -> bool {
        self.parts.contains(part)
    }

    fn canonical_key(&self) -> (usize, &[PartRef]) {
        (self.coeff.factors.len(), &self.parts)
    }

    fn render(&self, parenthesize: bool) -> String {
        let body = self
            .parts
            .iter()
            .map(PartRef::to_string)
            .collect::<Vec<_>>()
            .join(" ⊕ ");
        let body = if parenthesize && self.parts.len() > 1 {
            format!("({body})")
        } else {
            body
        };
        if self.coeff.factors.is_empty() {
            body
        } else {
            format!("{}·{}", self.coeff.render_magnitude(), body)
        }
    }

    fn concretize(&self, demands: &DemandMap, cfg: &NetworkConfig) -> Result<(XorSymbol, ExactScalar)> {
        let ids: Vec<SubfileId> = self
            .parts
            .iter()
            .map(|p| SubfileId::new(demands.file(p.receiver), p.part))
            .collect();
        Ok((XorSymbol::from_parts(&ids)?, self.coeff.eval(cfg)?))
    }
}

/// Canonical human-readable form of one transmitter's symbolic signal:
/// terms ordered by number of gain factors then by parts, signs explicit,
/// `∅` when silent.
pub fn render_signal(terms: &[SymbolicTerm]) -> String {
    if terms.is_empty() {
        return "∅".to_string();
    }
    let mut sorted: Vec<&SymbolicTerm> = terms.iter().collect();
    sorted.sort_by(|a, b| a.canonical_key().cmp(&b.canonical_key()));
    let multi = sorted.len() > 1;
    let mut out = String::new();
    for (idx, t) in sorted.iter().enumerate() {
        let paren = multi || t.coeff.negative || !t.coeff.factors.is_empty();
        let body = t.render(paren);
        match (idx, t.coeff.negative) {
            (0, false) => out.push_str(&body),
            (0, true) => {
                out.push('−');
                out.push_str(&body);
            }
            (_, false) => {
                out.push_str(" + ");
                out.push_str(&body);
            }
            (_, true) => {
                out.push_str(" − ");
                out.push_str(&body);
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub label: SlotLabel,
    pub roles: Vec<Role>,
    pub symbolic: Vec<Vec<SymbolicTerm>>,
    pub signals: Vec<TxSignal>,
    pub intended: Vec<Intent>,
}

impl Slot {
    pub fn render_tx(&self, k: usize) -> String {
        render_signal(&self.symbolic[k])
    }

    /// Distinct subfiles transmitter `k` must fetch for this slot.
    pub fn fetched_by(&self, k: usize) -> BTreeSet<SubfileId> {
        self.signals[k]
            .terms()
            .keys()
            .flat_map(|s| s.parts().iter().copied())
            .collect()
    }

    pub fn served_receivers(&self) -> usize {
        self.intended
            .iter()
            .filter(|i| matches!(i, Intent::Deliver(_)))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub scheme: SchemeTag,
    /// Scheme parameter `x`.
    pub x: usize,
    pub subpackets: usize,
    pub k: usize,
    pub slots: Vec<Slot>,
}

impl Schedule {
    /// Farthest a message's cooperation chain extends from its receiver:
    /// `x` for the cache-aided scheme, the subnetwork size otherwise.
    pub fn reach(&self) -> usize {
        match self.scheme {
            SchemeTag::Cached => self.x,
            SchemeTag::NocacheA => 4 * self.x,
            SchemeTag::NocacheB => 2 * self.x + 1,
        }
    }

    pub fn interior_window(&self) -> Result<Window> {
        Window::interior(self.k, self.reach())
    }

    /// Slot-by-slot dump with channel gains kept symbolic.
    pub fn transcript(&self) -> String {
        let mut out = String::new();
        for (idx, slot) in self.slots.iter().enumerate() {
            out.push_str(&format!("slot {idx} [{} {}]\n", self.scheme, slot.label));
            for k in 0..self.k {
                out.push_str(&format!("  tx{k}: {}\n", slot.render_tx(k)));
            }
        }
        out
    }

    /// Schedule that never transmits; useful as a baseline.
    pub fn silent(scheme: SchemeTag, k: usize, subpackets: usize, slots: usize) -> Self {
        let slot = |t| Slot {
            label: SlotLabel::Time { t },
            roles: vec![Role::Silent; k],
            symbolic: vec![Vec::new(); k],
            signals: vec![TxSignal::silent(); k],
            intended: vec![Intent::Idle; k],
        };
        Self {
            scheme,
            x: 0,
            subpackets,
            k,
            slots: (0..slots).map(slot).collect(),
        }
    }
}

/// Term before boundary truncation: receiver and gain indices may fall
/// outside the network.
#[derive(Debug, Clone)]
pub(crate) struct RawTerm {
    pub parts: Vec<(isize, usize)>,
    pub negative: bool,
    pub factors: Vec<(isize, bool)>,
}

impl RawTerm {
    /// Boundary truncation. Parts of receivers outside `[0, K)` are dropped
    /// (a term with no part left disappears). Gain factors `h_{j,j+1}` with
    /// `j < 0` belong to hops that start outside the network: they are
    /// dropped together with the sign flip they carry, so the chain is
    /// re-anchored at its first in-network carrier.
    pub fn truncate(self, k: usize) -> Option<SymbolicTerm> {
        let mut parts: Vec<PartRef> = self
            .parts
            .into_iter()
            .filter(|&(r, _)| r >= 0 && (r as usize) < k)
            .map(|(r, part)| PartRef {
                receiver: r as usize,
                part,
            })
            .collect();
        if parts.is_empty() {
            return None;
        }
        parts.sort();
        let mut negative = self.negative;
        let mut factors = Vec::with_capacity(self.factors.len());
        for (j, inverse) in self.factors {
            if j < 0 {
                negative = !negative;
                continue;
            }
            let j = j as usize;
            factors.push(if inverse { Gain::InverseCross(j) } else { Gain::Cross(j) });
        }
        Some(SymbolicTerm {
            parts,
            coeff: Monomial { negative, factors },
        })
    }
}

/// Evaluates symbolic signals into exact ones.
pub(crate) fn concretize_signals(
    symbolic: &[Vec<SymbolicTerm>],
    demands: &DemandMap,
    cfg: &NetworkConfig,
) -> Result<Vec<TxSignal>> {
    symbolic
        .iter()
        .map(|terms| {
            let mut sig = TxSignal::silent();
            for t in terms {
                let (sym, c) = t.concretize(demands, cfg)?;
                sig.add_term(sym, &c);
            }
            Ok(sig)
        })
        .collect()
}

pub(crate) fn check_demands(demands: &DemandMap, cfg: &NetworkConfig) -> Result<()> {
    if demands.len() != cfg.k() {
        return Err(crate::error::CoreError::Shape {
            what: "demands",
            expected: cfg.k(),
            got: demands.len(),
        });
    }
    Ok(())
}
