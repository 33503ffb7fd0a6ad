use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ExactScalar, NetworkConfig};
use crate::error::{CoreError, Result};

/// Subfile `part` of file `file` (`W^file_part`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubfileId {
    pub file: usize,
    pub part: usize,
}

impl SubfileId {
    pub fn new(file: usize, part: usize) -> Self {
        Self { file, part }
    }
}

impl fmt::Display for SubfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W^{}_{}", self.file, self.part)
    }
}

/// One or two subfiles combined by bitwise XOR. Equality is on the part set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct XorSymbol {
    parts: Vec<SubfileId>,
}

impl XorSymbol {
    pub fn single(part: SubfileId) -> Self {
        Self { parts: vec![part] }
    }

    pub fn pair(a: SubfileId, b: SubfileId) -> Result<Self> {
        if a == b {
            return Err(CoreError::InvalidConfig(format!("XOR of {a} with itself")));
        }
        let mut parts = vec![a, b];
        parts.sort();
        Ok(Self { parts })
    }

    /// Builds from one or two distinct parts.
    pub fn from_parts(parts: &[SubfileId]) -> Result<Self> {
        match parts {
            [a] => Ok(Self::single(*a)),
            [a, b] => Self::pair(*a, *b),
            _ => Err(CoreError::InvalidConfig(format!(
                "XOR symbol needs 1 or 2 parts, got {}",
                parts.len()
            ))),
        }
    }

    pub fn parts(&self) -> &[SubfileId] {
        &self.parts
    }

    pub fn contains(&self, id: &SubfileId) -> bool {
        self.parts.contains(id)
    }
}

impl fmt::Display for XorSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parts.as_slice() {
            [a] => write!(f, "{a}"),
            [a, b] => write!(f, "{a} ⊕ {b}"),
            _ => unreachable!("XorSymbol holds one or two parts"),
        }
    }
}

/// Formal linear combination of XOR symbols. Zero coefficients are never
/// stored, so an empty map is a silent transmitter.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxSignal {
    terms: BTreeMap<XorSymbol, ExactScalar>,
}

impl TxSignal {
    pub fn silent() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = (XorSymbol, ExactScalar)>>(terms: I) -> Self {
        let mut s = Self::silent();
        for (sym, c) in terms {
            s.add_term(sym, &c);
        }
        s
    }

    /// Accumulates `coeff · symbol`, dropping the entry if it cancels.
    pub fn add_term(&mut self, symbol: XorSymbol, coeff: &ExactScalar) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(symbol.clone()).or_default();
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&symbol);
        }
    }

    pub fn add_scaled(&mut self, other: &TxSignal, factor: &ExactScalar) {
        if factor.is_zero() {
            return;
        }
        for (sym, c) in &other.terms {
            self.add_term(sym.clone(), &(c * factor));
        }
    }

    pub fn scaled(&self, factor: &ExactScalar) -> Self {
        let mut out = Self::silent();
        out.add_scaled(self, factor);
        out
    }

    pub fn is_silent(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<XorSymbol, ExactScalar> {
        &self.terms
    }

    pub fn coefficient(&self, symbol: &XorSymbol) -> Option<&ExactScalar> {
        self.terms.get(symbol)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Noiseless observation `y_k = x_k + h_{k-1,k} x_{k-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RxObservation {
    pub receiver: usize,
    pub signal: TxSignal,
}

impl RxObservation {
    pub fn terms(&self) -> &BTreeMap<XorSymbol, ExactScalar> {
        self.signal.terms()
    }

    pub fn is_empty(&self) -> bool {
        self.signal.is_silent()
    }

    /// The single surviving term, if exactly one remains.
    pub fn sole_term(&self) -> Option<(&XorSymbol, &ExactScalar)> {
        let mut it = self.signal.terms().iter();
        match (it.next(), it.next()) {
            (Some(t), None) => Some(t),
            _ => None,
        }
    }
}

/// Applies the Wyner reception law to one signal per transmitter.
pub fn receive(signals: &[TxSignal], cfg: &NetworkConfig) -> Result<Vec<RxObservation>> {
    if signals.len() != cfg.k() {
        return Err(CoreError::Shape {
            what: "transmit signals",
            expected: cfg.k(),
            got: signals.len(),
        });
    }
    Ok((0..cfg.k())
        .map(|k| {
            let mut y = signals[k].clone();
            if k > 0 {
                y.add_scaled(&signals[k - 1], cfg.gain(k - 1));
            }
            RxObservation { receiver: k, signal: y }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::sample_channels;

    fn w(file: usize, part: usize) -> SubfileId {
        SubfileId::new(file, part)
    }

    fn xor(a: SubfileId, b: SubfileId) -> XorSymbol {
        XorSymbol::pair(a, b).unwrap()
    }

    #[test]
    fn symbol_equality_is_order_free() {
        assert_eq!(xor(w(0, 1), w(1, 0)), xor(w(1, 0), w(0, 1)));
        assert!(XorSymbol::pair(w(2, 2), w(2, 2)).is_err());
        assert!(XorSymbol::from_parts(&[]).is_err());
    }

    #[test]
    fn silent_network_observes_nothing() {
        let cfg = sample_channels(5, 1).unwrap();
        let obs = receive(&vec![TxSignal::silent(); 5], &cfg).unwrap();
        assert!(obs.iter().all(RxObservation::is_empty));
    }

    #[test]
    fn shape_is_checked() {
        let cfg = sample_channels(5, 1).unwrap();
        assert!(matches!(
            receive(&vec![TxSignal::silent(); 4], &cfg),
            Err(CoreError::Shape { .. })
        ));
    }

    #[test]
    fn first_slot_of_first_delivery_network() {
        // Demands r_k = k; tx0 sends W^{r0}_1 ⊕ W^{r1}_0, tx1 silent.
        let cfg = sample_channels(4, 11).unwrap();
        let sym = xor(w(0, 1), w(1, 0));
        let mut signals = vec![TxSignal::silent(); 4];
        signals[0] = TxSignal::from_terms([(sym.clone(), ExactScalar::one())]);
        let obs = receive(&signals, &cfg).unwrap();
        assert_eq!(obs[0].sole_term(), Some((&sym, &ExactScalar::one())));
        assert_eq!(obs[1].sole_term(), Some((&sym, cfg.gain(0))));
        assert!(obs[2].is_empty());
    }

    #[test]
    fn second_delivery_network_cancels_at_receiver_two() {
        let cfg = sample_channels(4, 5).unwrap();
        let (h01, h12) = (cfg.gain(0).clone(), cfg.gain(1).clone());
        let a = xor(w(1, 3), w(3, 1));
        let b = xor(w(0, 2), w(2, 0));
        let signals = vec![
            TxSignal::from_terms([(b.clone(), ExactScalar::one())]),
            TxSignal::from_terms([(a.clone(), ExactScalar::one()), (b.clone(), -&h01)]),
            TxSignal::from_terms([(a.clone(), -&h12)]),
            TxSignal::silent(),
        ];
        let obs = receive(&signals, &cfg).unwrap();
        assert_eq!(obs[2].sole_term(), Some((&b, &-(&h01 * &h12))));
        assert_eq!(obs[1].sole_term(), Some((&a, &ExactScalar::one())));
        assert_eq!(obs[0].sole_term(), Some((&b, &ExactScalar::one())));
    }
}
