//! Topology, exact arithmetic, signal representations and the noiseless
//! reception law of the Wyner network.

mod scalar;
mod signal;
mod topology;

pub use scalar::ExactScalar;
pub use signal::{receive, RxObservation, SubfileId, TxSignal, XorSymbol};
pub use topology::{sample_channels, DemandMap, LibraryConfig, NetworkConfig, GAIN_POOL_MAX};

#[cfg(test)]
mod props {
    use proptest::prelude::*;

    use super::*;

    fn arb_signal(k: usize) -> impl Strategy<Value = Vec<TxSignal>> {
        let term = (0usize..6, 0usize..3, -9i64..=9, 1i64..=9);
        proptest::collection::vec(proptest::collection::vec(term, 0..4), k).prop_map(|per_tx| {
            per_tx
                .into_iter()
                .map(|terms| {
                    TxSignal::from_terms(terms.into_iter().map(|(f, p, n, d)| {
                        (XorSymbol::single(SubfileId::new(f, p)), ExactScalar::ratio(n, d))
                    }))
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn reception_is_linear(seed in 0u64..1000, signals in arb_signal(6), n in -20i64..20, d in 1i64..20) {
            let cfg = sample_channels(6, seed).unwrap();
            let a = ExactScalar::ratio(n, d);
            let scaled: Vec<TxSignal> = signals.iter().map(|s| s.scaled(&a)).collect();
            let lhs = receive(&scaled, &cfg).unwrap();
            let rhs = receive(&signals, &cfg).unwrap();
            for (l, r) in lhs.iter().zip(&rhs) {
                prop_assert_eq!(&l.signal, &r.signal.scaled(&a));
            }
        }

        #[test]
        fn reception_is_local(seed in 0u64..1000, source in 0usize..6) {
            let cfg = sample_channels(6, seed).unwrap();
            let mut signals = vec![TxSignal::silent(); 6];
            signals[source] = TxSignal::from_terms([(XorSymbol::single(SubfileId::new(0, 0)), ExactScalar::one())]);
            let obs = receive(&signals, &cfg).unwrap();
            for o in &obs {
                let hears = o.receiver == source || o.receiver == source + 1;
                prop_assert_eq!(!o.is_empty(), hears);
            }
        }
    }
}
