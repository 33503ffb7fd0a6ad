//! Closed-form backhaul/puDoF tradeoff points.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::net::ExactScalar;
use crate::schedule::SchemeTag;

fn q(n: usize) -> ExactScalar {
    ExactScalar::from(n)
}

fn positive(x: usize) -> Result<()> {
    if x == 0 {
        return Err(CoreError::Domain("x must be at least 1".into()));
    }
    Ok(())
}

/// No caching, scheme A: `(4x²/(4x−1), (4x−1)/(4x))`.
pub fn theory_pudof_eq1(x: usize) -> Result<(ExactScalar, ExactScalar)> {
    positive(x)?;
    let mt = q(4 * x * x) / q(4 * x - 1);
    let d = q(4 * x - 1) / q(4 * x);
    Ok((mt, d))
}

/// No caching, scheme B: `((x+1)/2, 2x/(2x+1))`.
pub fn theory_pudof_eq2(x: usize) -> Result<(ExactScalar, ExactScalar)> {
    positive(x)?;
    let mt = q(x + 1) / q(2);
    let d = q(2 * x) / q(2 * x + 1);
    Ok((mt, d))
}

/// Backhaul of the cache-aided scheme at `γ = 1/(2x+1)`: `(1−γ²)/(4γ)`.
///
/// `γ = 1` (nothing left to deliver) gives 0.
pub fn theory_backhaul_cached_odd(gamma: &ExactScalar) -> Result<ExactScalar> {
    match gamma.unit_fraction_denominator() {
        Some(s) if s % 2 == 1 => {
            let one = ExactScalar::one();
            Ok((&one - &(gamma * gamma)) / (q(4) * gamma))
        }
        _ => Err(CoreError::Domain(format!("gamma = {gamma} is not 1/(2x+1)"))),
    }
}

/// Backhaul reaching full puDoF at `γ = 1/(2x)`: `1/(4γ) = x/2`.
pub fn theory_backhaul_cached_even(gamma: &ExactScalar) -> Result<ExactScalar> {
    match gamma.unit_fraction_denominator() {
        Some(s) if s % 2 == 0 => Ok((q(4) * gamma).inv()?),
        _ => Err(CoreError::Domain(format!("gamma = {gamma} is not 1/(2x)"))),
    }
}

/// Trading the no-cache scheme A point for a small cache.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorollaryPoint {
    pub mt_before: ExactScalar,
    pub gamma: ExactScalar,
    pub mt_after: ExactScalar,
}

/// `(4x²/(4x−1), 1/(4x), x)`: a cache of `γ = 1/(4x)` lifts the puDoF from
/// `1−γ` to 1 while the backhaul shrinks by the factor `1−γ`.
pub fn corollary_transform(x: usize) -> Result<CorollaryPoint> {
    let (mt_before, d_before) = theory_pudof_eq1(x)?;
    let gamma = q(1) / q(4 * x);
    let mt_after = q(x);
    let one = ExactScalar::one();
    if mt_after != (&one - &gamma) * &mt_before {
        return Err(CoreError::Domain(format!("backhaul identity fails at x = {x}")));
    }
    if &d_before + &gamma != one || theory_backhaul_cached_even(&gamma)? != mt_after {
        return Err(CoreError::Domain(format!("full puDoF not reached at x = {x}")));
    }
    Ok(CorollaryPoint {
        mt_before,
        gamma,
        mt_after,
    })
}

/// `(backhaul in files, puDoF)` predicted for a directly supported scheme.
/// For the cached scheme `x` is the one with `γ = 1/(2x+1)`.
pub fn theory_point(scheme: SchemeTag, x: usize) -> Result<(ExactScalar, ExactScalar)> {
    match scheme {
        SchemeTag::Cached => {
            let gamma = q(1) / q(2 * x + 1);
            Ok((theory_backhaul_cached_odd(&gamma)?, ExactScalar::one()))
        }
        SchemeTag::NocacheA => theory_pudof_eq1(x),
        SchemeTag::NocacheB => theory_pudof_eq2(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> ExactScalar {
        ExactScalar::ratio(n, d)
    }

    #[test]
    fn no_cache_points() {
        assert_eq!(theory_pudof_eq1(1).unwrap(), (r(4, 3), r(3, 4)));
        assert_eq!(theory_pudof_eq1(2).unwrap(), (r(16, 7), r(7, 8)));
        assert_eq!(theory_pudof_eq1(4).unwrap(), (r(64, 15), r(15, 16)));
        assert_eq!(theory_pudof_eq2(4).unwrap(), (r(5, 2), r(8, 9)));
        assert_eq!(theory_pudof_eq2(2).unwrap(), (r(3, 2), r(4, 5)));
        assert!(theory_pudof_eq1(0).is_err());
        assert!(theory_pudof_eq2(0).is_err());
    }

    #[test]
    fn integer_backhaul_of_scheme_b() {
        for m in 1..=10i64 {
            let (mt, d) = theory_pudof_eq2((2 * m - 1) as usize).unwrap();
            assert_eq!(mt, r(m, 1));
            assert_eq!(d, r(4 * m - 2, 4 * m - 1));
        }
    }

    #[test]
    fn cached_backhaul() {
        assert_eq!(theory_backhaul_cached_odd(&r(1, 5)).unwrap(), r(6, 5));
        assert_eq!(theory_backhaul_cached_odd(&r(1, 3)).unwrap(), r(2, 3));
        assert_eq!(theory_backhaul_cached_odd(&r(1, 7)).unwrap(), r(12, 7));
        assert_eq!(theory_backhaul_cached_odd(&r(1, 1)).unwrap(), r(0, 1));
        assert!(theory_backhaul_cached_odd(&r(1, 6)).is_err());
        assert_eq!(theory_backhaul_cached_even(&r(1, 6)).unwrap(), r(3, 2));
        assert_eq!(theory_backhaul_cached_even(&r(1, 8)).unwrap(), r(2, 1));
        assert_eq!(theory_backhaul_cached_even(&r(1, 4)).unwrap(), r(1, 1));
        assert!(theory_backhaul_cached_even(&r(3, 8)).is_err());
    }

    #[test]
    fn corollary_points() {
        let c = corollary_transform(2).unwrap();
        assert_eq!((c.mt_before, c.gamma, c.mt_after), (r(16, 7), r(1, 8), r(2, 1)));
        let c = corollary_transform(1).unwrap();
        assert_eq!((c.mt_before, c.gamma, c.mt_after), (r(4, 3), r(1, 4), r(1, 1)));
        let c = corollary_transform(3).unwrap();
        assert_eq!((c.mt_before, c.gamma, c.mt_after), (r(36, 11), r(1, 12), r(3, 1)));
    }
}
