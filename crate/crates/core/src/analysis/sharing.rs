//! Memory sharing between directly supported operating points.

use serde::{Deserialize, Serialize};

use super::theory::{theory_backhaul_cached_odd, theory_pudof_eq2};
use crate::error::{CoreError, Result};
use crate::net::ExactScalar;

fn q(n: usize) -> ExactScalar {
    ExactScalar::from(n)
}

/// `γ = p·γ1 + (1−p)·γ2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorySplit {
    pub p: ExactScalar,
    pub gamma: ExactScalar,
    pub gamma1: ExactScalar,
    pub gamma2: ExactScalar,
}

impl MemorySplit {
    /// File-size fractions of the two parts.
    pub fn fractions(&self) -> [ExactScalar; 2] {
        [self.p.clone(), ExactScalar::one() - &self.p]
    }
}

pub fn memory_share_split(
    gamma: &ExactScalar,
    gamma1: &ExactScalar,
    gamma2: &ExactScalar,
) -> Result<MemorySplit> {
    if gamma1 == gamma2 {
        return Err(CoreError::Domain("gamma1 and gamma2 coincide".into()));
    }
    let (lo, hi) = if gamma2 < gamma1 {
        (gamma2, gamma1)
    } else {
        (gamma1, gamma2)
    };
    if gamma < lo || gamma > hi {
        return Err(CoreError::Domain(format!(
            "gamma = {gamma} outside [{lo}, {hi}]"
        )));
    }
    let p = (gamma - gamma2) / (gamma1 - gamma2);
    Ok(MemorySplit {
        p,
        gamma: gamma.clone(),
        gamma1: gamma1.clone(),
        gamma2: gamma2.clone(),
    })
}

/// Split of `γ = 1/(2x)` between the neighbouring odd points
/// `1/(2x−1)` and `1/(2x+1)`; `p = (2x−1)/(4x)`.
pub fn even_gamma_split(x: usize) -> Result<MemorySplit> {
    if x == 0 {
        return Err(CoreError::Domain("x must be at least 1".into()));
    }
    memory_share_split(
        &(q(1) / q(2 * x)),
        &(q(1) / q(2 * x - 1)),
        &(q(1) / q(2 * x + 1)),
    )
}

/// Backhaul of the even-γ split, `p·B(γ1) + (1−p)·B(γ2)` with `B` the odd
/// cached backhaul.
pub fn even_gamma_backhaul(x: usize) -> Result<ExactScalar> {
    let split = even_gamma_split(x)?;
    let [p1, p2] = split.fractions();
    Ok(p1 * theory_backhaul_cached_odd(&split.gamma1)?
        + p2 * theory_backhaul_cached_odd(&split.gamma2)?)
}

/// `d(M_T, 0)` for integer `M_T`, from scheme B with `x = 2M_T − 1`.
pub fn no_cache_pudof_integer(mt: u64) -> Result<ExactScalar> {
    if mt == 0 {
        return Err(CoreError::Domain("M_T must be a positive integer".into()));
    }
    Ok(theory_pudof_eq2(2 * mt as usize - 1)?.1)
}

/// puDoF at integer backhaul `M_T` and cache `γ`, mixing the full-puDoF
/// point `γ1 = 1/(4M_T)` with the no-cache point.
pub fn memory_share_pudof(mt: u64, gamma: &ExactScalar) -> Result<ExactScalar> {
    if gamma.is_negative() {
        return Err(CoreError::Domain(format!("negative gamma {gamma}")));
    }
    let d0 = no_cache_pudof_integer(mt)?;
    let gamma1 = q(1) / ExactScalar::from(4 * mt);
    if *gamma >= gamma1 {
        return Ok(ExactScalar::one());
    }
    let one = ExactScalar::one();
    let p = ExactScalar::from(4 * mt) * gamma;
    let delivery = &p * &(&one - &gamma1) + (&one - &p) / d0;
    Ok((&one - gamma) / delivery)
}

/// The three directly simulable parts behind [`memory_share_pudof`] for
/// `γ < 1/(4M_T)`: cached at `1/(4M_T−1)`, cached at `1/(4M_T+1)` and no
/// caching with scheme B at `x = 2M_T−1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeWaySplit {
    pub outer: MemorySplit,
    pub inner: MemorySplit,
    /// File fractions of the three parts in the order above.
    pub fractions: [ExactScalar; 3],
    pub cached_x: [usize; 2],
    pub nocache_x: usize,
}

pub fn memory_share_parts(mt: u64, gamma: &ExactScalar) -> Result<ThreeWaySplit> {
    if mt == 0 {
        return Err(CoreError::Domain("M_T must be a positive integer".into()));
    }
    let two_m = 2 * mt as usize;
    let gamma1 = q(1) / q(2 * two_m);
    if *gamma >= gamma1 {
        return Err(CoreError::Domain(format!(
            "gamma = {gamma} already reaches full puDoF at M_T = {mt}"
        )));
    }
    let outer = memory_share_split(gamma, &gamma1, &ExactScalar::zero())?;
    let inner = even_gamma_split(two_m)?;
    let fractions = [
        &outer.p * &inner.p,
        &outer.p * &(ExactScalar::one() - &inner.p),
        ExactScalar::one() - &outer.p,
    ];
    Ok(ThreeWaySplit {
        outer,
        inner,
        fractions,
        cached_x: [two_m - 1, two_m],
        nocache_x: two_m - 1,
    })
}

/// Whole-bit part sizes for splitting an `F`-bit file by `fractions`, each
/// part on its own subpacketization grid.
///
/// Parts after the first take `S_i·⌊f_i·F/S_i⌋` bits; the first takes the
/// residue, padded with zero bits up to a multiple of `S_1`. Returns
/// `(sizes, padding)`; sizes sum to `F + padding`.
pub fn part_sizes(
    file_bits: usize,
    fractions: &[ExactScalar],
    subpackets: &[usize],
) -> Result<(Vec<usize>, usize)> {
    if fractions.len() != subpackets.len() || fractions.is_empty() {
        return Err(CoreError::Shape {
            what: "part fractions",
            expected: subpackets.len(),
            got: fractions.len(),
        });
    }
    let total: ExactScalar = fractions.iter().sum();
    if !total.is_one() || fractions.iter().any(ExactScalar::is_negative) {
        return Err(CoreError::Domain("part fractions must be nonnegative and sum to 1".into()));
    }
    let f = ExactScalar::from(file_bits);
    let mut sizes = vec![0; fractions.len()];
    for i in 1..fractions.len() {
        let s = subpackets[i];
        let units = (&fractions[i] * &f / ExactScalar::from(s))
            .floor()
            .try_into()
            .map_err(|_| CoreError::Domain("part size overflow".into()))?;
        let units: usize = units;
        sizes[i] = units * s;
    }
    let rest = file_bits - sizes[1..].iter().sum::<usize>();
    let s1 = subpackets[0];
    sizes[0] = rest.div_ceil(s1) * s1;
    Ok((sizes.clone(), sizes[0] - rest))
}
