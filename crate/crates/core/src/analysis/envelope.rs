//! Cache-free backhaul needed for a target puDoF, and the figure tables.

use serde::{Deserialize, Serialize};

use super::sharing::memory_share_pudof;
use super::theory::{theory_pudof_eq1, theory_pudof_eq2};
use crate::error::{CoreError, Result};
use crate::net::ExactScalar;

pub const DEFAULT_ENVELOPE_X_MAX: usize = 64;

/// `(M_T, d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub mt: ExactScalar,
    pub d: ExactScalar,
}

/// Lower convex envelope of `M_T` as a function of `d` over the origin and
/// both no-cache families for `x = 1..=x_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NocacheEnvelope {
    vertices: Vec<TradeoffPoint>,
}

/// Result of inverting the envelope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalentLoad {
    pub mt: ExactScalar,
    /// `d` lies beyond the last vertex; `mt` is the ceiling value.
    pub saturated: bool,
}

fn cross(o: &TradeoffPoint, a: &TradeoffPoint, b: &TradeoffPoint) -> ExactScalar {
    (&a.d - &o.d) * (&b.mt - &o.mt) - (&a.mt - &o.mt) * (&b.d - &o.d)
}

impl NocacheEnvelope {
    pub fn new(x_max: usize) -> Result<Self> {
        if x_max == 0 {
            return Err(CoreError::Domain("envelope needs x_max ≥ 1".into()));
        }
        let mut points = vec![TradeoffPoint {
            mt: ExactScalar::zero(),
            d: ExactScalar::zero(),
        }];
        for x in 1..=x_max {
            for (mt, d) in [theory_pudof_eq1(x)?, theory_pudof_eq2(x)?] {
                points.push(TradeoffPoint { mt, d });
            }
        }
        points.sort_by(|a, b| a.d.cmp(&b.d).then(a.mt.cmp(&b.mt)));
        points.dedup_by(|b, a| a.d == b.d);

        // Andrew's monotone chain, lower half.
        let mut hull: Vec<TradeoffPoint> = Vec::new();
        for p in points {
            while hull.len() >= 2
                && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) <= ExactScalar::zero()
            {
                hull.pop();
            }
            hull.push(p);
        }
        Ok(Self { vertices: hull })
    }

    pub fn vertices(&self) -> &[TradeoffPoint] {
        &self.vertices
    }

    pub fn max_pudof(&self) -> &ExactScalar {
        &self.vertices.last().expect("envelope has vertices").d
    }

    /// Smallest cache-free `M_T` reaching puDoF `d`, by linear
    /// interpolation between envelope vertices.
    pub fn equivalent_mt(&self, d: &ExactScalar) -> Result<EquivalentLoad> {
        if d.is_negative() {
            return Err(CoreError::Domain(format!("negative puDoF {d}")));
        }
        let last = self.vertices.last().expect("envelope has vertices");
        if *d > last.d {
            return Ok(EquivalentLoad {
                mt: last.mt.clone(),
                saturated: true,
            });
        }
        for w in self.vertices.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if *d <= b.d {
                let t = (d - &a.d) / (&b.d - &a.d);
                return Ok(EquivalentLoad {
                    mt: &a.mt + &(t * (&b.mt - &a.mt)),
                    saturated: false,
                });
            }
        }
        Ok(EquivalentLoad {
            mt: last.mt.clone(),
            saturated: false,
        })
    }

    /// puDoF reachable without caches at backhaul `mt` (inverse direction).
    pub fn pudof_at(&self, mt: &ExactScalar) -> ExactScalar {
        let last = self.vertices.last().expect("envelope has vertices");
        if *mt >= last.mt {
            return last.d.clone();
        }
        for w in self.vertices.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if *mt <= b.mt {
                let t = (mt - &a.mt) / (&b.mt - &a.mt);
                return &a.d + &(t * (&b.d - &a.d));
            }
        }
        last.d.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fig3Row {
    pub mt: u64,
    pub gamma: ExactScalar,
    pub pudof: ExactScalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fig4Row {
    pub mt: u64,
    pub gamma: ExactScalar,
    pub pudof: ExactScalar,
    pub equivalent_nocache_mt: ExactScalar,
    pub saturated: bool,
}

/// `γ = 0, 1/240, …, 72/240 = 0.3`.
pub fn default_gamma_grid() -> Vec<ExactScalar> {
    (0..=72).map(|i| ExactScalar::ratio(i, 240)).collect()
}

pub fn default_mt_list() -> Vec<u64> {
    vec![1, 2, 3]
}

pub fn figure3_data(mts: &[u64], gammas: &[ExactScalar]) -> Result<Vec<Fig3Row>> {
    let mut rows = Vec::with_capacity(mts.len() * gammas.len());
    for &mt in mts {
        for gamma in gammas {
            rows.push(Fig3Row {
                mt,
                gamma: gamma.clone(),
                pudof: memory_share_pudof(mt, gamma)?,
            });
        }
    }
    Ok(rows)
}

pub fn figure4_data(
    mts: &[u64],
    gammas: &[ExactScalar],
    envelope: &NocacheEnvelope,
) -> Result<Vec<Fig4Row>> {
    let mut rows = Vec::with_capacity(mts.len() * gammas.len());
    for &mt in mts {
        for gamma in gammas {
            let pudof = memory_share_pudof(mt, gamma)?;
            let eq = envelope.equivalent_mt(&pudof)?;
            rows.push(Fig4Row {
                mt,
                gamma: gamma.clone(),
                pudof,
                equivalent_nocache_mt: eq.mt,
                saturated: eq.saturated,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> ExactScalar {
        ExactScalar::ratio(n, d)
    }

    #[test]
    fn envelope_is_convex_and_increasing() {
        let env = NocacheEnvelope::new(DEFAULT_ENVELOPE_X_MAX).unwrap();
        let v = env.vertices();
        assert!(v[0].mt.is_zero() && v[0].d.is_zero());
        for w in v.windows(2) {
            assert!(w[1].d > w[0].d && w[1].mt > w[0].mt);
        }
        for w in v.windows(3) {
            assert!(cross(&w[0], &w[1], &w[2]) > ExactScalar::zero());
        }
        assert_eq!(v.last().unwrap().mt, r(16384, 255));
    }

    #[test]
    fn identity_on_integer_loads() {
        let env = NocacheEnvelope::new(DEFAULT_ENVELOPE_X_MAX).unwrap();
        for mt in 1..=3u64 {
            let d = memory_share_pudof(mt, &ExactScalar::zero()).unwrap();
            let eq = env.equivalent_mt(&d).unwrap();
            assert_eq!(eq.mt, ExactScalar::from(mt));
            assert!(!eq.saturated);
        }
        let top = env.max_pudof().clone();
        assert!(env.equivalent_mt(&(top + r(1, 10_000_000))).unwrap().saturated);
    }

    #[test]
    fn grid_contains_quarter_inverse_points() {
        let g = default_gamma_grid();
        assert_eq!(g.len(), 73);
        assert_eq!(g.last().unwrap(), &r(3, 10));
        for mt in 1..=3 {
            assert!(g.contains(&r(1, 4 * mt)));
        }
    }
}
