//! End-to-end runs: placement, schedule, reception, decoding and metrics,
//! for a single scheme or a memory-sharing mixture of several.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    even_gamma_split, memory_share_parts, measure_backhaul, part_sizes, theory_backhaul_cached_odd,
    theory_pudof_eq1, theory_pudof_eq2, BackhaulLoad, Metrics,
};
use crate::decode::{
    check_cache_resolvable, check_zero_forcing, run_delivery, DecodeReport, LocatedFailure,
    ZfScope, ZfViolation,
};
use crate::error::{CoreError, Result};
use crate::net::{sample_channels, DemandMap, ExactScalar, LibraryConfig, NetworkConfig};
use crate::placement::{place_caches, Bits, CacheState, FileStore};
use crate::schedule::{
    build_cached_schedule, build_nocache_a, build_nocache_b, Intent, Schedule, SchemeTag,
};
use crate::window::Window;

/// One directly supported delivery scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", content = "x", rename_all = "kebab-case")]
pub enum PartScheme {
    /// Cache-aided at `γ = 1/(2x+1)`; `x = 0` caches the whole part.
    Cached(usize),
    NocacheA(usize),
    NocacheB(usize),
}

impl PartScheme {
    pub fn subpackets(&self) -> usize {
        match *self {
            PartScheme::Cached(x) => 2 * x + 1,
            PartScheme::NocacheA(x) => 4 * x - 1,
            PartScheme::NocacheB(x) => 2 * x,
        }
    }

    pub fn gamma(&self) -> ExactScalar {
        match *self {
            PartScheme::Cached(x) => ExactScalar::ratio(1, 2 * x as i64 + 1),
            _ => ExactScalar::zero(),
        }
    }

    /// `(backhaul in files, puDoF)`; `None` puDoF for a part with nothing to
    /// deliver.
    pub fn theory(&self) -> Result<(ExactScalar, Option<ExactScalar>)> {
        match *self {
            PartScheme::Cached(0) => Ok((ExactScalar::zero(), None)),
            PartScheme::Cached(_) => Ok((
                theory_backhaul_cached_odd(&self.gamma())?,
                Some(ExactScalar::one()),
            )),
            PartScheme::NocacheA(x) => {
                let (m, d) = theory_pudof_eq1(x)?;
                Ok((m, Some(d)))
            }
            PartScheme::NocacheB(x) => {
                let (m, d) = theory_pudof_eq2(x)?;
                Ok((m, Some(d)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartSpec {
    pub scheme: PartScheme,
    /// Fraction of every file handled by this part.
    pub fraction: ExactScalar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowPolicy {
    Interior,
    All,
    Explicit { lo: usize, hi: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSpec {
    pub k: usize,
    pub files: usize,
    pub file_bits: usize,
    pub seed: u64,
    pub parts: Vec<PartSpec>,
    pub window: WindowPolicy,
}

/// Parts realizing cache size `gamma` at full puDoF: one cached part for
/// `1/(2x+1)`, two for `1/(2x)`.
pub fn full_pudof_parts(gamma: &ExactScalar) -> Result<Vec<PartSpec>> {
    let s = gamma
        .unit_fraction_denominator()
        .ok_or_else(|| CoreError::UnsupportedDirectPlacement(gamma.clone()))? as usize;
    if s % 2 == 1 {
        return Ok(vec![PartSpec {
            scheme: PartScheme::Cached((s - 1) / 2),
            fraction: ExactScalar::one(),
        }]);
    }
    let x = s / 2;
    let split = even_gamma_split(x)?;
    let [p1, p2] = split.fractions();
    Ok(vec![
        PartSpec {
            scheme: PartScheme::Cached(x - 1),
            fraction: p1,
        },
        PartSpec {
            scheme: PartScheme::Cached(x),
            fraction: p2,
        },
    ])
}

/// Parts for integer backhaul `mt` and cache `gamma`: below `1/(4·mt)` the
/// three-way mixture with a cache-free part, at or above it the direct or
/// even-γ full-puDoF parts.
pub fn memory_share_run_parts(mt: u64, gamma: &ExactScalar) -> Result<Vec<PartSpec>> {
    let quarter = ExactScalar::ratio(1, 4 * mt as i64);
    if *gamma >= quarter {
        return full_pudof_parts(gamma);
    }
    if gamma.is_zero() {
        return Ok(vec![PartSpec {
            scheme: PartScheme::NocacheB(2 * mt as usize - 1),
            fraction: ExactScalar::one(),
        }]);
    }
    let split = memory_share_parts(mt, gamma)?;
    let [f1, f2, f3] = split.fractions;
    Ok(vec![
        PartSpec {
            scheme: PartScheme::Cached(split.cached_x[0]),
            fraction: f1,
        },
        PartSpec {
            scheme: PartScheme::Cached(split.cached_x[1]),
            fraction: f2,
        },
        PartSpec {
            scheme: PartScheme::NocacheB(split.nocache_x),
            fraction: f3,
        },
    ])
}

/// Smallest file size (a multiple of it, at least `min_bits`) for which
/// every part size is a whole multiple of its subpacketization.
pub fn exact_file_bits(parts: &[PartSpec], min_bits: usize) -> usize {
    let mut base: u64 = 1;
    for p in parts {
        let s = p.scheme.subpackets() as u64;
        let denom = p.fraction.denom().to_u64().unwrap_or(1);
        let numer = p.fraction.numer().to_u64().unwrap_or(1).max(1);
        base = base.lcm(&(s * denom / numer.gcd(&s)));
    }
    let base = base as usize;
    min_bits.div_ceil(base).max(1) * base
}

#[derive(Debug, Clone)]
pub struct PartRun {
    pub spec: PartSpec,
    pub lib: LibraryConfig,
    pub caches: Vec<CacheState>,
    pub store: FileStore,
    pub schedule: Schedule,
    pub report: DecodeReport,
    pub backhaul: BackhaulLoad,
    pub zf_violations: Vec<ZfViolation>,
    pub unresolvable: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub cfg: NetworkConfig,
    pub demands: DemandMap,
    pub parts: Vec<PartRun>,
    pub padding_bits: usize,
    /// Per transmitter, bits fetched across all parts.
    pub backhaul_bits: Vec<usize>,
    pub metrics: Metrics,
    pub invariants: BTreeMap<String, bool>,
    pub failures: Vec<(usize, LocatedFailure)>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.invariants.values().all(|v| *v) && self.failures.is_empty()
    }

    pub fn exact_split(&self) -> bool {
        self.padding_bits == 0
    }

    pub fn transcript(&self) -> String {
        let mut out = String::new();
        for (i, part) in self.parts.iter().enumerate() {
            if self.parts.len() > 1 {
                out.push_str(&format!(
                    "# part {i}: {:?}, fraction {}\n",
                    part.spec.scheme, part.spec.fraction
                ));
            }
            out.push_str(&part.schedule.transcript());
        }
        out
    }
}

fn split_store(full: &FileStore, sizes: &[usize], subpackets: &[usize]) -> Result<Vec<FileStore>> {
    let mut offset = 0;
    let mut stores = Vec::with_capacity(sizes.len());
    for (&size, &s) in sizes.iter().zip(subpackets) {
        let files: Vec<Bits> = (0..full.lib().files())
            .map(|n| {
                let file = full.file(n);
                let end = (offset + size).min(file.len());
                let mut bits = file[offset.min(end)..end].to_bitvec();
                bits.resize(size, false);
                bits
            })
            .collect();
        stores.push(FileStore::from_files(files, s)?);
        offset += size;
    }
    Ok(stores)
}

pub fn build_schedule(
    scheme: PartScheme,
    cfg: &NetworkConfig,
    lib: &LibraryConfig,
    demands: &DemandMap,
) -> Result<Schedule> {
    match scheme {
        PartScheme::Cached(_) => build_cached_schedule(cfg, lib, &scheme.gamma(), demands),
        PartScheme::NocacheA(x) => build_nocache_a(cfg, lib, x, demands),
        PartScheme::NocacheB(x) => build_nocache_b(cfg, lib, x, demands),
    }
}

/// Within every run of `P` consecutive interior receivers, exactly one is
/// deactivated in every slot.
fn deactivation_pattern_holds(schedule: &Schedule, window: &Window) -> bool {
    let period = match schedule.scheme {
        SchemeTag::Cached => return true,
        SchemeTag::NocacheA => 4 * schedule.x,
        SchemeTag::NocacheB => 2 * schedule.x + 1,
    };
    if window.len() < period {
        return true;
    }
    schedule.slots.iter().all(|slot| {
        (window.lo..=window.hi + 1 - period).all(|start| {
            (start..start + period)
                .filter(|&q| slot.intended[q] == Intent::Deactivated)
                .count()
                == 1
        })
    })
}

pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    if spec.parts.is_empty() {
        return Err(CoreError::InvalidConfig("run has no parts".into()));
    }
    let total: ExactScalar = spec.parts.iter().map(|p| &p.fraction).sum();
    if !total.is_one() {
        return Err(CoreError::InvalidConfig(format!(
            "part fractions sum to {total}, not 1"
        )));
    }
    let k = spec.k;
    let cfg = sample_channels(k, spec.seed)?;
    let demands = DemandMap::worst_case(k, spec.files, spec.seed)?;
    let full = FileStore::random(LibraryConfig::new(spec.files, spec.file_bits, 1)?, spec.seed);

    let fractions: Vec<ExactScalar> = spec.parts.iter().map(|p| p.fraction.clone()).collect();
    let subpackets: Vec<usize> = spec.parts.iter().map(|p| p.scheme.subpackets()).collect();
    let (sizes, padding_bits) = part_sizes(spec.file_bits, &fractions, &subpackets)?;
    let stores = split_store(&full, &sizes, &subpackets)?;

    let mut parts = Vec::with_capacity(spec.parts.len());
    for (pspec, store) in spec.parts.iter().zip(stores) {
        let lib = store.lib();
        let caches = match pspec.scheme {
            PartScheme::Cached(_) => place_caches(k, &lib, &pspec.scheme.gamma(), Some(&store))?,
            _ => (0..k).map(CacheState::empty).collect(),
        };
        let schedule = build_schedule(pspec.scheme, &cfg, &lib, &demands)?;
        let report = run_delivery(&schedule, &cfg, &caches, &demands, Some(&store))?;
        let scope = match pspec.scheme {
            PartScheme::Cached(_) => ZfScope::All,
            _ => ZfScope::ExcludeDeactivated,
        };
        let zf_violations = check_zero_forcing(&schedule, &cfg, scope)?;
        let unresolvable = check_cache_resolvable(&schedule, &cfg, &caches)?;
        let backhaul = measure_backhaul(&schedule, &lib);
        parts.push(PartRun {
            spec: pspec.clone(),
            lib,
            caches,
            store,
            schedule,
            report,
            backhaul,
            zf_violations,
            unresolvable,
        });
    }

    let window = match &spec.window {
        WindowPolicy::All => Window::all(k)?,
        WindowPolicy::Explicit { lo, hi } => {
            if *hi >= k {
                return Err(CoreError::InvalidWindow(format!("hi = {hi} with K = {k}")));
            }
            Window::new(*lo, *hi)?
        }
        WindowPolicy::Interior => {
            let reach = parts
                .iter()
                .filter(|p| !p.schedule.slots.is_empty())
                .map(|p| p.schedule.reach())
                .max()
                .unwrap_or(0);
            Window::interior(k, reach)?
        }
    };

    let backhaul_bits: Vec<usize> = (0..k)
        .map(|t| parts.iter().map(|p| p.backhaul.bits(t)).sum())
        .collect();
    let slot_bits: usize = parts
        .iter()
        .map(|p| p.schedule.slots.len() * p.lib.subfile_bits())
        .sum();
    if slot_bits == 0 {
        return Err(CoreError::Domain("nothing to deliver: every part is fully cached".into()));
    }
    let recovered_bits: usize = parts
        .iter()
        .map(|p| window.iter().map(|q| p.report.recovered_bits(q)).sum::<usize>())
        .sum();
    let measured_pudof =
        ExactScalar::from(recovered_bits) / ExactScalar::from(window.len() * slot_bits);

    let mut theory_backhaul_files = ExactScalar::zero();
    let mut delivered = ExactScalar::zero();
    let mut time = ExactScalar::zero();
    for p in &spec.parts {
        let (m, d) = p.scheme.theory()?;
        theory_backhaul_files += &(&p.fraction * &m);
        if let Some(d) = d {
            let share = &p.fraction * &(ExactScalar::one() - p.scheme.gamma());
            time += &(&share / &d);
            delivered += &share;
        }
    }
    let theory_pudof = delivered / time;

    let interior_bits = || window.iter().map(|t| backhaul_bits[t]);
    let max_bits = interior_bits().max().unwrap_or(0);
    let min_bits = interior_bits().min().unwrap_or(0);
    let mean_bits = ExactScalar::from(window.iter().map(|t| backhaul_bits[t]).sum::<usize>())
        / ExactScalar::from(window.len());
    let metrics = Metrics {
        slots: parts.iter().map(|p| p.schedule.slots.len()).sum(),
        window,
        file_bits: spec.file_bits,
        backhaul_interior_max_bits: max_bits,
        backhaul_interior_min_bits: min_bits,
        backhaul_interior_mean_bits: mean_bits,
        backhaul_global_max_bits: backhaul_bits.iter().copied().max().unwrap_or(0),
        backhaul_interior_files: ExactScalar::from(max_bits) / ExactScalar::from(spec.file_bits),
        measured_pudof,
        theory_pudof,
        theory_backhaul_files,
    };

    let mut failures = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        failures.extend(p.report.failures().into_iter().map(|f| (i, f)));
    }

    let theory_bits = &metrics.theory_backhaul_files * &ExactScalar::from(spec.file_bits);
    let slack: usize = if padding_bits == 0 {
        0
    } else {
        parts.iter().map(|p| p.lib.subfile_bits()).max().unwrap_or(0)
    };
    let rejoined = (0..spec.files).all(|n| {
        let mut whole = Bits::new();
        for p in &parts {
            whole.extend_from_bitslice(p.store.file(n));
        }
        whole.truncate(spec.file_bits);
        whole.as_bitslice() == full.file(n)
    });

    let mut inv = BTreeMap::new();
    inv.insert("zero_forcing".into(), parts.iter().all(|p| p.zf_violations.is_empty()));
    inv.insert("cache_resolvable".into(), parts.iter().all(|p| p.unresolvable.is_empty()));
    inv.insert("no_decode_failures".into(), failures.is_empty());
    inv.insert(
        "no_duplicates".into(),
        parts.iter().all(|p| p.report.duplicates.is_empty()),
    );
    inv.insert(
        "interior_complete".into(),
        parts.iter().all(|p| window.iter().all(|q| p.report.complete[q])),
    );
    inv.insert(
        "bit_exact".into(),
        parts
            .iter()
            .all(|p| window.iter().all(|q| p.report.bit_exact[q] == Some(true))),
    );
    inv.insert("split_consistent".into(), rejoined);
    inv.insert(
        "deactivation_pattern".into(),
        parts.iter().all(|p| deactivation_pattern_holds(&p.schedule, &window)),
    );
    inv.insert(
        "backhaul_within_theory".into(),
        ExactScalar::from(max_bits) <= ExactScalar::from(slack) + ExactScalar::from_integer(theory_bits.ceil()),
    );
    if padding_bits == 0 {
        inv.insert(
            "backhaul_matches_theory".into(),
            ExactScalar::from(max_bits) == theory_bits && max_bits == min_bits,
        );
        inv.insert(
            "pudof_matches_theory".into(),
            metrics.measured_pudof == metrics.theory_pudof,
        );
    }

    Ok(RunOutcome {
        cfg,
        demands,
        parts,
        padding_bits,
        backhaul_bits,
        metrics,
        invariants: inv,
        failures,
    })
}
