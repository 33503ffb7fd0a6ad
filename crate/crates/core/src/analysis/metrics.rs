use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::decode::DecodeReport;
use crate::error::{CoreError, Result};
use crate::net::{ExactScalar, LibraryConfig, SubfileId};
use crate::schedule::Schedule;
use crate::window::Window;

/// Distinct subfiles each transmitter fetches over a whole delivery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackhaulLoad {
    pub per_tx_subfiles: Vec<usize>,
    pub subfile_bits: usize,
}

impl BackhaulLoad {
    pub fn bits(&self, k: usize) -> usize {
        self.per_tx_subfiles[k] * self.subfile_bits
    }

    pub fn max_bits(&self, window: &Window) -> usize {
        window.iter().map(|k| self.bits(k)).max().unwrap_or(0)
    }

    pub fn min_bits(&self, window: &Window) -> usize {
        window.iter().map(|k| self.bits(k)).min().unwrap_or(0)
    }

    pub fn mean_bits(&self, window: &Window) -> ExactScalar {
        let total: usize = window.iter().map(|k| self.bits(k)).sum();
        ExactScalar::from(total) / ExactScalar::from(window.len())
    }
}

/// A subfile fetched for several slots counts once.
pub fn measure_backhaul(schedule: &Schedule, lib: &LibraryConfig) -> BackhaulLoad {
    let per_tx_subfiles = (0..schedule.k)
        .map(|k| {
            schedule
                .slots
                .iter()
                .flat_map(|s| s.fetched_by(k))
                .collect::<BTreeSet<SubfileId>>()
                .len()
        })
        .collect();
    BackhaulLoad {
        per_tx_subfiles,
        subfile_bits: lib.subfile_bits(),
    }
}

/// Average recovered subfiles per windowed receiver divided by the number
/// of slots (each slot carries one subfile-sized symbol per receiver).
pub fn measure_pudof(
    report: &DecodeReport,
    schedule: &Schedule,
    window: &Window,
) -> Result<ExactScalar> {
    if window.hi >= report.recovered.len() {
        return Err(CoreError::InvalidWindow(format!(
            "[{}, {}] exceeds {} receivers",
            window.lo,
            window.hi,
            report.recovered.len()
        )));
    }
    if schedule.slots.is_empty() {
        return Err(CoreError::Domain("schedule has no slots".into()));
    }
    let recovered: usize = window.iter().map(|q| report.recovered[q].len()).sum();
    Ok(ExactScalar::from(recovered)
        / ExactScalar::from(window.len() * schedule.slots.len()))
}

/// Measured and predicted figures of one run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub slots: usize,
    pub window: Window,
    pub file_bits: usize,
    pub backhaul_interior_max_bits: usize,
    pub backhaul_interior_min_bits: usize,
    pub backhaul_interior_mean_bits: ExactScalar,
    pub backhaul_global_max_bits: usize,
    /// Interior maximum in files.
    pub backhaul_interior_files: ExactScalar,
    pub measured_pudof: ExactScalar,
    pub theory_pudof: ExactScalar,
    pub theory_backhaul_files: ExactScalar,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode::run_delivery;
    use crate::net::{sample_channels, DemandMap};
    use crate::placement::CacheState;
    use crate::schedule::SchemeTag;

    #[test]
    fn silent_schedule_measures_zero() {
        let cfg = sample_channels(20, 0).unwrap();
        let lib = LibraryConfig::new(20, 40, 4).unwrap();
        let d = DemandMap::worst_case(20, 20, 0).unwrap();
        let sched = Schedule::silent(SchemeTag::NocacheB, 20, 4, 5);
        let caches: Vec<_> = (0..20).map(CacheState::empty).collect();
        let report = run_delivery(&sched, &cfg, &caches, &d, None).unwrap();
        let w = Window::new(5, 14).unwrap();
        assert!(measure_pudof(&report, &sched, &w).unwrap().is_zero());
        assert_eq!(measure_backhaul(&sched, &lib).max_bits(&w), 0);
        assert!(measure_pudof(&report, &sched, &Window::new(5, 30).unwrap()).is_err());
    }
}
