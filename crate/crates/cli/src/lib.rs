//! Configuration handling and the `simulate`, `sweep` and `transcript`
//! commands behind the `wynersim` binary.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wyner_core::analysis::{
    default_gamma_grid, default_mt_list, figure3_data, figure4_data, Fig3Row, Fig4Row, Metrics,
    NocacheEnvelope, DEFAULT_ENVELOPE_X_MAX,
};
use wyner_core::experiment::{
    build_schedule, exact_file_bits, full_pudof_parts, memory_share_run_parts, run, PartScheme,
    PartSpec, RunSpec, WindowPolicy,
};
use wyner_core::net::{sample_channels, DemandMap, ExactScalar, LibraryConfig};

/// Significant digits of every decimal rendering.
pub const DECIMAL_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeName {
    #[serde(rename = "cached")]
    Cached,
    #[serde(rename = "nocache-A")]
    NocacheA,
    #[serde(rename = "nocache-B")]
    NocacheB,
    #[serde(rename = "memory-share")]
    MemoryShare,
}

impl fmt::Display for SchemeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeName::Cached => "cached",
            SchemeName::NocacheA => "nocache-A",
            SchemeName::NocacheB => "nocache-B",
            SchemeName::MemoryShare => "memory-share",
        })
    }
}

impl std::str::FromStr for SchemeName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cached" => Ok(SchemeName::Cached),
            "nocache-A" | "nocache-a" => Ok(SchemeName::NocacheA),
            "nocache-B" | "nocache-b" => Ok(SchemeName::NocacheB),
            "memory-share" => Ok(SchemeName::MemoryShare),
            other => Err(format!(
                "unknown scheme {other:?} (expected cached, nocache-A, nocache-B or memory-share)"
            )),
        }
    }
}

/// One experiment, read from JSON; every field may be overridden by a flag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Option<SchemeName>,
    pub k: usize,
    pub x: Option<usize>,
    pub gamma: Option<ExactScalar>,
    pub mt: Option<u64>,
    /// Library size; defaults to `k` (pairwise-distinct demands).
    pub files: Option<usize>,
    /// File size in bits; defaults to the smallest size that splits exactly.
    pub file_bits: Option<usize>,
    pub seed: u64,
    pub window: WindowPolicy,
    pub out: Option<PathBuf>,
    pub transcript: bool,
    pub mt_list: Vec<u64>,
    pub gamma_grid: Option<Vec<ExactScalar>>,
    pub envelope_x_max: usize,
    pub verify_grid: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: None,
            k: 60,
            x: None,
            gamma: None,
            mt: None,
            files: None,
            file_bits: None,
            seed: 1,
            window: WindowPolicy::Interior,
            out: None,
            transcript: false,
            mt_list: default_mt_list(),
            gamma_grid: None,
            envelope_x_max: DEFAULT_ENVELOPE_X_MAX,
            verify_grid: false,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    fn require_x(&self, scheme: SchemeName) -> Result<usize> {
        match self.x {
            Some(0) => bail!("{scheme} needs x ≥ 1"),
            Some(x) => Ok(x),
            None => bail!("{scheme} needs --x"),
        }
    }

    /// Checks scheme-specific parameters and resolves the parts to run.
    pub fn parts(&self) -> Result<Vec<PartSpec>> {
        let Some(scheme) = self.scheme else {
            bail!("no scheme given (use --scheme)");
        };
        if self.k == 0 {
            bail!("K must be at least 1");
        }
        let one = |scheme| {
            vec![PartSpec {
                scheme,
                fraction: ExactScalar::one(),
            }]
        };
        match scheme {
            SchemeName::Cached => {
                let gamma = match (&self.gamma, self.x) {
                    (Some(g), _) => g.clone(),
                    (None, Some(x)) if x > 0 => ExactScalar::ratio(1, 2 * x as i64 + 1),
                    _ => bail!("cached needs --gamma 1/(2x+1) or --x"),
                };
                match gamma.unit_fraction_denominator() {
                    Some(s) if s % 2 == 1 && s > 1 => {
                        Ok(one(PartScheme::Cached((s as usize - 1) / 2)))
                    }
                    _ => bail!(
                        "gamma = {gamma} is not 1/(2x+1) with x ≥ 1; \
                         use --scheme memory-share for other cache sizes"
                    ),
                }
            }
            SchemeName::NocacheA => Ok(one(PartScheme::NocacheA(self.require_x(scheme)?))),
            SchemeName::NocacheB => Ok(one(PartScheme::NocacheB(self.require_x(scheme)?))),
            SchemeName::MemoryShare => {
                let Some(gamma) = &self.gamma else {
                    bail!("memory-share needs --gamma");
                };
                if gamma.is_negative() || *gamma >= ExactScalar::one() {
                    bail!("gamma = {gamma} outside [0, 1)");
                }
                let parts = match self.mt {
                    Some(0) => bail!("--mt must be a positive integer"),
                    Some(mt) => memory_share_run_parts(mt, gamma),
                    None => full_pudof_parts(gamma),
                };
                parts.map_err(|e| {
                    anyhow::anyhow!(
                        "{e}; memory-share simulates gamma = 1/S, or any gamma below 1/(4·mt) with --mt"
                    )
                })
            }
        }
    }

    pub fn run_spec(&self) -> Result<RunSpec> {
        let parts = self.parts()?;
        let files = self.files.unwrap_or(self.k);
        if files == 0 {
            bail!("library needs at least one file");
        }
        let file_bits = self.file_bits.unwrap_or_else(|| exact_file_bits(&parts, 64));
        if file_bits == 0 {
            bail!("file size must be positive");
        }
        Ok(RunSpec {
            k: self.k,
            files,
            file_bits,
            seed: self.seed,
            parts,
            window: self.window.clone(),
        })
    }

    pub fn gammas(&self) -> Vec<ExactScalar> {
        self.gamma_grid.clone().unwrap_or_else(default_gamma_grid)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub part: usize,
    pub slot: usize,
    pub receiver: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config: RunConfig,
    pub metrics: Metrics,
    pub invariants: BTreeMap<String, String>,
    pub failures: Vec<FailureRecord>,
}

pub struct SimulateOutput {
    pub record: ResultRecord,
    pub transcript: Option<String>,
    pub passed: bool,
}

fn verdict(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

pub fn cmd_simulate(config: &RunConfig) -> Result<SimulateOutput> {
    let spec = config.run_spec()?;
    let outcome = run(&spec)?;
    let failures = outcome
        .failures
        .iter()
        .map(|(part, f)| FailureRecord {
            part: *part,
            slot: f.slot,
            receiver: f.receiver,
            reason: f.failure.to_string(),
        })
        .collect();
    let mut resolved = config.clone();
    resolved.files = Some(spec.files);
    resolved.file_bits = Some(spec.file_bits);
    let record = ResultRecord {
        config: resolved,
        metrics: outcome.metrics.clone(),
        invariants: outcome
            .invariants
            .iter()
            .map(|(k, v)| (k.clone(), verdict(*v)))
            .collect(),
        failures,
    };
    let transcript = config.transcript.then(|| outcome.transcript());
    if let Some(dir) = &config.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let json = serde_json::to_string_pretty(&record)?;
        fs::write(dir.join("result.json"), json + "\n")
            .with_context(|| format!("writing {}", dir.join("result.json").display()))?;
        if let Some(t) = &transcript {
            fs::write(dir.join("transcript.txt"), t)
                .with_context(|| format!("writing {}", dir.join("transcript.txt").display()))?;
        }
    }
    Ok(SimulateOutput {
        record,
        transcript,
        passed: outcome.passed(),
    })
}

/// Slot-by-slot symbolic dump of the configured schedule(s).
pub fn cmd_transcript(config: &RunConfig) -> Result<String> {
    let spec = config.run_spec()?;
    let cfg = sample_channels(spec.k, spec.seed)?;
    let demands = DemandMap::worst_case(spec.k, spec.files, spec.seed)?;
    let mut out = String::new();
    for (i, part) in spec.parts.iter().enumerate() {
        let s = part.scheme.subpackets();
        let lib = LibraryConfig::new(spec.files, s, s)?;
        let schedule = build_schedule(part.scheme, &cfg, &lib, &demands)?;
        if spec.parts.len() > 1 {
            out.push_str(&format!("# part {i}: {:?}, fraction {}\n", part.scheme, part.fraction));
        }
        out.push_str(&schedule.transcript());
    }
    Ok(out)
}

pub const FIG3_HEADER: [&str; 5] = ["mt", "gamma", "gamma_decimal", "pudof", "pudof_decimal"];
pub const FIG4_HEADER: [&str; 5] = ["mt", "gamma", "pudof", "equivalent_nocache_mt", "saturated"];

pub fn fig3_csv(rows: &[Fig3Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FIG3_HEADER)?;
    for r in rows {
        w.write_record([
            r.mt.to_string(),
            r.gamma.to_string(),
            r.gamma.to_decimal(DECIMAL_DIGITS),
            r.pudof.to_string(),
            r.pudof.to_decimal(DECIMAL_DIGITS),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

/// `equivalent_nocache_mt` is an interpolated value written as a decimal;
/// the other value columns are exact.
pub fn fig4_csv(rows: &[Fig4Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FIG4_HEADER)?;
    for r in rows {
        w.write_record([
            r.mt.to_string(),
            r.gamma.to_string(),
            r.pudof.to_string(),
            r.equivalent_nocache_mt.to_decimal(DECIMAL_DIGITS),
            u8::from(r.saturated).to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCheck {
    pub mt: u64,
    pub gamma: ExactScalar,
    pub predicted: ExactScalar,
    pub measured: ExactScalar,
    pub passed: bool,
}

pub struct SweepOutput {
    pub fig3: Vec<Fig3Row>,
    pub fig4: Vec<Fig4Row>,
    pub checks: Vec<GridCheck>,
    pub dir: PathBuf,
}

impl SweepOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Grid points simulated by `--verify-grid`: per `M_T`, the cache-free end,
/// the midpoint and the full-puDoF point, when they lie on the grid.
fn verification_points(mts: &[u64], gammas: &[ExactScalar]) -> Vec<(u64, ExactScalar)> {
    let mut pts = Vec::new();
    for &mt in mts {
        for g in [
            ExactScalar::zero(),
            ExactScalar::ratio(1, 8 * mt as i64),
            ExactScalar::ratio(1, 4 * mt as i64),
        ] {
            if gammas.contains(&g) {
                pts.push((mt, g));
            }
        }
    }
    pts
}

pub fn cmd_sweep(config: &RunConfig) -> Result<SweepOutput> {
    let gammas = config.gammas();
    if gammas.is_empty() || config.mt_list.is_empty() {
        bail!("sweep grids must be nonempty");
    }
    if config.mt_list.contains(&0) {
        bail!("mt_list entries must be positive integers");
    }
    let envelope = NocacheEnvelope::new(config.envelope_x_max)?;
    let fig3 = figure3_data(&config.mt_list, &gammas)?;
    let fig4 = figure4_data(&config.mt_list, &gammas, &envelope)?;
    let dir = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("fig3.csv"), fig3_csv(&fig3)?)
        .with_context(|| format!("writing {}", dir.join("fig3.csv").display()))?;
    fs::write(dir.join("fig4.csv"), fig4_csv(&fig4)?)
        .with_context(|| format!("writing {}", dir.join("fig4.csv").display()))?;

    let mut checks = Vec::new();
    if config.verify_grid {
        for (mt, gamma) in verification_points(&config.mt_list, &gammas) {
            let mut point = config.clone();
            point.scheme = Some(SchemeName::MemoryShare);
            point.mt = Some(mt);
            point.gamma = Some(gamma.clone());
            point.out = None;
            point.transcript = false;
            point.file_bits = None;
            let outcome = run(&point.run_spec()?)?;
            let predicted = fig3
                .iter()
                .find(|r| r.mt == mt && r.gamma == gamma)
                .map(|r| r.pudof.clone())
                .expect("point taken from the grid");
            let measured = outcome.metrics.measured_pudof.clone();
            checks.push(GridCheck {
                mt,
                passed: outcome.passed() && measured == predicted,
                gamma,
                predicted,
                measured,
            });
        }
        let json = serde_json::to_string_pretty(&checks)?;
        fs::write(dir.join("verify_grid.json"), json + "\n")
            .with_context(|| format!("writing {}", dir.join("verify_grid.json").display()))?;
    }
    Ok(SweepOutput {
        fig3,
        fig4,
        checks,
        dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(scheme: SchemeName) -> RunConfig {
        RunConfig {
            scheme: Some(scheme),
            ..RunConfig::default()
        }
    }

    #[test]
    fn cached_rejects_non_odd_gamma() {
        let mut c = cfg(SchemeName::Cached);
        c.gamma = Some(ExactScalar::ratio(2, 7));
        let err = c.parts().unwrap_err().to_string();
        assert!(err.contains("memory-share"), "{err}");
        c.gamma = Some(ExactScalar::ratio(1, 6));
        assert!(c.parts().is_err());
        c.gamma = Some(ExactScalar::ratio(1, 5));
        assert_eq!(c.parts().unwrap()[0].scheme, PartScheme::Cached(2));
    }

    #[test]
    fn missing_parameters() {
        assert!(RunConfig::default().parts().is_err());
        assert!(cfg(SchemeName::NocacheA).parts().is_err());
        assert!(cfg(SchemeName::MemoryShare).parts().is_err());
        let mut c = cfg(SchemeName::MemoryShare);
        c.gamma = Some(ExactScalar::ratio(3, 40));
        // not 1/S, so only the mixture with a cache-free part applies
        assert!(c.parts().is_err());
        c.mt = Some(2);
        assert_eq!(c.parts().unwrap().len(), 3);
        c.gamma = Some(ExactScalar::ratio(1, 10));
        c.mt = None;
        assert_eq!(c.parts().unwrap().len(), 2);
    }

    #[test]
    fn config_json_round_trip() {
        let mut c = cfg(SchemeName::NocacheB);
        c.x = Some(4);
        c.gamma = Some(ExactScalar::ratio(1, 20));
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"nocache-B\"") && text.contains("\"1/20\""));
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), c);
        assert!(serde_json::from_str::<RunConfig>("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn csv_headers() {
        let rows = figure3_data(&[2], &[ExactScalar::ratio(1, 8)]).unwrap();
        let text = fig3_csv(&rows).unwrap();
        assert_eq!(text, "mt,gamma,gamma_decimal,pudof,pudof_decimal\n2,1/8,0.125000000000,1,1.00000000000\n");
    }
}
