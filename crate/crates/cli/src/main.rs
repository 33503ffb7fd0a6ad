use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use wyner_core::experiment::WindowPolicy;
use wyner_core::net::ExactScalar;
use wyner_cli::{cmd_simulate, cmd_sweep, cmd_transcript, RunConfig, SchemeName};

#[derive(Parser)]
#[command(name = "wynersim", version, about = "Delivery schemes on the Wyner network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build caches and schedule, run the delivery and write result.json.
    Simulate(Overrides),
    /// Write fig3.csv and fig4.csv for a grid of (M_T, gamma).
    Sweep(Overrides),
    /// Print the slot-by-slot symbolic transcript.
    Transcript(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<SchemeName>,
    #[arg(long)]
    k: Option<usize>,
    /// Cache fraction as "p/q".
    #[arg(long)]
    gamma: Option<ExactScalar>,
    #[arg(long)]
    x: Option<usize>,
    /// Integer backhaul load for memory sharing.
    #[arg(long)]
    mt: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    files: Option<usize>,
    #[arg(long)]
    file_bits: Option<usize>,
    /// Measure over every receiver instead of the interior window.
    #[arg(long)]
    all_receivers: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also emit the transcript (simulate).
    #[arg(long)]
    transcript: bool,
    /// Simulate selected sweep points end to end.
    #[arg(long)]
    verify_grid: bool,
    /// Comma-separated M_T list for sweeps.
    #[arg(long, value_delimiter = ',')]
    mt_list: Option<Vec<u64>>,
    /// Comma-separated gamma grid for sweeps ("p/q" or decimals).
    #[arg(long, value_delimiter = ',')]
    gamma_grid: Option<Vec<ExactScalar>>,
}

impl Overrides {
    fn resolve(self) -> anyhow::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(k) = self.k {
            c.k = k;
        }
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if self.scheme.is_some() {
            c.scheme = self.scheme;
        }
        if self.gamma.is_some() {
            c.gamma = self.gamma;
        }
        if self.x.is_some() {
            c.x = self.x;
        }
        if self.mt.is_some() {
            c.mt = self.mt;
        }
        if self.files.is_some() {
            c.files = self.files;
        }
        if self.file_bits.is_some() {
            c.file_bits = self.file_bits;
        }
        if self.out.is_some() {
            c.out = self.out;
        }
        if let Some(v) = self.mt_list {
            c.mt_list = v;
        }
        if self.gamma_grid.is_some() {
            c.gamma_grid = self.gamma_grid;
        }
        if self.all_receivers {
            c.window = WindowPolicy::All;
        }
        c.transcript |= self.transcript;
        c.verify_grid |= self.verify_grid;
        Ok(c)
    }

    /// Resolves and checks that the result describes a runnable delivery.
    fn resolve_run(self) -> anyhow::Result<RunConfig> {
        let c = self.resolve()?;
        c.run_spec()?;
        Ok(c)
    }
}

fn fail(kind: &str, err: &anyhow::Error) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": format!("{err:#}") }));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(o) => {
            let config = match o.resolve_run() {
                Ok(c) => c,
                Err(e) => return fail("config", &e),
            };
            match cmd_simulate(&config) {
                Ok(out) => {
                    if config.out.is_none() {
                        println!("{}", serde_json::to_string_pretty(&out.record).expect("serializable"));
                        if let Some(t) = &out.transcript {
                            print!("{t}");
                        }
                    }
                    for f in &out.record.failures {
                        eprintln!(
                            "failure: part {}, slot {}, receiver {}: {}",
                            f.part, f.slot, f.receiver, f.reason
                        );
                    }
                    for (name, v) in &out.record.invariants {
                        if v != "pass" {
                            eprintln!("invariant {name}: {v}");
                        }
                    }
                    if out.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail("simulate", &e),
            }
        }
        Command::Sweep(o) => {
            let config = match o.resolve() {
                Ok(c) => c,
                Err(e) => return fail("config", &e),
            };
            match cmd_sweep(&config) {
                Ok(out) => {
                    println!(
                        "wrote {} fig3 rows and {} fig4 rows to {}",
                        out.fig3.len(),
                        out.fig4.len(),
                        out.dir.display()
                    );
                    for c in &out.checks {
                        println!(
                            "verify M_T={} gamma={}: predicted {} measured {} [{}]",
                            c.mt,
                            c.gamma,
                            c.predicted,
                            c.measured,
                            if c.passed { "pass" } else { "fail" }
                        );
                    }
                    if out.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail("sweep", &e),
            }
        }
        Command::Transcript(o) => {
            let config = match o.resolve_run() {
                Ok(c) => c,
                Err(e) => return fail("config", &e),
            };
            match cmd_transcript(&config) {
                Ok(t) => {
                    print!("{t}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail("transcript", &e),
            }
        }
    }
}
