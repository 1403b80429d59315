//! Command-line front end. Exit codes: 0 success, 1 mission or I/O failure, 2 usage or
//! configuration error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::baseline::run_frontier_mission;
use crate::executor::{run_mission, MissionOptions};
use crate::log::MissionLog;
use crate::scenario::{self, ScenarioConfig};
use crate::summary::{comparison_csv, summary_csv, timing_table, Planner, RunSummary};
use crate::world::WorldModel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    On,
    Off,
}

#[derive(Debug, Parser)]
#[command(name = "bridge-inspect", version, about = "Bridge inspection planning simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Overrides {
    /// Discrepancy distance in meters
    #[arg(long)]
    pub dd: Option<f64>,
    /// Flight-time limit per tour in simulated seconds
    #[arg(long)]
    pub rpt: Option<f64>,
    /// Credit inspections at every flown waypoint
    #[arg(long, value_enum, default_value = "off")]
    pub opportunistic: Toggle,
    /// Voxels kept clear of occupied cells while flying
    #[arg(long, default_value_t = 0)]
    pub clearance: u32,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one mission and write timeline.csv, timing.csv and summary.csv
    Run {
        /// Scenario file, or the name of a bundled scenario
        #[arg(long)]
        scenario: String,
        #[arg(long, value_enum, default_value = "gatsbi")]
        planner: Planner,
        /// Overrides the scenario's seed
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run both planners for each seed and write comparison.csv and summary.csv
    Compare {
        #[arg(long)]
        scenario: String,
        /// Comma-separated seeds
        #[arg(long, value_delimiter = ',', default_value = "1")]
        seeds: Vec<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write the bundled scenario files
    GenWorlds {
        #[arg(long, default_value = "worlds")]
        out: PathBuf,
    },
}

fn apply(config: &mut ScenarioConfig, seed: Option<u64>, o: &Overrides) -> Result<MissionOptions, String> {
    if let Some(s) = seed {
        config.rng_seed = s;
    }
    if let Some(dd) = o.dd {
        if !(dd > 0.0) {
            return Err(format!("--dd must be positive, got {dd}"));
        }
        config.dd = dd;
    }
    if let Some(rpt) = o.rpt {
        if !(rpt > 0.0) {
            return Err(format!("--rpt must be positive, got {rpt}"));
        }
        config.rpt = rpt;
    }
    Ok(MissionOptions {
        clearance: o.clearance,
        opportunistic: o.opportunistic == Toggle::On,
        ..MissionOptions::default()
    })
}

pub fn run_planner(
    planner: Planner,
    world: &WorldModel,
    config: &ScenarioConfig,
    options: MissionOptions,
) -> Result<MissionLog, crate::error::MissionError> {
    match planner {
        Planner::Gatsbi => run_mission(world, config, options),
        Planner::Frontier => run_frontier_mission(world, config, options),
    }
}

fn write(path: &Path, text: &str) -> Result<(), String> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load(spec: &str) -> Result<(WorldModel, ScenarioConfig), i32> {
    scenario::resolve(spec).map_err(|e| {
        eprintln!("error: scenario `{spec}`: {e}");
        EXIT_USAGE
    })
}

fn cmd_run(
    spec: &str,
    planner: Planner,
    seed: Option<u64>,
    out: &Path,
    overrides: &Overrides,
) -> i32 {
    let (world, mut config) = match load(spec) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let options = match apply(&mut config, seed, overrides) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let log = match run_planner(planner, &world, &config, options) {
        Ok(log) => log,
        Err(e) => {
            eprintln!("error: mission failed: {e}");
            return EXIT_FAILURE;
        }
    };
    let summary = RunSummary::from_log(&config.name, planner, config.rng_seed, &log);
    let written = log
        .write_csv(out)
        .map_err(|e| format!("{}: {e}", out.display()))
        .and_then(|_| write(&out.join("summary.csv"), &summary_csv(std::slice::from_ref(&summary))));
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_FAILURE;
    }
    print!("{}", timing_table(std::slice::from_ref(&summary)));
    EXIT_OK
}

fn cmd_compare(spec: &str, seeds: &[u64], out: &Path, overrides: &Overrides) -> i32 {
    let (world, base) = match load(spec) {
        Ok(v) => v,
        Err(code) => return code,
    };
    let mut summaries = Vec::new();
    let mut pairs = Vec::new();
    let mut failed = false;
    for &seed in seeds {
        let mut config = base.clone();
        let options = match apply(&mut config, Some(seed), overrides) {
            Ok(o) => o,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        };
        let mut logs = Vec::new();
        for planner in [Planner::Gatsbi, Planner::Frontier] {
            match run_planner(planner, &world, &config, options) {
                Ok(log) => {
                    summaries.push(RunSummary::from_log(&config.name, planner, seed, &log));
                    let dir = out.join(format!("{}-seed{seed}", planner.as_str()));
                    if let Err(e) = log.write_csv(&dir) {
                        eprintln!("error: {}: {e}", dir.display());
                        return EXIT_FAILURE;
                    }
                    logs.push(log);
                }
                Err(e) => {
                    eprintln!("warning: {} seed {seed} failed: {e}", planner.as_str());
                    summaries.push(RunSummary::failed(&config.name, planner, seed, &e.to_string()));
                    failed = true;
                }
            }
        }
        if let [a, b] = &logs[..] {
            pairs.push((seed, a.clone(), b.clone()));
        }
    }
    let refs: Vec<(u64, &MissionLog, &MissionLog)> = pairs.iter().map(|(s, a, b)| (*s, a, b)).collect();
    let written = write(&out.join("comparison.csv"), &comparison_csv(&refs))
        .and_then(|_| write(&out.join("summary.csv"), &summary_csv(&summaries)));
    if let Err(e) = written {
        eprintln!("error: {e}");
        return EXIT_FAILURE;
    }
    print!("{}", timing_table(&summaries));
    if failed {
        EXIT_FAILURE
    } else {
        EXIT_OK
    }
}

fn cmd_gen_worlds(out: &Path) -> i32 {
    for (name, text) in scenario::BUNDLED {
        let path = out.join(format!("{name}.toml"));
        if let Err(e) = write(&path, text) {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
        println!("{}", path.display());
    }
    EXIT_OK
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match &cli.command {
        Command::Run {
            scenario,
            planner,
            seed,
            out,
            overrides,
        } => cmd_run(scenario, *planner, *seed, out, overrides),
        Command::Compare {
            scenario,
            seeds,
            out,
            overrides,
        } => cmd_compare(scenario, seeds, out, overrides),
        Command::GenWorlds { out } => cmd_gen_worlds(out),
    }
}
