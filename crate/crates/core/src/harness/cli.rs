//! `rideshare generate | run | compare | sweep`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::report::{self, rows_csv, to_json, write_file, Summary};
use super::{compare, instance, network, run_one, save_instance, sweep, HarnessError, RunConfig, SweepCase};
use crate::harness::gen::save_network;

macro_rules! overrides {
    ($($field:ident : $ty:ty),* $(,)?) => {
        /// Command-line overrides, one per config key.
        #[derive(Args, Clone, Debug, Default)]
        pub struct ConfigArgs {
            /// TOML file with any of the keys below.
            #[arg(long)]
            pub config: Option<PathBuf>,
            $(
                #[arg(long)]
                pub $field: Option<$ty>,
            )*
        }

        impl ConfigArgs {
            fn apply(&self, cfg: &mut RunConfig) {
                $(
                    if let Some(v) = &self.$field {
                        cfg.$field = v.clone();
                    }
                )*
            }
        }
    };
}

overrides! {
    seed: u64,
    matcher: String,
    alpha: f64,
    speed: f64,
    batch_seconds: u64,
    tick_seconds: u64,
    horizon_seconds: u64,
    cache_capacity: usize,
    population_size: usize,
    generation_limit: usize,
    elite_count: usize,
    hybrid_ratio: f64,
    rollback: bool,
    mutation_probability: f64,
    initial_temperature: f64,
    cooling_rate: f64,
    iterations_per_temperature: usize,
    min_temperature: f64,
    drivers: usize,
    riders: usize,
    capacity: u32,
    driver_slack: f64,
    rider_slack: f64,
    rate_multiplier: f64,
    profile: String,
    grid: usize,
    grid_min_weight: f64,
    grid_max_weight: f64,
}

impl ConfigArgs {
    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> Result<RunConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        self.apply(&mut cfg);
        Ok(cfg)
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct NetArgs {
    /// Node file (`id lat lon`). Without it a grid is generated.
    #[arg(long)]
    pub network_nodes: Option<PathBuf>,
    /// Edge file (`u v w`).
    #[arg(long)]
    pub network_edges: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
pub struct RunArgs {
    /// Instance file; generated from the config when omitted.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub cfg: ConfigArgs,
}

#[derive(Args, Clone, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Initialisation ratios to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [0.85, 1.0])]
    pub hybrid_ratios: Vec<f64>,
    /// Rollback settings to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [true, false])]
    pub rollbacks: Vec<bool>,
}

#[derive(Subcommand, Clone, Debug)]
pub enum Command {
    /// Write an instance (and the grid network, if one is built).
    Generate(RunArgs),
    /// Simulate one matcher; writes JSON, CSV and an event log.
    Run(RunArgs),
    /// Simulate all four matchers on the same instance and seed.
    Compare(RunArgs),
    /// Simulate BBO over a grid of parameter cases.
    Sweep(SweepArgs),
}

#[derive(Parser, Clone, Debug)]
#[command(name = "rideshare", version, about = "Batch ridesharing simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

struct Loaded {
    cfg: RunConfig,
    net: crate::roadnet::RoadNetwork,
    inst: super::Instance,
}

fn load(a: &RunArgs) -> Result<Loaded, HarnessError> {
    let cfg = a.cfg.resolve()?;
    cfg.matcher_kind()?;
    let net = network(&cfg, a.net.network_nodes.as_deref(), a.net.network_edges.as_deref())?;
    let inst = instance(&cfg, &net, a.instance.as_deref())?;
    Ok(Loaded { cfg, net, inst })
}

fn io_err(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Report(report::ReportError::Write {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn print_summaries(rows: &[Summary]) {
    println!(
        "{:<8} {:>7} {:>9} {:>14} {:>12} {:>10} {:>9}",
        "matcher", "M_R", "matched", "overhead_sum", "overhead_avg", "delay_avg", "cost"
    );
    for r in rows {
        println!(
            "{:<8} {:>7.4} {:>9} {:>14.1} {:>12.1} {:>10.2} {:>9.5}",
            r.label,
            r.matching_rate.unwrap_or(f64::NAN),
            r.matched,
            r.overhead_sum,
            r.overhead_mean,
            r.delay_mean,
            r.cost.unwrap_or(f64::NAN)
        );
    }
}

/// Executes a parsed command, returning the files written.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>, HarnessError> {
    match &cli.command {
        Command::Generate(a) => {
            let l = load(a)?;
            std::fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
            let mut written = vec![a.out.join("instance.txt")];
            save_instance(&l.inst, &written[0])?;
            if a.net.network_nodes.is_none() {
                let (n, e) = (a.out.join("nodes.txt"), a.out.join("edges.txt"));
                save_network(&l.net, &n, &e).map_err(|err| io_err(&n, err))?;
                written.extend([n, e]);
            }
            let cfg_path = a.out.join("config.toml");
            write_file(&cfg_path, &l.cfg.to_toml())?;
            written.push(cfg_path);
            Ok(written)
        }
        Command::Run(a) => {
            let l = load(a)?;
            let kind = l.cfg.matcher_kind()?;
            let r = run_one(&l.cfg, kind, &l.inst, &l.net)?;
            print_summaries(&[Summary::of(kind.name(), &r)]);
            for d in &r.defects {
                eprintln!("defect: {d}");
            }
            Ok(report::write_run(&r, &a.out, kind.name())?)
        }
        Command::Compare(a) => {
            let l = load(a)?;
            let reports = compare(&l.cfg, &l.inst, &l.net)?;
            let rows: Vec<_> = reports.iter().map(|r| Summary::of(&r.matcher, r)).collect();
            print_summaries(&rows);
            let (csv, json) = (a.out.join("compare.csv"), a.out.join("compare.json"));
            write_file(&csv, &rows_csv(&rows))?;
            write_file(&json, &to_json(&reports))?;
            Ok(vec![csv, json])
        }
        Command::Sweep(s) => {
            let l = load(&s.run)?;
            let mut cases = Vec::new();
            for &hybrid_ratio in &s.hybrid_ratios {
                for &rollback in &s.rollbacks {
                    cases.push(SweepCase {
                        population_size: l.cfg.population_size,
                        generation_limit: l.cfg.generation_limit,
                        hybrid_ratio,
                        elite_count: l.cfg.elite_count,
                        rollback,
                        alpha: l.cfg.alpha,
                    });
                }
            }
            let rows = sweep(&l.cfg, &cases, &l.inst, &l.net)?;
            for r in &rows {
                println!(
                    "case {} H={} RB={} overhead={:.1} M_R={:.4} cost={:.5}",
                    r.case,
                    r.hybrid_ratio,
                    r.rollback,
                    r.overhead_sum,
                    r.matching_rate.unwrap_or(f64::NAN),
                    r.cost.unwrap_or(f64::NAN)
                );
            }
            let csv = s.run.out.join("sweep.csv");
            write_file(&csv, &rows_csv(&rows))?;
            Ok(vec![csv])
        }
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code: 0 on success, 2 on usage errors, 1 otherwise.
pub fn cli_run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(HarnessError::Config(e)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
