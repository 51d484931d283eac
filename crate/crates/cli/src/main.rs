use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use emfsim_core::layout::build_layout;
use emfsim_core::profiles::{builtin_profile, ExposureLimits, Generation};
use emfsim_core::report::{emit_outputs, EmitOptions, Summary, DEFAULT_CDF_POINTS};
use emfsim_core::simulation::{
    distance_sweep, run_drops, with_threads, Policy, RunConfig, SweepConfig, SweepTable,
};

mod config;

use config::{parse_generations, FileConfig};

#[derive(Parser)]
#[command(name = "emfsim", version, about = "Downlink EMF exposure simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo drops: PD/SAR/rate CDFs under the chosen policy.
    Simulate(SimulateArgs),
    /// Mean PD and SAR versus BS-UE distance.
    Sweep(SweepArgs),
    /// Print a built-in profile as TOML.
    Profile {
        #[arg(long, default_value = "5g")]
        profile: String,
    },
    /// Dump the site/sector layout as CSV.
    Layout {
        #[arg(long, default_value = "5g")]
        profile: String,
        #[arg(long)]
        rings: Option<u32>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Baseline,
    Constrained,
    Both,
}

impl PolicyArg {
    fn parse(s: &str) -> Result<Self> {
        <PolicyArg as ValueEnum>::from_str(s, true)
            .map_err(|e| anyhow::anyhow!("invalid policy '{s}': {e}"))
    }

    fn policies(self) -> Vec<Policy> {
        match self {
            PolicyArg::Baseline => vec![Policy::Baseline],
            PolicyArg::Constrained => vec![Policy::Constrained],
            PolicyArg::Both => Policy::ALL.to_vec(),
        }
    }
}

#[derive(Args)]
struct SweepGrid {
    #[arg(long)]
    dmin: Option<f64>,
    #[arg(long)]
    dmax: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Azimuth samples per distance.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML file supplying any of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// PD threshold in W/m².
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    drops: Option<usize>,
    #[arg(long)]
    ues_per_sector: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    center_only: bool,
    #[arg(long)]
    no_plots: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    rings: Option<u32>,
    #[command(flatten)]
    grid: SweepGrid,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// One generation, a comma-separated list, or `all`.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_plots: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    grid: SweepGrid,
}

fn sweep_config(grid: &SweepGrid, file: &FileConfig, seed: u64) -> Result<SweepConfig> {
    let distances = SweepConfig::grid(
        grid.dmin.or(file.sweep.dmin).unwrap_or(10.0),
        grid.dmax.or(file.sweep.dmax).unwrap_or(100.0),
        grid.step.or(file.sweep.step).unwrap_or(5.0),
    )?;
    let mut sweep = SweepConfig::new(distances);
    if let Some(samples) = grid.samples.or(file.sweep.samples) {
        sweep.samples_per_distance = samples;
    }
    sweep.seed = seed;
    Ok(sweep)
}

fn single_generation(spec: &str) -> Result<Generation> {
    match parse_generations(spec)?.as_slice() {
        [g] => Ok(*g),
        _ => bail!("simulate takes exactly one profile, got '{spec}'"),
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let generation = single_generation(
        args.profile
            .as_deref()
            .or(file.profile.as_deref())
            .unwrap_or("5g"),
    )?;
    let profile = file.profile_for(generation)?;
    let policy = match (args.policy, file.policy.as_deref()) {
        (Some(p), _) => p,
        (None, Some(s)) => PolicyArg::parse(s)?,
        (None, None) => PolicyArg::Constrained,
    };
    let limits = ExposureLimits::default();
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let mut config = RunConfig::new(profile);
    config.policies = policy.policies();
    config.gamma = args.gamma.or(file.gamma).unwrap_or(limits.pd_limit);
    config.num_drops = args.drops.or(file.drops).unwrap_or(10_000);
    config.ues_per_sector = args.ues_per_sector.or(file.ues_per_sector).unwrap_or(10);
    config.seed = seed;
    config.center_only = args.center_only || file.center_only.unwrap_or(false);
    config.threads = args.threads.or(file.threads);
    config.rings = args.rings.or(file.rings);
    if let Some(period) = file.update_period {
        config.update_period = period;
    }
    config.validate()?;
    let sweep = sweep_config(&args.grid, &file, seed)?;
    let out = args
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("results"));
    let options = EmitOptions {
        plots: !(args.no_plots || file.no_plots.unwrap_or(false)),
        cdf_points: file.cdf_points.unwrap_or(DEFAULT_CDF_POINTS),
    };

    let results = run_drops(&config)?;
    let table = with_threads(config.threads, || distance_sweep(&config.profile, &sweep))??;
    let files = emit_outputs(
        Some(&results),
        std::slice::from_ref(&table),
        &limits,
        &out,
        &options,
    )?;
    report(
        &Summary::new(Some(&results), std::slice::from_ref(&table), &limits),
        &files,
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let generations = parse_generations(
        args.profile
            .as_deref()
            .or(file.profile.as_deref())
            .unwrap_or("all"),
    )?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let sweep = sweep_config(&args.grid, &file, seed)?;
    let limits = ExposureLimits::default();
    let tables: Vec<SweepTable> = generations
        .iter()
        .map(|g| {
            let profile = file.profile_for(*g)?;
            with_threads(args.threads.or(file.threads), || {
                distance_sweep(&profile, &sweep)
            })?
            .with_context(|| format!("sweeping {g}"))
        })
        .collect::<Result<_>>()?;
    let out = args
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("results"));
    let options = EmitOptions {
        plots: !(args.no_plots || file.no_plots.unwrap_or(false)),
        cdf_points: DEFAULT_CDF_POINTS,
    };
    let files = emit_outputs(None, &tables, &limits, &out, &options)?;
    report(&Summary::new(None, &tables, &limits), &files);
    Ok(())
}

fn report(summary: &Summary, files: &[PathBuf]) {
    for p in &summary.policies {
        println!(
            "{:<12} ues={} outage={:.4} pd>limit={:.4} max_pd={:.4e} W/m2 handovers/ue={:.4}",
            p.policy,
            p.ues,
            p.outage_fraction,
            p.pd_exceedance_fraction,
            p.max_pd_w_m2.unwrap_or(f64::NAN),
            p.mean_handovers
        );
    }
    for s in &summary.sweeps {
        match s.crossing_distance_m {
            Some(d) => println!(
                "{}: mean PD falls below the limit at {d:.1} m",
                s.generation
            ),
            None if s.pd_below_limit_at_all_distances => println!(
                "{}: mean PD below the limit at every swept distance (max {:.4e} W/m2)",
                s.generation, s.max_mean_pd_w_m2
            ),
            None => println!(
                "{}: mean PD stays above the limit on the swept grid",
                s.generation
            ),
        }
    }
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Sweep(args) => sweep(args),
        Command::Profile { profile } => {
            print!(
                "{}",
                builtin_profile(single_generation(&profile)?).to_toml_string()?
            );
            Ok(())
        }
        Command::Layout {
            profile,
            rings,
            config,
        } => {
            let file = FileConfig::load(config.as_deref())?;
            let profile = file.profile_for(single_generation(&profile)?)?;
            let rings = rings.or(file.rings).unwrap_or(profile.default_rings);
            print!("{}", build_layout(&profile, rings)?.to_csv());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
