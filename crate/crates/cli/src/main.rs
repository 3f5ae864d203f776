use clap::{Parser, Subcommand};
use pgl_cli::commands::{self, RunContext};
use pgl_cli::config;
use pgl_cli::error::Result;
use pgl_cli::provenance::Provenance;
use std::path::PathBuf;
use std::process::ExitCode;

/// Graph Ginzburg-Landau experiments: graph construction, gradient-flow
/// minimization, segmentation, and the continuum-limit studies.
#[derive(Parser)]
#[command(name = "pgl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Overrides the seed from the config.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Size of the worker thread pool; defaults to the core count.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a neighborhood graph and write points, edges, and a summary.
    Graph,
    /// Minimize the graph energy by gradient flow.
    Minimize,
    /// Scribble-seeded image segmentation.
    Segment,
    /// Two-seed study on the waisted capsule domain.
    Bean,
    /// Sharp-interface consistency across sample counts.
    Converge,
    /// Tabulate the cell-problem surface tension.
    Cell,
    /// Check the standing assumptions on kernel, potential, density.
    Validate,
}

/// Provenance hashes the effective config, i.e. after the --seed override
/// lands in it, so two runs share a hash exactly when they share settings.
fn context_for<T: serde::Serialize>(cli: &Cli, cfg: &T, seed: u64) -> Result<RunContext> {
    let canonical = config::canonical(cfg)?;
    let prov = Provenance::new(&canonical, seed);
    pgl_cli::outputs::ensure_dir(&cli.out)?;
    Ok(RunContext { out: cli.out.clone(), seed, provenance: prov })
}

macro_rules! run_with {
    ($cli:expr, $ty:ty, $module:ident) => {{
        let mut cfg: $ty = config::load($cli.config.as_deref())?;
        if let Some(s) = $cli.seed {
            cfg.seed = s;
        }
        let ctx = context_for($cli, &cfg, cfg.seed)?;
        commands::$module::run(&cfg, &ctx)
    }};
}

fn dispatch(cli: &Cli) -> Result<()> {
    match cli.command {
        Command::Graph => run_with!(cli, config::GraphCmdCfg, graph),
        Command::Minimize => run_with!(cli, config::MinimizeCfg, minimize),
        Command::Segment => run_with!(cli, config::SegmentCfg, segment),
        Command::Bean => run_with!(cli, config::BeanCfg, bean),
        Command::Converge => run_with!(cli, config::ConvergeCfg, converge),
        Command::Cell => run_with!(cli, config::CellCfg, cell),
        Command::Validate => run_with!(cli, config::ValidateCfg, validate),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(pgl_cli::EXIT_CONFIG as u8);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
