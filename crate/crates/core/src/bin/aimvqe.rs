use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use aimvqe::error::{Error, Result};
use aimvqe::experiment::{
    cmd_correlation, cmd_exact, cmd_jmodel, cmd_parse, cmd_sweep, cmd_vqe, exit_code, LoadedConfig,
};

#[derive(Parser)]
#[command(name = "aimvqe", version, about = "VQE experiments on impurity-model qubit Hamiltonians")]
struct Cli {
    /// Worker threads for sweeps and gradients (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Master seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize a Pauli listing: term count, width, hermiticity.
    Parse { path: PathBuf },
    /// Ground energy, gap and particle sector of a Pauli listing.
    Exact {
        path: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// One VQE run: streaming trace CSV plus result JSON.
    Vqe(RunArgs),
    /// Sweep one variable over values and seeds.
    Sweep(RunArgs),
    /// Spin-spin correlation table.
    Correlation(RunArgs),
    /// Exchange-coupling Monte Carlo.
    Jmodel(RunArgs),
}

fn load(args: &RunArgs) -> Result<(LoadedConfig, PathBuf)> {
    let mut cfg = LoadedConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.config.seed = seed;
    }
    cfg.config.validate()?;
    let out = args
        .out_dir
        .clone()
        .unwrap_or_else(|| cfg.resolve(&cfg.config.output.dir));
    Ok((cfg, out))
}

fn report(out: &Path, what: &str) {
    println!("{what}; outputs in {}", out.display());
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config("--threads", e.to_string()))?;
    }
    match cli.command {
        Command::Parse { path } => println!("{}", cmd_parse(&path)?),
        Command::Exact { path, out_dir } => {
            let r = cmd_exact(&path, out_dir.as_deref())?;
            println!("E0 = {:.12} Ha", r.entry.energy);
            match r.entry.gap {
                Some(g) => println!("gap = {g:.12} Ha{}", if r.degenerate { " (degenerate)" } else { "" }),
                None => println!("gap = n/a"),
            }
            match r.entry.n_electrons {
                Some(k) => println!("sector = {k} electrons"),
                None => println!("sector = mixed"),
            }
            println!("solver = {:?}, residual = {:.2e}", r.entry.solver, r.residual);
            match r.golden_match {
                Some(true) => println!("golden: bitwise match"),
                Some(false) => println!("golden: MISMATCH"),
                None => println!("golden: no bundled value for this file"),
            }
        }
        Command::Vqe(args) => {
            let (cfg, out) = load(&args)?;
            let r = cmd_vqe(&cfg, &out)?;
            report(
                &out,
                &format!(
                    "E = {:.10} Ha (exact {:.10}, rel. error {:.3e}), converged = {}, {} iterations",
                    r.final_energy, r.exact_energy, r.relative_error, r.converged, r.iterations
                ),
            );
        }
        Command::Sweep(args) => {
            let (cfg, out) = load(&args)?;
            let r = cmd_sweep(&cfg, &out)?;
            let mut msg = format!("{} rows", r.rows.len());
            if let Some(f) = &r.fit {
                msg += &format!(", log-log slope {:.3} (r^2 {:.3})", f.slope, f.r_squared);
            }
            report(&out, &msg);
        }
        Command::Correlation(args) => {
            let (cfg, out) = load(&args)?;
            let r = cmd_correlation(&cfg, &out)?;
            for row in &r.rows {
                println!("{:<10} {:<22} {:+.6}", row.topology, row.ansatz, row.szsz);
            }
            report(&out, &format!("{} rows", r.rows.len()));
        }
        Command::Jmodel(args) => {
            let (cfg, out) = load(&args)?;
            let r = cmd_jmodel(&cfg, &out)?;
            report(&out, &format!("{} rows", r.rows.len()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
