//! `pinning`: runs experiment configs and writes their tables.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use pinning::harness::{emit, provenance, run_experiment, ExperimentKind, ExperimentSpec};

#[derive(Parser)]
#[command(name = "pinning", version, about = "Pinning dynamics, heat and Stefan experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice runs: simulate, termination-time, contact-decay, coupling.
    Simulate(Common),
    /// Heat equation studies and the Agmon sweep.
    Heat(Common),
    /// Stefan problem studies.
    Stefan(Common),
    /// Scaling-limit comparisons: repulsive-limit, sticky-limit, fourier-decay.
    Compare(Common),
    /// Equilibrium tables and the exhaustive oracle.
    Equilibrium(Common),
    /// Any number of configs of any kind; directories are expanded to
    /// their `*.toml` files.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML). `sweep` accepts several.
    #[arg(long, required = true, num_args = 1..)]
    config: Vec<PathBuf>,
    /// Overrides the first seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the config's `out_dir`, then `results`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for seed-parallel runs.
    #[arg(long)]
    threads: Option<usize>,
}

fn allowed(command: &Command, kind: ExperimentKind) -> bool {
    use ExperimentKind::*;
    match command {
        Command::Simulate(_) => matches!(kind, Simulate | TerminationTime | ContactDecay | Coupling),
        Command::Heat(_) => matches!(kind, HeatStudy | Agmon),
        Command::Stefan(_) => matches!(kind, StefanStudy),
        Command::Compare(_) => matches!(kind, RepulsiveLimit | StickyLimit | FourierDecay),
        Command::Equilibrium(_) => matches!(kind, Equilibrium | Oracle),
        Command::Sweep(_) => true,
    }
}

fn expand(paths: &[PathBuf]) -> anyhow::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| q.extension().is_some_and(|e| e == "toml"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn run_one(command: &Command, common: &Common, path: &Path) -> anyhow::Result<bool> {
    let mut spec = ExperimentSpec::read(path).with_context(|| format!("reading {}", path.display()))?;
    if !allowed(command, spec.kind) {
        bail!("{}: kind {} does not belong to this subcommand", path.display(), spec.kind.name());
    }
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    let dir = common.out_dir.clone().or_else(|| spec.out_dir.clone()).unwrap_or_else(|| PathBuf::from("results"));
    let table = run_experiment(&spec).with_context(|| format!("running {}", spec.name))?;
    let prov = provenance(&spec);
    let written = emit(&table, &prov, &dir)?;
    for c in &table.criteria {
        println!("{} {}/{}: {}", if c.passed { "PASS" } else { "FAIL" }, spec.name, c.name, c.detail);
    }
    for w in written {
        eprintln!("wrote {}", w.display());
    }
    Ok(table.all_pass())
}

fn main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Simulate(c)
        | Command::Heat(c)
        | Command::Stefan(c)
        | Command::Compare(c)
        | Command::Equilibrium(c)
        | Command::Sweep(c) => c,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let configs = expand(&common.config)?;
    if configs.len() > 1 && !matches!(cli.command, Command::Sweep(_)) {
        bail!("only `sweep` takes several configs");
    }
    let mut ok = true;
    for path in &configs {
        ok &= run_one(&cli.command, common, path)?;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
