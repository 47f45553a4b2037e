use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use dcmwalk::report::{self, OutputFile};
use dcmwalk::RunConfig;

/// DCM-based biped walking simulator.
#[derive(Debug, Parser)]
#[command(name = "dcmwalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for the scenario trials.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Also write the synthesized controller matrices to gains.csv.
    #[arg(long, global = true)]
    dump_gains: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Reference trajectories and footprints of the diagonal example walk.
    Plan,
    /// Closed-loop forward walk under sensor noise.
    Walk,
    /// Single-support stability grid over the initial COM state.
    Scenario1,
    /// Largest recoverable push for each stepping strategy.
    Scenario2,
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Plan => "plan",
            Cmd::Walk => "walk",
            Cmd::Scenario1 => "scenario1",
            Cmd::Scenario2 => "scenario2",
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            RunConfig::from_json(&text).with_context(|| format!("config {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write_all(dir: &Path, files: &[OutputFile]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for f in files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.bytes).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(cli.config.as_deref(), cli.seed)?;
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    let name = cli.command.name();
    let mut files = match cli.command {
        Cmd::Plan => report::plan_outputs(&cfg)?,
        Cmd::Walk => {
            let (trial, files) = report::walk_outputs(&cfg)?;
            println!(
                "{}: rms DCM error {:.4} m, peak {:.4} m",
                trial.verdict.as_str(),
                trial.rms_dcm_error,
                trial.peak_dcm_error
            );
            files
        }
        Cmd::Scenario1 => {
            let (map, files) = report::scenario1_outputs(&cfg)?;
            let recovered = map.cells.iter().filter(|c| c.recovered).count();
            let capturable = map.cells.iter().filter(|c| c.capturable).count();
            println!(
                "{} cells, {recovered} recovered, {capturable} capturable",
                map.cells.len()
            );
            files
        }
        Cmd::Scenario2 => {
            let (outcomes, mut files) = report::scenario2_outputs(&cfg)?;
            for o in &outcomes {
                println!("{}: F_max {:.1} N", o.strategy.as_str(), o.f_max);
                for d in &o.diagnostics {
                    println!("  {d}");
                }
                files.push(report::push_trial_output(&cfg, o.strategy, o.f_max)?);
            }
            files
        }
    };
    if cli.dump_gains {
        let setup = match name {
            "plan" => cfg.plan_setup(),
            "scenario1" => cfg.stance_setup(),
            "scenario2" => cfg.sweep_setup(),
            _ => cfg.walk_setup(),
        };
        files.push(report::gains_output(&cfg, name, &setup.gains()?)?);
    }
    write_all(&cli.out, &files)
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
