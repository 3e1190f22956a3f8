use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use wnlpb_core::report::{run, Command, Overrides, Status};

#[derive(Parser, Debug)]
#[command(name = "wnlpb", version, about = "Checks weakly nonlocal Poisson brackets of hydrodynamic type")]
struct Cli {
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long = "grid-L", global = true, value_name = "X")]
    grid_l: Option<f64>,
    #[arg(long = "grid-m", global = true, value_name = "N")]
    grid_m: Option<usize>,
    #[arg(long, global = true, value_name = "X")]
    tol_geometry: Option<f64>,
    #[arg(long, global = true, value_name = "X")]
    tol_skew: Option<f64>,
    #[arg(long, global = true, value_name = "X")]
    tol_jacobi: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    samples: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Dump the variational derivative of a functional at a test function.
    Vd {
        #[arg(long)]
        functional: String,
        #[arg(long)]
        at: Option<String>,
    },
    /// Compare variational derivatives with finite-difference Gateaux differentials.
    GateauxCheck {
        #[arg(long)]
        functional: Option<String>,
    },
    /// Evaluate {F,G} at a test function.
    Bracket {
        f: String,
        g: String,
        #[arg(long)]
        at: Option<String>,
    },
    Skew,
    Jacobi,
    GeometryCheck,
    /// Geometry, skew-symmetry and Jacobi together, with a verdict.
    Classify,
    Validate,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Vd { functional, at } => Command::Vd { functional, at },
            Cmd::GateauxCheck { functional } => Command::GateauxCheck { functional },
            Cmd::Bracket { f, g, at } => Command::Bracket { f, g, at },
            Cmd::Skew => Command::Skew,
            Cmd::Jacobi => Command::Jacobi,
            Cmd::GeometryCheck => Command::GeometryCheck,
            Cmd::Classify => Command::Classify,
            Cmd::Validate => Command::Validate,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    let path = cli.config.as_ref().context("--config is required")?;
    let source = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let overrides = Overrides {
        seed: cli.seed,
        trials: cli.trials,
        grid_l: cli.grid_l,
        grid_m: cli.grid_m,
        tol_geometry: cli.tol_geometry,
        tol_skew: cli.tol_skew,
        tol_jacobi: cli.tol_jacobi,
        samples: cli.samples,
    };
    let report = run(&source, &cli.command.into(), &overrides);
    let json = report.to_json();
    match &cli.out {
        Some(out) => std::fs::write(out, &json).with_context(|| format!("writing {}", out.display()))?,
        None => print!("{json}"),
    }
    for d in &report.diagnostics {
        eprintln!("{}: {}: {}", path.display(), d.location, d.message);
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    if let Some(v) = &report.verdict {
        eprintln!("Poisson: {}", serde_label(v.poisson));
        for r in &v.reasons {
            eprintln!("  {r}");
        }
    }
    let status = match report.status {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Error => "error",
    };
    eprintln!("{} {}: {status}", report.command, path.display());
    Ok(report.exit_code() as u8)
}

fn serde_label(p: wnlpb_core::report::Poisson) -> &'static str {
    match p {
        wnlpb_core::report::Poisson::Yes => "yes",
        wnlpb_core::report::Poisson::No => "no",
        wnlpb_core::report::Poisson::Inconclusive => "inconclusive",
    }
}
