use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use waveguard::config::{ScenarioConfig, SweepSpec};
use waveguard::runner::{
    cmd_certify, cmd_oracle, cmd_simulate, cmd_sweep, cmd_verify, load_certificate, load_config,
    output_dir, Outcome,
};
use waveguard::Error;

#[derive(Parser)]
#[command(name = "waveguard", version, about = "Wave equation with dynamic boundary: simulation and decay certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario and write energy, trace and report files
    Simulate(Common),
    /// Compute the decay certificate (exit 2 if a hypothesis fails)
    Certify(Common),
    /// Simulate and check the certified bounds (exit 1 on violation)
    Verify {
        #[command(flatten)]
        common: Common,
        /// use this certificate instead of computing one
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Run a parameter grid and write summary.csv
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sweep: PathBuf,
    },
    /// Compare against the exact transparent-boundary solution
    Oracle(Common),
}

type Action = Box<dyn Fn(&ScenarioConfig, &Path) -> Result<Outcome, Error>>;

fn execute(cli: Cli) -> Result<i32, Error> {
    let (common, run): (&Common, Action) = match &cli.command {
        Command::Simulate(c) => (c, Box::new(cmd_simulate)),
        Command::Certify(c) => (c, Box::new(cmd_certify)),
        Command::Oracle(c) => (c, Box::new(cmd_oracle)),
        Command::Verify { common, certificate } => {
            let supplied = certificate.as_deref().map(load_certificate).transpose()?;
            (common, Box::new(move |cfg, out| cmd_verify(cfg, out, supplied.clone())))
        }
        Command::Sweep { common, sweep } => {
            let text = std::fs::read_to_string(sweep)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", sweep.display())))?;
            let spec = SweepSpec::parse(&text)?;
            (common, Box::new(move |cfg, out| cmd_sweep(cfg, &spec, out)))
        }
    };
    let config = load_config(&common.config)?;
    let out = output_dir(&config, common.out.as_deref());
    let outcome = run(&config, &out)?;
    if let Some(e) = outcome.report.certificate_error.as_ref().or(outcome.report.solver_error.as_ref()) {
        eprintln!("waveguard: {e}");
    }
    if let Some(b) = outcome.report.bound.filter(|b| !b.holds) {
        eprintln!("waveguard: decay bound violated, worst margin {:e} at t = {}", b.worst_margin, b.worst_time);
    }
    for f in &outcome.files {
        println!("{}", f.display());
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    // usage errors share the config-error exit code
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("waveguard: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
