//! Argument parsing and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::{RunConfig, Scenario};
use crate::error::CliError;
use crate::output::render;
use crate::verify;

#[derive(Debug, Parser)]
#[command(
    name = "kappa",
    version,
    about = "Kappa-deformed oscillator kinematics and invariant checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Tabulate the deformed dispersion relation over the grid range
    Dispersion,
    /// Compose the on-shell momenta p and q in both orders
    Compose,
    /// Binary circ products and their commutator
    Circ,
    /// Deformed flip of a binary word on its coupled shells
    Flip,
    /// Solve the coupled mass shells of a binary word
    SolveShells,
    /// Factorizability metric of the smeared Gaussian cluster for each kappa
    Cluster,
    /// Star-product plane waves, operator symbols and the Moyal contrast
    Star,
    /// Run every invariant suite; exit status 1 if any fails
    Verify,
}

impl From<Command> for Scenario {
    fn from(c: Command) -> Self {
        match c {
            Command::Dispersion => Scenario::Dispersion,
            Command::Compose => Scenario::Compose,
            Command::Circ => Scenario::Circ,
            Command::Flip => Scenario::Flip,
            Command::SolveShells => Scenario::SolveShells,
            Command::Cluster => Scenario::Cluster,
            Command::Star => Scenario::Star,
            Command::Verify => Scenario::Verify,
        }
    }
}

/// Values are validated together with the config file, so they are taken as text here.
#[derive(Debug, Default, Args)]
pub struct Opts {
    /// key=value configuration file; flags override its entries
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Deformation scale
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    /// Rest mass
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub m0: Option<String>,
    /// Seed of the random draws
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub seed: Option<String>,
    /// Grid as POINTS:KMAX
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Output file (standard output if absent)
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<String>,
    /// csv or json
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Smearing exponents: half or full
    #[arg(long, global = true)]
    pub exponent_convention: Option<String>,
    /// Mass term in the bilocal brackets: on or off
    #[arg(long, global = true)]
    pub massterm: Option<String>,
    /// Comma-separated kappa values for `cluster`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappas: Option<String>,
    /// First three-momentum, as x,y,z
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Second three-momentum, as x,y,z
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    /// Oscillator kinds of the binary word, e.g. a+,a
    #[arg(long, global = true)]
    pub kinds: Option<String>,
    /// Width of the Gaussian packets for `cluster`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// 16 comma-separated entries of the Moyal matrix, row-major
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// standard or corrupted (fault injection for `verify`)
    #[arg(long, global = true, hide = true)]
    pub flip_table: Option<String>,
}

impl Opts {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        [
            ("kappa", &self.kappa),
            ("m0", &self.m0),
            ("seed", &self.seed),
            ("grid", &self.grid),
            ("out", &self.out),
            ("format", &self.format),
            ("exponent_convention", &self.exponent_convention),
            ("massterm", &self.massterm),
            ("kappas", &self.kappas),
            ("p", &self.p),
            ("q", &self.q),
            ("kinds", &self.kinds),
            ("sigma", &self.sigma),
            ("theta", &self.theta),
            ("flip_table", &self.flip_table),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect()
    }
}

pub fn config_from(cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.opts.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    RunConfig::resolve(cli.command.into(), file.as_deref(), &cli.opts.pairs())
}

/// Rendered output and exit status of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
    /// One line per failed invariant, for standard error.
    pub diagnostics: Vec<String>,
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ok = |text| Outcome {
        text,
        exit_code: 0,
        diagnostics: Vec::new(),
    };
    Ok(match cfg.scenario {
        Scenario::Dispersion => ok(render(cfg, &commands::dispersion(cfg)?)?),
        Scenario::Compose => ok(render(cfg, &commands::compose_cmd(cfg)?)?),
        Scenario::Circ => ok(render(cfg, &commands::circ(cfg)?)?),
        Scenario::Flip => ok(render(cfg, &commands::flip(cfg)?)?),
        Scenario::SolveShells => ok(render(cfg, &commands::solve_shells(cfg)?)?),
        Scenario::Cluster => ok(render(cfg, &commands::cluster(cfg)?)?),
        Scenario::Star => ok(render(cfg, &commands::star(cfg)?)?),
        Scenario::Verify => {
            let report = verify::verify(cfg)?;
            Outcome {
                text: render(cfg, &report)?,
                exit_code: if report.all_pass() { 0 } else { 1 },
                diagnostics: report.failures().map(|r| r.to_string()).collect(),
            }
        }
    })
}

/// Runs the command and writes its output; returns the process exit status.
pub fn run(cli: &Cli) -> i32 {
    let result = config_from(cli).and_then(|cfg| {
        let outcome = execute(&cfg)?;
        match &cfg.out {
            Some(path) => std::fs::write(path, &outcome.text)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => print!("{}", outcome.text),
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for line in &outcome.diagnostics {
                eprintln!("{line}");
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
