//! Thin CLI over the library: four subcommands, flags override an optional
//! flat key=value config file, and errors map to stable exit codes
//! (1 validation, 2 I/O, 3 verification failure).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use subcarrier_cvqkd::experiment::{
    cmd_gain, cmd_keyrate_sweep, cmd_noise_profile, cmd_verify, Artifact, ExperimentConfig,
    PlanSelection, SweepAxis,
};
use subcarrier_cvqkd::verify::FaultInjection;
use subcarrier_cvqkd::Error;

#[derive(Parser)]
#[command(
    name = "subcarrier-cvqkd",
    version,
    about = "Multi-channel subcarrier-multiplexed CV-QKD simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Intermodulation noise profile per channel, or vs the mean index.
    NoiseProfile(RunArgs),
    /// Secret key rates vs transmission distance for one plan.
    Keyrate(RunArgs),
    /// Multi-channel gain vs distance or mean index.
    Gain(RunArgs),
    /// Run the oracle verification suite and report each check.
    Verify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file applied before flag overrides.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Channel plan: low | medium | high | custom:N.
    #[arg(long)]
    plan: Option<String>,
    /// Mean modulation index m̄.
    #[arg(long)]
    mbar: Option<f64>,
    /// Modulation variance V_A in shot-noise units.
    #[arg(long)]
    va: Option<f64>,
    /// Local-oscillator modulation index m_L.
    #[arg(long)]
    mlo: Option<f64>,
    /// Reverse-reconciliation efficiency β.
    #[arg(long)]
    beta: Option<f64>,
    /// Channel excess noise ε.
    #[arg(long)]
    eps: Option<f64>,
    /// Detector efficiency η.
    #[arg(long)]
    eta: Option<f64>,
    /// Detector electronic noise v_el.
    #[arg(long)]
    vel: Option<f64>,
    /// Pulse repetition rate in Hz.
    #[arg(long)]
    frep: Option<f64>,
    /// Sweep axis: distance | mbar.
    #[arg(long)]
    sweep: Option<String>,
    /// Sweep start.
    #[arg(long)]
    from: Option<f64>,
    /// Sweep end (inclusive).
    #[arg(long)]
    to: Option<f64>,
    /// Sweep step.
    #[arg(long)]
    step: Option<f64>,
    /// Fixed distance in km for mean-index sweeps.
    #[arg(long)]
    distance: Option<f64>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed for Monte Carlo checks.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trial count.
    #[arg(long)]
    trials: Option<u64>,
    /// Also render an SVG chart next to the CSV.
    #[arg(long)]
    svg: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(plan) = &self.plan {
            cfg.plan = Some(PlanSelection::parse(plan)?);
        }
        if let Some(sweep) = &self.sweep {
            cfg.sweep = Some(SweepAxis::parse(sweep)?);
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        take!(mbar, va, mlo, beta, eps, eta, vel, frep, distance, seed, trials);
        if self.from.is_some() {
            cfg.from = self.from;
        }
        if self.to.is_some() {
            cfg.to = self.to;
        }
        if self.step.is_some() {
            cfg.step = self.step;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.svg {
            cfg.svg = true;
        }
        cfg.validate()?;
        if cfg.modulation()?.exceeds_taylor_validity() {
            eprintln!(
                "warning: mbar={} exceeds the second-order modulation model's \
                 validity range (<= 0.02); results extrapolate beyond it",
                cfg.mbar
            );
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(command: &Command) -> Result<(), Error> {
    match command {
        Command::NoiseProfile(args) => report_artifact(cmd_noise_profile(&args.resolve()?)?),
        Command::Keyrate(args) => report_artifact(cmd_keyrate_sweep(&args.resolve()?)?),
        Command::Gain(args) => report_artifact(cmd_gain(&args.resolve()?)?),
        Command::Verify(args) => {
            let cfg = args.resolve()?;
            let report = cmd_verify(&cfg, &fault_injection_from_env())?;
            print!("{}", report.render());
            if !report.passed() {
                return Err(Error::Verification {
                    failed: report.failures(),
                    total: report.checks.len(),
                });
            }
            Ok(())
        }
    }
}

fn report_artifact(artifact: Artifact) -> Result<(), Error> {
    println!("wrote {}", artifact.csv_path.display());
    if let Some(svg) = artifact.svg_path {
        println!("wrote {}", svg.display());
    }
    Ok(())
}

/// Test-harness hook: `SUBCARRIER_CVQKD_FAULT_M2` skews the pair count the
/// verify checks consume, to prove the suite fails loudly on a broken model.
fn fault_injection_from_env() -> FaultInjection {
    let m2_offset = std::env::var("SUBCARRIER_CVQKD_FAULT_M2")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    FaultInjection { m2_offset }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 2,
        Error::Verification { .. } => 3,
        _ => 1,
    }
}
