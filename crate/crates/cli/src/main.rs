use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use esd_cli::{
    additivity_json, additivity_text, classify_json, esd_time_json, evolve_csv, evolve_json, load_state,
    parse_rate_list, sweep_csv, time_grid, verify_json, verify_text, CliError, Spacing,
};
use esd_core::dynamics::evolve;
use esd_core::verify::{self, find_additivity_violation, ADDITIVITY_BUDGET};
use esd_core::{ChannelKind, NoiseRates};

#[derive(Parser)]
#[command(name = "esd", version, about = "Entanglement sudden death of two qubits under local noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a state and write the concurrence trajectory
    Evolve {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        rates: RateArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Subspace membership and analytic sudden-death predictions
    Classify {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        rates: RateArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Find the time at which entanglement vanishes
    EsdTime {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        rates: RateArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the seeded verification battery
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Scenario::All)]
        scenario: Scenario,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sudden-death outcome over a grid of symmetric (Γ₁, Γ₂)
    Sweep {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t = Channel::Composite)]
        channel: Channel,
        /// Comma-separated Γ₁ values, shared by both qubits
        #[arg(long)]
        g1: String,
        /// Comma-separated Γ₂ values, shared by both qubits
        #[arg(long)]
        g2: String,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct StateArgs {
    /// Preset name (bell-phi+, werner:p=0.8, ...) or a JSON matrix file
    #[arg(long)]
    state: String,
}

#[derive(Args)]
struct RateArgs {
    #[arg(long, value_enum, default_value_t = Channel::Composite)]
    channel: Channel,
    #[arg(long, default_value_t = 1.0)]
    g1a: f64,
    #[arg(long, default_value_t = 1.0)]
    g1b: f64,
    #[arg(long, default_value_t = 1.0)]
    g2a: f64,
    #[arg(long, default_value_t = 1.0)]
    g2b: f64,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 5.0)]
    tmax: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
    #[arg(long, value_enum, default_value_t = SpacingArg::Linear)]
    spacing: SpacingArg,
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Channel {
    Am,
    Ph,
    Composite,
}

impl From<Channel> for ChannelKind {
    fn from(c: Channel) -> Self {
        match c {
            Channel::Am => ChannelKind::AmplitudeDamping,
            Channel::Ph => ChannelKind::PhaseDamping,
            Channel::Composite => ChannelKind::Composite,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Linear,
    Geometric,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scenario {
    All,
    Additivity,
}

impl RateArgs {
    fn rates(&self) -> Result<NoiseRates, CliError> {
        Ok(NoiseRates::new(self.g1a, self.g1b, self.g2a, self.g2b)?)
    }
}

impl OutputArgs {
    fn emit(&self, text: &str) -> Result<(), CliError> {
        match &self.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    /// Commands whose report is structured only accept JSON.
    fn require_json(&self, command: &str) -> Result<(), CliError> {
        if self.format == Some(Format::Csv) {
            return Err(CliError::Usage(format!("{command} reports JSON only; drop --format csv")));
        }
        Ok(())
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve { state, rates, grid, output } => {
            let rho = load_state(&state.state)?;
            let spacing = match grid.spacing {
                SpacingArg::Linear => Spacing::Linear,
                SpacingArg::Geometric => Spacing::Geometric,
            };
            let times = time_grid(grid.tmax, grid.points, spacing)?;
            let tr = evolve(&rho, rates.channel.into(), &rates.rates()?, &times)?;
            match output.format.unwrap_or(Format::Csv) {
                Format::Csv => output.emit(&evolve_csv(&tr)),
                Format::Json => output.emit(&pretty(&evolve_json(&tr))),
            }
        }
        Command::Classify { state, rates, output } => {
            output.require_json("classify")?;
            let rho = load_state(&state.state)?;
            output.emit(&pretty(&classify_json(&rho, &rates.rates()?)?))
        }
        Command::EsdTime { state, rates, output } => {
            output.require_json("esd-time")?;
            let rho = load_state(&state.state)?;
            output.emit(&pretty(&esd_time_json(&rho, rates.channel.into(), &rates.rates()?)?))
        }
        Command::Verify { seed, samples, scenario, output } => {
            if output.format == Some(Format::Csv) {
                return Err(CliError::Usage("verify reports text or JSON; use --format json".into()));
            }
            if samples == 0 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            let json = output.format == Some(Format::Json);
            match scenario {
                Scenario::All => {
                    let report = verify::run(seed, samples);
                    output.emit(&if json { pretty(&verify_json(&report)) } else { verify_text(&report) })?;
                    if !report.passed() {
                        return Err(CliError::Verification("verification failed".into()));
                    }
                }
                Scenario::Additivity => {
                    let budget = samples.max(ADDITIVITY_BUDGET);
                    let w = find_additivity_violation(seed, budget);
                    output.emit(&if json {
                        pretty(&additivity_json(seed, budget, w.as_ref()))
                    } else {
                        additivity_text(seed, budget, w.as_ref())
                    })?;
                    if w.is_none() {
                        return Err(CliError::Verification("no additivity witness found".into()));
                    }
                }
            }
            Ok(())
        }
        Command::Sweep { state, channel, g1, g2, output } => {
            if output.format == Some(Format::Json) {
                return Err(CliError::Usage("sweep writes CSV only".into()));
            }
            let rho = load_state(&state.state)?;
            let g1s = parse_rate_list(&g1, "--g1")?;
            let g2s = parse_rate_list(&g2, "--g2")?;
            output.emit(&sweep_csv(&rho, channel.into(), &g1s, &g2s)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("esd: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
