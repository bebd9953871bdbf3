use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;
mod pipeline;

use config::{Options, Settings};
use error::{CliError, CliResult, EXIT_CONFIG, EXIT_INTERNAL};

#[derive(Parser, Debug)]
#[command(name = "walkdet", version, about = "Walking recognition for tri-axial accelerometer recordings")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command. Each one can also be set in the config
/// file under the same name.
#[derive(Args, Debug, Default)]
struct Common {
    /// Units of the x, y, z columns: g or ms2
    #[arg(long, global = true)]
    units: Option<String>,
    /// Parameter preset: smartphone or smartwatch
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Flat key = value file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads
    #[arg(long, global = true, allow_hyphen_values = true)]
    jobs: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    seed: Option<String>,
    /// Only machine-readable output on stdout
    #[arg(long, global = true)]
    quiet: bool,
    /// Relabel walking windows in which fewer than two axes move
    #[arg(long, global = true)]
    adjust_labels: bool,
    /// Minimum peak-to-peak amplitude, g
    #[arg(long, global = true, allow_hyphen_values = true)]
    amplitude: Option<String>,
    /// Lower edge of the step band, Hz
    #[arg(long, global = true, allow_hyphen_values = true)]
    f_min: Option<String>,
    /// Upper edge of the step band, Hz
    #[arg(long, global = true, allow_hyphen_values = true)]
    f_max: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<String>,
    /// Minimum bout length in windows
    #[arg(long, global = true, allow_hyphen_values = true)]
    min_windows: Option<String>,
    #[arg(long, global = true)]
    voices_per_octave: Option<String>,
    /// Lowest analysed frequency, Hz
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid_f_lo: Option<String>,
    /// Highest analysed frequency, Hz
    #[arg(long, global = true, allow_hyphen_values = true)]
    grid_f_hi: Option<String>,
    /// Timestamp gaps longer than this split a recording, s
    #[arg(long, global = true, allow_hyphen_values = true)]
    max_gap: Option<String>,
    #[arg(long, global = true)]
    subject: Option<String>,
    /// thigh, waist, chest, arm, wrist or unspecified
    #[arg(long, global = true)]
    location: Option<String>,
    /// controlled or free_living
    #[arg(long, global = true)]
    environment: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Label one-second windows as walking and summarise bouts
    Detect {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Sweep detector parameters on labeled recordings and pick Youden points
    Tune(commands::tune::TuneArgs),
    /// Score predictions against labels by activity group and location
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Generate a synthetic recording from a JSON segment list
    Synth { spec: PathBuf },
    /// Regress sensitivity on participant and study covariates
    Regress {
        table: PathBuf,
        /// Study used as the reference level
        #[arg(long)]
        reference_study: Option<String>,
    },
    /// Dump per-window amplitude and band features
    Features {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

impl Common {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        let on = |b: bool| b.then(|| "true".to_string());
        vec![
            ("units", self.units.clone()),
            ("profile", self.profile.clone()),
            ("out", self.out.clone()),
            ("jobs", self.jobs.clone()),
            ("seed", self.seed.clone()),
            ("quiet", on(self.quiet)),
            ("adjust_labels", on(self.adjust_labels)),
            ("amplitude", self.amplitude.clone()),
            ("f_min", self.f_min.clone()),
            ("f_max", self.f_max.clone()),
            ("alpha", self.alpha.clone()),
            ("beta", self.beta.clone()),
            ("min_windows", self.min_windows.clone()),
            ("voices_per_octave", self.voices_per_octave.clone()),
            ("grid_f_lo", self.grid_f_lo.clone()),
            ("grid_f_hi", self.grid_f_hi.clone()),
            ("max_gap", self.max_gap.clone()),
            ("subject", self.subject.clone()),
            ("location", self.location.clone()),
            ("environment", self.environment.clone()),
        ]
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut flags = cli.common.flags();
    match &cli.command {
        Command::Tune(a) => flags.extend(a.flags()),
        Command::Evaluate(a) => flags.extend(a.flags()),
        Command::Regress { reference_study, .. } => flags.push(("reference_study", reference_study.clone())),
        _ => {}
    }
    let opts = Options::new(cli.common.config.as_deref(), flags)?;
    let settings = Settings::resolve(&opts)?;
    if let Some(jobs) = settings.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Detect { inputs } => commands::detect::run(&inputs, &settings),
        Command::Tune(args) => commands::tune::run(&args.inputs, &opts, &settings),
        Command::Evaluate(args) => commands::evaluate::run(&args.inputs, &opts, &settings),
        Command::Synth { spec } => commands::synth::run(&spec, &settings),
        Command::Regress { table, .. } => commands::regress::run(&table, &opts, &settings),
        Command::Features { inputs } => commands::features::run(&inputs, &settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[Usage]: {first}");
            if !msg.is_empty() {
                eprint!("{}", msg.split_once('\n').map_or("", |(_, rest)| rest));
            }
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    std::panic::set_hook(Box::new(|info| {
        eprintln!("error[Internal]: {}", info.to_string().replace('\n', " "));
    }));
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error[{}]: {}", e.category(), e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL as u8),
    }
}
