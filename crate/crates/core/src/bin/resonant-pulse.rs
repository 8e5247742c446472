use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use resonant_pulse::io::{
    run_preset, run_propagate, run_sweep, run_synthesize, CliError, FrameSelection, OutputOptions,
    Preset, RunManifest,
};

/// Synthesize resonant two-level control pulses and check them by propagation.
#[derive(Parser)]
#[command(name = "resonant-pulse", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the pulse E(t) and its envelope to pulse.csv.
    Synthesize(RunArgs),
    /// Propagate the pulse and write trajectory.csv and summary.txt.
    Propagate {
        #[command(flatten)]
        run: RunArgs,
        /// exact, rwa or both.
        #[arg(long)]
        frame: Option<FrameSelection>,
    },
    /// Exact-frame metrics over a list of switching rates; writes sweep.csv.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated rates, e.g. 0.005,0.01,0.02,0.05.
        #[arg(long, value_delimiter = ',')]
        alphas: Vec<f64>,
    },
    /// Run a built-in parameter set (fig1 or fig2) in both frames.
    Preset {
        name: Preset,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the generation-time comment line so outputs are reproducible.
    #[arg(long)]
    no_timestamp: bool,
    /// Also write gnuplot scripts.
    #[arg(long)]
    emit_gnuplot: bool,
}

impl OutputArgs {
    fn options(&self) -> OutputOptions {
        OutputOptions {
            timestamp: !self.no_timestamp,
            gnuplot: self.emit_gnuplot,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Config file of key = value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a built-in parameter set.
    #[arg(long)]
    preset: Option<Preset>,
    /// Override one key, e.g. --set alpha=0.02 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

impl RunArgs {
    fn manifest(&self) -> Result<RunManifest, CliError> {
        let mut m = RunManifest::load(self.preset, self.config.as_deref(), &self.overrides)?;
        if let Some(out) = &self.output.out {
            m.out_dir = out.clone();
        }
        Ok(m)
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, CliError> {
    match cli.command {
        Command::Synthesize(args) => run_synthesize(&args.manifest()?, args.output.options()),
        Command::Propagate { run, frame } => {
            let mut m = run.manifest()?;
            if let Some(f) = frame {
                m.frame = f;
            }
            let report = run_propagate(&m, run.output.options())?;
            print!("{}", report.summary.render(false));
            Ok(report.written)
        }
        Command::Sweep { run, alphas } => {
            let mut m = run.manifest()?;
            if !alphas.is_empty() {
                m.alphas = alphas;
            }
            let rows = run_sweep(&m, run.output.options())?;
            for row in &rows {
                match &row.outcome {
                    Ok(x) => println!(
                        "alpha = {:e}: cycles_in_fwhm = {:.6}, final_population_error = {:.6e}, max_tracking_error = {:.6e}",
                        row.alpha, x.cycles_in_fwhm, x.final_population_error, x.max_tracking_error
                    ),
                    Err(e) => println!("alpha = {:e}: failed: {e}", row.alpha),
                }
            }
            Ok(vec![m.out_dir.join(resonant_pulse::io::SWEEP_FILE)])
        }
        Command::Preset { name, output } => {
            let report = run_preset(name, output.out.as_deref(), output.options())?;
            print!("{}", report.summary.render(false));
            Ok(report.written)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(written) => {
            for p in written {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("resonant-pulse: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
