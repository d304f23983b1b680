use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use sumbrella::fuzz::fuzz_protocol;
use sumbrella::perception::ingest_log;
use sumbrella::scenario::parse_scenario;
use sumbrella::sim::{self, RunError, RunOptions, RunOutput};
use sumbrella::step_response::pid_step_report;
use sumbrella::trace::{write_csv, write_trace, TraceFormat};
use sumbrella::Config;

#[derive(Parser)]
#[command(name = "sumbrella", version, about = "Simulation harness for the three-leaf soft hat")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Trace destination; the trace goes to stdout as CSV when omitted.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: TraceFormat,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Skip the byte framing between subsystems.
        #[arg(long, hide = true)]
        bypass_codec: bool,
    },
    /// Drive the engine from a recorded detection log.
    Replay {
        detections: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: TraceFormat,
        /// Simulated seconds; defaults to two seconds past the last frame.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Fuzz the frame codec and report.
    FuzzProtocol {
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Step response of one chamber under the pressure controller.
    PidStep {
        #[arg(long)]
        target: f64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the report as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check a scenario file without running it.
    Validate { scenario: PathBuf },
    /// Print the default configuration.
    DefaultConfig,
}

enum Failure {
    Invalid(anyhow::Error),
    Simulation(anyhow::Error),
    Fuzz(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Invalid(e.into())
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Simulation(e)) => {
            eprintln!("simulation fault: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Fuzz(report)) => {
            eprintln!("fuzz assertion failed");
            println!("{report}");
            ExitCode::from(3)
        }
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<Config> {
    Ok(match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("failed to read {}", path.display()))
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { scenario, config, trace, format, seed, bypass_codec } => {
            let text = read(&scenario)?;
            let parsed = parse_scenario(&text).with_context(|| scenario.display().to_string())?;
            let cfg = load_config(config.as_deref())?;
            let out = simulated(sim::run_with(&parsed, &cfg, RunOptions { bypass_codec, seed }))?;
            emit(&out, trace.as_deref(), format)
        }
        Command::Replay { detections, config, trace, format, duration } => {
            let file = std::fs::File::open(&detections)
                .with_context(|| format!("failed to read {}", detections.display()))?;
            let log = ingest_log(std::io::BufReader::new(file))?;
            for (line, reason) in &log.skipped {
                eprintln!("{}:{line}: skipped: {reason}", detections.display());
            }
            let cfg = load_config(config.as_deref())?;
            let duration = duration.unwrap_or_else(|| log.frames.last().map_or(0.0, |f| f.t) + 2.0);
            let out = simulated(sim::replay(&log.frames, duration, &cfg, RunOptions::default()))?;
            emit(&out, trace.as_deref(), format)
        }
        Command::FuzzProtocol { n, seed } => {
            if n == 0 {
                return Err(Failure::Invalid(anyhow::anyhow!("--n must be positive")));
            }
            let report = fuzz_protocol(n, seed);
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            if !report.passed() {
                return Err(Failure::Fuzz(json));
            }
            println!("{json}");
            Ok(())
        }
        Command::PidStep { target, config, report } => {
            let cfg = load_config(config.as_deref())?;
            let r = pid_step_report(target, &cfg)?;
            let json = serde_json::to_string_pretty(&r).expect("report serializes");
            if let Some(path) = report {
                std::fs::write(&path, format!("{json}\n"))
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            println!("{json}");
            Ok(())
        }
        Command::Validate { scenario } => {
            let parsed = parse_scenario(&read(&scenario)?).with_context(|| scenario.display().to_string())?;
            println!(
                "{}: ok ({} events, {} s at {} Hz)",
                scenario.display(),
                parsed.events.len(),
                parsed.meta.duration_s,
                parsed.meta.tick_hz
            );
            Ok(())
        }
        Command::DefaultConfig => {
            println!("{}", serde_json::to_string_pretty(&Config::default()).expect("config serializes"));
            Ok(())
        }
    }
}

fn simulated(result: Result<RunOutput, RunError>) -> Result<RunOutput, Failure> {
    result.map_err(|e| match e {
        RunError::Config(c) => Failure::Invalid(c.into()),
        fault @ RunError::Fault { .. } => Failure::Simulation(fault.into()),
    })
}

fn emit(out: &RunOutput, trace: Option<&Path>, format: TraceFormat) -> Result<(), Failure> {
    for (tick, mode) in sim::mode_changes(&out.rows) {
        eprintln!("tick {tick:>5}  {mode}");
    }
    match trace {
        Some(path) => write_trace(&out.rows, format, path)?,
        None => write_csv(&out.rows, std::io::stdout().lock())?,
    }
    Ok(())
}
