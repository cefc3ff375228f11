use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use swlab::geometry::PRESET_CATALOG;
use swlab::scenario::{emit_report, parse_config, run_scenario, ScenarioConfig};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "swlab",
    version,
    about = "Sums of squares of vector fields: distances, waves, fractional powers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report.
    Run {
        config: PathBuf,
        /// Output directory (default: `out` from the config, else `swlab-out`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the vector-field presets and scenario kinds.
    Presets,
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("config error: {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{e} (in {})", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            for (name, about) in PRESET_CATALOG {
                println!("{name:<12} {about}");
            }
            println!("{:<12} polynomial fields from [[fields]] rows", "custom");
            println!();
            println!("scenario kinds: distance, wave-cone, fractional, kernels, masuda");
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load(&config) {
            Ok(c) => {
                println!(
                    "ok: kind = {}, preset = {}, resolution = {:?}",
                    c.kind.name(),
                    c.preset,
                    c.resolution()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(EXIT_CONFIG)
            }
        },
        Command::Run {
            config,
            out,
            threads,
        } => {
            let c = match load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            if let Some(n) = threads {
                if n == 0 {
                    eprintln!("config error: --threads must be >= 1");
                    return ExitCode::from(EXIT_CONFIG);
                }
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    eprintln!("runtime error: {e}");
                    return ExitCode::from(EXIT_RUNTIME);
                }
            }
            let dir = out
                .or_else(|| c.out.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("swlab-out"));
            let report = match run_scenario(&c) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("runtime error in {} scenario: {e}", c.kind.name());
                    return ExitCode::from(EXIT_RUNTIME);
                }
            };
            if let Err(e) = emit_report(&report, &dir) {
                eprintln!("runtime error writing {}: {e}", dir.display());
                return ExitCode::from(EXIT_RUNTIME);
            }
            for ch in &report.checks {
                let verdict = if ch.pass { "PASS" } else { "FAIL" };
                if ch.rule == "true" {
                    println!("{verdict} {}", ch.name);
                } else {
                    println!(
                        "{verdict} {} = {:e} ({} {})",
                        ch.name, ch.value, ch.rule, ch.limit
                    );
                }
            }
            println!("report: {}", dir.join("report.json").display());
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
    }
}
