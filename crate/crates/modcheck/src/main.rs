use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modcheck::{dump, run_check, run_oracle, summary, DumpStage, EXIT_RESOURCE, EXIT_USAGE};
use modcheck_core::{parse_cgs, parse_formula, CheckError, Engine, Formula, Limits, OpenCgs};

/// Module checking of open concurrent game structures against ATL and ATL*.
#[derive(Parser)]
#[command(name = "modcheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether every environment satisfies the formula.
    Check {
        #[command(flatten)]
        input: Input,
        /// `auto` uses the ATL engine when the formula is in ATL.
        #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
        engine: EngineArg,
        /// Print the JSON report instead of a summary.
        #[arg(long)]
        json: bool,
        /// Write the counterexample as a DOT graph.
        #[arg(long, value_name = "PATH")]
        counterexample: Option<PathBuf>,
        /// Include per-stage wall times in the report.
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        caps: Caps,
    },
    /// Search memoryless environments exhaustively (ATL only).
    Oracle {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        caps: Caps,
    },
    /// Print an intermediate construction for the negated formula.
    Dump {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        stage: DumpStage,
        #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
        engine: EngineArg,
        #[command(flatten)]
        caps: Caps,
    },
}

#[derive(Args)]
struct Input {
    /// Model file.
    model: PathBuf,
    /// Formula, e.g. "<<sys>> F p".
    formula: String,
}

#[derive(Args)]
struct Caps {
    /// Largest deterministic word automaton to build.
    #[arg(long, default_value_t = Limits::default().max_dpw_states)]
    max_dpw_states: usize,
    /// Largest tree automaton to build.
    #[arg(long, default_value_t = Limits::default().max_nta_states)]
    max_nta_states: usize,
    /// Most memoryless environments the oracle may enumerate.
    #[arg(long, default_value_t = Limits::default().max_prunings)]
    max_prunings: usize,
}

impl Caps {
    fn limits(&self) -> Limits {
        Limits {
            max_dpw_states: self.max_dpw_states,
            max_nta_states: self.max_nta_states,
            max_prunings: self.max_prunings,
            ..Limits::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Atl,
    Atlstar,
    Auto,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Engine {
        match e {
            EngineArg::Atl => Engine::Atl,
            EngineArg::Atlstar => Engine::AtlStar,
            EngineArg::Auto => Engine::Auto,
        }
    }
}

fn load(input: &Input) -> Result<(OpenCgs, Formula), String> {
    let text = std::fs::read_to_string(&input.model).map_err(|e| format!("{}: {e}", input.model.display()))?;
    let g = parse_cgs(&text).map_err(|e| format!("{}: {e}", input.model.display()))?;
    let f = parse_formula(&input.formula, &g).map_err(|e| format!("formula: {e}"))?;
    Ok((g, f))
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<i32, String> {
    match cli.command {
        Command::Check {
            input,
            engine,
            json,
            counterexample,
            timings,
            caps,
        } => {
            let (g, f) = load(&input)?;
            let (code, mut report) = run_check(&g, &f, engine.into(), &caps.limits(), timings);
            if let (Some(path), Some(w)) = (&counterexample, &report.witness) {
                write_file(path, w.dot.as_deref().unwrap_or_default())?;
            }
            if json {
                if let Some(w) = &mut report.witness {
                    w.dot = None;
                }
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                println!("{}", summary(&report));
            }
            Ok(code)
        }
        Command::Oracle { input, caps } => {
            let (g, f) = load(&input)?;
            let (code, report) = run_oracle(&g, &f, &caps.limits());
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(code)
        }
        Command::Dump {
            input,
            stage,
            engine,
            caps,
        } => {
            let (g, f) = load(&input)?;
            match dump(&g, &f, stage, engine.into(), &caps.limits()) {
                Ok(text) => {
                    print!("{text}");
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    Ok(if matches!(e, CheckError::Resource(_)) {
                        EXIT_RESOURCE
                    } else {
                        EXIT_USAGE
                    })
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
