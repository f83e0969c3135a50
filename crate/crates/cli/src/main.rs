use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qdet_core::check::{check, CheckOptions};
use qdet_core::explain::{explain, Style};
use qdet_core::formula::build_negated_star;
use qdet_core::normalize::{normalize, NormalizedProblem};
use qdet_core::oracle::{oracle_check, OracleBounds, OracleError};
use qdet_core::parser::{parse_problem, Severity, SourceFile};
use qdet_core::solver::{emit_smtlib, SolverConfig, SOLVER_CMD_ENV};

/// Decide whether project-select views determine a project-select-join query.
#[derive(Debug, Parser)]
#[command(name = "qdet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Builtin,
    External,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide determinacy. Exit status 0 = determined, 1 = not determined, 2 = error.
    Check {
        file: PathBuf,
        /// Print the verdict as JSON (see schemas/verdict.schema.json).
        #[arg(long)]
        json: bool,
        /// Solve every relation instead of stopping at the first failure.
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        /// External solver command line, e.g. "z3 -in". Overrides QDET_SOLVER_CMD.
        /// With --backend builtin it only receives what the builtin solver rejects.
        #[arg(long, value_name = "CMD")]
        solver_cmd: Option<String>,
        /// Per-relation limit for the external solver.
        #[arg(long, value_name = "SECS", default_value_t = 30.0)]
        time_limit: f64,
    },
    /// Write the negated condition for each relation as an SMT-LIB2 script.
    EmitSmt {
        file: PathBuf,
        /// Output directory (default: current directory).
        #[arg(short = 'o', long = "out-dir", value_name = "DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Brute-force check over all instances within the given bounds.
    Oracle {
        file: PathBuf,
        #[arg(long, value_name = "N")]
        domain_size: usize,
        #[arg(long, value_name = "K")]
        max_tuples: usize,
    },
    /// Print the per-relation condition and its skolemized negation.
    Explain {
        file: PathBuf,
        #[arg(long)]
        latex: bool,
    },
}

/// Reported diagnostics already; exit with status 2.
#[derive(Debug)]
struct Reported;

impl std::fmt::Display for Reported {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("errors reported")
    }
}

impl std::error::Error for Reported {}

fn load(path: &Path) -> Result<NormalizedProblem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let display = path.display().to_string();
    match parse_problem(&SourceFile::with_path(text, &display)) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                eprintln!("{}", w.render(Some(&display)));
            }
            Ok(normalize(&parsed.problem))
        }
        Err(diags) => {
            for d in &diags {
                eprintln!("{}", d.render(Some(&display)));
            }
            debug_assert!(diags.iter().any(|d| d.severity == Severity::Error));
            Err(Reported.into())
        }
    }
}

/// Flags first, then `QDET_SOLVER_CMD`, then the builtin solver.
fn solver_config(
    backend: Option<BackendArg>,
    solver_cmd: Option<String>,
    env_cmd: Option<String>,
    time_limit: f64,
) -> Result<SolverConfig> {
    if !(time_limit.is_finite() && time_limit > 0.0) {
        bail!("--time-limit must be a positive number of seconds");
    }
    let env_cmd = env_cmd.filter(|c| !c.trim().is_empty());
    let mut cfg = match (backend, solver_cmd) {
        (Some(BackendArg::Builtin), cmd) => SolverConfig {
            external_command: cmd.or(env_cmd),
            ..SolverConfig::builtin()
        },
        (Some(BackendArg::External), Some(cmd)) | (None, Some(cmd)) => SolverConfig::external(cmd),
        (Some(BackendArg::External), None) => match env_cmd {
            Some(cmd) => SolverConfig::external(cmd),
            None => bail!("the external backend needs --solver-cmd or {SOLVER_CMD_ENV}"),
        },
        (None, None) => match env_cmd {
            Some(cmd) => SolverConfig::external(cmd),
            None => SolverConfig::builtin(),
        },
    };
    cfg.time_limit = Duration::from_secs_f64(time_limit);
    Ok(cfg)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".to_string())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check {
            file,
            json,
            all,
            backend,
            solver_cmd,
            time_limit,
        } => {
            let solver = solver_config(backend, solver_cmd, std::env::var(SOLVER_CMD_ENV).ok(), time_limit)?;
            let problem = load(&file)?;
            let opts = CheckOptions {
                solver,
                all,
                ..CheckOptions::default()
            };
            let verdict = check(&problem, &opts)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&verdict.to_json(&problem))?);
            } else {
                print!("{}", verdict.render_text(&problem));
            }
            Ok(if verdict.is_determined() { 0 } else { 1 })
        }
        Command::EmitSmt { file, out_dir } => {
            let problem = load(&file)?;
            let dir = out_dir.unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let stem = stem(&file);
            for i in 0..problem.relation_count() {
                let path = dir.join(format!("{stem}.neg-star.{}.smt2", i + 1));
                let script = emit_smtlib(&build_negated_star(&problem, i));
                std::fs::write(&path, script).with_context(|| format!("cannot write {}", path.display()))?;
                println!("{}", path.display());
            }
            Ok(0)
        }
        Command::Oracle {
            file,
            domain_size,
            max_tuples,
        } => {
            let problem = load(&file)?;
            let bounds = OracleBounds::new(domain_size, max_tuples)?;
            match oracle_check(&problem, bounds) {
                Ok(outcome) => {
                    println!("{}", serde_json::to_string_pretty(&outcome.to_json(&problem))?);
                    Ok(if outcome.is_determined() { 0 } else { 1 })
                }
                Err(e @ OracleError::BudgetExceeded { required, budget }) => {
                    let report = serde_json::json!({
                        "status": "BUDGET_EXCEEDED",
                        "bounds": {"domain_size": domain_size, "max_tuples": max_tuples},
                        "required_instances": required.to_string(),
                        "budget": budget,
                        "message": e.to_string(),
                    });
                    println!("{}", serde_json::to_string_pretty(&report)?);
                    eprintln!("qdet: {e}");
                    Ok(2)
                }
                Err(e) => Err(anyhow!(e)),
            }
        }
        Command::Explain { file, latex } => {
            let problem = load(&file)?;
            print!("{}", explain(&problem, if latex { Style::Latex } else { Style::Text }));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if e.downcast_ref::<Reported>().is_none() {
                eprintln!("qdet: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
