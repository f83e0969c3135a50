//! Satisfiability of the quantifier-free formulas produced by
//! [`crate::formula`].
//!
//! Two backends: a built-in procedure for equality logic and an external
//! SMT-LIB2 solver run as a subprocess. Both hand back models that have been
//! re-evaluated against the formula.

mod builtin;
mod external;
mod smtlib;

use std::time::Duration;

use thiserror::Error;

use crate::formula::{Formula, Model};

pub use builtin::{solve_builtin, MAX_BUILTIN_ATOMS};
pub use external::run_external;
pub use smtlib::{emit_smtlib, parse_model, smt_symbol};

/// Environment variable naming the external solver command line.
pub const SOLVER_CMD_ENV: &str = "QDET_SOLVER_CMD";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("unsupported theory for the built-in solver: {0}")]
    UnsupportedTheory(String),
    #[error("formula has {atoms} distinct atoms; the built-in solver handles at most {limit} (use the external backend)")]
    TooLarge { atoms: usize, limit: usize },
    #[error("external solver exceeded the time limit of {0:?}")]
    Timeout(Duration),
    #[error("external solver failure: {0}")]
    ExternalFailure(String),
    #[error("solver model does not satisfy the formula: {0}")]
    BadModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatStatus {
    Sat,
    Unsat,
}

impl SatStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SatStatus::Sat => "SAT",
            SatStatus::Unsat => "UNSAT",
        }
    }
}

/// A satisfiability answer; `model` is present iff `status` is `Sat`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatResult {
    pub status: SatStatus,
    pub model: Option<Model>,
}

impl SatResult {
    pub fn unsat() -> SatResult {
        SatResult {
            status: SatStatus::Unsat,
            model: None,
        }
    }

    pub fn sat(model: Model) -> SatResult {
        SatResult {
            status: SatStatus::Sat,
            model: Some(model),
        }
    }

    pub fn is_sat(&self) -> bool {
        self.status == SatStatus::Sat
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Builtin,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub backend: Backend,
    /// Whitespace-separated command line, e.g. `z3 -in`. Required for
    /// [`Backend::External`]. Under [`Backend::Builtin`] it receives the
    /// formulas the built-in procedure cannot take (order atoms, too many atoms).
    pub external_command: Option<String>,
    pub time_limit: Duration,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            backend: Backend::Builtin,
            external_command: None,
            time_limit: Duration::from_secs(30),
        }
    }
}

impl SolverConfig {
    pub fn builtin() -> SolverConfig {
        SolverConfig::default()
    }

    pub fn external(command: impl Into<String>) -> SolverConfig {
        SolverConfig {
            backend: Backend::External,
            external_command: Some(command.into()),
            ..SolverConfig::default()
        }
    }
}

pub fn solve(f: &Formula, cfg: &SolverConfig) -> Result<SatResult, SolverError> {
    match cfg.backend {
        Backend::Builtin => match solve_builtin(f) {
            Err(SolverError::TooLarge { .. } | SolverError::UnsupportedTheory(_)) if cfg.external_command.is_some() => {
                solve_external(f, cfg)
            }
            r => r,
        },
        Backend::External => solve_external(f, cfg),
    }
}

fn solve_external(f: &Formula, cfg: &SolverConfig) -> Result<SatResult, SolverError> {
    let cmd = cfg
        .external_command
        .as_deref()
        .filter(|c| !c.trim().is_empty())
        .ok_or_else(|| SolverError::ExternalFailure("no external solver command configured".into()))?;
    let script = emit_smtlib(f);
    let output = run_external(cmd, &script, cfg.time_limit)?;
    parse_model(&output, f)
}

/// Checks a model against its formula and returns it unchanged if it holds.
pub(crate) fn verified(f: &Formula, model: Model) -> Result<SatResult, SolverError> {
    match f.eval(&model) {
        Ok(true) => Ok(SatResult::sat(model)),
        Ok(false) => Err(SolverError::BadModel("formula evaluates to false".into())),
        Err(e) => Err(SolverError::BadModel(e.to_string())),
    }
}
