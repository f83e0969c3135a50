use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::SolverError;

/// Runs `command` (split on whitespace, no shell) with `script` on standard
/// input and returns its standard output. The process is killed once
/// `time_limit` elapses.
///
/// A nonzero exit status is only an error when the output carries no
/// verdict: z3, for one, exits with 1 after answering `unsat` because the
/// trailing `(get-model)` has nothing to show.
pub fn run_external(command: &str, script: &str, time_limit: Duration) -> Result<String, SolverError> {
    let mut words = command.split_whitespace();
    let program = words
        .next()
        .ok_or_else(|| SolverError::ExternalFailure("empty solver command".into()))?;
    let mut child = Command::new(program)
        .args(words)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SolverError::ExternalFailure(format!("cannot start `{command}`: {e}")))?;

    let mut stdout = child.stdout.take().expect("piped stdout");
    let mut stderr = child.stderr.take().expect("piped stderr");
    let out_reader = thread::spawn(move || {
        let mut buf = String::new();
        stdout.read_to_string(&mut buf).map(|_| buf)
    });
    let err_reader = thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });
    {
        let mut stdin = child.stdin.take().expect("piped stdin");
        // a solver that exits early closes the pipe; its output says why
        let _ = stdin.write_all(script.as_bytes());
    }

    let deadline = Instant::now() + time_limit;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(SolverError::Timeout(time_limit));
            }
            Ok(None) => thread::sleep(Duration::from_millis(2)),
            Err(e) => return Err(SolverError::ExternalFailure(e.to_string())),
        }
    };
    let output = out_reader
        .join()
        .map_err(|_| SolverError::ExternalFailure("stdout reader panicked".into()))?
        .map_err(|e| SolverError::ExternalFailure(format!("reading solver output: {e}")))?;
    let errors = err_reader.join().unwrap_or_default();
    let verdict = output.split_whitespace().next();
    if !status.success() && !matches!(verdict, Some("sat" | "unsat")) {
        return Err(SolverError::ExternalFailure(format!(
            "`{command}` exited with {status}: {}",
            if errors.trim().is_empty() { output.trim() } else { errors.trim() }
        )));
    }
    Ok(output)
}
