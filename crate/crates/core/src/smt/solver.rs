//! One-shot solver processes speaking SMT-LIB v2 over stdin/stdout.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Environment variable naming the default solver executable.
pub const SOLVER_ENV: &str = "TEMPNET_SOLVER";

/// Extra wall-clock time granted past the in-solver timeout before the process is killed.
const KILL_GRACE: Duration = Duration::from_secs(2);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub program: PathBuf,
    pub args: Vec<String>,
    /// Per-query limit, passed to the solver and enforced by the wall clock.
    pub timeout: Option<Duration>,
    /// When set, every script is also written to this directory.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let program = std::env::var_os(SOLVER_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("z3"));
        SolverConfig {
            program,
            args: vec!["-in".into(), "-smt2".into()],
            timeout: None,
            dump_dir: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("could not start solver `{program}`: {source}")]
    Spawn {
        program: String,
        source: std::io::Error,
    },
    #[error("solver i/o failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("solver exceeded the wall-clock limit of {0:?}")]
    WallClock(Duration),
}

#[derive(Clone, Debug)]
pub struct SolverOutput {
    pub stdout: String,
    pub stderr: String,
    pub status: Option<i32>,
    pub elapsed: Duration,
}

impl SolverConfig {
    /// Writes `script` to a fresh solver process and collects its output.
    pub fn run(&self, script: &str, label: &str) -> Result<SolverOutput, SolverError> {
        if let Some(dir) = &self.dump_dir {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(format!("{}.smt2", sanitize(label))), script)?;
        }
        let start = Instant::now();
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| SolverError::Spawn {
                program: self.program.display().to_string(),
                source,
            })?;
        let mut stdout = child.stdout.take().expect("piped stdout");
        let mut stderr = child.stderr.take().expect("piped stderr");
        let out_reader = thread::spawn(move || {
            let mut s = String::new();
            stdout.read_to_string(&mut s).map(|_| s)
        });
        let err_reader = thread::spawn(move || {
            let mut s = String::new();
            stderr.read_to_string(&mut s).map(|_| s)
        });
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            // A solver that exits early closes the pipe; its output explains why.
            let _ = stdin.write_all(script.as_bytes());
        }

        let limit = self.timeout.map(|t| t + KILL_GRACE);
        let mut pause = Duration::from_micros(100);
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if let Some(limit) = limit {
                if start.elapsed() > limit {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(SolverError::WallClock(limit));
                }
            }
            thread::sleep(pause);
            pause = (pause * 2).min(Duration::from_millis(5));
        };
        let stdout = out_reader.join().expect("reader thread")?;
        let stderr = err_reader.join().expect("reader thread")?;
        Ok(SolverOutput {
            stdout,
            stderr,
            status: status.code(),
            elapsed: start.elapsed(),
        })
    }
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}
