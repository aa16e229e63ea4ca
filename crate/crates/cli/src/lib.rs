//! Command-line frontend for the `athermal` library.
//!
//! A job file names a channel and the quantity to compute; the report has
//! one row per inverse temperature and is written as JSON or CSV.

#![forbid(unsafe_code)]

pub mod job;
pub mod report;
pub mod run;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use job::{parse_job, parse_job_with, Command, Format, JobError, JobSpec, Overrides};
pub use report::{emit, render, Report, Row};
pub use run::{run, RunOptions};

/// Success.
pub const EXIT_OK: i32 = 0;
/// At least one verification check failed.
pub const EXIT_VERIFY_FAILED: i32 = 1;
/// Invalid job, arguments or output location.
pub const EXIT_INVALID: i32 = 2;
/// A numerical routine failed.
pub const EXIT_SOLVER: i32 = 3;

/// Environment variable naming a directory for relative output paths.
pub const OUT_DIR_VAR: &str = "ATHERMAL_OUT";

#[derive(Clone, Debug)]
pub struct Invocation {
    pub job: PathBuf,
    pub overrides: Overrides,
    pub timing: bool,
    pub out_dir: Option<OsString>,
}

/// Output path after applying the directory override to relative paths.
pub fn resolve_output(path: &Path, out_dir: Option<&OsString>) -> PathBuf {
    match out_dir {
        Some(dir) if path.is_relative() && !dir.is_empty() => Path::new(dir).join(path),
        _ => path.to_path_buf(),
    }
}

/// Runs one invocation and returns its exit code.
pub fn execute(inv: &Invocation, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match std::fs::read_to_string(&inv.job) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", inv.job.display());
            return EXIT_INVALID;
        }
    };
    let job = match parse_job_with(&text, &inv.overrides) {
        Ok(j) => j,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INVALID;
        }
    };
    let outcome = match run(&job, &RunOptions { timing: inv.timing }) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {} failed: {e}", job.command);
            return EXIT_SOLVER;
        }
    };
    let format = job.format();
    match &job.output.path {
        Some(p) => {
            let path = resolve_output(p, inv.out_dir.as_ref());
            if let Err(e) = emit(&outcome.report, format, &path) {
                let _ = writeln!(err, "error: {e}");
                return EXIT_INVALID;
            }
        }
        None => match render(&outcome.report, format) {
            Ok(s) => {
                let _ = out.write_all(s.as_bytes());
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_INVALID;
            }
        },
    }
    if outcome.failures.is_empty() {
        EXIT_OK
    } else {
        let _ = writeln!(err, "{} check(s) failed:", outcome.failures.len());
        for (beta, name, detail) in &outcome.failures {
            let _ = writeln!(err, "  beta={beta}: {name}: {detail}");
        }
        EXIT_VERIFY_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_dir_applies_to_relative_paths_only() {
        let dir = OsString::from("/tmp/reports");
        assert_eq!(resolve_output(Path::new("a.csv"), Some(&dir)), PathBuf::from("/tmp/reports/a.csv"));
        assert_eq!(resolve_output(Path::new("/x/a.csv"), Some(&dir)), PathBuf::from("/x/a.csv"));
        assert_eq!(resolve_output(Path::new("a.csv"), None), PathBuf::from("a.csv"));
    }
}
