//! Outcome of a solver run.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    /// `‖G(xₖ)‖ < tol` at an outer iterate.
    ConvergedOnX,
    /// The line-search trial point was feasible with `‖G(zₖ)‖ < tol`.
    ConvergedOnZ,
    /// `‖pₖ‖` fell below `0.1·tol`.
    SmallDirection,
    MaxIter,
    LineSearchFailure,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::ConvergedOnX => "converged_on_x",
            SolveStatus::ConvergedOnZ => "converged_on_z",
            SolveStatus::SmallDirection => "small_direction",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::LineSearchFailure => "line_search_failure",
        }
    }

    /// Runs that terminated on one of the stopping rules (as opposed to a
    /// budget or line-search failure).
    pub fn is_success(self) -> bool {
        matches!(
            self,
            SolveStatus::ConvergedOnX | SolveStatus::ConvergedOnZ | SolveStatus::SmallDirection
        )
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolveStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "converged_on_x" => SolveStatus::ConvergedOnX,
            "converged_on_z" => SolveStatus::ConvergedOnZ,
            "small_direction" => SolveStatus::SmallDirection,
            "max_iter" => SolveStatus::MaxIter,
            "line_search_failure" => SolveStatus::LineSearchFailure,
            // a panicking benchmark run is recorded as a failure
            "panic" => SolveStatus::LineSearchFailure,
            other => return Err(Error::InvalidArgument(format!("unknown status `{other}`"))),
        })
    }
}

/// One row of the optional per-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub gnorm: f64,
    pub alpha: f64,
    pub backtracks: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub pnorm: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub final_gnorm: f64,
    pub iterations: usize,
    pub fevals: usize,
    pub wall_time_s: f64,
    pub solution: Vec<f64>,
    pub trace: Option<Vec<TraceRecord>>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status.is_success()
    }
}

pub const TRACE_HEADER: &str = "k,gnorm,alpha,backtracks,lambda,gamma,pnorm";

/// Writes trace rows as CSV (with header).
pub fn write_trace_csv<W: Write>(mut w: W, trace: &[TraceRecord]) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(
            w,
            "{},{:.6e},{:.6e},{},{:.6e},{:.6e},{:.6e}",
            r.k, r.gnorm, r.alpha, r.backtracks, r.lambda, r.gamma, r.pnorm
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_names_round_trip() {
        for s in [
            SolveStatus::ConvergedOnX,
            SolveStatus::ConvergedOnZ,
            SolveStatus::SmallDirection,
            SolveStatus::MaxIter,
            SolveStatus::LineSearchFailure,
        ] {
            assert_eq!(s.as_str().parse::<SolveStatus>().unwrap(), s);
        }
    }

    #[test]
    fn trace_csv() {
        let mut buf = Vec::new();
        let rec = TraceRecord {
            k: 0,
            gnorm: 1.0,
            alpha: 0.5,
            backtracks: 0,
            lambda: 1.0,
            gamma: 1.1,
            pnorm: 2.0,
        };
        write_trace_csv(&mut buf, &[rec]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        assert_eq!(
            lines.next(),
            Some("0,1.000000e0,5.000000e-1,0,1.000000e0,1.100000e0,2.000000e0")
        );
    }
}
