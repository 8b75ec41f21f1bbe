use std::io::{Read, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{validate_config, Method, SolverConfig};
use crate::error::{Error, Result};
use crate::problems::{initial_point, problem_with, RegistryOptions};
use crate::projection::project_in_place;
use crate::report::SolveStatus;
use crate::solver::solve;

pub const RESULTS_HEADER: &str = "problem,dim,x0,solver,status,iters,fevals,time_s,final_gnorm";

/// Outcome of one `(problem, dim, x0, solver)` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub problem_id: String,
    pub dim: usize,
    pub x0_id: String,
    pub solver_id: String,
    pub status: SolveStatus,
    pub iters: usize,
    pub fevals: usize,
    pub time_s: f64,
    pub final_gnorm: f64,
}

impl RunRecord {
    pub fn key(&self) -> (&str, usize, &str, &str) {
        (&self.problem_id, self.dim, &self.x0_id, &self.solver_id)
    }
}

/// The Cartesian product to run.
#[derive(Debug, Clone)]
pub struct SuiteSpec {
    pub solvers: Vec<(Method, SolverConfig)>,
    pub problems: Vec<String>,
    pub dims: Vec<usize>,
    pub x0s: Vec<String>,
    pub registry: RegistryOptions,
    /// Worker cap; `None` defers to [`worker_count`].
    pub threads: Option<usize>,
}

impl SuiteSpec {
    /// Every solver with its default parameters.
    pub fn with_defaults(problems: Vec<String>, dims: Vec<usize>, x0s: Vec<String>) -> Self {
        SuiteSpec {
            solvers: Method::ALL
                .iter()
                .map(|&m| (m, SolverConfig::defaults(m)))
                .collect(),
            problems,
            dims,
            x0s,
            registry: RegistryOptions::default(),
            threads: None,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.solvers.len() * self.problems.len() * self.dims.len() * self.x0s.len()
    }
}

/// Worker budget: `SOLVER_THREADS` if set to a positive integer, otherwise
/// the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("SOLVER_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

struct Job<'a> {
    problem: &'a str,
    dim: usize,
    x0: &'a str,
    method: Method,
    cfg: &'a SolverConfig,
}

fn run_job(job: &Job<'_>, registry: RegistryOptions) -> RunRecord {
    let failed = |status, time_s| RunRecord {
        problem_id: job.problem.to_string(),
        dim: job.dim,
        x0_id: job.x0.to_string(),
        solver_id: job.method.as_str().to_string(),
        status,
        iters: 0,
        fevals: 0,
        time_s,
        final_gnorm: f64::NAN,
    };
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<_> {
        let p = problem_with(job.problem, job.dim, registry)?;
        let mut x0 = initial_point(job.x0)?.generate(job.dim);
        project_in_place(&mut x0, p.feasible_set());
        solve(&p, &x0, job.method, job.cfg)
    }));
    match outcome {
        Ok(Ok(rep)) => RunRecord {
            status: rep.status,
            iters: rep.iterations,
            fevals: rep.fevals,
            time_s: rep.wall_time_s,
            final_gnorm: rep.final_gnorm,
            ..failed(rep.status, 0.0)
        },
        // errors and panics both count as failed runs
        Ok(Err(_)) | Err(_) => failed(
            SolveStatus::LineSearchFailure,
            start.elapsed().as_secs_f64(),
        ),
    }
}

/// Runs every tuple of `spec` and returns the records sorted by key.
/// Failed runs are kept with their status.
pub fn run_suite(spec: &SuiteSpec) -> Result<Vec<RunRecord>> {
    for (m, cfg) in &spec.solvers {
        validate_config(cfg, *m)?;
    }
    for id in &spec.problems {
        problem_with(id, 2, spec.registry)?;
    }
    for id in &spec.x0s {
        initial_point(id)?;
    }
    if let Some(&d) = spec.dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidArgument(format!("bad dimension {d}")));
    }

    let mut jobs = Vec::with_capacity(spec.cardinality());
    for problem in &spec.problems {
        for &dim in &spec.dims {
            for x0 in &spec.x0s {
                for (method, cfg) in &spec.solvers {
                    jobs.push(Job {
                        problem,
                        dim,
                        x0,
                        method: *method,
                        cfg,
                    });
                }
            }
        }
    }

    let threads = spec.threads.unwrap_or_else(worker_count).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let registry = spec.registry;
    let mut records: Vec<RunRecord> =
        pool.install(|| jobs.par_iter().map(|j| run_job(j, registry)).collect());
    records.sort_by(|a, b| a.key().cmp(&b.key()));
    Ok(records)
}

/// Writes records in the results CSV layout.
pub fn write_results_csv<W: Write>(w: W, records: &[RunRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULTS_HEADER.split(','))?;
    for r in records {
        out.write_record([
            r.problem_id.clone(),
            r.dim.to_string(),
            r.x0_id.clone(),
            r.solver_id.clone(),
            r.status.to_string(),
            r.iters.to_string(),
            r.fevals.to_string(),
            format!("{:.6}", r.time_s),
            format!("{:.5e}", r.final_gnorm),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a results CSV written by [`write_results_csv`].
pub fn read_results_csv<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RESULTS_HEADER {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected header `{RESULTS_HEADER}`"),
        });
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let bad = |what: &str| Error::Parse {
            line,
            reason: format!("bad {what}"),
        };
        records.push(RunRecord {
            problem_id: row[0].to_string(),
            dim: row[1].parse().map_err(|_| bad("dim"))?,
            x0_id: row[2].to_string(),
            solver_id: row[3].to_string(),
            status: row[4].parse().map_err(|_| bad("status"))?,
            iters: row[5].parse().map_err(|_| bad("iters"))?,
            fevals: row[6].parse().map_err(|_| bad("fevals"))?,
            time_s: row[7].parse().map_err(|_| bad("time_s"))?,
            final_gnorm: row[8].parse().map_err(|_| bad("final_gnorm"))?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SuiteSpec {
        let mut spec = SuiteSpec::with_defaults(
            vec!["P03".into()],
            vec![50],
            vec!["x0_one".into(), "x0_half".into()],
        );
        spec.solvers.truncate(2);
        spec.threads = Some(2);
        spec
    }

    #[test]
    fn cardinality_and_determinism() {
        let spec = small_spec();
        let a = run_suite(&spec).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(spec.cardinality(), 4);
        let b = run_suite(&spec).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.key(), rb.key());
            assert_eq!(
                (ra.iters, ra.fevals, ra.status),
                (rb.iters, rb.fevals, rb.status)
            );
        }
        let mut keys: Vec<_> = a.iter().map(|r| r.key()).collect();
        keys.dedup();
        assert_eq!(keys.len(), 4);
    }

    #[test]
    fn unknown_ids_rejected() {
        let mut spec = small_spec();
        spec.problems.push("P42".into());
        assert!(matches!(run_suite(&spec), Err(Error::UnknownProblem(_))));
        let mut spec = small_spec();
        spec.x0s.push("nowhere".into());
        assert!(matches!(
            run_suite(&spec),
            Err(Error::UnknownInitialPoint(_))
        ));
        let mut spec = small_spec();
        spec.solvers[0].1.rho = 2.0;
        assert!(matches!(run_suite(&spec), Err(Error::InvalidConfig { .. })));
    }

    #[test]
    fn failures_are_recorded() {
        let mut spec = small_spec();
        spec.solvers = vec![(Method::Gmopcgm, {
            let mut c = SolverConfig::defaults(Method::Gmopcgm);
            c.max_iter = 1;
            c
        })];
        spec.x0s = vec!["x0_1p1".into()];
        let recs = run_suite(&spec).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].status, SolveStatus::MaxIter);
    }

    #[test]
    fn csv_round_trip() {
        let recs = run_suite(&small_spec()).unwrap();
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(RESULTS_HEADER));
        let back = read_results_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), recs.len());
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(a.key(), b.key());
            assert_eq!((a.iters, a.fevals, a.status), (b.iters, b.fevals, b.status));
            assert!((a.final_gnorm - b.final_gnorm).abs() <= 1e-5 * a.final_gnorm.abs());
        }
    }

    #[test]
    fn gnorm_has_six_significant_digits() {
        let r = RunRecord {
            problem_id: "P01".into(),
            dim: 10,
            x0_id: "x0_one".into(),
            solver_id: "gcgpm".into(),
            status: SolveStatus::ConvergedOnX,
            iters: 3,
            fevals: 7,
            time_s: 0.25,
            final_gnorm: 1.234_567_89e-12,
        };
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &[r]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "P01,10,x0_one,gcgpm,converged_on_x,3,7,0.250000,1.23457e-12"
        );
    }

    #[test]
    fn bad_header_rejected() {
        let err = read_results_csv("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
