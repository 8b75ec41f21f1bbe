use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use projsolve::benchmark::{
    parameter_study, performance_profile, read_results_csv, run_suite, write_profile_csv,
    write_profile_dat, write_results_csv, write_study_csv, Metric, Sampler, StudyOptions,
    SuiteSpec,
};
use projsolve::cs::{
    batch_experiment, generate_with, write_signals_csv, write_summary_csv, CsParams, HScale,
};
use projsolve::problems::{
    desk_dimensions, dimensions, initial_point, initial_points, parse_dimensions, problem_with,
    RegistryOptions, DESK_INITIAL_POINTS, PROBLEM_IDS,
};
use projsolve::projection::project_in_place;
use projsolve::report::write_trace_csv;
use projsolve::solver::solve_traced;
use projsolve::spectral::{verify, VerifyOptions};
use projsolve::{Method, SolverConfig};

type CliResult = Result<u8, Box<dyn std::error::Error>>;

/// Derivative-free projection solvers for monotone nonlinear equations.
#[derive(Parser, Debug)]
#[command(name = "projsolve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one registered problem and print the run summary.
    Solve(SolveArgs),
    /// Run the benchmark suite and write the results CSV.
    Bench(BenchArgs),
    /// Build performance profiles from a results CSV.
    Profile(ProfileArgs),
    /// Run the compressed-sensing recovery experiment.
    Cs(CsArgs),
    /// Check the spectral properties of the search matrix on random cases.
    VerifySpectral(VerifyArgs),
    /// Sample (tau, lambda0) and score each pair on a problem subset.
    Tune(TuneArgs),
}

/// Parameter overrides shared by every solving subcommand.
#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// File of `key = value` lines applied on top of the defaults.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one parameter, e.g. `--set tau=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Stopping tolerance on ‖G‖.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    max_iter: Option<usize>,
}

impl Overrides {
    /// Flags override the file, which overrides `base`.
    fn apply(&self, mut cfg: SolverConfig) -> Result<SolverConfig, Box<dyn std::error::Error>> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            cfg.apply_kv(&text)?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| format!("--set expects KEY=VALUE, got `{kv}`"))?;
            cfg.set(k, v)?;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        Ok(cfg)
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: projsolve::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: projsolve::Error| e.to_string())
}

fn parse_sampler(s: &str) -> Result<Sampler, String> {
    s.parse().map_err(|e: projsolve::Error| e.to_string())
}

/// A comma-separated dimension list, kept as one flag value.
#[derive(Debug, Clone)]
struct Dims(Vec<usize>);

fn parse_dims(s: &str) -> Result<Dims, String> {
    parse_dimensions(s).map(Dims).map_err(|e| e.to_string())
}

fn parse_bounds(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected LOW,HIGH, got `{s}`"))?;
    let lo = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

fn parse_scale(s: &str) -> Result<HScale, String> {
    match s {
        "inv-sqrt-m" => Ok(HScale::InvSqrtM),
        "unit" => Ok(HScale::Unit),
        other => Err(format!("unknown scaling `{other}` (inv-sqrt-m or unit)")),
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Problem id, P01 to P20.
    #[arg(long)]
    problem: String,
    /// Dimension.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Initial point id (see `bench --help` for the list).
    #[arg(long, default_value = "x0_one")]
    x0: String,
    /// gmopcgm, gcgpm, mopcgm or cgpm.
    #[arg(long, value_parser = parse_method, default_value = "gcgpm")]
    solver: Method,
    #[command(flatten)]
    overrides: Overrides,
    /// Write the per-iteration trace to this CSV file.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Use the classical interior term of the Trigexp problem (P09).
    #[arg(long)]
    classic_trigexp: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// desk: n in {100, 1000} and 5 starting points; full: n in {1000,
    /// 10000, 50000} and all 14 starting points.
    #[arg(long, default_value = "full", value_parser = ["desk", "full"])]
    suite: String,
    /// Shorthand for `--suite desk`.
    #[arg(long)]
    desk: bool,
    /// Comma-separated dimensions, overriding the suite.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Dims>,
    /// Comma-separated problem ids (default: all).
    #[arg(long, value_delimiter = ',')]
    problems: Vec<String>,
    /// Comma-separated initial point ids (default: the suite's set).
    #[arg(long, value_delimiter = ',')]
    x0s: Vec<String>,
    /// Comma-separated solvers (default: all four).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    solvers: Vec<Method>,
    #[command(flatten)]
    overrides: Overrides,
    /// Worker threads (default: SOLVER_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    classic_trigexp: bool,
    /// Results CSV path.
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// Results CSV written by `bench`.
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// iters, fevals or time.
    #[arg(long, value_parser = parse_metric, default_value = "fevals")]
    metric: Metric,
    /// Solvers to compare (default: every solver in the file).
    #[arg(long, value_delimiter = ',')]
    solvers: Vec<String>,
    /// Profile CSV path.
    #[arg(long, default_value = "profile.csv")]
    out: PathBuf,
    /// Gnuplot data path (default: the CSV path with a .dat extension).
    #[arg(long)]
    dat: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CsArgs {
    /// Signal length.
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// Number of measurements.
    #[arg(long, default_value_t = 2048)]
    m: usize,
    /// Number of nonzeros.
    #[arg(long, default_value_t = 512)]
    k: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    /// Seed of the first repetition; repetition i uses seed + i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Methods to run, comma-separated (default: all four).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    method: Vec<Method>,
    /// Number of repetitions.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// ℓ₁ weight (default: 0.01·‖Hᵀy‖∞).
    #[arg(long)]
    eta: Option<f64>,
    /// Sensing matrix scaling: inv-sqrt-m or unit.
    #[arg(long, value_parser = parse_scale, default_value = "inv-sqrt-m")]
    h_scale: HScale,
    #[command(flatten)]
    overrides: Overrides,
    /// Summary CSV path.
    #[arg(long, default_value = "cs_summary.csv")]
    out: PathBuf,
    /// Signals CSV for the first repetition.
    #[arg(long)]
    signals: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Fixed dimension (default: random in 3..=10 per trial).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Relative tolerance of the identities.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Also write the per-check summary CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TuneArgs {
    /// gmopcgm or gcgpm.
    #[arg(long, value_parser = parse_method, default_value = "gcgpm")]
    solver: Method,
    /// grid or random.
    #[arg(long, value_parser = parse_sampler, default_value = "grid")]
    sampler: Sampler,
    /// Number of samples (the grid uses the largest square not above it).
    #[arg(long, default_value_t = 50)]
    budget: usize,
    #[arg(long, value_parser = parse_bounds, default_value = "0.1,10")]
    tau_bounds: (f64, f64),
    #[arg(long, value_parser = parse_bounds, default_value = "0.1,10")]
    lambda0_bounds: (f64, f64),
    #[arg(long, value_delimiter = ',')]
    problems: Vec<String>,
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Dims>,
    #[arg(long, value_delimiter = ',')]
    x0s: Vec<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long)]
    threads: Option<usize>,
    /// Study CSV path.
    #[arg(long, default_value = "study.csv")]
    out: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>, Box<dyn std::error::Error>> {
    let f = File::create(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn cmd_solve(a: SolveArgs) -> CliResult {
    let registry = RegistryOptions {
        classic_trigexp: a.classic_trigexp,
    };
    let p = problem_with(&a.problem, a.n, registry)?;
    let mut x0 = initial_point(&a.x0)?.generate(a.n);
    project_in_place(&mut x0, p.feasible_set());
    let cfg = a.overrides.apply(SolverConfig::defaults(a.solver))?;
    let rep = solve_traced(&p, &x0, a.solver, &cfg)?;
    println!(
        "problem: {} n={} x0={} solver={}",
        p.id(),
        a.n,
        a.x0,
        a.solver
    );
    println!("status: {}", rep.status);
    println!("iterations: {}", rep.iterations);
    println!("fevals: {}", rep.fevals);
    println!("time_s: {:.6}", rep.wall_time_s);
    println!("final_gnorm: {:.6e}", rep.final_gnorm);
    if let (Some(path), Some(trace)) = (&a.trace, &rep.trace) {
        let mut w = create(path)?;
        write_trace_csv(&mut w, trace)?;
        w.flush()?;
        println!("trace: {} rows -> {}", trace.len(), path.display());
    }
    Ok(if rep.converged() { 0 } else { 2 })
}

fn cmd_bench(a: BenchArgs) -> CliResult {
    let desk = a.desk || a.suite == "desk";
    let dims = a.dims.map(|d| d.0).unwrap_or_else(|| {
        if desk {
            desk_dimensions()
        } else {
            dimensions()
        }
    });
    let problems = if a.problems.is_empty() {
        PROBLEM_IDS.iter().map(|s| s.to_string()).collect()
    } else {
        a.problems
    };
    let x0s = if !a.x0s.is_empty() {
        a.x0s
    } else if desk {
        DESK_INITIAL_POINTS.iter().map(|s| s.to_string()).collect()
    } else {
        initial_points().iter().map(|s| s.id.to_string()).collect()
    };
    let methods = if a.solvers.is_empty() {
        Method::ALL.to_vec()
    } else {
        a.solvers
    };
    let solvers = methods
        .iter()
        .map(|&m| Ok((m, a.overrides.apply(SolverConfig::defaults(m))?)))
        .collect::<Result<Vec<_>, Box<dyn std::error::Error>>>()?;
    let spec = SuiteSpec {
        solvers,
        problems,
        dims,
        x0s,
        registry: RegistryOptions {
            classic_trigexp: a.classic_trigexp,
        },
        threads: a.threads,
    };
    let records = run_suite(&spec)?;
    let mut w = create(&a.out)?;
    write_results_csv(&mut w, &records)?;
    w.flush()?;
    let solved = records.iter().filter(|r| r.status.is_success()).count();
    println!(
        "results: {} runs ({} solved) -> {}",
        records.len(),
        solved,
        a.out.display()
    );
    Ok(0)
}

fn cmd_profile(a: ProfileArgs) -> CliResult {
    let f = File::open(&a.input).map_err(|e| format!("cannot read {}: {e}", a.input.display()))?;
    let records = read_results_csv(BufReader::new(f))?;
    let solvers = if a.solvers.is_empty() {
        let mut s: Vec<String> = Vec::new();
        for r in &records {
            if !s.contains(&r.solver_id) {
                s.push(r.solver_id.clone());
            }
        }
        s
    } else {
        a.solvers
    };
    let curves = performance_profile(&records, a.metric, &solvers)?;
    let mut w = create(&a.out)?;
    write_profile_csv(&mut w, &curves)?;
    w.flush()?;
    let dat = a.dat.unwrap_or_else(|| a.out.with_extension("dat"));
    let mut w = create(&dat)?;
    write_profile_dat(&mut w, &curves)?;
    w.flush()?;
    for c in &curves {
        println!(
            "{}: best on {:.1}%, solved {:.1}%",
            c.solver_id,
            100.0 * c.rho_at(1.0),
            100.0 * c.final_rho()
        );
    }
    println!(
        "profile ({}): {} -> {}, {}",
        a.metric,
        curves.len(),
        a.out.display(),
        dat.display()
    );
    Ok(0)
}

fn cmd_cs(a: CsArgs) -> CliResult {
    if a.reps == 0 {
        return Err("--reps must be at least 1".into());
    }
    let params = CsParams {
        eta: a.eta,
        scale: a.h_scale,
        ..CsParams::new(a.n, a.m, a.k, a.sigma, a.seed)
    };
    let methods = if a.method.is_empty() {
        Method::ALL.to_vec()
    } else {
        a.method
    };
    let methods = methods
        .iter()
        .map(|&m| Ok((m, a.overrides.apply(SolverConfig::cs_defaults(m))?)))
        .collect::<Result<Vec<_>, Box<dyn std::error::Error>>>()?;
    let seeds: Vec<u64> = (0..a.reps as u64).map(|i| a.seed + i).collect();
    let res = batch_experiment(&params, &methods, &seeds)?;

    let mut w = create(&a.out)?;
    write_summary_csv(&mut w, &res.rows)?;
    w.flush()?;
    for r in &res.rows {
        println!(
            "{}: iterations {:.1}, fevals {:.1}, time {:.3}s, mse {:.4e}",
            r.method.label(),
            r.iterations,
            r.function_evals,
            r.time,
            r.mse
        );
    }
    println!("summary: {} rows -> {}", res.rows.len(), a.out.display());

    if let Some(path) = &a.signals {
        let inst = Arc::new(generate_with(&params.with_seed(seeds[0]))?);
        let recovered: Vec<(Method, Vec<f64>)> = res
            .runs
            .iter()
            .filter(|r| r.seed == seeds[0])
            .map(|r| (r.method, r.recovery.x_rec.clone()))
            .collect();
        let mut w = create(path)?;
        write_signals_csv(&mut w, &inst, &recovered)?;
        w.flush()?;
        println!("signals: {} samples -> {}", inst.n, path.display());
    }
    let all_converged = res.runs.iter().all(|r| r.recovery.report.converged());
    Ok(if all_converged { 0 } else { 2 })
}

fn cmd_verify(a: VerifyArgs) -> CliResult {
    let rep = verify(&VerifyOptions {
        trials: a.trials,
        n: a.n,
        seed: a.seed,
        tol: a.tol,
    })?;
    print!("{}", rep.to_table());
    if let Some(path) = &a.out {
        fs::write(path, rep.to_csv())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        println!("checks -> {}", path.display());
    }
    Ok(if rep.all_passed() { 0 } else { 2 })
}

fn cmd_tune(a: TuneArgs) -> CliResult {
    let mut opts = StudyOptions::new(a.solver, a.sampler, a.budget);
    opts.tau_bounds = a.tau_bounds;
    opts.lambda0_bounds = a.lambda0_bounds;
    if !a.problems.is_empty() {
        opts.problems = a.problems;
    }
    if let Some(d) = a.dims {
        opts.dims = d.0;
    }
    if !a.x0s.is_empty() {
        opts.x0s = a.x0s;
    }
    opts.seed = a.seed;
    opts.base = a.overrides.apply(SolverConfig::defaults(a.solver))?;
    opts.threads = a.threads;
    let rows = parameter_study(&opts)?;
    let mut w = create(&a.out)?;
    write_study_csv(&mut w, &rows)?;
    w.flush()?;
    if let Some(best) = rows
        .iter()
        .min_by(|x, y| x.objective.total_cmp(&y.objective))
    {
        println!(
            "best: tau={} lambda0={} objective={}",
            best.tau, best.lambda0, best.objective
        );
    }
    println!("study: {} samples -> {}", rows.len(), a.out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Profile(a) => cmd_profile(a),
        Command::Cs(a) => cmd_cs(a),
        Command::VerifySpectral(a) => cmd_verify(a),
        Command::Tune(a) => cmd_tune(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
