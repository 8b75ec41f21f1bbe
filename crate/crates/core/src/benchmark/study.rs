use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run_suite, SuiteSpec};
use crate::config::{Method, SolverConfig};
use crate::error::{Error, Result};
use crate::problems::RegistryOptions;

pub const STUDY_HEADER: &str = "tau,lambda0,objective,status_counts";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Grid,
    Random,
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "grid" => Ok(Sampler::Grid),
            "random" => Ok(Sampler::Random),
            other => Err(Error::InvalidArgument(format!("unknown sampler `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyOptions {
    pub method: Method,
    pub sampler: Sampler,
    pub budget: usize,
    pub tau_bounds: (f64, f64),
    pub lambda0_bounds: (f64, f64),
    pub problems: Vec<String>,
    pub dims: Vec<usize>,
    pub x0s: Vec<String>,
    pub seed: u64,
    /// Parameters not being studied.
    pub base: SolverConfig,
    pub threads: Option<usize>,
}

impl StudyOptions {
    pub fn new(method: Method, sampler: Sampler, budget: usize) -> Self {
        StudyOptions {
            method,
            sampler,
            budget,
            tau_bounds: (0.1, 10.0),
            lambda0_bounds: (0.1, 10.0),
            problems: vec![
                "P01".into(),
                "P03".into(),
                "P13".into(),
                "P16".into(),
                "P17".into(),
            ],
            dims: vec![100],
            x0s: vec!["x0_one".into(), "x0_k_over_m".into()],
            seed: 1,
            base: SolverConfig::defaults(method),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub tau: f64,
    pub lambda0: f64,
    /// Total function evaluations plus `3·max_iter` per failed run.
    pub objective: f64,
    pub status_counts: BTreeMap<&'static str, usize>,
}

fn check_bounds(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
        return Err(Error::InvalidArgument(format!(
            "{name} bounds [{lo}, {hi}] must satisfy 0 < low <= high"
        )));
    }
    Ok(())
}

fn lattice(lo: f64, hi: f64, i: usize, side: usize) -> f64 {
    if side == 1 {
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * i as f64 / (side - 1) as f64
    }
}

/// A `⌊√budget⌋ × ⌊√budget⌋` lattice, `τ` varying slowest.
pub fn grid_samples(budget: usize, tau: (f64, f64), lambda0: (f64, f64)) -> Vec<(f64, f64)> {
    let side = (budget as f64).sqrt().floor().max(1.0) as usize;
    let side = if (side + 1) * (side + 1) <= budget {
        side + 1
    } else {
        side
    };
    let mut out = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            out.push((
                lattice(tau.0, tau.1, i, side),
                lattice(lambda0.0, lambda0.1, j, side),
            ));
        }
    }
    out
}

/// `budget` pairs drawn uniformly from the box.
pub fn random_samples(
    budget: usize,
    tau: (f64, f64),
    lambda0: (f64, f64),
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |(lo, hi): (f64, f64)| {
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..=hi)
        }
    };
    (0..budget).map(|_| (draw(tau), draw(lambda0))).collect()
}

/// Config for one sample. For GCGPM the spectral window is widened when
/// needed so that `α_min ≥ (1+τ)/2` keeps the descent constant positive.
fn sample_config(base: &SolverConfig, method: Method, tau: f64, lambda0: f64) -> SolverConfig {
    let mut cfg = base.clone();
    cfg.tau = tau;
    cfg.lambda0 = lambda0;
    if method == Method::Gcgpm {
        cfg.alpha_min = cfg.alpha_min.max(0.5 * (1.0 + tau));
        cfg.alpha_max = cfg.alpha_max.max(cfg.alpha_min);
    }
    cfg
}

/// Evaluates the objective at every sampled `(τ, λ₀)`.
pub fn parameter_study(opts: &StudyOptions) -> Result<Vec<StudyRow>> {
    if !matches!(opts.method, Method::Gmopcgm | Method::Gcgpm) {
        return Err(Error::InvalidArgument(
            "the parameter study supports gmopcgm and gcgpm".into(),
        ));
    }
    if opts.budget == 0 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    check_bounds("tau", opts.tau_bounds)?;
    check_bounds("lambda0", opts.lambda0_bounds)?;

    let samples = match opts.sampler {
        Sampler::Grid => grid_samples(opts.budget, opts.tau_bounds, opts.lambda0_bounds),
        Sampler::Random => {
            random_samples(opts.budget, opts.tau_bounds, opts.lambda0_bounds, opts.seed)
        }
    };

    samples
        .into_iter()
        .map(|(tau, lambda0)| {
            let cfg = sample_config(&opts.base, opts.method, tau, lambda0);
            let penalty = 3.0 * cfg.max_iter as f64;
            let spec = SuiteSpec {
                solvers: vec![(opts.method, cfg)],
                problems: opts.problems.clone(),
                dims: opts.dims.clone(),
                x0s: opts.x0s.clone(),
                registry: RegistryOptions::default(),
                threads: opts.threads,
            };
            let records = run_suite(&spec)?;
            let mut status_counts = BTreeMap::new();
            let mut objective = 0.0;
            for r in &records {
                *status_counts.entry(r.status.as_str()).or_insert(0) += 1;
                objective += r.fevals as f64;
                if !r.status.is_success() {
                    objective += penalty;
                }
            }
            Ok(StudyRow {
                tau,
                lambda0,
                objective,
                status_counts,
            })
        })
        .collect()
}

pub fn write_study_csv<W: Write>(w: W, rows: &[StudyRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(STUDY_HEADER.split(','))?;
    for r in rows {
        let counts = r
            .status_counts
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect::<Vec<_>>()
            .join(";");
        out.write_record([
            r.tau.to_string(),
            r.lambda0.to_string(),
            r.objective.to_string(),
            counts,
        ])?;
    }
    out.flush()?;
    Ok(())
}
