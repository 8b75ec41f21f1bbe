//! Sparse signal recovery through the monotone reformulation
//! `G(z) = min{z, Qz + d} = 0` of the ℓ₁-regularized least-squares problem
//!
//! ```text
//! min_x ½‖y − Hx‖² + η‖x‖₁,   x = z₁ − z₂,  z = (z₁, z₂) ≥ 0.
//! ```
//!
//! `Q` is `2n × 2n` and never formed; one residual costs a single sweep over
//! the rows of `H`.

use std::io::Write;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::config::{Method, SolverConfig};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dist, dot, norm};
use crate::problem::{FeasibleSet, Problem};
use crate::report::SolveReport;
use crate::solver::solve;

pub const SUMMARY_HEADER: &str = "algorithm,iterations,function_evals,time,mse";

/// Column scaling of the Gaussian sensing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HScale {
    /// Entries `N(0, 1/m)`.
    #[default]
    InvSqrtM,
    /// Entries `N(0, 1)`.
    Unit,
}

/// Parameters of a synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CsParams {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub sigma: f64,
    pub seed: u64,
    /// Overrides the default `η = 0.01·‖Hᵀy‖∞`.
    pub eta: Option<f64>,
    pub scale: HScale,
}

impl CsParams {
    pub fn new(n: usize, m: usize, k: usize, sigma: f64, seed: u64) -> Self {
        CsParams {
            n,
            m,
            k,
            sigma,
            seed,
            eta: None,
            scale: HScale::default(),
        }
    }

    /// `n = 4096, m = 2048, k = 512, σ = 0.01`.
    pub fn full_scale(seed: u64) -> Self {
        CsParams::new(4096, 2048, 512, 0.01, seed)
    }

    /// `n = 1024, m = 512, k = 64, σ = 0.01`.
    pub fn desk_scale(seed: u64) -> Self {
        CsParams::new(1024, 512, 64, 0.01, seed)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        CsParams {
            seed,
            ..self.clone()
        }
    }
}

/// A generated recovery problem. Immutable once built.
#[derive(Debug, Clone)]
pub struct CsInstance {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    /// `m × n`, row-major.
    h: Vec<f64>,
    pub y: Vec<f64>,
    pub x_true: Vec<f64>,
    pub eta: f64,
    pub seed: u64,
    hty: Vec<f64>,
}

/// Draws an instance with default `η` and `H` scaling.
pub fn generate(n: usize, m: usize, k: usize, sigma: f64, seed: u64) -> Result<CsInstance> {
    generate_with(&CsParams::new(n, m, k, sigma, seed))
}

pub fn generate_with(params: &CsParams) -> Result<CsInstance> {
    let &CsParams {
        n,
        m,
        k,
        sigma,
        seed,
        ..
    } = params;
    if !(k < m && m < n) {
        return Err(Error::InvalidArgument(format!(
            "need k < m < n, got k={k}, m={m}, n={n}"
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise level {sigma} must be >= 0"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = match params.scale {
        HScale::InvSqrtM => 1.0 / (m as f64).sqrt(),
        HScale::Unit => 1.0,
    };
    let h: Vec<f64> = (0..m * n)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();

    let mut x_true = vec![0.0; n];
    for i in sample(&mut rng, n, k) {
        x_true[i] = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    }

    let mut y = vec![0.0; m];
    for (yi, row) in y.iter_mut().zip(h.chunks_exact(n)) {
        *yi = dot(row, &x_true);
    }
    if sigma > 0.0 {
        for yi in y.iter_mut() {
            *yi += sigma * rng.sample::<f64, _>(StandardNormal);
        }
    }

    let mut inst = CsInstance {
        n,
        m,
        k,
        h,
        y,
        x_true,
        eta: 0.0,
        seed,
        hty: Vec::new(),
    };
    inst.hty = inst.apply_ht(&inst.y);
    inst.eta = match params.eta {
        Some(eta) if eta >= 0.0 && eta.is_finite() => eta,
        Some(eta) => return Err(Error::InvalidArgument(format!("eta {eta} must be >= 0"))),
        None => 0.01 * inst.hty.iter().fold(0.0f64, |a, v| a.max(v.abs())),
    };
    Ok(inst)
}

impl CsInstance {
    /// Entry `H[i][j]`.
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.h[i * self.n + j]
    }

    /// `H x`.
    pub fn apply_h(&self, x: &[f64]) -> Vec<f64> {
        self.h.chunks_exact(self.n).map(|row| dot(row, x)).collect()
    }

    /// `Hᵀ r`.
    pub fn apply_ht(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (row, &ri) in self.h.chunks_exact(self.n).zip(r) {
            axpy(ri, row, &mut out);
        }
        out
    }

    /// `HᵀH u` in one sweep over the rows of `H`.
    fn apply_gram(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for row in self.h.chunks_exact(self.n) {
            axpy(dot(row, u), row, &mut out);
        }
        out
    }

    /// `Hᵀy`, the back-projected observation.
    pub fn backprojection(&self) -> &[f64] {
        &self.hty
    }

    /// `d = (ηe − Hᵀy, ηe + Hᵀy)`.
    pub fn d(&self) -> Vec<f64> {
        let mut d: Vec<f64> = self.hty.iter().map(|v| self.eta - v).collect();
        d.extend(self.hty.iter().map(|v| self.eta + v));
        d
    }

    /// `z₀ = (max(Hᵀy, 0), max(−Hᵀy, 0))`.
    pub fn initial_point(&self) -> Vec<f64> {
        let mut z: Vec<f64> = self.hty.iter().map(|v| v.max(0.0)).collect();
        z.extend(self.hty.iter().map(|v| (-v).max(0.0)));
        z
    }

    fn residual_into(&self, z: &[f64], out: &mut [f64]) {
        let n = self.n;
        let (z1, z2) = z.split_at(n);
        let u: Vec<f64> = z1.iter().zip(z2).map(|(a, b)| a - b).collect();
        let w = self.apply_gram(&u);
        for i in 0..n {
            out[i] = z1[i].min(w[i] + self.eta - self.hty[i]);
            out[n + i] = z2[i].min(-w[i] + self.eta + self.hty[i]);
        }
    }

    /// The residual as a solver problem over the nonnegative orthant.
    pub fn problem(self: &Arc<Self>) -> Problem {
        let inst = Arc::clone(self);
        Problem::new(
            "cs",
            2 * self.n,
            FeasibleSet::nonnegative_orthant(),
            move |z, out| inst.residual_into(z, out),
        )
    }
}

/// `min(z, Qz + d)` evaluated matrix-free.
pub fn cs_residual(z: &[f64], inst: &CsInstance) -> Result<Vec<f64>> {
    if z.len() != 2 * inst.n {
        return Err(Error::DimensionMismatch {
            expected: 2 * inst.n,
            got: z.len(),
        });
    }
    if !z.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("z is not finite".into()));
    }
    let mut out = vec![0.0; z.len()];
    inst.residual_into(z, &mut out);
    Ok(out)
}

/// `(z₁ − z₂)`.
pub fn unsplit(z: &[f64]) -> Vec<f64> {
    let (a, b) = z.split_at(z.len() / 2);
    a.iter().zip(b).map(|(p, q)| p - q).collect()
}

/// `‖x − x_rec‖ / n`.
pub fn mse(x_true: &[f64], x_rec: &[f64]) -> f64 {
    dist(x_true, x_rec) / x_true.len() as f64
}

#[derive(Debug, Clone)]
pub struct Recovery {
    pub x_rec: Vec<f64>,
    pub report: SolveReport,
    pub mse: f64,
    /// `‖x_rec − x_true‖ / ‖x_true‖`.
    pub rel_err: f64,
}

/// Solves the reformulated problem from the split back-projection.
/// A non-converged run still returns its last iterate.
pub fn recover(inst: &Arc<CsInstance>, method: Method, cfg: &SolverConfig) -> Result<Recovery> {
    let problem = inst.problem();
    let report = solve(&problem, &inst.initial_point(), method, cfg)?;
    let x_rec = unsplit(&report.solution);
    let mse = mse(&inst.x_true, &x_rec);
    let rel_err = dist(&inst.x_true, &x_rec) / norm(&inst.x_true);
    Ok(Recovery {
        x_rec,
        report,
        mse,
        rel_err,
    })
}

/// One recovery in a batch.
#[derive(Debug, Clone)]
pub struct BatchRun {
    pub method: Method,
    pub seed: u64,
    pub recovery: Recovery,
}

/// Per-method means over the batch.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub iterations: f64,
    pub function_evals: f64,
    pub time: f64,
    pub mse: f64,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<BatchRun>,
}

/// One instance per seed, every method recovering each instance.
pub fn batch_experiment(
    params: &CsParams,
    methods: &[(Method, SolverConfig)],
    seeds: &[u64],
) -> Result<BatchResult> {
    if seeds.is_empty() || methods.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one seed and one method".into(),
        ));
    }
    let per_seed: Vec<Vec<BatchRun>> = seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<BatchRun>> {
            let inst = Arc::new(generate_with(&params.with_seed(seed))?);
            methods
                .iter()
                .map(|(method, cfg)| {
                    Ok(BatchRun {
                        method: *method,
                        seed,
                        recovery: recover(&inst, *method, cfg)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let runs: Vec<BatchRun> = per_seed.into_iter().flatten().collect();

    let reps = seeds.len() as f64;
    let rows = methods
        .iter()
        .map(|(method, _)| {
            let mine = runs.iter().filter(|r| r.method == *method);
            let (mut it, mut fe, mut t, mut e) = (0.0, 0.0, 0.0, 0.0);
            for r in mine {
                it += r.recovery.report.iterations as f64;
                fe += r.recovery.report.fevals as f64;
                t += r.recovery.report.wall_time_s;
                e += r.recovery.mse;
            }
            SummaryRow {
                method: *method,
                iterations: it / reps,
                function_evals: fe / reps,
                time: t / reps,
                mse: e / reps,
            }
        })
        .collect();
    Ok(BatchResult { rows, runs })
}

pub fn write_summary_csv<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER.split(','))?;
    for r in rows {
        out.write_record([
            r.method.label().to_string(),
            r.iterations.to_string(),
            r.function_evals.to_string(),
            format!("{:.6}", r.time),
            format!("{:.6e}", r.mse),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Ground truth, back-projection and one recovered column per method.
pub fn write_signals_csv<W: Write>(
    w: W,
    inst: &CsInstance,
    recovered: &[(Method, Vec<f64>)],
) -> Result<()> {
    for (_, x) in recovered {
        if x.len() != inst.n {
            return Err(Error::DimensionMismatch {
                expected: inst.n,
                got: x.len(),
            });
        }
    }
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec![
        "index".to_string(),
        "x_true".to_string(),
        "x_observed_backprojection".to_string(),
    ];
    header.extend(
        recovered
            .iter()
            .map(|(m, _)| format!("x_recovered_{}", m.as_str())),
    );
    out.write_record(&header)?;
    for i in 0..inst.n {
        let mut row = vec![
            i.to_string(),
            inst.x_true[i].to_string(),
            inst.hty[i].to_string(),
        ];
        row.extend(recovered.iter().map(|(_, x)| x[i].to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
