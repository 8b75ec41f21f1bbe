//! Dense oracle for the spectral structure of the memoryless update
//!
//! ```text
//! Q̃ = λI − λ(ysᵀ + syᵀ)/(2yᵀs) + t ssᵀ/(yᵀs)
//! ```
//!
//! The matrix is assembled explicitly and its eigenvalues are computed by
//! cyclic Jacobi rotations, independent of the solver code. The checks
//! compare trace, Frobenius norm, eigenvalue pair sum/product and
//! definiteness against their closed forms.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_sq};

/// Row-major dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `tr(AᵀA)`, i.e. the squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n)
    }
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, in
/// ascending order.
pub fn symmetric_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
    let n = m.n;
    let mut a = m.clone();
    let scale = a.frobenius_sq().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

/// Inputs of the update: `s`, `y` with `sᵀy > 0`, scaling `λ > 0` and `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCase {
    pub s: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
    pub t: f64,
}

impl SpectralCase {
    pub fn new(s: Vec<f64>, y: Vec<f64>, lambda: f64, t: f64) -> Result<Self> {
        if s.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                got: y.len(),
            });
        }
        if !(dot(&s, &y) > 0.0) {
            return Err(Error::InvalidArgument("spectral case needs sᵀy > 0".into()));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument("spectral case needs λ > 0".into()));
        }
        Ok(SpectralCase { s, y, lambda, t })
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn sy(&self) -> f64 {
        dot(&self.s, &self.y)
    }

    /// `a = ‖s‖²/sᵀy`
    pub fn a(&self) -> f64 {
        norm_sq(&self.s) / self.sy()
    }

    /// `b² = ‖s‖²‖y‖²/(sᵀy)²`
    pub fn b_sq(&self) -> f64 {
        norm_sq(&self.s) * norm_sq(&self.y) / self.sy().powi(2)
    }

    /// `t* = λ sᵀy/‖s‖²`, the minimizer of `(η⁺ − η⁻)²`.
    pub fn t_star(&self) -> f64 {
        self.lambda / self.a()
    }

    /// Smallest `t` for which `Q̃` is positive definite:
    /// `λ(b² − 1)/(4a)`.
    pub fn pd_threshold(&self) -> f64 {
        self.lambda * (self.b_sq() - 1.0) / (4.0 * self.a())
    }

    /// `s` and `y` parallel up to `10⁻¹⁰` in cosine.
    pub fn is_degenerate(&self) -> bool {
        let sy = self.sy().abs();
        sy >= (1.0 - 1e-10) * (norm_sq(&self.s) * norm_sq(&self.y)).sqrt()
    }

    pub fn with_t(&self, t: f64) -> Self {
        SpectralCase { t, ..self.clone() }
    }
}

/// Assembles `Q̃` termwise.
pub fn build_qtilde(case: &SpectralCase) -> Result<DenseMatrix> {
    let sy = case.sy();
    if !(sy > 0.0) {
        return Err(Error::InvalidArgument("sᵀy must be positive".into()));
    }
    let n = case.n();
    let (s, y, lambda, t) = (&case.s, &case.y, case.lambda, case.t);
    let mut q = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { lambda } else { 0.0 };
            let v = id - lambda * y[i] * s[j] / (2.0 * sy) - lambda * s[i] * y[j] / (2.0 * sy)
                + t * s[i] * s[j] / sy;
            q.set(i, j, v);
        }
    }
    Ok(q)
}

/// `(dense trace, λ(n−1) + t‖s‖²/sᵀy)`
pub fn check_trace(case: &SpectralCase) -> Result<(f64, f64)> {
    let lhs = build_qtilde(case)?.trace();
    let rhs = case.lambda * (case.n() as f64 - 1.0) + case.t * case.a();
    Ok((lhs, rhs))
}

/// `(dense tr(Q̃ᵀQ̃), λ²(n − 3/2) + (λ²/2) b² + t² ‖s‖⁴/(sᵀy)²)`
pub fn check_frobenius(case: &SpectralCase) -> Result<(f64, f64)> {
    let q = build_qtilde(case)?;
    let qt = q.transpose();
    // diagonal of QᵀQ: entry i is (column i of Q)·(column i of Q)
    let lhs = qt.rows().map(|col| dot(col, col)).sum::<f64>();
    let lambda = case.lambda;
    let rhs = lambda * lambda * (case.n() as f64 - 1.5)
        + 0.5 * lambda * lambda * case.b_sq()
        + case.t * case.t * case.a().powi(2);
    Ok((lhs, rhs))
}

/// Closed-form and eigen-derived sum and product of the two eigenvalues
/// outside the `λ`-eigenspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPairCheck {
    pub sum: f64,
    pub product: f64,
    pub eig_sum: f64,
    pub eig_prod: f64,
    /// Number of eigenvalues within `10⁻⁸·max(1,λ)` of `λ`.
    pub lambda_multiplicity: usize,
    pub pair: (f64, f64),
}

/// Splits the spectrum into the `n − 2` copies of `λ` and the remaining pair.
/// Returns `None` for degenerate (parallel) `s`, `y`.
pub fn check_eigen_pair(case: &SpectralCase) -> Result<Option<EigenPairCheck>> {
    if case.is_degenerate() {
        return Ok(None);
    }
    let eig = symmetric_eigenvalues(&build_qtilde(case)?);
    let lambda = case.lambda;
    let tol = 1e-8 * lambda.max(1.0);
    let lambda_multiplicity = eig.iter().filter(|e| (*e - lambda).abs() <= tol).count();
    let mut by_distance: Vec<f64> = eig.clone();
    by_distance.sort_by(|a, b| (a - lambda).abs().total_cmp(&(b - lambda).abs()));
    let (e1, e2) = (by_distance[case.n() - 2], by_distance[case.n() - 1]);
    let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
    let a = case.a();
    let b_sq = case.b_sq();
    Ok(Some(EigenPairCheck {
        sum: lambda + a * case.t,
        product: lambda * lambda / 4.0 - lambda * lambda * b_sq / 4.0 + lambda * a * case.t,
        eig_sum: lo + hi,
        eig_prod: lo * hi,
        lambda_multiplicity,
        pair: (lo, hi),
    }))
}

fn pair_gap_sq(case: &SpectralCase) -> Result<Option<f64>> {
    Ok(check_eigen_pair(case)?.map(|c| (c.pair.1 - c.pair.0).powi(2)))
}

/// Result of scanning `t` for the minimizer of `(η⁺ − η⁻)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalTCheck {
    pub t_star: f64,
    pub grid_argmin: f64,
    /// Ratio between adjacent grid points.
    pub cell_ratio: f64,
    pub brackets: bool,
    pub pd_threshold: f64,
    /// Smallest eigenvalue at `t = threshold + margin` (or at a small
    /// positive `t` when the threshold is not positive).
    pub min_eig_above: f64,
    /// Smallest eigenvalue at half the threshold; only when the threshold
    /// is positive.
    pub min_eig_below: Option<f64>,
}

pub const GRID_POINTS: usize = 200;

/// Scans 200 log-spaced `t` over `[t*/100, 100 t*]` using the dense
/// eigensolver and checks the positive-definiteness threshold on both sides.
pub fn check_optimal_t(case: &SpectralCase) -> Result<Option<OptimalTCheck>> {
    if case.is_degenerate() {
        return Ok(None);
    }
    let t_star = case.t_star();
    let (lo, hi) = ((t_star * 1e-2).ln(), (t_star * 1e2).ln());
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let mut best = (f64::INFINITY, f64::NAN);
    for i in 0..GRID_POINTS {
        let t = (lo + step * i as f64).exp();
        let Some(gap) = pair_gap_sq(&case.with_t(t))? else {
            return Ok(None);
        };
        if gap < best.0 {
            best = (gap, t);
        }
    }
    let cell_ratio = step.exp();
    let grid_argmin = best.1;
    let brackets = grid_argmin / cell_ratio <= t_star && t_star <= grid_argmin * cell_ratio;

    let threshold = case.pd_threshold();
    let margin = 1e-6 * (1.0 + threshold.abs());
    let t_above = if threshold > 0.0 {
        threshold + margin
    } else {
        margin
    };
    let min_eig =
        |t: f64| -> Result<f64> { Ok(symmetric_eigenvalues(&build_qtilde(&case.with_t(t))?)[0]) };
    let min_eig_above = min_eig(t_above)?;
    let min_eig_below = if threshold > 0.0 {
        Some(min_eig(0.5 * threshold)?)
    } else {
        None
    };
    Ok(Some(OptimalTCheck {
        t_star,
        grid_argmin,
        cell_ratio,
        brackets,
        pd_threshold: threshold,
        min_eig_above,
        min_eig_below,
    }))
}

/// Draws a random case of dimension `n` with `sᵀy > 0` and `t = t*`.
pub fn random_case<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SpectralCase {
    loop {
        let s: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if dot(&s, &y) <= 1e-3 {
            continue;
        }
        let lambda = rng.random_range(0.1..5.0);
        let case = SpectralCase {
            s,
            y,
            lambda,
            t: 0.0,
        };
        let t = case.t_star();
        return case.with_t(t);
    }
}

#[inline]
fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Aggregated pass/fail counts and worst deviation for one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub name: &'static str,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub max_deviation: f64,
}

impl CheckSummary {
    fn new(name: &'static str) -> Self {
        CheckSummary {
            name,
            passed: 0,
            failed: 0,
            skipped: 0,
            max_deviation: 0.0,
        }
    }

    fn record(&mut self, ok: bool, deviation: f64) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        if deviation.is_finite() {
            self.max_deviation = self.max_deviation.max(deviation);
        } else {
            self.max_deviation = f64::INFINITY;
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Settings of a randomized verification run.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub trials: usize,
    /// Fixed dimension; `None` draws `n ∈ {3, …, 10}` per trial.
    pub n: Option<usize>,
    pub seed: u64,
    /// Relative tolerance for the closed-form comparisons.
    pub tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            trials: 1000,
            n: None,
            seed: 1,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckSummary>,
    /// Cases where `Q̃(t*)` came out positive definite (reported only; this
    /// holds exactly when `b² < 5`).
    pub pd_at_t_star: usize,
    pub trials: usize,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckSummary::all_passed)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<22} {:>7} {:>7} {:>7} {:>12}",
            "check", "passed", "failed", "skipped", "max_dev"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<22} {:>7} {:>7} {:>7} {:>12.3e}",
                c.name, c.passed, c.failed, c.skipped, c.max_deviation
            );
        }
        let _ = writeln!(
            out,
            "positive definite at t*: {}/{} cases",
            self.pd_at_t_star, self.trials
        );
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,passed,failed,skipped,max_deviation\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6e}",
                c.name, c.passed, c.failed, c.skipped, c.max_deviation
            );
        }
        out
    }
}

/// Runs every check over `opts.trials` random cases.
pub fn verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    if let Some(n) = opts.n {
        if n < 2 {
            return Err(Error::InvalidArgument("spectral checks need n ≥ 2".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut trace = CheckSummary::new("trace");
    let mut frob = CheckSummary::new("frobenius");
    let mut sum = CheckSummary::new("eigen_sum");
    let mut prod = CheckSummary::new("eigen_product");
    let mut mult = CheckSummary::new("lambda_multiplicity");
    let mut pd = CheckSummary::new("pd_threshold");
    let mut opt_t = CheckSummary::new("optimal_t");
    let mut pd_at_t_star = 0;
    let tol = opts.tol;

    for _ in 0..opts.trials {
        let n = opts.n.unwrap_or_else(|| rng.random_range(3..=10));
        let case = random_case(&mut rng, n);

        let (l, r) = check_trace(&case)?;
        trace.record(rel_dev(l, r) <= tol, rel_dev(l, r));
        let (l, r) = check_frobenius(&case)?;
        frob.record(rel_dev(l, r) <= tol, rel_dev(l, r));

        match check_eigen_pair(&case)? {
            Some(c) => {
                let ds = rel_dev(c.eig_sum, c.sum);
                sum.record(ds <= tol, ds);
                let scale = 1.0 + (c.pair.0 * c.pair.1).abs();
                let dp = (c.eig_prod - c.product).abs() / scale;
                prod.record(dp <= tol, dp);
                let want = n - 2;
                mult.record(c.lambda_multiplicity >= want, 0.0);
                if c.pair.0 > 0.0 {
                    pd_at_t_star += 1;
                }
            }
            None => {
                sum.skipped += 1;
                prod.skipped += 1;
                mult.skipped += 1;
            }
        }

        match check_optimal_t(&case)? {
            Some(c) => {
                opt_t.record(c.brackets, (c.grid_argmin / c.t_star).ln().abs());
                let above_ok = c.min_eig_above > 0.0;
                let below_ok = c.min_eig_below.is_none_or(|e| e < 0.0);
                pd.record(above_ok && below_ok, 0.0);
            }
            None => {
                opt_t.skipped += 1;
                pd.skipped += 1;
            }
        }
    }

    Ok(VerifyReport {
        checks: vec![trace, frob, sum, prod, mult, pd, opt_t],
        pd_at_t_star,
        trials: opts.trials,
    })
}
