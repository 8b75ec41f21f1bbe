//! The derivative-free projection iteration shared by all four methods.
//!
//! Each iteration builds a direction `pₖ`, backtracks along it until the
//! trial point `zₖ = xₖ + αₖpₖ` satisfies
//!
//! ```text
//! G(zₖ)ᵀpₖ ≤ −ζ αₖ ‖pₖ‖² Π_[ζ₁,ζ₂](‖G(zₖ)‖),
//! ```
//!
//! and then projects `xₖ` onto the hyperplane `{u : G(zₖ)ᵀ(u − zₖ) = 0}`
//! (relaxed by `γ`) followed by the feasible set.

use std::time::Instant;

use crate::config::{validate_config, Method, SolverConfig};
use crate::directions::{
    dir_cgpm_baseline, dir_gcgpm, dir_gmopcgm, dir_mopcgm_baseline, hz_w, perry_v, update_lambda,
    DirectionInputs,
};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, norm, norm_sq};
use crate::problem::{FeasibleSet, Problem};
use crate::projection::project_in_place;
use crate::report::{SolveReport, SolveStatus, TraceRecord};

const GAMMA_FLOOR: f64 = 1e-6;
const GAMMA_CEIL: f64 = 2.0 - 1e-6;

#[derive(Debug, Clone)]
pub struct LineSearchResult {
    /// `β ρ^backtracks`
    pub alpha: f64,
    pub z: Vec<f64>,
    pub gz: Vec<f64>,
    pub backtracks: usize,
    pub fevals_used: usize,
}

/// Backtracking search for the largest `α ∈ {β, βρ, βρ², …}` meeting the
/// derivative-free descent condition.
pub fn line_search(
    x: &[f64],
    p: &[f64],
    problem: &Problem,
    cfg: &SolverConfig,
) -> Result<LineSearchResult> {
    let pp = norm_sq(p);
    if !(pp > 0.0) {
        return Err(Error::InvalidArgument(
            "line search needs a nonzero direction".into(),
        ));
    }
    let n = x.len();
    let mut z = vec![0.0; n];
    let mut gz = vec![0.0; n];
    for i in 0..=cfg.max_backtracks {
        let alpha = cfg.beta * cfg.rho.powi(i as i32);
        for ((zj, xj), pj) in z.iter_mut().zip(x).zip(p) {
            *zj = xj + alpha * pj;
        }
        problem.eval_into(&z, &mut gz)?;
        let scale = norm(&gz).clamp(cfg.zeta1, cfg.zeta2);
        if dot(&gz, p) <= -cfg.zeta * alpha * pp * scale {
            return Ok(LineSearchResult {
                alpha,
                z,
                gz,
                backtracks: i,
                fevals_used: i + 1,
            });
        }
    }
    Err(Error::LineSearchFailure(cfg.max_backtracks))
}

/// `Π_S(x − γ μ G(z))` with `μ = G(z)ᵀ(x − z)/‖G(z)‖²`.
pub fn projection_step(
    x: &[f64],
    z: &[f64],
    gz: &[f64],
    gamma: f64,
    set: &FeasibleSet,
) -> Result<Vec<f64>> {
    let gg = norm_sq(gz);
    if !(gg > 0.0) {
        return Err(Error::InvalidArgument(
            "projection step needs G(z) ≠ 0".into(),
        ));
    }
    let num: f64 = gz.iter().zip(x).zip(z).map(|((g, a), b)| g * (a - b)).sum();
    let mu = num / gg;
    let mut out: Vec<f64> = x
        .iter()
        .zip(gz)
        .map(|(xi, gi)| xi - gamma * mu * gi)
        .collect();
    project_in_place(&mut out, set);
    Ok(out)
}

/// Relaxation schedule: grow with `γ₁` (capped by `γ₂`) after a decrease of
/// `‖G‖`, otherwise scale by `γ₃` (floored at `γ₄`). The result stays in
/// `[10⁻⁶, 2 − 10⁻⁶]`.
pub fn update_gamma(gamma: f64, decreased: bool, cfg: &SolverConfig) -> f64 {
    let next = if decreased {
        (gamma * cfg.gamma1).min(cfg.gamma2)
    } else {
        (gamma * cfg.gamma3).max(cfg.gamma4)
    };
    next.clamp(GAMMA_FLOOR, GAMMA_CEIL)
}

/// Loop state carried between iterations.
#[derive(Debug, Clone)]
pub struct IterateState {
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    pub p_prev: Vec<f64>,
    pub s_prev: Vec<f64>,
    /// `vₖ₋₁` for the Perry methods, `wₖ₋₁` for the projection methods.
    pub u_prev: Vec<f64>,
    pub y_prev: Vec<f64>,
    pub lambda: f64,
    pub gamma: f64,
    pub k: usize,
}

/// Everything an observer can see about one completed iteration.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub k: usize,
    pub x: &'a [f64],
    pub g: &'a [f64],
    pub p: &'a [f64],
    pub z: &'a [f64],
    pub gz: &'a [f64],
    /// `None` when the run stopped at `z`.
    pub x_next: Option<&'a [f64]>,
    pub alpha: f64,
    pub backtracks: usize,
    /// Scaling used to build `p`.
    pub lambda: f64,
    /// Relaxation used in the projection step.
    pub gamma: f64,
    pub restarted: bool,
    pub fevals: usize,
}

/// Solves `G(x) = 0` over the problem's feasible set.
pub fn solve(
    problem: &Problem,
    x0: &[f64],
    method: Method,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    solve_with_observer(problem, x0, method, cfg, false, &mut |_| {})
}

/// Like [`solve`], additionally collecting a per-iteration trace.
pub fn solve_traced(
    problem: &Problem,
    x0: &[f64],
    method: Method,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    solve_with_observer(problem, x0, method, cfg, true, &mut |_| {})
}

fn fixed_lambda(method: Method) -> Option<f64> {
    match method {
        Method::Mopcgm => Some(1.0),
        Method::Cgpm => Some(2.0),
        Method::Gmopcgm | Method::Gcgpm => None,
    }
}

/// The full iteration, calling `observer` after every line search.
pub fn solve_with_observer(
    problem: &Problem,
    x0: &[f64],
    method: Method,
    cfg: &SolverConfig,
    trace: bool,
    observer: &mut dyn FnMut(&IterationView<'_>),
) -> Result<SolveReport> {
    validate_config(cfg, method)?;
    let n = problem.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }
    if !all_finite(x0) {
        return Err(Error::InvalidArgument("initial point is not finite".into()));
    }
    let set = problem.feasible_set();

    let start = Instant::now();
    let mut x = x0.to_vec();
    project_in_place(&mut x, set);
    let mut g = problem.eval(&x)?;
    let mut fevals = 1usize;
    let mut records = trace.then(Vec::new);

    let mut state = IterateState {
        x: Vec::new(),
        g: Vec::new(),
        p_prev: Vec::new(),
        s_prev: Vec::new(),
        u_prev: Vec::new(),
        y_prev: Vec::new(),
        lambda: cfg.lambda0,
        gamma: cfg.gamma,
        k: 0,
    };

    let finish = |status, gnorm, solution, iterations, fevals, records| SolveReport {
        status,
        final_gnorm: gnorm,
        iterations,
        fevals,
        wall_time_s: start.elapsed().as_secs_f64(),
        solution,
        trace: records,
    };

    loop {
        let k = state.k;
        let gnorm = norm(&g);
        if !gnorm.is_finite() {
            return Ok(finish(
                SolveStatus::LineSearchFailure,
                gnorm,
                x,
                k,
                fevals,
                records,
            ));
        }
        if gnorm < cfg.tol {
            return Ok(finish(
                SolveStatus::ConvergedOnX,
                gnorm,
                x,
                k,
                fevals,
                records,
            ));
        }
        if k >= cfg.max_iter {
            return Ok(finish(SolveStatus::MaxIter, gnorm, x, k, fevals, records));
        }

        let lambda = fixed_lambda(method).unwrap_or(state.lambda);
        let mut restarted = false;
        let p: Vec<f64> = if k == 0 {
            g.iter().map(|v| -v).collect()
        } else {
            let inp = DirectionInputs {
                g: &g,
                p_prev: &state.p_prev,
                s_prev: &state.s_prev,
                y_prev: &state.y_prev,
                lambda,
                tau: cfg.tau,
            };
            let dir = match method {
                Method::Gmopcgm => dir_gmopcgm(&inp).map(|d| d.p),
                Method::Gcgpm => dir_gcgpm(&inp).map(|d| d.p),
                Method::Mopcgm => dir_mopcgm_baseline(&inp),
                Method::Cgpm => dir_cgpm_baseline(&inp),
            };
            dir.unwrap_or_else(|_| {
                restarted = true;
                g.iter().map(|v| -lambda * v).collect()
            })
        };

        let pnorm = norm(&p);
        if pnorm < 0.1 * cfg.tol {
            return Ok(finish(
                SolveStatus::SmallDirection,
                gnorm,
                x,
                k,
                fevals,
                records,
            ));
        }

        let ls = match line_search(&x, &p, problem, cfg) {
            Ok(ls) => ls,
            Err(Error::LineSearchFailure(b)) => {
                fevals += b + 1;
                return Ok(finish(
                    SolveStatus::LineSearchFailure,
                    gnorm,
                    x,
                    k,
                    fevals,
                    records,
                ));
            }
            Err(e) => return Err(e),
        };
        fevals += ls.fevals_used;
        if let Some(r) = records.as_mut() {
            r.push(TraceRecord {
                k,
                gnorm,
                alpha: ls.alpha,
                backtracks: ls.backtracks,
                lambda,
                gamma: state.gamma,
                pnorm,
            });
        }

        let gz_norm = norm(&ls.gz);
        if set.contains(&ls.z) && gz_norm < cfg.tol {
            observer(&IterationView {
                k,
                x: &x,
                g: &g,
                p: &p,
                z: &ls.z,
                gz: &ls.gz,
                x_next: None,
                alpha: ls.alpha,
                backtracks: ls.backtracks,
                lambda,
                gamma: state.gamma,
                restarted,
                fevals,
            });
            return Ok(finish(
                SolveStatus::ConvergedOnZ,
                gz_norm,
                ls.z,
                k + 1,
                fevals,
                records,
            ));
        }

        let x_next = if gz_norm > 0.0 {
            projection_step(&x, &ls.z, &ls.gz, state.gamma, set)?
        } else {
            // G(z) = 0 outside the feasible set: fall back to its projection
            let mut z = ls.z.clone();
            project_in_place(&mut z, set);
            z
        };
        let g_next = problem.eval(&x_next)?;
        fevals += 1;

        observer(&IterationView {
            k,
            x: &x,
            g: &g,
            p: &p,
            z: &ls.z,
            gz: &ls.gz,
            x_next: Some(&x_next),
            alpha: ls.alpha,
            backtracks: ls.backtracks,
            lambda,
            gamma: state.gamma,
            restarted,
            fevals,
        });

        let decreased = norm(&g_next) < gnorm;
        let s: Vec<f64> = ls.z.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        state.gamma = update_gamma(state.gamma, decreased, cfg);
        let u = match method {
            Method::Gmopcgm | Method::Mopcgm => perry_v(&y, &s, cfg.tau),
            Method::Gcgpm | Method::Cgpm => hz_w(&p, &y).1,
        };
        if method.is_adaptive() {
            state.lambda = update_lambda(
                state.lambda,
                &s,
                &u,
                decreased,
                (cfg.alpha_min, cfg.alpha_max),
                cfg.lambda0,
            );
        }

        state.p_prev = p;
        state.s_prev = s;
        state.y_prev = y;
        state.u_prev = u;
        x = x_next;
        g = g_next;
        state.k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_problem(n: usize) -> Problem {
        Problem::new("id", n, FeasibleSet::WholeSpace, |x, out| {
            out.copy_from_slice(x)
        })
    }

    fn scalar_cfg() -> SolverConfig {
        let mut cfg = SolverConfig::defaults(Method::Gmopcgm);
        cfg.beta = 0.5;
        cfg.rho = 0.5;
        cfg.zeta = 1e-4;
        cfg.zeta1 = 1.0;
        cfg.zeta2 = 1.0;
        cfg
    }

    #[test]
    fn line_search_accepts_first_trial() {
        let p = identity_problem(1);
        let ls = line_search(&[1.0], &[-1.0], &p, &scalar_cfg()).unwrap();
        // G(0.5)·(−1) = −0.5 ≤ −1e-4·0.5
        assert_eq!(ls.alpha, 0.5);
        assert_eq!(ls.backtracks, 0);
        assert_eq!(ls.fevals_used, 1);
        assert_eq!(ls.z, vec![0.5]);
    }

    #[test]
    fn line_search_backtracks_structurally() {
        let p = identity_problem(1);
        let mut cfg = scalar_cfg();
        cfg.zeta = 1e3;
        let ls = line_search(&[1.0], &[-1.0], &p, &cfg).unwrap();
        assert!(ls.backtracks > 0);
        assert_eq!(ls.alpha, cfg.beta * cfg.rho.powi(ls.backtracks as i32));
        assert_eq!(ls.fevals_used, ls.backtracks + 1);
        // −(1 − α) ≤ −1000 α ⇔ α ≤ 1/1001
        assert!(ls.alpha <= 1.0 / 1001.0 && ls.alpha / cfg.rho > 1.0 / 1001.0);
    }

    #[test]
    fn line_search_guards() {
        let p = identity_problem(1);
        assert!(matches!(
            line_search(&[1.0], &[0.0], &p, &scalar_cfg()),
            Err(Error::InvalidArgument(_))
        ));
        // ascent direction never satisfies the condition
        let mut cfg = scalar_cfg();
        cfg.max_backtracks = 5;
        assert!(matches!(
            line_search(&[1.0], &[1.0], &p, &cfg),
            Err(Error::LineSearchFailure(5))
        ));
    }

    #[test]
    fn projection_step_examples() {
        let ws = FeasibleSet::WholeSpace;
        assert_eq!(
            projection_step(&[2.0, 0.0], &[0.0, 0.0], &[1.0, 0.0], 1.0, &ws).unwrap(),
            vec![0.0, 0.0]
        );
        assert_eq!(
            projection_step(&[3.0, -1.0], &[3.0, -1.0], &[1.0, 2.0], 1.5, &ws).unwrap(),
            vec![3.0, -1.0]
        );
        // x − γμG(z) = (−5, 1) with μ = 1
        let half = FeasibleSet::lower_bounded(-2.0);
        assert_eq!(
            projection_step(&[-4.0, 1.0], &[-5.0, 1.0], &[1.0, 0.0], 1.0, &half).unwrap(),
            vec![-2.0, 1.0]
        );
        assert!(projection_step(&[1.0], &[0.0], &[0.0], 1.0, &ws).is_err());
    }

    #[test]
    fn gamma_schedule() {
        let mut cfg = SolverConfig::defaults(Method::Gcgpm);
        assert!((update_gamma(1.8, true, &cfg) - 1.7).abs() < 1e-15);
        cfg.gamma3 = 1.05;
        cfg.gamma4 = 1.05;
        assert!((update_gamma(1.1, false, &cfg) - 1.155).abs() < 1e-12);
        cfg.gamma1 = 1.0;
        cfg.gamma2 = 1.9;
        assert_eq!(update_gamma(1.3, true, &cfg), 1.3);
        // never reaches 2
        assert!(update_gamma(1.99, false, &cfg) < 2.0);
    }

    #[test]
    fn immediate_convergence() {
        let p = identity_problem(3);
        let r = solve(
            &p,
            &[0.0; 3],
            Method::Gmopcgm,
            &SolverConfig::defaults(Method::Gmopcgm),
        )
        .unwrap();
        assert_eq!(r.status, SolveStatus::ConvergedOnX);
        assert_eq!(r.iterations, 0);
        assert_eq!(r.fevals, 1);
    }

    #[test]
    fn rejects_bad_input() {
        let p = identity_problem(2);
        let cfg = SolverConfig::defaults(Method::Gcgpm);
        assert!(solve(&p, &[1.0], Method::Gcgpm, &cfg).is_err());
        assert!(solve(&p, &[1.0, f64::NAN], Method::Gcgpm, &cfg).is_err());
        let mut bad = cfg.clone();
        bad.alpha_min = 0.1;
        assert!(solve(&p, &[1.0, 1.0], Method::Gcgpm, &bad).is_err());
    }

    #[test]
    fn linear_problem_all_methods() {
        let p = identity_problem(10);
        let x0: Vec<f64> = (0..10).map(|i| i as f64 - 4.5).collect();
        for m in Method::ALL {
            let r = solve_traced(&p, &x0, m, &SolverConfig::defaults(m)).unwrap();
            assert!(r.converged(), "{m}: {:?}", r.status);
            assert!(r.final_gnorm < 1e-11);
            assert!(r.fevals >= r.iterations);
            let trace = r.trace.unwrap();
            assert_eq!(trace.len(), r.iterations);
        }
    }
}
