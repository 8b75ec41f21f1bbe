//! Acceptance checks. Each test prints one `PASS`/`FAIL` line and asserts
//! the same condition.

use std::sync::Arc;

use projsolve::benchmark::{performance_profile, run_suite, Metric, SuiteSpec};
use projsolve::cs::{batch_experiment, generate_with, recover, CsParams};
use projsolve::linalg::{dot, norm, norm_sq};
use projsolve::problems::{initial_point, problem, PROBLEM_IDS};
use projsolve::projection::project_in_place;
use projsolve::solver::solve_with_observer;
use projsolve::spectral::{verify, VerifyOptions};
use projsolve::{Method, SolverConfig};

const DESK_DIMS: [usize; 2] = [100, 1000];
const DESK_X0: [&str; 5] = [
    "x0_zero",
    "x0_half",
    "x0_one",
    "x0_k_over_m",
    "x0_third_pow",
];
const CS_SEEDS: [u64; 3] = [1, 2, 3];

fn report(id: &str, ok: bool, detail: &str) {
    println!(
        "criterion {id}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
}

/// Runs `method` over the desk suite and folds `check` over every iteration.
fn desk_iterations(method: Method, mut check: impl FnMut(&[f64], &[f64], f64)) -> usize {
    let cfg = SolverConfig::defaults(method);
    let mut iterations = 0;
    for id in PROBLEM_IDS {
        for n in DESK_DIMS {
            let p = problem(id, n).unwrap();
            for x0 in DESK_X0 {
                let mut x = initial_point(x0).unwrap().generate(n);
                project_in_place(&mut x, p.feasible_set());
                solve_with_observer(&p, &x, method, &cfg, false, &mut |v| {
                    iterations += 1;
                    check(v.g, v.p, v.lambda);
                })
                .unwrap();
            }
        }
    }
    iterations
}

#[test]
fn criterion_1_gmopcgm_descent_identity() {
    let mut worst = 0.0f64;
    let iterations = desk_iterations(Method::Gmopcgm, |g, p, lambda| {
        let gg = norm_sq(g);
        worst = worst.max((dot(g, p) + lambda * gg).abs() / (lambda * gg));
    });
    let ok = worst <= 1e-10;
    report(
        "1",
        ok,
        &format!("{iterations} iterations, max relative deviation {worst:.3e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_2_gcgpm_descent_bound() {
    let cfg = SolverConfig::defaults(Method::Gcgpm);
    let c = cfg.gcgpm_descent_constant();
    let mut worst = f64::NEG_INFINITY;
    let iterations = desk_iterations(Method::Gcgpm, |g, p, _| {
        worst = worst.max(dot(g, p) + c * norm_sq(g));
    });
    let ok = worst <= 1e-10;
    report(
        "2",
        ok,
        &format!("{iterations} iterations, c = {c:.6}, max gᵀp + c‖g‖² = {worst:.3e}"),
    );
    assert!(ok);
}

#[test]
fn criterion_3_spectral_oracle() {
    let rep = verify(&VerifyOptions {
        trials: 1000,
        n: None,
        seed: 1,
        tol: 1e-8,
    })
    .unwrap();
    let ok = rep.checks.iter().all(|c| c.all_passed());
    let detail = rep
        .checks
        .iter()
        .map(|c| format!("{} {}/{}", c.name, c.passed, c.passed + c.failed))
        .collect::<Vec<_>>()
        .join(", ");
    report(
        "3",
        ok,
        &format!("{detail}; PD at t*: {}/{}", rep.pd_at_t_star, rep.trials),
    );
    assert!(ok);
}

fn desk_convergence_counts() -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    for method in [Method::Gmopcgm, Method::Gcgpm] {
        let cfg = SolverConfig::defaults(method);
        for id in ["P01", "P03", "P13", "P16", "P17"] {
            let p = problem(id, 1000).unwrap();
            for x0 in ["x0_zero", "x0_one", "x0_k_over_m"] {
                let mut x = initial_point(x0).unwrap().generate(1000);
                project_in_place(&mut x, p.feasible_set());
                let rep = projsolve::solve(&p, &x, method, &cfg).unwrap();
                let ok = rep.final_gnorm < 1e-11 && rep.iterations <= 2000;
                let key = format!("{method}/{id}/{x0}");
                if !ok {
                    println!(
                        "  {key}: {} after {} iterations, ‖G‖={:.3e}",
                        rep.status, rep.iterations, rep.final_gnorm
                    );
                }
                out.push((
                    key,
                    rep.iterations,
                    if ok { rep.fevals } else { usize::MAX },
                ));
            }
        }
    }
    out
}

#[test]
fn criterion_4_desk_convergence() {
    let runs = desk_convergence_counts();
    let solved = runs.iter().filter(|r| r.2 != usize::MAX).count();
    let ok = solved == runs.len();
    let max_it = runs.iter().map(|r| r.1).max().unwrap();
    report(
        "4",
        ok,
        &format!(
            "{solved}/{} runs reach ‖G‖<1e-11, max iterations {max_it}",
            runs.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_fejer_on_p03() {
    let mut worst = f64::NEG_INFINITY;
    let mut steps = 0;
    for method in Method::ALL {
        let cfg = SolverConfig::defaults(method);
        for n in DESK_DIMS {
            let p = problem("P03", n).unwrap();
            for x0 in DESK_X0 {
                let x = initial_point(x0).unwrap().generate(n);
                solve_with_observer(&p, &x, method, &cfg, false, &mut |v| {
                    if let Some(next) = v.x_next {
                        steps += 1;
                        worst = worst.max(norm(next) - norm(v.x));
                    }
                })
                .unwrap();
            }
        }
    }
    let ok = worst <= 1e-10;
    report(
        "5",
        ok,
        &format!("{steps} steps, max ‖xₖ₊₁‖ − ‖xₖ‖ = {worst:.3e}"),
    );
    assert!(ok);
}

fn cs_methods() -> Vec<(Method, SolverConfig)> {
    Method::ALL
        .iter()
        .map(|&m| (m, SolverConfig::cs_defaults(m)))
        .collect()
}

fn cs_desk_counts() -> Vec<(Method, u64, usize, usize, f64, f64)> {
    let res = batch_experiment(&CsParams::desk_scale(0), &cs_methods(), &CS_SEEDS).unwrap();
    res.runs
        .iter()
        .map(|r| {
            let rep = &r.recovery.report;
            (
                r.method,
                r.seed,
                rep.iterations,
                rep.fevals,
                rep.final_gnorm,
                r.recovery.rel_err,
            )
        })
        .collect()
}

#[test]
fn criterion_6_cs_desk() {
    let runs = cs_desk_counts();
    let mut ok = true;
    for &(m, seed, it, fe, g, err) in &runs {
        let good = g < 1e-5 && err < 0.05;
        ok &= good;
        println!("  {m} seed {seed}: {it} iterations, {fe} fevals, ‖G‖={g:.3e}, rel err {err:.3e}");
    }
    let mean_fevals = |m: Method| {
        let v: Vec<f64> = runs
            .iter()
            .filter(|r| r.0 == m)
            .map(|r| r.3 as f64)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let (g, b) = (mean_fevals(Method::Gmopcgm), mean_fevals(Method::Mopcgm));
    ok &= g <= b;
    report(
        "6",
        ok,
        &format!("mean fevals GMOPCGM {g:.1} vs MOPCGM {b:.1}"),
    );
    assert!(ok);
}

#[test]
fn criterion_7_cs_full_scale() {
    let methods = cs_methods();
    let seeds: Vec<u64> = (1..=10).collect();
    let res = batch_experiment(&CsParams::full_scale(0), &methods, &seeds).unwrap();
    let converged = res
        .runs
        .iter()
        .filter(|r| r.recovery.report.final_gnorm < 1e-5)
        .count();
    for row in &res.rows {
        let in_band = (5e-10..=5e-6).contains(&row.mse);
        println!(
            "  {}: mean iterations {:.1}, fevals {:.1}, time {:.2}s, MSE {:.3e} ({} reference band)",
            row.method.label(),
            row.iterations,
            row.function_evals,
            row.time,
            row.mse,
            if in_band { "inside" } else { "outside" }
        );
    }
    let ok = converged == res.runs.len();
    report(
        "7",
        ok,
        &format!(
            "{converged}/{} full-scale recoveries reach ‖G‖<1e-5",
            res.runs.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_8_profile_harness() {
    let spec = SuiteSpec::with_defaults(
        PROBLEM_IDS.iter().map(|s| s.to_string()).collect(),
        DESK_DIMS.to_vec(),
        DESK_X0.iter().map(|s| s.to_string()).collect(),
    );
    let records = run_suite(&spec).unwrap();
    assert_eq!(records.len(), spec.cardinality());
    let solvers: Vec<String> = Method::ALL.iter().map(|m| m.as_str().to_string()).collect();
    let tuples = (records.len() / solvers.len()) as f64;
    let mut ok = true;
    let mut detail = Vec::new();
    for metric in [Metric::Iters, Metric::Fevals, Metric::Time] {
        let curves = performance_profile(&records, metric, &solvers).unwrap();
        for c in &curves {
            let monotone = c
                .points
                .windows(2)
                .all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1);
            let solved = records
                .iter()
                .filter(|r| r.solver_id == c.solver_id && r.status.is_success())
                .count() as f64
                / tuples;
            ok &= monotone && (c.final_rho() - solved).abs() < 1e-12;
            if metric == Metric::Fevals {
                detail.push(format!(
                    "{} wins {:.0}%, solves {:.0}%",
                    c.solver_id,
                    100.0 * c.rho_at(1.0),
                    100.0 * solved
                ));
            }
        }
    }
    report(
        "8",
        ok,
        &format!("{} runs; fevals: {}", records.len(), detail.join(", ")),
    );
    assert!(ok);
}

#[test]
fn criterion_9_determinism() {
    let a4 = desk_convergence_counts();
    let b4 = desk_convergence_counts();
    let a6 = cs_desk_counts();
    let b6 = cs_desk_counts();
    let same4 = a4 == b4;
    let same6 = a6
        .iter()
        .zip(&b6)
        .all(|(a, b)| (a.0, a.1, a.2, a.3) == (b.0, b.1, b.2, b.3) && a.5 == b.5);
    let ok = same4 && same6 && a6.len() == b6.len();
    report(
        "9",
        ok,
        &format!(
            "{} desk runs and {} recoveries repeated",
            a4.len(),
            a6.len()
        ),
    );
    assert!(ok);
}

#[test]
fn cs_iterates_stay_in_orthant() {
    let inst = Arc::new(generate_with(&CsParams::desk_scale(5)).unwrap());
    let rec = recover(
        &inst,
        Method::Gcgpm,
        &SolverConfig::cs_defaults(Method::Gcgpm),
    )
    .unwrap();
    assert!(rec.report.solution.iter().all(|v| *v >= 0.0));
}
