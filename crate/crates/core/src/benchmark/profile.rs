use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use super::RunRecord;
use crate::error::{Error, Result};

pub const PROFILE_HEADER: &str = "solver,tau,rho";

/// Cost measure compared across solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Iters,
    Fevals,
    Time,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Iters => "iters",
            Metric::Fevals => "fevals",
            Metric::Time => "time",
        }
    }

    /// The metric of a run, floored so that ratios stay finite
    /// (a run converging at `x₀` has zero iterations).
    fn value(self, r: &RunRecord) -> f64 {
        match self {
            Metric::Iters => (r.iters as f64).max(1.0),
            Metric::Fevals => (r.fevals as f64).max(1.0),
            Metric::Time => r.time_s.max(1e-6),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iters" | "iterations" => Ok(Metric::Iters),
            "fevals" | "function_evals" => Ok(Metric::Fevals),
            "time" | "time_s" | "cpu" => Ok(Metric::Time),
            other => Err(Error::InvalidArgument(format!("unknown metric `{other}`"))),
        }
    }
}

/// `ρ_s(τ)` sampled at every breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solver_id: String,
    pub points: Vec<(f64, f64)>,
    /// Ratio assigned to failed runs.
    pub cap: f64,
}

impl ProfileCurve {
    /// `ρ_s(τ)` as a step function.
    pub fn rho_at(&self, tau: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(t, _)| *t <= tau)
            .last()
            .map_or(0.0, |&(_, r)| r)
    }

    pub fn final_rho(&self) -> f64 {
        self.points.last().map_or(0.0, |&(_, r)| r)
    }
}

/// Dolan-Moré performance profiles of `solvers` over every
/// `(problem, dim, x0)` tuple in `records`.
///
/// Failed runs get ratio `2·r_max` (twice the largest finite ratio) and are
/// never counted as solved, so each curve ends at the solver's solve fraction.
pub fn performance_profile(
    records: &[RunRecord],
    metric: Metric,
    solvers: &[String],
) -> Result<Vec<ProfileCurve>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("empty record set".into()));
    }
    if solvers.is_empty() {
        return Err(Error::InvalidArgument("no solvers selected".into()));
    }
    let mut by_tuple: BTreeMap<(&str, usize, &str), BTreeMap<&str, &RunRecord>> = BTreeMap::new();
    for r in records {
        if solvers.iter().any(|s| s == &r.solver_id) {
            by_tuple
                .entry((&r.problem_id, r.dim, &r.x0_id))
                .or_default()
                .insert(&r.solver_id, r);
        }
    }
    if by_tuple.is_empty() {
        return Err(Error::InvalidArgument(
            "no records for the selected solvers".into(),
        ));
    }

    // ratios[s][p]: None marks a failure
    let mut ratios: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(by_tuple.len()); solvers.len()];
    for ((p, d, x0), runs) in &by_tuple {
        let mut costs = Vec::with_capacity(solvers.len());
        for s in solvers {
            let r = runs.get(s.as_str()).ok_or_else(|| {
                Error::InvalidArgument(format!("missing record for {s} on ({p}, {d}, {x0})"))
            })?;
            costs.push(r.status.is_success().then(|| metric.value(r)));
        }
        let best = costs
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        for (i, c) in costs.into_iter().enumerate() {
            ratios[i].push(c.map(|c| c / best));
        }
    }

    let max_finite = ratios
        .iter()
        .flatten()
        .flatten()
        .copied()
        .fold(1.0, f64::max);
    let cap = 2.0 * max_finite;
    let total = by_tuple.len() as f64;

    let curves = solvers
        .iter()
        .zip(&ratios)
        .map(|(s, rs)| {
            let mut solved: Vec<f64> = rs.iter().flatten().copied().collect();
            solved.sort_by(f64::total_cmp);
            let mut taus: BTreeSet<u64> = solved.iter().map(|t| t.to_bits()).collect();
            taus.insert(1f64.to_bits());
            taus.insert(cap.to_bits());
            let mut taus: Vec<f64> = taus.into_iter().map(f64::from_bits).collect();
            taus.sort_by(f64::total_cmp);
            let points = taus
                .into_iter()
                .map(|tau| {
                    let count = solved.partition_point(|&r| r <= tau);
                    (tau, count as f64 / total)
                })
                .collect();
            ProfileCurve {
                solver_id: s.clone(),
                points,
                cap,
            }
        })
        .collect();
    Ok(curves)
}

pub fn write_profile_csv<W: Write>(w: W, curves: &[ProfileCurve]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PROFILE_HEADER.split(','))?;
    for c in curves {
        for (tau, rho) in &c.points {
            out.write_record([c.solver_id.clone(), tau.to_string(), rho.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Gnuplot data: one indexed block per solver, as `tau rho` step points.
pub fn write_profile_dat<W: Write>(mut w: W, curves: &[ProfileCurve]) -> Result<()> {
    for (i, c) in curves.iter().enumerate() {
        if i > 0 {
            writeln!(w, "\n")?;
        }
        writeln!(w, "# {}", c.solver_id)?;
        writeln!(w, "# tau rho")?;
        for (tau, rho) in &c.points {
            writeln!(w, "{tau} {rho}")?;
        }
    }
    Ok(())
}
