//! The benchmark collection: twenty monotone-type test equations, fourteen
//! initial-point generators and the standard dimensions.

use crate::error::{Error, Result};
use crate::problem::{FeasibleSet, Problem};

/// Stable problem identifiers.
pub const PROBLEM_IDS: [&str; 20] = [
    "P01", "P02", "P03", "P04", "P05", "P06", "P07", "P08", "P09", "P10", "P11", "P12", "P13",
    "P14", "P15", "P16", "P17", "P18", "P19", "P20",
];

/// Per-coordinate roots of `x − sin|x−1|`, `2x − sin|x−1|` and
/// `x − 2 sin|x−1|` (scalar bisection on `[0, 1]`).
pub const P12_ROOT: f64 = 0.489_026_570_611_430_84;
pub const P13_ROOT: f64 = 0.315_963_343_322_170_6;
pub const P14_ROOT: f64 = 0.662_416_294_961_402_3;

/// Lower bound standing in for the open half-line `x > 0` of `P18`.
pub const P18_LOWER: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RegistryOptions {
    /// Use `xᵢ(4 + 3xᵢ²)` in the interior Trigexp equations instead of the
    /// literal `x₁(4 + 3xᵢ³)`.
    pub classic_trigexp: bool,
}

/// All twenty problems at dimension `n ≥ 2`.
pub fn registry(n: usize) -> Result<Vec<Problem>> {
    registry_with(n, RegistryOptions::default())
}

pub fn registry_with(n: usize, opts: RegistryOptions) -> Result<Vec<Problem>> {
    PROBLEM_IDS
        .iter()
        .map(|id| problem_with(id, n, opts))
        .collect()
}

pub fn problem(id: &str, n: usize) -> Result<Problem> {
    problem_with(id, n, RegistryOptions::default())
}

/// Looks up one problem by id (case-insensitive, `P3` and `P03` both work).
pub fn problem_with(id: &str, n: usize, opts: RegistryOptions) -> Result<Problem> {
    let canonical = canonical_id(id).ok_or_else(|| Error::UnknownProblem(id.to_string()))?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "problem dimension must be at least 2, got {n}"
        )));
    }
    let nf = n as f64;
    let ws = FeasibleSet::WholeSpace;
    let zeros = || vec![0.0; n];
    let p = match canonical {
        "P01" => Problem::new(canonical, n, FeasibleSet::lower_bounded(-2.0), |x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = 2.0 * xi - xi.sin();
            }
        })
        .with_known_root(zeros()),
        "P02" => Problem::new(canonical, n, ws, move |x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = (xi.abs() + 1.0).ln() - xi / nf;
            }
        })
        .with_known_root(zeros()),
        "P03" => Problem::new(canonical, n, ws, |x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = xi.exp_m1();
            }
        })
        .with_known_root(zeros()),
        "P04" => Problem::new(canonical, n, ws, |x, g| {
            let n = x.len();
            // the x_{i-1} term has no predecessor in the first equation
            g[0] = 4.0 * x[0] + (x[1] - 2.0 * x[0]);
            for i in 1..n - 1 {
                g[i] = 4.0 * x[i] + (x[i + 1] - 2.0 * x[i]) - x[i - 1] * x[i - 1] / 3.0;
            }
            g[n - 1] = 4.0 * x[n - 1] + (x[n - 2] - 2.0 * x[n - 1]) - x[n - 2] * x[n - 2] / 3.0;
        }),
        "P05" => Problem::new(canonical, n, ws, move |x, g| {
            let n = x.len();
            let h = nf + 1.0;
            g[0] = x[0] - ((x[0] + x[1]) / h).cos().exp();
            for i in 1..n - 1 {
                g[i] = x[i] - ((x[i - 1] + x[i] + x[i + 1]) / h).cos().exp();
            }
            g[n - 1] = x[n - 1] - ((x[n - 2] + x[n - 1]) / h).cos().exp();
        }),
        "P06" => Problem::new(canonical, n, ws, |x, g| {
            let n = x.len();
            g[0] = x[0] + x[0].sin() - 1.0;
            for i in 1..n - 1 {
                g[i] = -x[i - 1] + 2.0 * x[i] + x[i].sin() - 1.0;
            }
            g[n - 1] = x[n - 1] + x[n - 1].sin() - 1.0;
        }),
        "P07" => Problem::new(canonical, n, ws, |x, g| {
            g[0] = x.iter().map(|v| v * v).sum();
            for i in 1..x.len() {
                g[i] = -2.0 * x[0] * x[i];
            }
        }),
        "P08" => Problem::new(canonical, n, ws, |x, g| {
            let n = x.len();
            let sq = |v: f64| v * v;
            g[0] = x[0] * (sq(x[0]) + sq(x[1])) - 1.0;
            for i in 1..n - 1 {
                g[i] = x[i] * (sq(x[i - 1]) + 2.0 * sq(x[i]) + sq(x[i + 1])) - 1.0;
            }
            g[n - 1] = x[n - 1] * (sq(x[n - 2]) + sq(x[n - 1]));
        }),
        "P09" => {
            let classic = opts.classic_trigexp;
            Problem::new(canonical, n, ws, move |x, g| {
                let n = x.len();
                let trig = |a: f64, b: f64| (a - b).abs().sin() * (a + b).abs().sin();
                g[0] = 3.0 * x[0].powi(3) + 2.0 * x[1] - 5.0 + trig(x[0], x[1]);
                for i in 1..n - 1 {
                    let cubic = if classic {
                        x[i] * (4.0 + 3.0 * x[i] * x[i])
                    } else {
                        x[0] * (4.0 + 3.0 * x[i].powi(3))
                    };
                    g[i] = -x[i - 1] * (x[i - 1] - x[i]).exp() + cubic + 2.0 * x[i + 1] - 5.0
                        + trig(x[i], x[i + 1]);
                }
                g[n - 1] = -x[n - 2] * (x[n - 2] - x[n - 1]).exp() + 4.0 * x[n - 1] - 3.0;
            })
        }
        "P10" => Problem::new(canonical, n, ws, |x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = (xi - 1.0) * (xi - 1.0) - 1.01;
            }
        }),
        "P11" => Problem::new(canonical, n, ws, move |x, g| {
            for (i, (gi, &xi)) in g.iter_mut().zip(x).enumerate() {
                *gi = (i + 1) as f64 / nf * xi.exp() - 1.0;
            }
        }),
        "P12" => Problem::new(canonical, n, ws, |x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = xi - (xi - 1.0).abs().sin();
            }
        })
        .with_known_root(vec![P12_ROOT; n]),
        "P13" => Problem::new(canonical, n, ws, |x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = 2.0 * xi - (xi - 1.0).abs().sin();
            }
        })
        .with_known_root(vec![P13_ROOT; n]),
        "P14" => Problem::new(canonical, n, ws, |x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = xi - 2.0 * (xi - 1.0).abs().sin();
            }
        })
        .with_known_root(vec![P14_ROOT; n]),
        "P15" => Problem::new(canonical, n, ws, |x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = xi.exp().powi(2) + 3.0 * xi.sin() * xi.cos() - 1.0;
            }
        }),
        "P16" => Problem::new(canonical, n, ws, |x, g| {
            let n = x.len();
            g[0] = 2.5 * x[0] + x[1] - 1.0;
            for i in 1..n - 1 {
                g[i] = x[i - 1] + 2.5 * x[i] + x[i + 1] - 1.0;
            }
            g[n - 1] = x[n - 2] + 2.5 * x[n - 1] - 1.0;
        }),
        "P17" => Problem::new(canonical, n, ws, |x, g| {
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = 2.0 * xi - xi.abs().sin();
            }
        })
        .with_known_root(zeros()),
        "P18" => Problem::new(
            canonical,
            n,
            FeasibleSet::lower_bounded(P18_LOWER),
            |x, g| {
                for (gi, &xi) in g.iter_mut().zip(x) {
                    let (l, e) = (xi.ln(), xi.exp());
                    let disc = ((l - e) * (l - e) - 1e-10).max(0.0);
                    *gi = 0.5 * (l + e - disc.sqrt());
                }
            },
        ),
        "P19" => Problem::new(canonical, n, ws, |x, g| {
            let sum_sq: f64 = x.iter().map(|v| v * v).sum();
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = 2e-5 * (xi - 1.0) + 4.0 * xi * sum_sq - xi;
            }
        }),
        "P20" => Problem::new(canonical, n, ws, move |x, g| {
            let mean = x.iter().sum::<f64>() / nf;
            for (gi, &xi) in g.iter_mut().zip(x) {
                *gi = xi * (xi - 1.0 / nf).cos() * (xi.sin() - 1.0 - (1.0 - xi).powi(2) - mean);
            }
        }),
        _ => unreachable!(),
    };
    Ok(p)
}

fn canonical_id(id: &str) -> Option<&'static str> {
    let upper = id.trim().to_ascii_uppercase();
    let num: usize = upper.strip_prefix('P')?.parse().ok()?;
    PROBLEM_IDS.get(num.checked_sub(1)?).copied()
}

/// A named initial-point generator.
#[derive(Clone, Copy)]
pub struct InitialPointSpec {
    pub id: &'static str,
    generator: fn(usize) -> Vec<f64>,
}

impl InitialPointSpec {
    pub fn generate(&self, n: usize) -> Vec<f64> {
        (self.generator)(n)
    }
}

impl std::fmt::Debug for InitialPointSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialPointSpec")
            .field("id", &self.id)
            .finish()
    }
}

fn constant(n: usize, v: f64) -> Vec<f64> {
    vec![v; n]
}

/// The fourteen starting points, in the customary order.
pub fn initial_points() -> Vec<InitialPointSpec> {
    vec![
        InitialPointSpec {
            id: "x0_zero",
            generator: |n| constant(n, 0.0),
        },
        InitialPointSpec {
            id: "x0_0p2",
            generator: |n| constant(n, 0.2),
        },
        InitialPointSpec {
            id: "x0_0p4",
            generator: |n| constant(n, 0.4),
        },
        InitialPointSpec {
            id: "x0_half",
            generator: |n| constant(n, 0.5),
        },
        InitialPointSpec {
            id: "x0_0p6",
            generator: |n| constant(n, 0.6),
        },
        InitialPointSpec {
            id: "x0_0p8",
            generator: |n| constant(n, 0.8),
        },
        InitialPointSpec {
            id: "x0_one",
            generator: |n| constant(n, 1.0),
        },
        InitialPointSpec {
            id: "x0_1p1",
            generator: |n| constant(n, 1.1),
        },
        InitialPointSpec {
            id: "x0_one_minus_inv_n",
            generator: |n| constant(n, 1.0 - 1.0 / n as f64),
        },
        InitialPointSpec {
            id: "x0_harmonic",
            generator: |n| (1..=n).map(|k| 1.0 / k as f64).collect(),
        },
        InitialPointSpec {
            id: "x0_km1_over_m",
            generator: |n| (0..n).map(|k| k as f64 / n as f64).collect(),
        },
        InitialPointSpec {
            id: "x0_inv_n",
            generator: |n| constant(n, 1.0 / n as f64),
        },
        InitialPointSpec {
            id: "x0_third_pow",
            generator: |n| {
                (1..=n)
                    .map(|k| 3f64.powi(-(k.min(i32::MAX as usize) as i32)))
                    .collect()
            },
        },
        InitialPointSpec {
            id: "x0_k_over_m",
            generator: |n| (1..=n).map(|k| k as f64 / n as f64).collect(),
        },
    ]
}

/// Starting points used by the desk-scale suite.
pub const DESK_INITIAL_POINTS: [&str; 5] = [
    "x0_zero",
    "x0_half",
    "x0_one",
    "x0_k_over_m",
    "x0_third_pow",
];

/// Finds an initial point by id. Accepts the id with or without the `x0_`
/// prefix, plus the aliases `zeros` and `ones`.
pub fn initial_point(id: &str) -> Result<InitialPointSpec> {
    let key = id.trim().to_ascii_lowercase();
    let key = match key.as_str() {
        "zeros" | "0" => "x0_zero".to_string(),
        "ones" | "1" => "x0_one".to_string(),
        k if k.starts_with("x0_") => k.to_string(),
        k => format!("x0_{k}"),
    };
    initial_points()
        .into_iter()
        .find(|s| s.id == key)
        .ok_or_else(|| Error::UnknownInitialPoint(id.to_string()))
}

/// Benchmark dimensions of the full suite.
pub fn dimensions() -> Vec<usize> {
    vec![1000, 10_000, 50_000]
}

/// Reduced dimensions for quick runs.
pub fn desk_dimensions() -> Vec<usize> {
    vec![100, 1000]
}

/// Parses a comma-separated list such as `500,2000`.
pub fn parse_dimensions(text: &str) -> Result<Vec<usize>> {
    let dims = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .ok()
                .filter(|&d| d >= 2)
                .ok_or_else(|| Error::InvalidArgument(format!("bad dimension `{s}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if dims.is_empty() {
        return Err(Error::InvalidArgument("empty dimension list".into()));
    }
    Ok(dims)
}
