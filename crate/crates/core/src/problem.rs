//! Problem abstraction: a residual map `G: ℝⁿ → ℝⁿ` plus the feasible set it
//! is to be solved over.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A coordinate bound that is either shared by every coordinate or given per
/// coordinate. Infinite values are allowed.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    Uniform(f64),
    PerCoordinate(Vec<f64>),
}

impl Bound {
    #[inline]
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Bound::Uniform(v) => *v,
            Bound::PerCoordinate(v) => v[i],
        }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        match self {
            Bound::PerCoordinate(v) if v.len() != n => Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            }),
            _ => Ok(()),
        }
    }
}

/// Closed convex set onto which iterates are projected.
///
/// Only the whole space and (possibly unbounded) boxes are supported, which
/// covers the orthant and half-line constraints of every bundled problem.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    WholeSpace,
    Box { lower: Bound, upper: Bound },
}

impl FeasibleSet {
    pub fn whole_space() -> Self {
        FeasibleSet::WholeSpace
    }

    /// `[lower, ∞)ⁿ`
    pub fn lower_bounded(lower: f64) -> Self {
        FeasibleSet::Box {
            lower: Bound::Uniform(lower),
            upper: Bound::Uniform(f64::INFINITY),
        }
    }

    pub fn nonnegative_orthant() -> Self {
        Self::lower_bounded(0.0)
    }

    /// Builds a box and checks that it is nonempty.
    pub fn boxed(lower: Bound, upper: Bound) -> Result<Self> {
        let set = FeasibleSet::Box { lower, upper };
        set.validate(None)?;
        Ok(set)
    }

    /// Checks `lower ≤ upper` componentwise (and the bound lengths when `n`
    /// is given).
    pub fn validate(&self, n: Option<usize>) -> Result<()> {
        let FeasibleSet::Box { lower, upper } = self else {
            return Ok(());
        };
        if let Some(n) = n {
            lower.check_len(n)?;
            upper.check_len(n)?;
        }
        let len = match (lower, upper) {
            (Bound::PerCoordinate(l), _) => l.len(),
            (_, Bound::PerCoordinate(u)) => u.len(),
            _ => 1,
        };
        for i in 0..len {
            let (l, u) = (lower.at(i), upper.at(i));
            if l.is_nan() || u.is_nan() || l > u || l == f64::INFINITY || u == f64::NEG_INFINITY {
                return Err(Error::InvalidArgument(format!(
                    "empty box at coordinate {i}: [{l}, {u}]"
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            FeasibleSet::WholeSpace => true,
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .enumerate()
                .all(|(i, &v)| v >= lower.at(i) && v <= upper.at(i)),
        }
    }
}

/// Residual evaluator writing `G(x)` into its second argument.
pub type Residual = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A monotone equation instance.
///
/// The evaluator must be deterministic and free of side effects so that one
/// `Problem` can be shared by concurrent solves.
#[derive(Clone)]
pub struct Problem {
    id: String,
    dim: usize,
    feasible_set: FeasibleSet,
    known_root: Option<Vec<f64>>,
    residual: Arc<Residual>,
}

impl Problem {
    pub fn new<F>(id: impl Into<String>, dim: usize, feasible_set: FeasibleSet, residual: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        assert!(dim > 0, "problem dimension must be positive");
        Problem {
            id: id.into(),
            dim,
            feasible_set,
            known_root: None,
            residual: Arc::new(residual),
        }
    }

    /// Attaches a known solution, used by tests for Fejér-type checks.
    pub fn with_known_root(mut self, root: Vec<f64>) -> Self {
        assert_eq!(root.len(), self.dim);
        self.known_root = Some(root);
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feasible_set(&self) -> &FeasibleSet {
        &self.feasible_set
    }

    pub fn known_root(&self) -> Option<&[f64]> {
        self.known_root.as_deref()
    }

    /// Evaluates `G(x)` into `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: out.len(),
            });
        }
        (self.residual)(x, out);
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// Wraps the residual, keeping id, set and root. Handy for instrumenting
    /// evaluations.
    pub fn map_residual<F>(&self, wrap: F) -> Problem
    where
        F: Fn(&Residual, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        let inner = Arc::clone(&self.residual);
        Problem {
            id: self.id.clone(),
            dim: self.dim,
            feasible_set: self.feasible_set.clone(),
            known_root: self.known_root.clone(),
            residual: Arc::new(move |x: &[f64], out: &mut [f64]| wrap(&*inner, x, out)),
        }
    }

    /// Replaces the feasible set.
    pub fn with_feasible_set(mut self, set: FeasibleSet) -> Self {
        self.feasible_set = set;
        self
    }
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("feasible_set", &self.feasible_set)
            .field("known_root", &self.known_root.is_some())
            .finish()
    }
}
