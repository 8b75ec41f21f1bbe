//! Solver parameters, their validation and the flat `key = value` file
//! format used to store them.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The four search-direction families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Generalized modified optimal Perry CG with adaptive `λₖ`.
    Gmopcgm,
    /// Generalized CG projection method with adaptive `λₖ`.
    Gcgpm,
    /// `Gmopcgm` with `λ ≡ 1`.
    Mopcgm,
    /// `Gcgpm` with `λ ≡ 2` and `τ = 0`.
    Cgpm,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Gmopcgm, Method::Gcgpm, Method::Mopcgm, Method::Cgpm];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gmopcgm => "gmopcgm",
            Method::Gcgpm => "gcgpm",
            Method::Mopcgm => "mopcgm",
            Method::Cgpm => "cgpm",
        }
    }

    /// Upper-case display name used in summary tables.
    pub fn label(self) -> &'static str {
        match self {
            Method::Gmopcgm => "GMOPCGM",
            Method::Gcgpm => "GCGPM",
            Method::Mopcgm => "MOPCGM",
            Method::Cgpm => "CGPM",
        }
    }

    /// Whether `λₖ` is updated during the run.
    pub fn is_adaptive(self) -> bool {
        matches!(self, Method::Gmopcgm | Method::Gcgpm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gmopcgm" => Ok(Method::Gmopcgm),
            "gcgpm" => Ok(Method::Gcgpm),
            "mopcgm" => Ok(Method::Mopcgm),
            "cgpm" => Ok(Method::Cgpm),
            other => Err(Error::UnknownMethod(other.to_string())),
        }
    }
}

/// Scalar parameters shared by all methods.
///
/// `beta` is the initial trial step of the backtracking line search (written
/// `β` for the Perry-type method and `η` for the projection method).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    pub rho: f64,
    pub beta: f64,
    pub zeta: f64,
    pub zeta1: f64,
    pub zeta2: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub lambda0: f64,
    pub gamma: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_backtracks: usize,
}

const DEFAULT_TOL: f64 = 1e-11;
const DEFAULT_MAX_ITER: usize = 2000;
const DEFAULT_MAX_BACKTRACKS: usize = 60;

impl SolverConfig {
    /// Parameter set used for the benchmark experiments.
    pub fn defaults(method: Method) -> Self {
        match method {
            Method::Gmopcgm | Method::Mopcgm => SolverConfig {
                tau: 1.0,
                rho: 0.8,
                beta: 0.5,
                zeta: 1e-4,
                zeta1: 1.0,
                zeta2: 1.0,
                alpha_min: 0.1,
                alpha_max: 2.0,
                lambda0: 1.0,
                gamma: 1.1,
                // not listed for this method; borrowed from the projection method
                gamma1: 1.1,
                gamma2: 1.8,
                gamma3: 1.0,
                gamma4: 1.0,
                tol: DEFAULT_TOL,
                max_iter: DEFAULT_MAX_ITER,
                max_backtracks: DEFAULT_MAX_BACKTRACKS,
            },
            Method::Gcgpm | Method::Cgpm => SolverConfig {
                tau: 0.001,
                rho: 0.5,
                beta: 0.6,
                zeta: 0.1,
                zeta1: 1.0,
                zeta2: 1.0,
                alpha_min: 0.55,
                alpha_max: 4.9,
                lambda0: 1.0,
                gamma: 1.8,
                gamma1: 1.1,
                gamma2: 1.7,
                gamma3: 1.05,
                gamma4: 1.05,
                tol: DEFAULT_TOL,
                max_iter: DEFAULT_MAX_ITER,
                max_backtracks: DEFAULT_MAX_BACKTRACKS,
            },
        }
    }

    /// Parameter set for the sparse signal recovery experiment.
    pub fn cs_defaults(method: Method) -> Self {
        let mut cfg = Self::defaults(method);
        if matches!(method, Method::Gmopcgm | Method::Mopcgm) {
            cfg.tau = 1.05;
            cfg.gamma3 = 0.85;
        }
        cfg.tol = 1e-5;
        cfg
    }

    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        let float = || -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|e| Error::config(key, format!("`{value}` is not a number ({e})")))
        };
        let int = || -> Result<usize> {
            value
                .parse::<usize>()
                .map_err(|e| Error::config(key, format!("`{value}` is not an integer ({e})")))
        };
        match key {
            "tau" => self.tau = float()?,
            "rho" => self.rho = float()?,
            "beta" | "eta" => self.beta = float()?,
            "zeta" => self.zeta = float()?,
            "zeta1" => self.zeta1 = float()?,
            "zeta2" => self.zeta2 = float()?,
            "alpha_min" => self.alpha_min = float()?,
            "alpha_max" => self.alpha_max = float()?,
            "lambda0" => self.lambda0 = float()?,
            "gamma" => self.gamma = float()?,
            "gamma1" => self.gamma1 = float()?,
            "gamma2" => self.gamma2 = float()?,
            "gamma3" => self.gamma3 = float()?,
            "gamma4" => self.gamma4 = float()?,
            "tol" => self.tol = float()?,
            "max_iter" => self.max_iter = int()?,
            "max_backtracks" => self.max_backtracks = int()?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies a `key = value` document on top of `self`. Blank lines and
    /// lines starting with `#` are skipped; unknown or repeated keys are
    /// rejected.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line: idx + 1,
                    reason: format!("duplicate key `{key}`"),
                });
            }
            self.set(key, value).map_err(|e| Error::Parse {
                line: idx + 1,
                reason: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Parses a document on top of the defaults of `method`.
    pub fn from_kv(text: &str, method: Method) -> Result<Self> {
        let mut cfg = Self::defaults(method);
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    /// Writes every field, one `key = value` per line. Floats use the
    /// shortest representation that round-trips.
    pub fn to_kv(&self) -> String {
        let floats = [
            ("tau", self.tau),
            ("rho", self.rho),
            ("beta", self.beta),
            ("zeta", self.zeta),
            ("zeta1", self.zeta1),
            ("zeta2", self.zeta2),
            ("alpha_min", self.alpha_min),
            ("alpha_max", self.alpha_max),
            ("lambda0", self.lambda0),
            ("gamma", self.gamma),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
            ("tol", self.tol),
        ];
        let mut out = String::new();
        for (k, v) in floats {
            out.push_str(&format!("{k} = {v:?}\n"));
        }
        out.push_str(&format!("max_iter = {}\n", self.max_iter));
        out.push_str(&format!("max_backtracks = {}\n", self.max_backtracks));
        out
    }

    /// Lower bound of the sufficient descent constant of the projection
    /// method, `α_min (1 − (1+τ)² / (4 α_min²))`.
    pub fn gcgpm_descent_constant(&self) -> f64 {
        self.alpha_min * (1.0 - (1.0 + self.tau).powi(2) / (4.0 * self.alpha_min.powi(2)))
    }
}

fn open_unit(field: &str, v: f64, hi: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < hi {
        Ok(())
    } else {
        Err(Error::config(field, format!("{v} not in (0, {hi})")))
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            field,
            format!("{v} must be positive and finite"),
        ))
    }
}

/// Checks every field invariant of `cfg`; for [`Method::Gcgpm`] additionally
/// requires `α_min ≥ (1+τ)/2`, the hypothesis of its descent guarantee.
pub fn validate_config(cfg: &SolverConfig, method: Method) -> Result<()> {
    positive("tau", cfg.tau)?;
    open_unit("rho", cfg.rho, 1.0)?;
    positive("beta", cfg.beta)?;
    positive("zeta", cfg.zeta)?;
    positive("zeta1", cfg.zeta1)?;
    positive("zeta2", cfg.zeta2)?;
    if cfg.zeta1 > cfg.zeta2 {
        return Err(Error::config(
            "zeta1",
            format!("zeta1 = {} exceeds zeta2 = {}", cfg.zeta1, cfg.zeta2),
        ));
    }
    positive("alpha_min", cfg.alpha_min)?;
    positive("alpha_max", cfg.alpha_max)?;
    if cfg.alpha_min > cfg.alpha_max {
        return Err(Error::config(
            "alpha_min",
            format!(
                "alpha_min = {} exceeds alpha_max = {}",
                cfg.alpha_min, cfg.alpha_max
            ),
        ));
    }
    positive("lambda0", cfg.lambda0)?;
    open_unit("gamma", cfg.gamma, 2.0)?;
    open_unit("gamma1", cfg.gamma1, 2.0)?;
    open_unit("gamma2", cfg.gamma2, 2.0)?;
    open_unit("gamma3", cfg.gamma3, 2.0)?;
    open_unit("gamma4", cfg.gamma4, 2.0)?;
    positive("tol", cfg.tol)?;
    if cfg.max_iter == 0 {
        return Err(Error::config("max_iter", "must be at least 1"));
    }
    if cfg.max_backtracks == 0 {
        return Err(Error::config("max_backtracks", "must be at least 1"));
    }
    if method == Method::Gcgpm {
        let need = (1.0 + cfg.tau) / 2.0;
        if cfg.alpha_min < need {
            return Err(Error::config(
                "alpha_min",
                format!(
                    "{} < (1 + tau)/2 = {need}; required for sufficient descent",
                    cfg.alpha_min
                ),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_validate() {
        for m in Method::ALL {
            validate_config(&SolverConfig::defaults(m), m).unwrap();
            validate_config(&SolverConfig::cs_defaults(m), m).unwrap();
        }
    }

    #[test]
    fn gcgpm_alpha_min_rule() {
        let mut cfg = SolverConfig::defaults(Method::Gcgpm);
        cfg.tau = 0.001;
        cfg.alpha_min = 0.55;
        assert!(validate_config(&cfg, Method::Gcgpm).is_ok());

        cfg.tau = 1.0;
        cfg.alpha_min = 0.9;
        let err = validate_config(&cfg, Method::Gcgpm).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref field, .. } if field == "alpha_min"));
        // the rule is specific to the projection method
        assert!(validate_config(&cfg, Method::Gmopcgm).is_ok());
    }

    #[test]
    fn rho_out_of_range() {
        let mut cfg = SolverConfig::defaults(Method::Gmopcgm);
        cfg.rho = 1.2;
        let err = validate_config(&cfg, Method::Gmopcgm).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig { ref field, .. } if field == "rho"));
    }

    #[test]
    fn other_violations_name_field() {
        type Mutation = Box<dyn Fn(&mut SolverConfig)>;
        let cases: Vec<(&str, Mutation)> = vec![
            ("zeta1", Box::new(|c| c.zeta1 = 2.0)),
            ("alpha_min", Box::new(|c| c.alpha_min = 3.0)),
            ("gamma", Box::new(|c| c.gamma = 2.0)),
            ("gamma3", Box::new(|c| c.gamma3 = 0.0)),
            ("tol", Box::new(|c| c.tol = -1.0)),
            ("max_iter", Box::new(|c| c.max_iter = 0)),
        ];
        for (name, mutate) in cases {
            let mut cfg = SolverConfig::defaults(Method::Gmopcgm);
            mutate(&mut cfg);
            match validate_config(&cfg, Method::Gmopcgm) {
                Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, name),
                other => panic!("{name}: {other:?}"),
            }
        }
    }

    #[test]
    fn kv_parsing() {
        let text = "# comment\n\ntau = 0.5\nmax_iter=10\n";
        let cfg = SolverConfig::from_kv(text, Method::Gmopcgm).unwrap();
        assert_eq!(cfg.tau, 0.5);
        assert_eq!(cfg.max_iter, 10);
        assert_eq!(cfg.rho, 0.8);

        assert!(SolverConfig::from_kv("bogus = 1", Method::Gcgpm).is_err());
        assert!(SolverConfig::from_kv("tau 1", Method::Gcgpm).is_err());
        assert!(SolverConfig::from_kv("tau = x", Method::Gcgpm).is_err());
        assert!(SolverConfig::from_kv("tau = 1\ntau = 2", Method::Gcgpm).is_err());
    }

    #[test]
    fn descent_constant() {
        let c = SolverConfig::defaults(Method::Gcgpm).gcgpm_descent_constant();
        // 0.55 (1 - 1.001² / 1.21)
        assert!((c - 0.094_545).abs() < 1e-12, "{c}");
    }

    fn arb_config() -> impl Strategy<Value = SolverConfig> {
        (
            prop::array::uniform15(
                prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
            ),
            1usize..100_000,
            1usize..1000,
        )
            .prop_map(|(f, max_iter, max_backtracks)| SolverConfig {
                tau: f[0],
                rho: f[1],
                beta: f[2],
                zeta: f[3],
                zeta1: f[4],
                zeta2: f[5],
                alpha_min: f[6],
                alpha_max: f[7],
                lambda0: f[8],
                gamma: f[9],
                gamma1: f[10],
                gamma2: f[11],
                gamma3: f[12],
                gamma4: f[13],
                tol: f[14],
                max_iter,
                max_backtracks,
            })
    }

    proptest! {
        #[test]
        fn kv_round_trip(cfg in arb_config()) {
            let text = cfg.to_kv();
            let parsed = SolverConfig::from_kv(&text, Method::Gcgpm).unwrap();
            prop_assert_eq!(&parsed, &cfg);
            prop_assert_eq!(parsed.to_kv(), text);
        }
    }
}
