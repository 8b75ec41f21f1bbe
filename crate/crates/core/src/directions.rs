//! Search directions and the adaptive spectral scaling `λₖ`.
//!
//! All routines handle iterations `k ≥ 1`; the first iteration uses the
//! steepest-descent residual direction `p₀ = −G(x₀)` and is handled by the
//! solver. When a denominator is too close to zero the routines return
//! [`Restart`] and the caller falls back to `p = −λ G(xₖ)`.

use crate::linalg::{dot, norm, norm_sq};

/// Quantities from the previous iteration needed to form `pₖ`.
#[derive(Debug, Clone, Copy)]
pub struct DirectionInputs<'a> {
    /// `G(xₖ)`
    pub g: &'a [f64],
    /// `pₖ₋₁`
    pub p_prev: &'a [f64],
    /// `sₖ₋₁ = zₖ₋₁ − xₖ₋₁`
    pub s_prev: &'a [f64],
    /// `yₖ₋₁ = G(xₖ) − G(xₖ₋₁)`
    pub y_prev: &'a [f64],
    pub lambda: f64,
    pub tau: f64,
}

/// Signals that a denominator guard tripped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Restart(pub &'static str);

#[derive(Debug, Clone)]
pub struct GmopDirection {
    pub p: Vec<f64>,
    pub theta: f64,
    pub t_star: f64,
}

#[derive(Debug, Clone)]
pub struct GcgDirection {
    pub p: Vec<f64>,
    pub theta: f64,
    pub r: f64,
    pub a: f64,
}

/// `ε_den = 10⁻³⁰ · max(1, ‖a‖‖b‖)`
#[inline]
pub fn denominator_guard(a: &[f64], b: &[f64]) -> f64 {
    1e-30 * (norm(a) * norm(b)).max(1.0)
}

/// `v = y + τ s`
pub fn perry_v(y: &[f64], s: &[f64], tau: f64) -> Vec<f64> {
    y.iter().zip(s).map(|(yi, si)| yi + tau * si).collect()
}

/// Returns `(r, w)` with `r = 1 + max(0, −pᵀy/‖p‖²)` and `w = y + r p`.
/// This choice guarantees `pᵀw ≥ ‖p‖²`.
pub fn hz_w(p_prev: &[f64], y_prev: &[f64]) -> (f64, Vec<f64>) {
    let pp = norm_sq(p_prev);
    let r = if pp > 0.0 {
        1.0 + (-dot(p_prev, y_prev) / pp).max(0.0)
    } else {
        1.0
    };
    let w = y_prev.iter().zip(p_prev).map(|(y, p)| y + r * p).collect();
    (r, w)
}

fn finite_or_restart(p: Vec<f64>) -> Result<Vec<f64>, Restart> {
    if p.iter().all(|v| v.is_finite()) {
        Ok(p)
    } else {
        Err(Restart("non-finite direction"))
    }
}

/// Generalized optimal Perry direction
/// `p = −M g + θ p_prev` with `M = λ + θ gᵀp_prev/‖g‖²`, so that
/// `gᵀp = −λ‖g‖²` holds identically.
pub fn dir_gmopcgm(inp: &DirectionInputs<'_>) -> Result<GmopDirection, Restart> {
    let DirectionInputs {
        g,
        p_prev,
        s_prev: s,
        y_prev: y,
        lambda,
        tau,
    } = *inp;
    let ss = norm_sq(s);
    if !(ss > 0.0) {
        return Err(Restart("zero step"));
    }
    let gg = norm_sq(g);
    if !(gg > 0.0) {
        return Err(Restart("zero residual"));
    }
    let v = perry_v(y, s, tau);
    let pv = dot(p_prev, &v);
    if !(pv.abs() > denominator_guard(p_prev, &v)) {
        return Err(Restart("p_prev'v vanishes"));
    }
    let t_star = lambda * dot(s, &v) / ss;
    let theta = (dot(&v, g) - t_star * dot(s, g)) / pv;
    let m = lambda + theta * dot(g, p_prev) / gg;
    let p = g
        .iter()
        .zip(p_prev)
        .map(|(gi, pi)| -m * gi + theta * pi)
        .collect();
    Ok(GmopDirection {
        p: finite_or_restart(p)?,
        theta,
        t_star,
    })
}

/// Generalized Hager-Zhang type projection direction
/// `p = −λ g + θ p_prev + τ a w`.
pub fn dir_gcgpm(inp: &DirectionInputs<'_>) -> Result<GcgDirection, Restart> {
    let DirectionInputs {
        g,
        p_prev,
        y_prev: y,
        lambda,
        tau,
        ..
    } = *inp;
    if !(norm_sq(p_prev) > 0.0) {
        return Err(Restart("zero previous direction"));
    }
    let (r, w) = hz_w(p_prev, y);
    let pw = dot(p_prev, &w);
    if !(pw.abs() > denominator_guard(p_prev, &w)) {
        return Err(Restart("p_prev'w vanishes"));
    }
    let gp = dot(g, p_prev);
    let a = gp / pw;
    let theta = dot(g, &w) / pw - lambda * norm_sq(&w) * gp / (pw * pw);
    let ta = tau * a;
    let p = g
        .iter()
        .zip(p_prev)
        .zip(&w)
        .map(|((gi, pi), wi)| -lambda * gi + theta * pi + ta * wi)
        .collect();
    Ok(GcgDirection {
        p: finite_or_restart(p)?,
        theta,
        r,
        a,
    })
}

/// The Perry direction with the scaling frozen at `λ = 1`.
pub fn dir_mopcgm_baseline(inp: &DirectionInputs<'_>) -> Result<Vec<f64>, Restart> {
    dir_gmopcgm(&DirectionInputs {
        lambda: 1.0,
        ..*inp
    })
    .map(|d| d.p)
}

/// The projection direction with `λ = 2` and `τ = 0`, i.e. the
/// Hager-Zhang choice.
pub fn dir_cgpm_baseline(inp: &DirectionInputs<'_>) -> Result<Vec<f64>, Restart> {
    dir_gcgpm(&DirectionInputs {
        lambda: 2.0,
        tau: 0.0,
        ..*inp
    })
    .map(|d| d.p)
}

/// Adaptive scaling update.
///
/// Keeps `lambda` when the residual norm decreased, otherwise returns
/// `Π_[α_min, α_max](max(‖u‖²/sᵀu, sᵀu/‖s‖²))`. Falls back to `lambda0` if
/// `sᵀu` is not safely positive.
pub fn update_lambda(
    lambda: f64,
    s: &[f64],
    u: &[f64],
    gnorm_decreased: bool,
    (alpha_min, alpha_max): (f64, f64),
    lambda0: f64,
) -> f64 {
    if gnorm_decreased {
        return lambda;
    }
    let su = dot(s, u);
    let ss = norm_sq(s);
    if !(su > denominator_guard(s, u)) || !(ss > 0.0) {
        return lambda0;
    }
    let candidate = (norm_sq(u) / su).max(su / ss);
    if !candidate.is_finite() {
        return lambda0;
    }
    alpha_min.max(candidate.min(alpha_max))
}
