//! Choi-matrix measure of CP-divisibility violation and detection of singular times.

use super::TimeWindow;
use crate::channel::BlochAffine;
use crate::error::{Error, Result};
use crate::linalg;
use crate::models::QubitModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhpConfig {
    /// Finite-difference step; defaults to `min(1e-4·t_scale, Δt/4)`.
    pub epsilon: Option<f64>,
    /// Combine `ε` and `ε/2` to cancel the first-order error.
    pub richardson: bool,
    /// Smallest singular value of the Bloch matrix regarded as zero.
    pub singular_threshold: f64,
    /// Recovery level after which a near-zero is a genuine crossing rather than decay.
    pub recovery_threshold: f64,
}

impl Default for RhpConfig {
    fn default() -> Self {
        Self { epsilon: None, richardson: true, singular_threshold: 1e-12, recovery_threshold: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhpResult {
    /// Integral of `g` up to the end of the window, the singular time, or the truncation time.
    pub value: f64,
    /// The map stops being invertible inside the window.
    pub infinite: bool,
    pub singular_time: Option<f64>,
    /// Integration stopped because the map decayed to a numerically singular one for good.
    pub truncated_at: Option<f64>,
    pub epsilon: f64,
    pub times: Vec<f64>,
    pub integrand: Vec<f64>,
}

/// Where the Bloch matrix first becomes singular, if it does.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Singularity {
    /// The smallest singular value touches zero and recovers.
    Crossing(f64),
    /// It decays below the threshold and stays there.
    Decay(f64),
}

fn smallest_sv(a: &BlochAffine) -> f64 {
    linalg::smallest_singular_value3(&a.m)
}

/// Golden-section minimisation of `f` on `[a, b]`.
fn golden_min<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Scans the trajectory for the first time the map becomes singular, refining
/// local minima of the smallest singular value by golden-section search.
pub fn find_singularity(
    model: &dyn QubitModel,
    times: &[f64],
    affines: &[BlochAffine],
    cfg: &RhpConfig,
) -> Result<Option<Singularity>> {
    let sv: Vec<f64> = affines.iter().map(smallest_sv).collect();
    let n = sv.len();
    let recovers_after = |k: usize| sv[k..].iter().any(|&s| s > cfg.recovery_threshold);
    for k in 0..n {
        if sv[k] < cfg.singular_threshold {
            return Ok(Some(if recovers_after(k) { Singularity::Crossing(times[k]) } else { Singularity::Decay(times[k]) }));
        }
        let interior_min = k > 0 && k + 1 < n && sv[k] <= sv[k - 1] && sv[k] <= sv[k + 1];
        if interior_min && sv[k] < 0.5 * sv[k - 1].max(sv[k + 1]) {
            let (t, s) = golden_min(|t| Ok(smallest_sv(&model.affine(t)?)), times[k - 1], times[k + 1])?;
            if s < cfg.singular_threshold {
                return Ok(Some(if recovers_after(k) { Singularity::Crossing(t) } else { Singularity::Decay(t) }));
            }
        }
    }
    Ok(None)
}

/// `(‖Choi(Φ_{t+ε,t})/d‖₁ − 1)/ε`.
fn g_finite(at: &BlochAffine, at_eps: &BlochAffine, eps: f64, cap: f64) -> Result<f64> {
    let inter = at_eps.compose(&at.inverse(cap)?);
    let choi = inter.to_map().normalized_choi();
    Ok((linalg::trace_norm_hermitian(&linalg::hermitian_part(&choi)) - 1.0) / eps)
}

/// `N_RHP = ∫ g(t) dt` with `g` from finite-ε intermediate maps, trapezoid in time.
pub fn rhp_measure(model: &dyn QubitModel, window: &TimeWindow, cfg: &RhpConfig) -> Result<RhpResult> {
    let times = window.grid();
    let affines = model.affine_trajectory(&times)?;
    rhp_from_trajectory(model, &times, &affines, cfg)
}

pub(crate) fn rhp_from_trajectory(
    model: &dyn QubitModel,
    times: &[f64],
    affines: &[BlochAffine],
    cfg: &RhpConfig,
) -> Result<RhpResult> {
    let dt = times[1] - times[0];
    let eps = cfg.epsilon.unwrap_or((1e-4 * model.time_scale()).min(0.25 * dt));
    let singular = find_singularity(model, times, affines, cfg)?;
    let stop = match singular {
        Some(Singularity::Crossing(t)) | Some(Singularity::Decay(t)) => t,
        None => f64::INFINITY,
    };
    let used: Vec<f64> = times.iter().copied().filter(|&t| t + eps < stop).collect();
    // one batched evaluation of Φ at t + ε/2 and t + ε
    let mut grid: Vec<f64> = Vec::with_capacity(3 * used.len());
    for &t in &used {
        grid.extend([t + 0.5 * eps, t + eps]);
    }
    let shifted = model.affine_trajectory(&grid)?;
    let cap = 1.0 / cfg.singular_threshold;
    // round-off of the difference quotient; smaller values are not resolved
    let floor = 100.0 * f64::EPSILON / eps;
    let mut integrand = Vec::with_capacity(used.len());
    for (k, at) in affines.iter().take(used.len()).enumerate() {
        let g1 = g_finite(at, &shifted[2 * k + 1], eps, cap);
        let g = match g1 {
            Ok(g1) if cfg.richardson => {
                let g2 = g_finite(at, &shifted[2 * k], 0.5 * eps, cap)?;
                2.0 * g2 - g1
            }
            Ok(g1) => g1,
            Err(Error::NonInvertible { .. }) => break,
            Err(e) => return Err(e),
        };
        integrand.push(if g > floor { g } else { 0.0 });
    }
    let used = &used[..integrand.len()];
    let mut value = 0.0;
    for k in 1..used.len() {
        value += 0.5 * (integrand[k] + integrand[k - 1]) * (used[k] - used[k - 1]);
    }
    let (infinite, singular_time, truncated_at) = match singular {
        Some(Singularity::Crossing(t)) => (true, Some(t), None),
        Some(Singularity::Decay(t)) => (false, None, Some(t)),
        None => (false, None, None),
    };
    Ok(RhpResult { value, infinite, singular_time, truncated_at, epsilon: eps, times: used.to_vec(), integrand })
}

/// Rate-based integral `∫ (2/d) Σ_{γ_i<0} |γ_i| ‖A_i‖²_HS dt` on the window grid,
/// when the generator's operators are traceless and mutually orthogonal.
pub fn rhp_from_rates(model: &dyn QubitModel, window: &TimeWindow) -> Option<f64> {
    let gen = model.generator()?;
    let times = window.grid();
    let vals: Option<Vec<f64>> = times.iter().map(|&t| gen.rhp_rate_integrand(t)).collect();
    let vals = vals?;
    if vals.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((1..times.len()).map(|k| 0.5 * (vals[k] + vals[k - 1]) * (times[k] - times[k - 1])).fold(0.0, |acc, x| acc + x))
}
