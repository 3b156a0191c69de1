use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate_with_breaks, QuadOptions};

/// Environment spectral density `J(ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralDensity {
    /// `J(ω) = α ω_c^{1−s} ω^s e^{−ω/ω_c}`.
    OhmicFamily { alpha: f64, s: f64, cutoff: f64 },
    /// `J(ω) = γ₀ λ² / (2π [(ω₀ + Δ − ω)² + λ²])`.
    Lorentzian { gamma0: f64, width: f64, detuning: f64, omega0: f64 },
    /// Piecewise-linear interpolation of `(ω, J)` samples, zero outside the grid.
    Tabulated { omega: Vec<f64>, density: Vec<f64> },
}

/// Environment temperature; `Zero` is the `β = ∞` branch with `coth → 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Zero,
    Beta(f64),
}

impl Temperature {
    pub fn from_beta(beta: f64) -> Self {
        if beta.is_infinite() {
            Temperature::Zero
        } else {
            Temperature::Beta(beta)
        }
    }

    fn coth_factor(&self, omega: f64) -> f64 {
        match *self {
            Temperature::Zero => 1.0,
            Temperature::Beta(beta) => {
                let x = 0.5 * beta * omega;
                if x > 20.0 {
                    1.0
                } else {
                    1.0 / x.tanh()
                }
            }
        }
    }
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpectralDensity::OhmicFamily { alpha, cutoff, .. } => {
                if *alpha < 0.0 || *cutoff <= 0.0 {
                    return Err(Error::InvalidParameter("ohmic family needs α ≥ 0 and ω_c > 0".into()));
                }
            }
            SpectralDensity::Lorentzian { gamma0, width, .. } => {
                if *gamma0 < 0.0 || *width <= 0.0 {
                    return Err(Error::InvalidParameter("Lorentzian needs γ₀ ≥ 0 and λ > 0".into()));
                }
            }
            SpectralDensity::Tabulated { omega, density } => {
                if omega.len() != density.len() || omega.len() < 2 {
                    return Err(Error::InvalidParameter("tabulated density needs ≥ 2 matching samples".into()));
                }
                if omega.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter("tabulated frequencies must increase".into()));
                }
                if density.iter().any(|&j| j < 0.0) {
                    return Err(Error::InvalidParameter("spectral density must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, omega: f64) -> f64 {
        match self {
            SpectralDensity::OhmicFamily { alpha, s, cutoff } => {
                if omega <= 0.0 {
                    return 0.0;
                }
                alpha * cutoff.powf(1.0 - s) * omega.powf(*s) * (-omega / cutoff).exp()
            }
            SpectralDensity::Lorentzian { gamma0, width, detuning, omega0 } => {
                let x = omega0 + detuning - omega;
                gamma0 * width * width / (TAU * (x * x + width * width))
            }
            SpectralDensity::Tabulated { omega: w, density } => {
                if omega < w[0] || omega > w[w.len() - 1] {
                    return 0.0;
                }
                let k = w.partition_point(|&x| x <= omega).clamp(1, w.len() - 1);
                let (w0, w1) = (w[k - 1], w[k]);
                let f = (omega - w0) / (w1 - w0);
                density[k - 1] * (1.0 - f) + density[k] * f
            }
        }
    }

    /// Frequency beyond which the remaining contribution is handled as a tail
    /// (or is negligible), and whether a tail integral is needed.
    fn support_end(&self) -> (f64, bool) {
        match self {
            SpectralDensity::OhmicFamily { s, cutoff, .. } => (cutoff * (60.0 + 3.0 * s.max(0.0)), false),
            SpectralDensity::Lorentzian { width, detuning, omega0, .. } => {
                ((omega0 + detuning).max(0.0) + 200.0 * width, true)
            }
            SpectralDensity::Tabulated { omega, .. } => (omega[omega.len() - 1], false),
        }
    }

    /// Rejects densities for which the dephasing exponent diverges.
    fn check_integrable(&self, temp: Temperature) -> Result<()> {
        match (self, temp) {
            (SpectralDensity::OhmicFamily { s, .. }, _) if *s <= 0.0 => Err(Error::Divergent(format!(
                "ohmic exponent s = {s} makes the low-frequency integral diverge (need s > 0)"
            ))),
            (_, Temperature::Beta(_)) if self.eval(0.0) > 0.0 => {
                Err(Error::Divergent(
                    "J(0) > 0 at finite temperature: the thermal factor makes the integral diverge at ω → 0".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

fn breakpoints(start: f64, end: f64, t: f64) -> Vec<f64> {
    const MAX_PANELS: f64 = 4000.0;
    let mut pts = vec![start];
    if t > 0.0 {
        let spacing = (TAU / t).max((end - start) / MAX_PANELS);
        let mut w = start + spacing;
        while w < end {
            pts.push(w);
            w += spacing;
        }
    }
    pts.push(end);
    pts
}

/// Integrates `f` over `[0, ∞)` for the given density: oscillation-aligned
/// panels up to the support end, plus a mapped tail when required.
fn integrate_spectral<F: Fn(f64) -> f64>(j: &SpectralDensity, t: f64, f: F) -> Result<f64> {
    let opts = QuadOptions { abs_tol: 1e-12, rel_tol: 1e-11, max_intervals: 20_000 };
    let (end, tail) = j.support_end();
    let start = match j {
        SpectralDensity::Tabulated { omega, .. } => omega[0].max(0.0),
        _ => 0.0,
    };
    let mut breaks = breakpoints(start, end, t);
    if let SpectralDensity::Tabulated { omega, .. } = j {
        breaks.extend(omega.iter().copied().filter(|&w| w > start && w < end));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
    }
    let mut total = integrate_with_breaks(&f, &breaks, opts)?.value;
    if tail {
        // ω = end + u/(1−u), u ∈ [0, 1)
        let mapped = |u: f64| {
            let one_minus = 1.0 - u;
            if one_minus <= 0.0 {
                return 0.0;
            }
            let w = end + u / one_minus;
            f(w) / (one_minus * one_minus)
        };
        total += integrate_with_breaks(mapped, &[0.0, 0.5, 0.9, 0.99, 1.0], opts)?.value;
    }
    Ok(total)
}

/// Dephasing exponent `Λ(t) = ∫ J(ω) coth(βω/2) (1 − cos ωt)/ω² dω`.
fn dephasing_exponent(j: &SpectralDensity, temp: Temperature, t: f64) -> Result<f64> {
    j.validate()?;
    j.check_integrable(temp)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    integrate_spectral(j, t, |w| {
        if w <= 0.0 {
            return 0.0;
        }
        let half = (0.5 * w * t).sin();
        j.eval(w) * temp.coth_factor(w) * 2.0 * half * half / (w * w)
    })
}

/// `G(t) = exp[−∫ J(ω) coth(βω/2) (1 − cos ωt)/ω² dω]`.
pub fn dephasing_g_thermal(j: &SpectralDensity, temp: Temperature, t: f64) -> Result<f64> {
    Ok((-dephasing_exponent(j, temp, t)?).exp())
}

/// `−d/dt ln G(t) = ∫ J(ω) coth(βω/2) sin(ωt)/ω dω`.
pub fn dephasing_log_derivative_thermal(j: &SpectralDensity, temp: Temperature, t: f64) -> Result<f64> {
    j.validate()?;
    j.check_integrable(temp)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    integrate_spectral(j, t, |w| {
        if w <= 0.0 {
            return 0.0;
        }
        j.eval(w) * temp.coth_factor(w) * (w * t).sin() / w
    })
}

impl SpectralDensity {
    /// Characteristic time of the bath correlations.
    pub fn time_scale(&self) -> f64 {
        match self {
            SpectralDensity::OhmicFamily { cutoff, .. } => 1.0 / cutoff,
            SpectralDensity::Lorentzian { width, .. } => 1.0 / width,
            SpectralDensity::Tabulated { omega, .. } => PI / (omega[omega.len() - 1] - omega[0]).max(1e-12),
        }
    }

    /// Pure-dephasing decoherence function built from this density.
    pub fn decoherence_function(&self, temp: Temperature) -> super::DecoherenceFunction {
        let jv = self.clone();
        let jd = self.clone();
        super::DecoherenceFunction::new(super::Provenance::Quadrature, self.time_scale(), move |t| {
            Ok(num_complex::Complex64::new(dephasing_g_thermal(&jv, temp, t)?, 0.0))
        })
        .with_derivative(move |t| {
            let g = dephasing_g_thermal(&jd, temp, t)?;
            let rate = dephasing_log_derivative_thermal(&jd, temp, t)?;
            Ok(num_complex::Complex64::new(-rate * g, 0.0))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ohmic(alpha: f64, s: f64) -> SpectralDensity {
        SpectralDensity::OhmicFamily { alpha, s, cutoff: 1.0 }
    }

    #[test]
    fn g_is_one_at_zero_time() {
        for j in [ohmic(0.5, 1.0), ohmic(0.2, 3.0)] {
            assert_eq!(dephasing_g_thermal(&j, Temperature::Zero, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn ohmic_zero_temperature_closed_form() {
        // ∫ α e^{-ω}(1 − cos ωt)/ω dω = (α/2) ln(1 + t²)
        for &alpha in &[0.1, 1.0] {
            for &t in &[0.1, 1.0, 7.5, 50.0] {
                let g = dephasing_g_thermal(&ohmic(alpha, 1.0), Temperature::Zero, t).unwrap();
                let exact = (1.0 + t * t).powf(-alpha / 2.0);
                assert_relative_eq!(g, exact, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn ohmic_rate_closed_form() {
        for &t in &[0.3, 2.0, 20.0] {
            let rate = dephasing_log_derivative_thermal(&ohmic(0.4, 1.0), Temperature::Zero, t).unwrap();
            assert_relative_eq!(rate, 0.4 * t / (1.0 + t * t), max_relative = 1e-8);
        }
    }

    #[test]
    fn super_ohmic_plateau() {
        // s = 3: Λ(t) = α[1 − (1 − t²)/(1 + t²)²] → α
        let j = ohmic(0.5, 3.0);
        for &t in &[0.5f64, 3.0, 40.0] {
            let exact = 0.5 * (1.0 - (1.0 - t * t) / (1.0 + t * t).powi(2));
            let g = dephasing_g_thermal(&j, Temperature::Zero, t).unwrap();
            assert_relative_eq!(g, (-exact).exp(), max_relative = 1e-8);
        }
        let late = dephasing_g_thermal(&j, Temperature::Zero, 200.0).unwrap();
        assert!(late > 0.6 && late < 0.61, "plateau e^-0.5, got {late}");
    }

    #[test]
    fn finite_temperature_decoheres_faster() {
        let j = ohmic(0.2, 1.0);
        let cold = dephasing_g_thermal(&j, Temperature::Zero, 5.0).unwrap();
        let warm = dephasing_g_thermal(&j, Temperature::Beta(2.0), 5.0).unwrap();
        assert!(warm < cold);
    }

    #[test]
    fn divergent_densities_are_rejected() {
        assert!(matches!(
            dephasing_g_thermal(&ohmic(0.1, 0.0), Temperature::Zero, 1.0),
            Err(Error::Divergent(_))
        ));
        let lor = SpectralDensity::Lorentzian { gamma0: 1.0, width: 1.0, detuning: 0.0, omega0: 2.0 };
        assert!(matches!(dephasing_g_thermal(&lor, Temperature::Beta(1.0), 1.0), Err(Error::Divergent(_))));
        assert!(dephasing_g_thermal(&lor, Temperature::Zero, 1.0).is_ok());
    }

    #[test]
    fn tabulated_matches_analytic_density() {
        let omega: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.01).collect();
        let density = omega.iter().map(|&w| 0.3 * w * (-w).exp()).collect();
        let tab = SpectralDensity::Tabulated { omega, density };
        let g = dephasing_g_thermal(&tab, Temperature::Zero, 2.0).unwrap();
        assert_relative_eq!(g, 5f64.powf(-0.15), max_relative = 1e-4);
    }
}
