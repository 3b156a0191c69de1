use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DecoherenceFunction, DephasingModel, Provenance};
use crate::error::{Error, Result};
use crate::measures::DistinguishabilityTrajectory;

/// Normalised discrete frequency distribution `|f(ω)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySpectrum {
    omega: Vec<f64>,
    weight: Vec<f64>,
}

const NORMALIZATION_TOL: f64 = 1e-9;

impl FrequencySpectrum {
    /// Requires nonnegative weights summing to one.
    pub fn new(omega: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        Self::check_shape(&omega, &weight)?;
        let total: f64 = weight.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized { total });
        }
        Ok(Self { omega, weight })
    }

    /// Rescales nonnegative weights to unit sum.
    pub fn normalized(omega: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        Self::check_shape(&omega, &weight)?;
        let total: f64 = weight.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Unnormalized { total });
        }
        Ok(Self { omega, weight: weight.into_iter().map(|w| w / total).collect() })
    }

    fn check_shape(omega: &[f64], weight: &[f64]) -> Result<()> {
        if omega.is_empty() || omega.len() != weight.len() {
            return Err(Error::InvalidParameter(format!(
                "spectrum needs matching nonempty grids ({} frequencies, {} weights)",
                omega.len(),
                weight.len()
            )));
        }
        if let Some(w) = weight.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::InvalidParameter(format!("negative or NaN spectral weight {w}")));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("frequencies must be finite".into()));
        }
        Ok(())
    }

    /// Two whitespace- or comma-separated columns `ω weight`; `#` starts a comment line.
    pub fn parse_two_column(text: &str) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut omega = vec![];
        let mut weight = vec![];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "line {}: expected two columns, found {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::InvalidParameter(format!("line {}: {e} ({s:?})", lineno + 1)))
            };
            omega.push(parse(cols[0])?);
            weight.push(parse(cols[1])?);
        }
        Ok((omega, weight))
    }

    /// A single frequency.
    pub fn delta(omega0: f64) -> Self {
        Self { omega: vec![omega0], weight: vec![1.0] }
    }

    /// Weighted sum of Gaussian peaks `(center, standard deviation, weight)`
    /// sampled on `points` nodes reaching eight standard deviations beyond the outer peaks.
    pub fn gaussian_mixture(peaks: &[(f64, f64, f64)], points: usize) -> Result<Self> {
        if peaks.is_empty() || points < 2 || peaks.iter().any(|p| !(p.1 > 0.0) || p.2 < 0.0) {
            return Err(Error::InvalidParameter("gaussian mixture needs peaks with σ > 0, weight ≥ 0".into()));
        }
        let lo = peaks.iter().map(|p| p.0 - 8.0 * p.1).fold(f64::INFINITY, f64::min);
        let hi = peaks.iter().map(|p| p.0 + 8.0 * p.1).fold(f64::NEG_INFINITY, f64::max);
        let step = (hi - lo) / (points - 1) as f64;
        let omega: Vec<f64> = (0..points).map(|k| lo + step * k as f64).collect();
        let weight = omega
            .iter()
            .map(|&w| peaks.iter().map(|&(c, s, a)| a * (-0.5 * ((w - c) / s).powi(2)).exp() / s).sum())
            .collect();
        Self::normalized(omega, weight)
    }

    pub fn gaussian(center: f64, variance: f64, points: usize) -> Result<Self> {
        Self::gaussian_mixture(&[(center, variance.sqrt(), 1.0)], points)
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn mean(&self) -> f64 {
        self.omega.iter().zip(&self.weight).map(|(w, p)| w * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.omega.iter().zip(&self.weight).map(|(w, p)| p * (w - m).powi(2)).sum()
    }

    /// Decoherence function `G(t) = Σ_k |f(ω_k)|² e^{iω_k Δn t}`.
    pub fn decoherence_function(&self, delta_n: f64) -> DecoherenceFunction {
        let spread = self.variance().sqrt().max(1e-12);
        let scale = 1.0 / (spread * delta_n.abs().max(1e-12));
        let sv = self.clone();
        let sd = self.clone();
        DecoherenceFunction::new(Provenance::SpectrumFourier, scale, move |t| Ok(sv.fourier(delta_n, t, false)))
            .with_derivative(move |t| Ok(sd.fourier(delta_n, t, true)))
    }

    fn fourier(&self, delta_n: f64, t: f64, derivative: bool) -> Complex64 {
        self.omega
            .iter()
            .zip(&self.weight)
            .map(|(&w, &p)| {
                let phase = Complex64::from_polar(p, w * delta_n * t);
                if derivative {
                    phase * Complex64::new(0.0, w * delta_n)
                } else {
                    phase
                }
            })
            .sum()
    }

    pub fn dephasing_model(&self, delta_n: f64) -> DephasingModel {
        DephasingModel::new("spectrum dephasing", self.decoherence_function(delta_n))
    }
}

/// `G(t) = Σ_k |f(ω_k)|² e^{iω_k Δn t}` for a normalised spectrum.
pub fn spectrum_dephasing_g(f: &FrequencySpectrum, delta_n: f64, t: f64) -> Result<Complex64> {
    let total: f64 = f.weight.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Unnormalized { total });
    }
    Ok(f.fourier(delta_n, t, false))
}

/// Gaussian input filtered by a tilted Fabry–Pérot etalon:
/// `w(ω) ∝ exp[−(ω−ω₀)²/2σ²] / (1 + F sin²(φ/2))` with
/// `φ = τ cos θ (ω−ω₀) + κ (1 − cos θ)`.
///
/// At normal incidence the transmission maximum sits on the input peak; tilting
/// moves a transmission minimum onto it, splitting the spectrum into two peaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FabryPerotParams {
    pub center: f64,
    pub sigma: f64,
    pub tau: f64,
    pub finesse: f64,
    pub kappa: f64,
    pub points: usize,
}

impl Default for FabryPerotParams {
    fn default() -> Self {
        Self { center: 0.0, sigma: 1.0, tau: 2.0, finesse: 50.0, kappa: PI / (1.0 - 0.2f64.cos()), points: 2001 }
    }
}

pub fn fabry_perot_spectrum(theta: f64, p: &FabryPerotParams) -> Result<FrequencySpectrum> {
    if !(p.sigma > 0.0) || !(p.finesse >= 0.0) || p.points < 2 {
        return Err(Error::InvalidParameter("Fabry–Pérot needs σ > 0, F ≥ 0 and at least two points".into()));
    }
    let lo = p.center - 6.0 * p.sigma;
    let step = 12.0 * p.sigma / (p.points - 1) as f64;
    let omega: Vec<f64> = (0..p.points).map(|k| lo + step * k as f64).collect();
    let weight = omega
        .iter()
        .map(|&w| {
            let x = w - p.center;
            let phi = p.tau * theta.cos() * x + p.kappa * (1.0 - theta.cos());
            (-0.5 * (x / p.sigma).powi(2)).exp() / (1.0 + p.finesse * (0.5 * phi).sin().powi(2))
        })
        .collect();
    FrequencySpectrum::normalized(omega, weight)
}

/// Interaction times `(t₁(s), t₂(s))` of the two photons along a protocol parameter `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlateSchedule {
    /// Both photons interact together: `t₁ = t₂ = s`, `s ∈ [0, duration]`.
    Simultaneous { duration: f64 },
    /// Photon 2 traverses its plate first (`s ∈ [0, plate2]`), then photon 1.
    Consecutive { plate2: f64, plate1: f64 },
    /// Piecewise-linear path through `(t₁, t₂)` waypoints, starting at the origin.
    Waypoints { points: Vec<(f64, f64)> },
}

impl PlateSchedule {
    pub fn duration(&self) -> f64 {
        match self {
            PlateSchedule::Simultaneous { duration } => *duration,
            PlateSchedule::Consecutive { plate2, plate1 } => plate1 + plate2,
            PlateSchedule::Waypoints { points } => {
                let mut prev = (0.0, 0.0);
                points
                    .iter()
                    .map(|&p| {
                        let len = (p.0 - prev.0).abs() + (p.1 - prev.1).abs();
                        prev = p;
                        len
                    })
                    .sum()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            PlateSchedule::Simultaneous { duration } => *duration >= 0.0,
            PlateSchedule::Consecutive { plate2, plate1 } => *plate1 >= 0.0 && *plate2 >= 0.0,
            PlateSchedule::Waypoints { points } => {
                let mut prev = (0.0, 0.0);
                points.iter().all(|&p| {
                    let ok = p.0 >= prev.0 && p.1 >= prev.1;
                    prev = p;
                    ok
                })
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("plate schedule must have nondecreasing nonnegative times".into()))
        }
    }

    /// `(t₁, t₂)` at protocol parameter `s`; the Waypoints path is parametrised by ℓ¹ arc length.
    pub fn at(&self, s: f64) -> (f64, f64) {
        let s = s.max(0.0);
        match self {
            PlateSchedule::Simultaneous { duration } => (s.min(*duration), s.min(*duration)),
            PlateSchedule::Consecutive { plate2, plate1 } => ((s - plate2).clamp(0.0, *plate1), s.min(*plate2)),
            PlateSchedule::Waypoints { points } => {
                let mut prev = (0.0, 0.0);
                let mut left = s;
                for &p in points {
                    let len = (p.0 - prev.0) + (p.1 - prev.1);
                    if left <= len && len > 0.0 {
                        let f = left / len;
                        return (prev.0 + f * (p.0 - prev.0), prev.1 + f * (p.1 - prev.1));
                    }
                    left -= len;
                    prev = p;
                }
                prev
            }
        }
    }
}

/// Which Bell family carries the initial coherence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellFamily {
    /// `(|HH⟩ ± |VV⟩)/√2`
    Phi,
    /// `(|HV⟩ ± |VH⟩)/√2`
    Psi,
}

/// Two polarisation qubits dephased through their frequency degrees of freedom,
/// with jointly Gaussian frequencies of common variance `C` and correlation `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalDephasing {
    pub variance: f64,
    pub correlation: f64,
    pub delta_n: f64,
    pub schedule: PlateSchedule,
}

/// Global Bell-pair distinguishability and the two single-photon ones.
#[derive(Debug, Clone)]
pub struct NonlocalTrajectories {
    pub global: DistinguishabilityTrajectory,
    pub local1: DistinguishabilityTrajectory,
    pub local2: DistinguishabilityTrajectory,
}

impl NonlocalDephasing {
    pub fn new(variance: f64, correlation: f64, delta_n: f64, schedule: PlateSchedule) -> Result<Self> {
        if !(variance >= 0.0) || !(correlation.abs() <= 1.0) || !delta_n.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "nonlocal dephasing needs C ≥ 0 and |K| ≤ 1 (got C = {variance}, K = {correlation})"
            )));
        }
        schedule.validate()?;
        Ok(Self { variance, correlation, delta_n, schedule })
    }

    /// Modulus of the surviving Bell coherence, `|E[e^{iΔn(ω₁t₁ ± ω₂t₂)}]|`.
    pub fn bell_coherence(&self, family: BellFamily, t1: f64, t2: f64) -> f64 {
        let sign = match family {
            BellFamily::Phi => 1.0,
            BellFamily::Psi => -1.0,
        };
        let q = t1 * t1 + t2 * t2 + 2.0 * sign * self.correlation * t1 * t2;
        (-0.5 * self.delta_n * self.delta_n * self.variance * q).exp()
    }

    /// Trace distance of the best Bell pair, `exp[−½Δn²C(t₁² + t₂² − 2|K|t₁t₂)]`.
    pub fn global_distance(&self, t1: f64, t2: f64) -> f64 {
        self.bell_coherence(BellFamily::Phi, t1, t2).max(self.bell_coherence(BellFamily::Psi, t1, t2))
    }

    /// Single-photon trace distance after interaction time `t`.
    pub fn local_distance(&self, t: f64) -> f64 {
        (-0.5 * self.delta_n * self.delta_n * self.variance * t * t).exp()
    }

    /// Samples the schedule uniformly on `points` nodes.
    pub fn trajectories(&self, points: usize) -> Result<NonlocalTrajectories> {
        if points < 2 {
            return Err(Error::InvalidParameter("need at least two time points".into()));
        }
        let total = self.schedule.duration();
        let times: Vec<f64> = (0..points).map(|k| total * k as f64 / (points - 1) as f64).collect();
        let pairs: Vec<(f64, f64)> = times.iter().map(|&s| self.schedule.at(s)).collect();
        let global = pairs.iter().map(|&(a, b)| self.global_distance(a, b)).collect();
        let local1 = pairs.iter().map(|&(a, _)| self.local_distance(a)).collect();
        let local2 = pairs.iter().map(|&(_, b)| self.local_distance(b)).collect();
        Ok(NonlocalTrajectories {
            global: DistinguishabilityTrajectory::new(times.clone(), global)?,
            local1: DistinguishabilityTrajectory::new(times.clone(), local1)?,
            local2: DistinguishabilityTrajectory::new(times, local2)?,
        })
    }
}
