//! Non-Markovianity measures and divisibility classification for qubit models.
//!
//! All measures work on a uniform time grid ([`TimeWindow`]). The model's
//! Bloch trajectory is computed once per analysis and shared between measures.

mod divisibility;
mod rhp;
mod search;
mod trajectory;

pub use divisibility::{
    classify_divisibility, volume_monotone, DivisibilityClass, DivisibilityConfig, DivisibilityPath,
    DivisibilityReport, VolumeReport,
};
pub use rhp::{find_singularity, rhp_from_rates, rhp_measure, RhpConfig, RhpResult, Singularity};
pub use search::{
    blp_search, direction, direction_grid, helstrom_search, helstrom_values, local_representation_blp,
    pair_values, rates_certify_monotone, BlpResult, HelstromResult,
};
pub use trajectory::{backflow, increase_intervals, DistinguishabilityTrajectory, IncreaseInterval, PairMetadata};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::QubitModel;

/// Uniform grid `t_k = k·t_max/(points−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t_max: f64,
    pub points: usize,
}

impl TimeWindow {
    pub fn new(t_max: f64, points: usize) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() || points < 2 {
            return Err(Error::InvalidParameter(format!(
                "time window needs t_max > 0 and at least two points (got {t_max}, {points})"
            )));
        }
        Ok(Self { t_max, points })
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n).map(|k| self.t_max * k as f64 / n as f64).collect()
    }

    pub fn step(&self) -> f64 {
        self.t_max / (self.points - 1) as f64
    }

    /// Same span, `factor` times denser.
    pub fn refined(&self, factor: usize) -> Self {
        Self { t_max: self.t_max, points: (self.points - 1) * factor + 1 }
    }
}

/// Pair-search settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Polar steps of the direction grid, `θ_i = iπ/theta_steps`.
    pub theta_steps: usize,
    /// Azimuthal steps, `φ_j = 2πj/phi_steps`.
    pub phi_steps: usize,
    /// Steps of the bias grid `τ ∈ [−1, 1]` (Helstrom search).
    pub tau_steps: usize,
    /// Local ascent from the best grid points.
    pub refine: bool,
    /// How many grid points seed the ascent.
    pub seeds: usize,
    /// Increases smaller than this are not counted as backflow.
    pub hysteresis: f64,
    /// Skip the search when the rates certify monotonicity.
    pub certify: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { theta_steps: 12, phi_steps: 24, tau_steps: 8, refine: true, seeds: 3, hysteresis: 1e-10, certify: true }
    }
}

impl SearchConfig {
    /// Doubles the direction and bias grids.
    pub fn refined(&self) -> Self {
        Self { theta_steps: 2 * self.theta_steps, phi_steps: 2 * self.phi_steps, tau_steps: 2 * self.tau_steps, ..*self }
    }
}

/// Which measures [`analyze`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeasureSelection {
    pub blp: bool,
    pub helstrom: bool,
    pub rhp: bool,
    pub divisibility: bool,
    pub volume: bool,
}

impl Default for MeasureSelection {
    fn default() -> Self {
        Self { blp: true, helstrom: true, rhp: true, divisibility: true, volume: true }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub search: SearchConfig,
    pub rhp: RhpConfig,
    pub divisibility: DivisibilityConfig,
    /// Relative tolerance on volume growth.
    pub volume_tol: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            rhp: RhpConfig::default(),
            divisibility: DivisibilityConfig::default(),
            volume_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub time_points: usize,
    pub direction_points: usize,
    pub blp_evaluations: usize,
    pub helstrom_evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct MeasureReport {
    pub model: String,
    pub window: TimeWindow,
    pub blp: Option<BlpResult>,
    pub helstrom: Option<HelstromResult>,
    pub rhp: Option<RhpResult>,
    pub divisibility: Option<DivisibilityReport>,
    pub volume: Option<VolumeReport>,
    pub diagnostics: Diagnostics,
}

impl MeasureReport {
    pub fn blp_value(&self) -> Option<f64> {
        self.blp.as_ref().map(|b| b.value)
    }

    pub fn helstrom_value(&self) -> Option<f64> {
        self.helstrom.as_ref().map(|h| h.value)
    }

    pub fn divisibility_class(&self) -> Option<DivisibilityClass> {
        self.divisibility.as_ref().map(|d| d.class)
    }

    pub fn volume_monotone(&self) -> Option<bool> {
        self.volume.as_ref().map(|v| v.monotone)
    }
}

/// Trace-distance measure on the window with default search settings.
pub fn blp_measure(model: &dyn QubitModel, window: &TimeWindow, search: &SearchConfig) -> Result<BlpResult> {
    blp_search(model, window, search, None)
}

/// Helstrom measure, seeded with the unbiased search so it is never below it.
pub fn helstrom_measure(model: &dyn QubitModel, window: &TimeWindow, search: &SearchConfig) -> Result<HelstromResult> {
    let times = window.grid();
    let affines = model.affine_trajectory(&times)?;
    let blp = blp_search(model, window, search, Some(&affines))?;
    helstrom_search(model, window, search, Some(&affines), Some(&blp))
}

/// Runs the selected measures on one shared Bloch trajectory.
pub fn analyze(
    model: &dyn QubitModel,
    window: &TimeWindow,
    selection: &MeasureSelection,
    cfg: &AnalysisConfig,
) -> Result<MeasureReport> {
    let times = window.grid();
    let affines = model.affine_trajectory(&times)?;
    let blp = if selection.blp || selection.helstrom {
        Some(blp_search(model, window, &cfg.search, Some(&affines))?)
    } else {
        None
    };
    let helstrom = if selection.helstrom {
        Some(helstrom_search(model, window, &cfg.search, Some(&affines), blp.as_ref())?)
    } else {
        None
    };
    let rhp = if selection.rhp { Some(rhp::rhp_from_trajectory(model, &times, &affines, &cfg.rhp)?) } else { None };
    let divisibility = if selection.divisibility {
        Some(divisibility::classify_from_trajectory(model, &times, &affines, &cfg.divisibility)?)
    } else {
        None
    };
    let volume =
        if selection.volume { Some(divisibility::volume_from_trajectory(&times, &affines, cfg.volume_tol)) } else { None };
    let diagnostics = Diagnostics {
        time_points: times.len(),
        direction_points: direction_grid(&cfg.search).len(),
        blp_evaluations: blp.as_ref().map_or(0, |b| b.evaluations),
        helstrom_evaluations: helstrom.as_ref().map_or(0, |h| h.evaluations),
    };
    Ok(MeasureReport {
        model: model.name(),
        window: *window,
        blp: if selection.blp { blp } else { None },
        helstrom,
        rhp,
        divisibility,
        volume,
        diagnostics,
    })
}

#[cfg(test)]
mod tests;
