//! Divisibility classification and the Bloch-volume criterion.

use std::fmt;
use std::str::FromStr;

use super::rhp::{find_singularity, RhpConfig, Singularity};
use super::TimeWindow;
use crate::channel::{is_completely_positive, is_positive_map, BlochAffine};
use crate::error::{Error, Result};
use crate::generator::qubit_basis_grid;
use crate::models::QubitModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DivisibilityClass {
    CpDivisible,
    PDivisibleOnly,
    NonPDivisible,
    NonInvertible,
}

impl DivisibilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            DivisibilityClass::CpDivisible => "CP_divisible",
            DivisibilityClass::PDivisibleOnly => "P_divisible_only",
            DivisibilityClass::NonPDivisible => "non_P_divisible",
            DivisibilityClass::NonInvertible => "non_invertible",
        }
    }
}

impl fmt::Display for DivisibilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DivisibilityClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "CP_divisible" => Ok(Self::CpDivisible),
            "P_divisible_only" => Ok(Self::PDivisibleOnly),
            "non_P_divisible" => Ok(Self::NonPDivisible),
            "non_invertible" => Ok(Self::NonInvertible),
            other => Err(Error::InvalidParameter(format!("unknown divisibility class {other:?}"))),
        }
    }
}

/// Which information the classification used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivisibilityPath {
    Rates,
    Maps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivisibilityReport {
    pub class: DivisibilityClass,
    pub path: DivisibilityPath,
    /// First grid time violating CP-divisibility, if any.
    pub first_cp_violation: Option<f64>,
    /// First grid time violating P-divisibility, if any.
    pub first_p_violation: Option<f64>,
    pub singular_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivisibilityConfig {
    /// Rates and P-conditions above `−tol` count as nonnegative.
    pub rate_tol: f64,
    /// Choi and output eigenvalues above `−tol` count as nonnegative (map path).
    pub map_tol: f64,
    /// Directions of the basis grid for the P-condition.
    pub basis_directions: usize,
}

impl Default for DivisibilityConfig {
    fn default() -> Self {
        Self { rate_tol: 1e-12, map_tol: 1e-9, basis_directions: 200 }
    }
}

/// Classifies the model on the window grid, from its rates when it has a generator
/// and from intermediate maps between grid points otherwise.
pub fn classify_divisibility(
    model: &dyn QubitModel,
    window: &TimeWindow,
    cfg: &DivisibilityConfig,
) -> Result<DivisibilityReport> {
    let times = window.grid();
    let affines = model.affine_trajectory(&times)?;
    classify_from_trajectory(model, &times, &affines, cfg)
}

pub(crate) fn classify_from_trajectory(
    model: &dyn QubitModel,
    times: &[f64],
    affines: &[BlochAffine],
    cfg: &DivisibilityConfig,
) -> Result<DivisibilityReport> {
    if let Some(Singularity::Crossing(t)) = find_singularity(model, times, affines, &RhpConfig::default())? {
        return Ok(DivisibilityReport {
            class: DivisibilityClass::NonInvertible,
            path: DivisibilityPath::Maps,
            first_cp_violation: None,
            first_p_violation: None,
            singular_time: Some(t),
        });
    }
    let (path, first_cp, first_p) = match model.generator() {
        Some(gen) => {
            let bases = qubit_basis_grid(cfg.basis_directions);
            let mut first_cp = None;
            let mut first_p = None;
            for &t in times {
                let rates = gen.rates(t);
                if rates.iter().any(|r| !r.is_finite()) {
                    continue;
                }
                if first_cp.is_none() && rates.iter().any(|&r| r < -cfg.rate_tol) {
                    first_cp = Some(t);
                }
                if first_p.is_none() && gen.p_divisibility_margin(t, &bases) < -cfg.rate_tol {
                    first_p = Some(t);
                }
                if first_cp.is_some() && first_p.is_some() {
                    break;
                }
            }
            (DivisibilityPath::Rates, first_cp, first_p)
        }
        None => {
            let cap = 1.0 / RhpConfig::default().singular_threshold;
            let mut first_cp = None;
            let mut first_p = None;
            for k in 1..affines.len() {
                let inv = match affines[k - 1].inverse(cap) {
                    Ok(inv) => inv,
                    Err(_) => break,
                };
                let inter = affines[k].compose(&inv).to_map();
                let cp = is_completely_positive(&inter, cfg.map_tol);
                if !cp.completely_positive {
                    first_cp.get_or_insert(times[k - 1]);
                    if first_p.is_none() && !is_positive_map(&inter, 0, cfg.map_tol, 0)?.positive {
                        first_p = Some(times[k - 1]);
                    }
                }
                if first_cp.is_some() && first_p.is_some() {
                    break;
                }
            }
            (DivisibilityPath::Maps, first_cp, first_p)
        }
    };
    let class = match (first_cp, first_p) {
        (None, _) => DivisibilityClass::CpDivisible,
        (Some(_), None) => DivisibilityClass::PDivisibleOnly,
        (Some(_), Some(_)) => DivisibilityClass::NonPDivisible,
    };
    Ok(DivisibilityReport { class, path, first_cp_violation: first_cp, first_p_violation: first_p, singular_time: None })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeReport {
    pub times: Vec<f64>,
    /// `|det M(t)|`, the volume of the image of the Bloch ball relative to the ball.
    pub volumes: Vec<f64>,
    pub monotone: bool,
    pub first_violation: Option<f64>,
}

/// Checks that the accessible Bloch volume never grows by more than `tol` (relative).
pub fn volume_monotone(model: &dyn QubitModel, window: &TimeWindow, tol: f64) -> Result<VolumeReport> {
    let times = window.grid();
    let affines = model.affine_trajectory(&times)?;
    Ok(volume_from_trajectory(&times, &affines, tol))
}

pub(crate) fn volume_from_trajectory(times: &[f64], affines: &[BlochAffine], tol: f64) -> VolumeReport {
    let volumes: Vec<f64> = affines.iter().map(|a| a.determinant().abs()).collect();
    let first_violation = (1..volumes.len())
        .find(|&k| volumes[k] > volumes[k - 1] * (1.0 + tol) + 1e-15)
        .map(|k| times[k - 1]);
    VolumeReport { times: times.to_vec(), volumes, monotone: first_violation.is_none(), first_violation }
}
