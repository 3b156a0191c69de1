//! Evaluation of one configured scenario.

use std::path::Path;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{BuiltModel, ConfigError, CorrelationScenario, ScenarioConfig};
use crate::correlations::{discord_lower_bound, info_flow, initial_correlation_witness, DiscordBound, InfoFlowRecord, WitnessResult};
use crate::error::Error;
use crate::measures::{analyze, backflow, pair_values, AnalysisConfig, DistinguishabilityTrajectory, MeasureReport};
use crate::models::NonlocalTrajectories;

/// Failure of a point: bad configuration or a numerical error in a named operation.
#[derive(Debug, Clone)]
pub enum PointError {
    Config(ConfigError),
    Numerical { operation: &'static str, error: Error },
}

impl std::fmt::Display for PointError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointError::Config(e) => write!(f, "{e}"),
            PointError::Numerical { operation, error } => write!(f, "{operation} failed: {error}"),
        }
    }
}

impl From<ConfigError> for PointError {
    fn from(e: ConfigError) -> Self {
        PointError::Config(e)
    }
}

fn numerical(operation: &'static str) -> impl FnOnce(Error) -> PointError {
    move |error| PointError::Numerical { operation, error }
}

/// One row of `trajectory.csv`; `None` renders as an empty field.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub d: f64,
    pub sigma: f64,
    pub g_abs: Option<f64>,
    pub g_phase: Option<f64>,
    pub volume: Option<f64>,
}

/// Summary of random interior pairs checked against the optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairAudit {
    pub samples: usize,
    pub max_backflow: f64,
}

#[derive(Debug, Clone)]
pub enum Measures {
    Qubit(Box<MeasureReport>),
    Nonlocal { blp: f64, local1_monotone: bool, local2_monotone: bool, trajectories: Box<NonlocalTrajectories> },
}

#[derive(Debug, Clone)]
pub struct CorrelationOutcome {
    pub info_flow: Option<InfoFlowRecord>,
    pub witness: Option<WitnessResult>,
    pub discord: Option<DiscordBound>,
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub model: String,
    pub measures: Measures,
    pub trajectory: Vec<TrajectoryRow>,
    pub audit: Option<PairAudit>,
    pub correlations: Option<CorrelationOutcome>,
}

impl PointOutcome {
    pub fn blp(&self) -> Option<f64> {
        match &self.measures {
            Measures::Qubit(r) => r.blp_value(),
            Measures::Nonlocal { blp, .. } => Some(*blp),
        }
    }
}

const AUDIT_SAMPLES: usize = 1000;

/// Random Bloch vector uniform in the unit ball.
fn random_in_ball(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if v.norm_squared() <= 1.0 {
            return v;
        }
    }
}

fn trajectory_rows(traj: &DistinguishabilityTrajectory) -> Vec<TrajectoryRow> {
    traj.times()
        .iter()
        .zip(traj.values())
        .zip(traj.sigma())
        .map(|((&t, &d), sigma)| TrajectoryRow { t, d, sigma, g_abs: None, g_phase: None, volume: None })
        .collect()
}

/// Evaluates the model measures, the trajectory and the optional correlation scenario.
pub fn evaluate(config: &ScenarioConfig, base: &Path) -> Result<PointOutcome, PointError> {
    let window = config.window();
    let built = config.model.build(base)?;
    let correlations = config.correlations.as_ref().map(|c| c.build()).transpose()?;
    let (model, measures, trajectory, audit) = match built {
        BuiltModel::Qubit(model) => {
            let cfg = AnalysisConfig { search: config.search, ..AnalysisConfig::default() };
            let report = analyze(model.as_ref(), &window, &config.measures, &cfg).map_err(numerical("analyze"))?;
            let times = window.grid();
            let affines = model.affine_trajectory(&times).map_err(numerical("dynamical map"))?;
            let traj = match &report.blp {
                Some(b) => b.trajectory.clone(),
                None => {
                    let x = Vector3::x();
                    DistinguishabilityTrajectory::new(times.clone(), pair_values(&affines, &x, &-x))
                        .map_err(numerical("trace distance"))?
                }
            };
            let mut rows = trajectory_rows(&traj);
            if let Some(g) = model.decoherence() {
                let values = g.trajectory(&times).map_err(numerical("decoherence function"))?;
                for (row, z) in rows.iter_mut().zip(values) {
                    row.g_abs = Some(z.norm());
                    row.g_phase = Some(z.arg());
                }
            }
            for (row, a) in rows.iter_mut().zip(&affines) {
                row.volume = Some(a.determinant().abs());
            }
            let audit = report.blp.as_ref().map(|_| {
                let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                let max_backflow = (0..AUDIT_SAMPLES)
                    .map(|_| {
                        let (r1, r2) = (random_in_ball(&mut rng), random_in_ball(&mut rng));
                        backflow(&times, &pair_values(&affines, &r1, &r2), config.search.hysteresis)
                    })
                    .fold(0.0, f64::max);
                PairAudit { samples: AUDIT_SAMPLES, max_backflow }
            });
            (model.name(), Measures::Qubit(Box::new(report)), rows, audit)
        }
        BuiltModel::Nonlocal(nl) => {
            let traj = nl.trajectories(window.points).map_err(numerical("nonlocal trajectories"))?;
            let blp = traj.global.backflow(config.search.hysteresis);
            let mut rows = trajectory_rows(&traj.global);
            for row in &mut rows {
                row.g_abs = Some(row.d);
                row.g_phase = Some(0.0);
            }
            let measures = Measures::Nonlocal {
                blp,
                local1_monotone: traj.local1.is_monotone_nonincreasing(1e-10),
                local2_monotone: traj.local2.is_monotone_nonincreasing(1e-10),
                trajectories: Box::new(traj),
            };
            ("nonlocal dephasing".to_string(), measures, rows, None)
        }
    };
    let correlations = correlations.map(|s| evaluate_correlations(&s)).transpose()?;
    Ok(PointOutcome { model, measures, trajectory, audit, correlations })
}

fn evaluate_correlations(s: &CorrelationScenario) -> Result<CorrelationOutcome, PointError> {
    let info_flow = match &s.state2 {
        Some(state2) => Some(info_flow(&s.system, &s.state1, state2, &s.times).map_err(numerical("info_flow"))?),
        None => None,
    };
    let witness = match &s.local_map {
        Some(map) => Some(
            initial_correlation_witness(&s.system, &s.state1, map, &s.times)
                .map_err(numerical("initial_correlation_witness"))?,
        ),
        None => None,
    };
    let discord = if s.discord {
        Some(match discord_lower_bound(&s.system, &s.state1, &s.times, s.basis.as_ref()) {
            Err(e @ Error::DegenerateBasis { .. }) => return Err(PointError::Config(e.into())),
            other => other.map_err(numerical("discord_lower_bound"))?,
        })
    } else {
        None
    };
    Ok(CorrelationOutcome { info_flow, witness, discord })
}
