//! Scenario configuration: TOML schema, sweep expansion and model construction.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::QuantumMap;
use crate::correlations::TotalSystem;
use crate::error::Error;
use crate::linalg::{self, CMatrix};
use crate::measures::{MeasureSelection, SearchConfig, TimeWindow};
use crate::models::{
    fabry_perot_spectrum, DephasingModel, FabryPerotParams, FrequencySpectrum, IsingProbe, LossyCavity,
    NonlocalDephasing, PlateSchedule, QubitModel, RandomUnitary, SpectralDensity, SpinChainSpec, Temperature, XxChain,
};
use crate::state::DensityMatrix;

/// Smallest accepted time grid.
pub const MIN_POINTS: usize = 16;

/// Invalid or inconsistent configuration (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        ConfigError(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelConfig,
    pub window: WindowConfig,
    #[serde(default)]
    pub measures: MeasureSelection,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub correlations: Option<CorrelationConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub t_max: f64,
    pub points: usize,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Qubit decaying into a Lorentzian cavity mode.
    LossyCavity {
        gamma0: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        detuning: f64,
    },
    /// Pure dephasing with `G(t) = e^{−κt}`.
    SemigroupDephasing { kappa: f64 },
    /// Pure dephasing from a spectral density; `beta` absent means zero temperature.
    SpectralDephasing { spectral: SpectralDensity, beta: Option<f64> },
    /// Pauli channel with rates `γ_i(t)`.
    RandomUnitary { rates: [RateProfile; 3] },
    /// Probe qubit on a transverse-field Ising ring.
    IsingProbe {
        spins: usize,
        #[serde(default = "one")]
        coupling: f64,
        field: f64,
        delta: f64,
    },
    /// Central spin of an XX chain in the continuum limit.
    XxChain,
    /// Polarisation qubit dephased through its frequency spectrum.
    Photonic { spectrum: SpectrumConfig, delta_n: f64 },
    /// Bell pair of photons with correlated Gaussian frequencies.
    Nonlocal { variance: f64, correlation: f64, delta_n: f64, schedule: PlateSchedule },
}

/// A rate function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateProfile {
    Constant(f64),
    Shaped(RateShape),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateShape {
    /// `amplitude · tanh(rate · t)`.
    Tanh {
        amplitude: f64,
        #[serde(default = "one")]
        rate: f64,
    },
    /// `values[k]` on `[breaks[k−1], breaks[k])`.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
}

impl RateProfile {
    fn breakpoints(&self) -> Vec<f64> {
        match self {
            RateProfile::Shaped(RateShape::Piecewise { breaks, .. }) => breaks.clone(),
            _ => vec![],
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let finite = match self {
            RateProfile::Constant(c) => c.is_finite(),
            RateProfile::Shaped(RateShape::Tanh { amplitude, rate }) => amplitude.is_finite() && rate.is_finite(),
            RateProfile::Shaped(RateShape::Piecewise { breaks, values }) => {
                breaks.iter().chain(values).all(|x| x.is_finite())
            }
        };
        if !finite {
            return Err(ConfigError("rate parameters must be finite".into()));
        }
        if let RateProfile::Shaped(RateShape::Piecewise { breaks, values }) = self {
            if values.len() != breaks.len() + 1 || breaks.windows(2).any(|w| w[1] <= w[0]) {
                return Err(ConfigError(
                    "piecewise rate needs increasing breaks and one more value than breaks".into(),
                ));
            }
        }
        Ok(())
    }

    fn function(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        match self.clone() {
            RateProfile::Constant(c) => Arc::new(move |_| c),
            RateProfile::Shaped(RateShape::Tanh { amplitude, rate }) => Arc::new(move |t| amplitude * (rate * t).tanh()),
            RateProfile::Shaped(RateShape::Piecewise { breaks, values }) => {
                Arc::new(move |t| values[breaks.partition_point(|&b| b <= t)])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumConfig {
    Gaussian {
        center: f64,
        variance: f64,
        #[serde(default = "default_points")]
        points: usize,
    },
    FabryPerot {
        theta: f64,
        #[serde(default)]
        params: FabryPerotParams,
    },
    /// Two-column `(ω, weight)` text file, relative to the config file; normalized on load.
    Tabulated { path: PathBuf },
}

fn default_points() -> usize {
    2001
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
}

/// A swept parameter given by a dotted path into the config, e.g. `model.gamma0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: String,
    pub values: Option<Vec<f64>>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub steps: Option<usize>,
}

impl SweepAxis {
    pub fn values(&self) -> Result<Vec<f64>, ConfigError> {
        match (&self.values, self.min, self.max, self.steps) {
            (Some(v), None, None, None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(lo), Some(hi), Some(n)) if n >= 1 => Ok(if n == 1 {
                vec![lo]
            } else {
                (0..n)
                    .map(|k| {
                        let f = k as f64 / (n - 1) as f64;
                        lo * (1.0 - f) + hi * f
                    })
                    .collect()
            }),
            _ => Err(ConfigError(format!(
                "sweep axis {:?} needs either a nonempty `values` list or `min`, `max` and `steps ≥ 1`",
                self.parameter
            ))),
        }
    }
}

/// Optional closed system–environment scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationConfig {
    pub system: TotalSystemConfig,
    /// Total initial state as a matrix text block.
    pub state1: String,
    /// Second total state for the information-flow split.
    pub state2: Option<String>,
    /// Local map on `S` for the initial-correlation witness.
    pub local_map: Option<LocalMap>,
    #[serde(default)]
    pub discord: bool,
    /// Dephasing basis (columns) when the reduced state is degenerate.
    pub basis: Option<String>,
    pub t_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TotalSystemConfig {
    ExchangeQubits { omega_s: f64, omega_e: f64, coupling: f64 },
    QubitSingleMode { omega: f64, g: f64, levels: usize },
    /// Hamiltonian parts as matrix text blocks.
    Dense { h_s: String, h_e: String, h_i: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalMap {
    Identity,
    SigmaX,
    SigmaY,
    SigmaZ,
    Hadamard,
}

impl LocalMap {
    pub fn map(&self) -> QuantumMap {
        let u = match self {
            LocalMap::Identity => linalg::identity(2),
            LocalMap::SigmaX => linalg::sigma_x(),
            LocalMap::SigmaY => linalg::sigma_y(),
            LocalMap::SigmaZ => linalg::sigma_z(),
            LocalMap::Hadamard => (linalg::sigma_x() + linalg::sigma_z()).scale(std::f64::consts::FRAC_1_SQRT_2),
        };
        QuantumMap::unitary(u).expect("Pauli and Hadamard gates are unitary")
    }
}

/// Parses a square complex matrix: one row per line, whitespace-separated
/// entries such as `0.5`, `-1e-3`, `0.5+0.5i` or `2i`.
pub fn parse_matrix(text: &str) -> Result<CMatrix, ConfigError> {
    let rows: Vec<Vec<Complex64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(r, line)| {
            line.split_whitespace()
                .map(|tok| {
                    Complex64::from_str(tok)
                        .map_err(|_| ConfigError(format!("matrix row {}: cannot parse entry {tok:?}", r + 1)))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(ConfigError(format!("matrix block must be square (got {n} rows)")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl TotalSystemConfig {
    pub fn build(&self) -> Result<TotalSystem, ConfigError> {
        Ok(match self {
            TotalSystemConfig::ExchangeQubits { omega_s, omega_e, coupling } => {
                TotalSystem::exchange_qubits(*omega_s, *omega_e, *coupling)?
            }
            TotalSystemConfig::QubitSingleMode { omega, g, levels } => TotalSystem::qubit_single_mode(*omega, *g, *levels)?,
            TotalSystemConfig::Dense { h_s, h_e, h_i } => {
                TotalSystem::new(parse_matrix(h_s)?, parse_matrix(h_e)?, parse_matrix(h_i)?)?
            }
        })
    }
}

/// Everything needed to evaluate one correlation scenario.
pub struct CorrelationScenario {
    pub system: TotalSystem,
    pub state1: DensityMatrix,
    pub state2: Option<DensityMatrix>,
    pub local_map: Option<QuantumMap>,
    pub discord: bool,
    pub basis: Option<CMatrix>,
    pub times: Vec<f64>,
}

impl CorrelationConfig {
    pub fn build(&self) -> Result<CorrelationScenario, ConfigError> {
        let system = self.system.build()?;
        let state = |text: &str| -> Result<DensityMatrix, ConfigError> { Ok(DensityMatrix::new(parse_matrix(text)?)?) };
        if self.local_map.is_some() && system.dim_s() != 2 {
            return Err(ConfigError("local maps are qubit gates; the system must be a qubit".into()));
        }
        let times = TimeWindow::new(self.t_max, self.points)?.grid();
        Ok(CorrelationScenario {
            state1: state(&self.state1)?,
            state2: self.state2.as_deref().map(state).transpose()?,
            local_map: self.local_map.map(|m| m.map()),
            discord: self.discord,
            basis: self.basis.as_deref().map(parse_matrix).transpose()?,
            times,
            system,
        })
    }
}

/// A constructed model ready for evaluation.
pub enum BuiltModel {
    Qubit(Box<dyn QubitModel>),
    Nonlocal(NonlocalDephasing),
}

impl ModelConfig {
    /// Builds the model; `base` resolves relative spectrum paths.
    pub fn build(&self, base: &Path) -> Result<BuiltModel, ConfigError> {
        let qubit = |m: Box<dyn QubitModel>| Ok(BuiltModel::Qubit(m));
        match self {
            ModelConfig::LossyCavity { gamma0, width, detuning } => {
                qubit(Box::new(LossyCavity::new(*gamma0, *width, *detuning)?))
            }
            ModelConfig::SemigroupDephasing { kappa } => {
                if !(*kappa >= 0.0) {
                    return Err(ConfigError(format!("kappa must be nonnegative (got {kappa})")));
                }
                qubit(Box::new(DephasingModel::semigroup(*kappa)))
            }
            ModelConfig::SpectralDephasing { spectral, beta } => {
                spectral.validate()?;
                let temp = match beta {
                    None => Temperature::Zero,
                    Some(b) if *b > 0.0 => Temperature::from_beta(*b),
                    Some(b) => return Err(ConfigError(format!("beta must be positive (got {b})"))),
                };
                qubit(Box::new(DephasingModel::new("spectral dephasing", spectral.decoherence_function(temp))))
            }
            ModelConfig::RandomUnitary { rates } => {
                for r in rates {
                    r.validate()?;
                }
                let mut breaks: Vec<f64> = rates.iter().flat_map(RateProfile::breakpoints).collect();
                breaks.sort_by(f64::total_cmp);
                breaks.dedup();
                let model = RandomUnitary::new([rates[0].function(), rates[1].function(), rates[2].function()])
                    .with_breakpoints(breaks);
                qubit(Box::new(model))
            }
            ModelConfig::IsingProbe { spins, coupling, field, delta } => {
                qubit(Box::new(IsingProbe::new(SpinChainSpec::new(*spins, *coupling, *field, *delta))?))
            }
            ModelConfig::XxChain => qubit(Box::new(XxChain)),
            ModelConfig::Photonic { spectrum, delta_n } => {
                let f = match spectrum {
                    SpectrumConfig::Gaussian { center, variance, points } => {
                        FrequencySpectrum::gaussian(*center, *variance, *points)?
                    }
                    SpectrumConfig::FabryPerot { theta, params } => fabry_perot_spectrum(*theta, params)?,
                    SpectrumConfig::Tabulated { path } => {
                        let full = base.join(path);
                        let text = std::fs::read_to_string(&full)
                            .map_err(|e| ConfigError(format!("cannot read spectrum {}: {e}", full.display())))?;
                        let (omega, weight) = FrequencySpectrum::parse_two_column(&text)?;
                        FrequencySpectrum::normalized(omega, weight)?
                    }
                };
                qubit(Box::new(f.dephasing_model(*delta_n)))
            }
            ModelConfig::Nonlocal { variance, correlation, delta_n, schedule } => {
                Ok(BuiltModel::Nonlocal(NonlocalDephasing::new(*variance, *correlation, *delta_n, schedule.clone())?))
            }
        }
    }
}

impl ScenarioConfig {
    /// Parses TOML; syntax and schema errors carry line numbers.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError(format!("config error: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.window.points < MIN_POINTS {
            return Err(ConfigError(format!("window.points must be at least {MIN_POINTS} (got {})", self.window.points)));
        }
        TimeWindow::new(self.window.t_max, self.window.points)?;
        if self.sweep.axes.len() > 2 {
            return Err(ConfigError(format!("at most two sweep axes are supported (got {})", self.sweep.axes.len())));
        }
        if self.search.theta_steps < 2 || self.search.phi_steps < 1 || self.search.tau_steps < 1 {
            return Err(ConfigError("search grids need theta_steps ≥ 2, phi_steps ≥ 1, tau_steps ≥ 1".into()));
        }
        for axis in &self.sweep.axes {
            axis.values()?;
        }
        Ok(())
    }

    pub fn window(&self) -> TimeWindow {
        TimeWindow { t_max: self.window.t_max, points: self.window.points }
    }

    /// Cartesian product of the sweep axes (first axis slowest), each point as a
    /// full config with the swept values substituted.
    pub fn expand(&self) -> Result<Vec<SweepPoint>, ConfigError> {
        let axes: Vec<(String, Vec<f64>)> =
            self.sweep.axes.iter().map(|a| Ok::<_, ConfigError>((a.parameter.clone(), a.values()?))).collect::<Result<_, _>>()?;
        let mut combos: Vec<Vec<f64>> = vec![vec![]];
        for (_, values) in &axes {
            combos = combos.iter().flat_map(|c| values.iter().map(move |&v| [c.as_slice(), &[v]].concat())).collect();
        }
        let base = toml::Value::try_from(self).map_err(|e| ConfigError(format!("cannot serialize config: {e}")))?;
        combos
            .into_iter()
            .enumerate()
            .map(|(index, vals)| {
                let mut tree = base.clone();
                for ((path, _), &v) in axes.iter().zip(&vals) {
                    set_path(&mut tree, path, v)?;
                }
                let config: ScenarioConfig = tree
                    .try_into()
                    .map_err(|e| ConfigError(format!("sweep point {index} is not a valid config: {e}")))?;
                config.check()?;
                let params = axes.iter().map(|(p, _)| p.clone()).zip(vals).collect();
                Ok(SweepPoint { index, params, config })
            })
            .collect()
    }
}

/// One evaluation point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub params: Vec<(String, f64)>,
    pub config: ScenarioConfig,
}

fn set_path(tree: &mut toml::Value, path: &str, v: f64) -> Result<(), ConfigError> {
    let mut node = tree;
    let parts: Vec<&str> = path.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        let last = k + 1 == parts.len();
        let next = match node {
            toml::Value::Table(t) => t.get_mut(*part),
            toml::Value::Array(a) => part.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        };
        let Some(next) = next else {
            return Err(ConfigError(format!("sweep parameter {path:?} does not name a config entry")));
        };
        if last {
            *next = match next {
                toml::Value::Integer(_) if v.fract() == 0.0 => toml::Value::Integer(v as i64),
                toml::Value::Integer(_) | toml::Value::Float(_) => toml::Value::Float(v),
                _ => return Err(ConfigError(format!("sweep parameter {path:?} is not numeric"))),
            };
            return Ok(());
        }
        node = next;
    }
    Err(ConfigError(format!("empty sweep parameter path {path:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAVITY: &str = r#"
[model]
kind = "lossy_cavity"
gamma0 = 0.3

[window]
t_max = 20.0
points = 201

[[sweep.axes]]
parameter = "model.gamma0"
min = 0.1
max = 0.5
steps = 3
"#;

    #[test]
    fn parses_and_expands_sweep() {
        let cfg = ScenarioConfig::parse(CAVITY).unwrap();
        let pts = cfg.expand().unwrap();
        assert_eq!(pts.len(), 3);
        match &pts[2].config.model {
            ModelConfig::LossyCavity { gamma0, width, .. } => {
                assert_eq!(*gamma0, 0.5);
                assert_eq!(*width, 1.0);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(pts[1].params, vec![("model.gamma0".to_string(), 0.3)]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = CAVITY.replace("points = 201", "points = \"many\"");
        let err = ScenarioConfig::parse(&bad).unwrap_err();
        assert!(err.0.contains("line 8"), "{err}");
    }

    #[test]
    fn small_grids_and_unknown_parameters_are_rejected() {
        assert!(ScenarioConfig::parse(&CAVITY.replace("points = 201", "points = 8")).is_err());
        let cfg = ScenarioConfig::parse(&CAVITY.replace("model.gamma0", "model.nonexistent")).unwrap();
        assert!(cfg.expand().is_err());
        assert!(ScenarioConfig::parse(&CAVITY.replace("kind = \"lossy_cavity\"", "kind = \"warp_drive\"")).is_err());
    }

    #[test]
    fn two_axis_grid_is_cartesian() {
        let text = format!("{CAVITY}\n[[sweep.axes]]\nparameter = \"model.detuning\"\nvalues = [0.0, 1.0]\n");
        let pts = ScenarioConfig::parse(&text).unwrap().expand().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[3].params[0].1, 0.3);
        assert_eq!(pts[3].params[1].1, 1.0);
    }

    #[test]
    fn rate_profiles() {
        let text = r#"
[model]
kind = "random_unitary"
rates = [1.0, 1.0, { kind = "tanh", amplitude = -1.0 }]
[window]
t_max = 2.0
points = 32
"#;
        let cfg = ScenarioConfig::parse(text).unwrap();
        let ModelConfig::RandomUnitary { rates } = &cfg.model else { panic!() };
        assert_eq!((rates[2].function())(1.0), -1f64.tanh());
        let pw = RateProfile::Shaped(RateShape::Piecewise { breaks: vec![2.0, 4.0], values: vec![0.15, -0.15, 0.15] });
        let f = pw.function();
        assert_eq!((f(1.0), f(2.0), f(3.9), f(4.0)), (0.15, -0.15, -0.15, 0.15));
    }

    #[test]
    fn matrix_blocks() {
        let m = parse_matrix("0.5 0.5-0.5i\n0.5+0.5i 0.5\n").unwrap();
        assert_eq!(m[(1, 0)], Complex64::new(0.5, 0.5));
        assert!(parse_matrix("1 0\n0").is_err());
        assert!(parse_matrix("1 x\n0 1").is_err());
    }
}
