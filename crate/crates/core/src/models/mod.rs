//! Exactly solvable open-system models.
//!
//! Every qubit model exposes its dynamical map as a Bloch affine map at any
//! time, and where available its time-local generator and decoherence function.

mod cavity;
mod decoherence;
mod ising;
mod photonic;
mod random_unitary;
mod spectral;
mod xx;

pub use cavity::LossyCavity;
pub use decoherence::{dephasing_rate, DecoherenceFunction, DephasingModel, Provenance};
pub use ising::{ising_probe_g, EnvironmentState, IsingProbe, SpinChainSpec};
pub use photonic::{
    fabry_perot_spectrum, spectrum_dephasing_g, BellFamily, FabryPerotParams, FrequencySpectrum, NonlocalDephasing,
    NonlocalTrajectories, PlateSchedule,
};
pub use random_unitary::RandomUnitary;
pub use spectral::{dephasing_g_thermal, dephasing_log_derivative_thermal, SpectralDensity, Temperature};
pub use xx::{xx_chain_sigma, xx_chain_trace_distance, XxChain};

use crate::channel::{BlochAffine, QuantumMap};
use crate::error::Result;
use crate::generator::TimeLocalGenerator;

/// A family of qubit dynamical maps `Φ_t`, `t ≥ 0`.
pub trait QubitModel: Send + Sync {
    fn name(&self) -> String;

    /// `Φ_t` in Bloch form.
    fn affine(&self, t: f64) -> Result<BlochAffine>;

    /// `Φ_t` on a nondecreasing time grid.
    fn affine_trajectory(&self, times: &[f64]) -> Result<Vec<BlochAffine>> {
        times.iter().map(|&t| self.affine(t)).collect()
    }

    fn map(&self, t: f64) -> Result<QuantumMap> {
        Ok(self.affine(t)?.to_map())
    }

    /// Time-local generator, when the model provides rates.
    fn generator(&self) -> Option<TimeLocalGenerator> {
        None
    }

    fn decoherence(&self) -> Option<DecoherenceFunction> {
        None
    }

    /// Characteristic time used to scale finite-difference steps.
    fn time_scale(&self) -> f64;
}
