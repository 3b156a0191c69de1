use num_complex::Complex64;

use super::{DecoherenceFunction, Provenance, QubitModel};
use crate::channel::BlochAffine;
use crate::error::Result;
use crate::numerics::bessel::bessel_j;

/// Rate of change of the optimal-pair trace distance for a qubit coupled to an
/// XX spin chain at `h = h₀`, `J = J₀` (time in units of `1/J`):
/// `σ(t) = −(2/t) sgn[J₁(2t)] J₂(2t)`.
pub fn xx_chain_sigma(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let j1 = bessel_j(1, 2.0 * t);
    let j2 = bessel_j(2, 2.0 * t);
    -(2.0 / t) * j1.signum() * j2
}

/// Optimal-pair trace distance `|J₁(2t)/t|`, whose derivative is [`xx_chain_sigma`].
pub fn xx_chain_trace_distance(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    (bessel_j(1, 2.0 * t) / t).abs()
}

/// Qubit map of the XX-chain probe: excitation amplitude `G(t) = J₁(2t)/t`
/// damping populations by `G²` and coherences by `G`.
#[derive(Debug, Clone, Copy, Default)]
pub struct XxChain;

impl XxChain {
    pub fn amplitude(t: f64) -> f64 {
        if t == 0.0 {
            1.0
        } else {
            bessel_j(1, 2.0 * t) / t
        }
    }

    pub fn decoherence_function() -> DecoherenceFunction {
        DecoherenceFunction::new(Provenance::ClosedForm, 1.0, |t| Ok(Complex64::new(Self::amplitude(t), 0.0)))
            .with_derivative(|t| {
                // d/dt [J₁(2t)/t] = −2 J₂(2t)/t
                let d = if t == 0.0 { 0.0 } else { -2.0 * bessel_j(2, 2.0 * t) / t };
                Ok(Complex64::new(d, 0.0))
            })
    }
}

impl QubitModel for XxChain {
    fn name(&self) -> String {
        "XX chain (h = h0)".into()
    }

    fn affine(&self, t: f64) -> Result<BlochAffine> {
        let g = Self::amplitude(t);
        Ok(BlochAffine::from_decoherence(Complex64::new(g, 0.0), g * g))
    }

    fn decoherence(&self) -> Option<DecoherenceFunction> {
        Some(Self::decoherence_function())
    }

    fn time_scale(&self) -> f64 {
        1.0
    }
}
