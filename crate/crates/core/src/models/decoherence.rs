use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::QubitModel;
use crate::channel::BlochAffine;
use crate::error::{Error, Result};
use crate::generator::{DecayChannel, TimeLocalGenerator};
use crate::linalg;

/// How a decoherence function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    Quadrature,
    Ode,
    SpectrumFourier,
    LoschmidtEd,
}

type ScalarFn = Arc<dyn Fn(f64) -> Result<Complex64> + Send + Sync>;
type TrajectoryFn = Arc<dyn Fn(&[f64]) -> Result<Vec<(Complex64, Complex64)>> + Send + Sync>;

/// The factor `G(t)` multiplying the coherence `ρ₁₀`.
#[derive(Clone)]
pub struct DecoherenceFunction {
    value: ScalarFn,
    derivative: Option<ScalarFn>,
    trajectory: Option<TrajectoryFn>,
    provenance: Provenance,
    time_scale: f64,
}

impl fmt::Debug for DecoherenceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecoherenceFunction")
            .field("provenance", &self.provenance)
            .field("time_scale", &self.time_scale)
            .finish()
    }
}

/// Below this modulus the coherence is treated as destroyed.
const MODULUS_FLOOR: f64 = 1e-12;

impl DecoherenceFunction {
    pub fn new<F>(provenance: Provenance, time_scale: f64, value: F) -> Self
    where
        F: Fn(f64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self { value: Arc::new(value), derivative: None, trajectory: None, provenance, time_scale }
    }

    /// Infallible closed-form evaluator.
    pub fn closed_form<F>(time_scale: f64, value: F) -> Self
    where
        F: Fn(f64) -> Complex64 + Send + Sync + 'static,
    {
        Self::new(Provenance::ClosedForm, time_scale, move |t| Ok(value(t)))
    }

    pub fn with_derivative<F>(mut self, derivative: F) -> Self
    where
        F: Fn(f64) -> Result<Complex64> + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    /// Batched evaluator returning `(G, dG/dt)` on a nondecreasing grid.
    pub fn with_trajectory<F>(mut self, trajectory: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<(Complex64, Complex64)>> + Send + Sync + 'static,
    {
        self.trajectory = Some(Arc::new(trajectory));
        self
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        (self.value)(t)
    }

    /// `dG/dt`, analytic when available, otherwise a central difference with
    /// step `1e-6 · time_scale`.
    pub fn derivative(&self, t: f64) -> Result<Complex64> {
        if let Some(d) = &self.derivative {
            return d(t);
        }
        let h = 1e-6 * self.time_scale;
        if t >= h {
            Ok((self.eval(t + h)? - self.eval(t - h)?) / (2.0 * h))
        } else {
            // second-order one-sided difference
            Ok((-3.0 * self.eval(t)? + 4.0 * self.eval(t + h)? - self.eval(t + 2.0 * h)?) / (2.0 * h))
        }
    }

    pub fn trajectory(&self, times: &[f64]) -> Result<Vec<Complex64>> {
        if let Some(tr) = &self.trajectory {
            return Ok(tr(times)?.into_iter().map(|(g, _)| g).collect());
        }
        times.iter().map(|&t| self.eval(t)).collect()
    }

    pub fn trajectory_with_derivative(&self, times: &[f64]) -> Result<Vec<(Complex64, Complex64)>> {
        if let Some(tr) = &self.trajectory {
            return tr(times);
        }
        times.iter().map(|&t| Ok((self.eval(t)?, self.derivative(t)?))).collect()
    }

    /// `Ġ/G`, or `ZeroCrossing` when `|G|` is below the floor.
    pub fn log_derivative(&self, t: f64) -> Result<Complex64> {
        let g = self.eval(t)?;
        if g.norm() < MODULUS_FLOOR {
            return Err(Error::ZeroCrossing { time: t, modulus: g.norm() });
        }
        Ok(self.derivative(t)? / g)
    }
}

/// `γ(t) = −d/dt ln|G(t)|`.
pub fn dephasing_rate(g: &DecoherenceFunction, t: f64) -> Result<f64> {
    Ok(-g.log_derivative(t)?.re)
}

/// Pure dephasing: populations frozen, coherence multiplied by `G(t)`.
#[derive(Debug, Clone)]
pub struct DephasingModel {
    name: String,
    g: DecoherenceFunction,
}

impl DephasingModel {
    pub fn new(name: impl Into<String>, g: DecoherenceFunction) -> Self {
        Self { name: name.into(), g }
    }

    /// Semigroup with `G(t) = e^{−κt}`.
    pub fn semigroup(kappa: f64) -> Self {
        let g = DecoherenceFunction::closed_form(1.0 / kappa.abs().max(1e-300), move |t| {
            Complex64::new((-kappa * t).exp(), 0.0)
        })
        .with_derivative(move |t| Ok(Complex64::new(-kappa * (-kappa * t).exp(), 0.0)));
        Self::new("dephasing semigroup", g)
    }

    pub fn function(&self) -> &DecoherenceFunction {
        &self.g
    }
}

impl QubitModel for DephasingModel {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn affine(&self, t: f64) -> Result<BlochAffine> {
        Ok(BlochAffine::from_decoherence(self.g.eval(t)?, 1.0))
    }

    fn affine_trajectory(&self, times: &[f64]) -> Result<Vec<BlochAffine>> {
        Ok(self.g.trajectory(times)?.into_iter().map(|g| BlochAffine::from_decoherence(g, 1.0)).collect())
    }

    /// `H = ½ Im(Ġ/G) σz`, single channel `σz` with rate `γ/2` where `γ = −Re(Ġ/G)`.
    fn generator(&self) -> Option<TimeLocalGenerator> {
        let gh = self.g.clone();
        let gr = self.g.clone();
        let hamiltonian = Arc::new(move |t: f64| {
            let w = gh.log_derivative(t).map(|z| z.im).unwrap_or(f64::NAN);
            linalg::sigma_z().scale(0.5 * w)
        });
        let rate = Arc::new(move |t: f64| gr.log_derivative(t).map(|z| -0.5 * z.re).unwrap_or(f64::NAN));
        TimeLocalGenerator::new(2, hamiltonian, vec![DecayChannel { operator: linalg::sigma_z(), rate }]).ok()
    }

    fn decoherence(&self) -> Option<DecoherenceFunction> {
        Some(self.g.clone())
    }

    fn time_scale(&self) -> f64 {
        self.g.time_scale()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn semigroup_rate_is_constant() {
        let m = DephasingModel::semigroup(0.8);
        for &t in &[0.0, 0.5, 3.0] {
            assert_relative_eq!(dephasing_rate(m.function(), t).unwrap(), 0.8, max_relative = 1e-12);
        }
    }

    #[test]
    fn finite_difference_fallback_matches_analytic_rate() {
        let g = DecoherenceFunction::closed_form(1.0, |t| Complex64::new((-0.3 * t * t).exp(), 0.0));
        for &t in &[0.0, 0.4, 2.0] {
            assert_relative_eq!(dephasing_rate(&g, t).unwrap(), 0.6 * t, epsilon = 1e-6);
        }
    }

    #[test]
    fn zero_of_g_is_reported() {
        let g = DecoherenceFunction::closed_form(1.0, |t| Complex64::new((t).cos(), 0.0));
        let err = dephasing_rate(&g, std::f64::consts::FRAC_PI_2).unwrap_err();
        assert!(matches!(err, Error::ZeroCrossing { .. }));
    }

    #[test]
    fn populations_are_frozen() {
        let m = DephasingModel::semigroup(1.0);
        let a = m.affine(2.0).unwrap();
        assert_eq!(a.m[(2, 2)], 1.0);
        assert_eq!(a.c.norm(), 0.0);
    }

    #[test]
    fn generator_reproduces_the_map() {
        let g = DecoherenceFunction::closed_form(1.0, |t| Complex64::from_polar((-0.2 * t * t).exp(), 0.7 * t))
            .with_derivative(|t| {
                let g = Complex64::from_polar((-0.2 * t * t).exp(), 0.7 * t);
                Ok(g * Complex64::new(-0.4 * t, 0.7))
            });
        let model = DephasingModel::new("test", g);
        let gen = model.generator().unwrap();
        let rho0 = linalg::from_bloch(1.0, [0.6, 0.0, 0.3]);
        let times = [0.0, 0.5, 1.5];
        let states = gen.evolve(&rho0, &times, 1e-11).unwrap();
        for (t, rho) in times.iter().zip(&states) {
            let exact = model.affine(*t).unwrap().apply(&nalgebra::Vector3::new(0.6, 0.0, 0.3));
            let got = linalg::bloch_components(rho);
            for i in 0..3 {
                assert!((got[i] - exact[i]).abs() < 1e-8);
            }
        }
    }
}
