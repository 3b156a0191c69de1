use std::sync::Arc;

use num_complex::Complex64;

use super::{DecoherenceFunction, Provenance, QubitModel};
use crate::channel::{BlochAffine, QuantumMap};
use crate::error::{Error, Result};
use crate::generator::{DecayChannel, TimeLocalGenerator};
use crate::linalg::{self, CMatrix};
use crate::numerics::ode::Dopri5;

/// Two-level atom coupled in rotating-wave approximation to a zero-temperature
/// bath with Lorentzian spectral density of width `λ`, coupling `γ₀` and
/// detuning `Δ`. The bath correlation function is `f(τ) = (γ₀λ/2) e^{−(λ+iΔ)τ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossyCavity {
    pub gamma0: f64,
    pub width: f64,
    pub detuning: f64,
}

/// `sinh(z)/z`, accurate near zero.
fn sinhc(z: Complex64) -> Complex64 {
    if z.norm() < 1e-4 {
        let z2 = z * z;
        1.0 + z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sinh() / z
    }
}

impl LossyCavity {
    pub fn new(gamma0: f64, width: f64, detuning: f64) -> Result<Self> {
        if !(gamma0 > 0.0) || !(width > 0.0) || !detuning.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lossy cavity needs γ₀ > 0 and λ > 0 (got γ₀ = {gamma0}, λ = {width})"
            )));
        }
        Ok(Self { gamma0, width, detuning })
    }

    pub fn resonant(gamma0: f64, width: f64) -> Result<Self> {
        Self::new(gamma0, width, 0.0)
    }

    fn d(&self) -> Complex64 {
        Complex64::new(self.width * self.width - 2.0 * self.gamma0 * self.width, 0.0).sqrt()
    }

    /// Closed form at zero detuning, `(G, Ġ)`.
    fn resonant_closed_form(&self, t: f64) -> (Complex64, Complex64) {
        let l = self.width;
        let half = self.d() * (0.5 * t);
        let damp = (-0.5 * l * t).exp();
        let s = sinhc(half);
        let g = damp * (half.cosh() + 0.5 * l * t * s);
        let dg = -0.5 * self.gamma0 * l * t * damp * s;
        (g, dg)
    }

    /// Integrates `Ġ = −F`, `Ḟ = (γ₀λ/2) G − (λ+iΔ) F` from `G(0)=1, F(0)=0`.
    fn ode_trajectory(&self, times: &[f64]) -> Result<Vec<(Complex64, Complex64)>> {
        if times.is_empty() {
            return Ok(vec![]);
        }
        if times.iter().any(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("times must be nonnegative and nondecreasing".into()));
        }
        let k = 0.5 * self.gamma0 * self.width;
        let mu = Complex64::new(self.width, self.detuning);
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            let g = Complex64::new(y[0], y[1]);
            let f = Complex64::new(y[2], y[3]);
            let df = k * g - mu * f;
            dy[0] = -f.re;
            dy[1] = -f.im;
            dy[2] = df.re;
            dy[3] = df.im;
        };
        let solver = Dopri5 { rtol: 1e-10, atol: 1e-13, h_max: 0.25 / self.width, ..Dopri5::default() };
        let out = solver.integrate(rhs, 0.0, &[1.0, 0.0, 0.0, 0.0], times)?;
        Ok(out
            .into_iter()
            .map(|y| (Complex64::new(y[0], y[1]), -Complex64::new(y[2], y[3])))
            .collect())
    }

    fn g_and_derivative(&self, t: f64) -> Result<(Complex64, Complex64)> {
        if self.detuning == 0.0 {
            Ok(self.resonant_closed_form(t))
        } else {
            Ok(self.ode_trajectory(&[t])?[0])
        }
    }

    pub fn g(&self, t: f64) -> Result<Complex64> {
        Ok(self.g_and_derivative(t)?.0)
    }

    /// Decoherence function with provenance `ClosedForm` at resonance, `Ode` otherwise.
    pub fn decoherence_function(&self) -> DecoherenceFunction {
        let m = *self;
        let provenance = if self.detuning == 0.0 { Provenance::ClosedForm } else { Provenance::Ode };
        let md = m;
        let mt = m;
        DecoherenceFunction::new(provenance, 1.0 / self.width, move |t| m.g(t))
            .with_derivative(move |t| Ok(md.g_and_derivative(t)?.1))
            .with_trajectory(move |times| {
                if mt.detuning == 0.0 {
                    Ok(times.iter().map(|&t| mt.resonant_closed_form(t)).collect())
                } else {
                    mt.ode_trajectory(times)
                }
            })
    }

    /// Lamb shift `S(t) = −2 Im(Ġ/G)` and decay rate `γ(t) = −2 Re(Ġ/G)`.
    pub fn generator_rates(&self, t: f64) -> Result<(f64, f64)> {
        let (g, dg) = self.g_and_derivative(t)?;
        if g.norm() < 1e-12 {
            return Err(Error::ZeroCrossing { time: t, modulus: g.norm() });
        }
        let r = dg / g;
        Ok((-2.0 * r.im, -2.0 * r.re))
    }

    /// First zero of `G` at resonance for `γ₀ > λ/2`, if any.
    pub fn first_zero(&self) -> Option<f64> {
        if self.detuning != 0.0 {
            return None;
        }
        let disc = 2.0 * self.gamma0 * self.width - self.width * self.width;
        if disc <= 0.0 {
            return None;
        }
        // G ∝ cos(wt/2) + (λ/w) sin(wt/2) with w = √disc
        let w = disc.sqrt();
        let phase = (-w / self.width).atan() + std::f64::consts::PI;
        Some(2.0 * phase / w)
    }
}

impl QubitModel for LossyCavity {
    fn name(&self) -> String {
        format!("lossy cavity (γ₀ = {}, λ = {}, Δ = {})", self.gamma0, self.width, self.detuning)
    }

    fn affine(&self, t: f64) -> Result<BlochAffine> {
        let g = self.g(t)?;
        Ok(BlochAffine::from_decoherence(g, g.norm_sqr()))
    }

    fn affine_trajectory(&self, times: &[f64]) -> Result<Vec<BlochAffine>> {
        let traj = if self.detuning == 0.0 {
            times.iter().map(|&t| self.resonant_closed_form(t)).collect()
        } else {
            self.ode_trajectory(times)?
        };
        Ok(traj.into_iter().map(|(g, _)| BlochAffine::from_decoherence(g, g.norm_sqr())).collect())
    }

    /// Kraus pair `diag(1, G)` and `√(1−|G|²) σ₋`.
    fn map(&self, t: f64) -> Result<QuantumMap> {
        let g = self.g(t)?;
        let k0 = CMatrix::from_row_slice(2, 2, &[linalg::ONE, linalg::ZERO, linalg::ZERO, g]);
        let k1 = linalg::sigma_minus().scale((1.0 - g.norm_sqr()).max(0.0).sqrt());
        QuantumMap::from_kraus(vec![k0, k1])
    }

    /// `H = (S/2)|1⟩⟨1|`, single channel `σ₋` with rate `γ(t)`.
    fn generator(&self) -> Option<TimeLocalGenerator> {
        let mh = *self;
        let mr = *self;
        let hamiltonian = Arc::new(move |t: f64| {
            let s = mh.generator_rates(t).map(|r| r.0).unwrap_or(f64::NAN);
            let mut h = CMatrix::zeros(2, 2);
            h[(1, 1)] = linalg::c(0.5 * s, 0.0);
            h
        });
        let rate = Arc::new(move |t: f64| mr.generator_rates(t).map(|r| r.1).unwrap_or(f64::NAN));
        TimeLocalGenerator::new(2, hamiltonian, vec![DecayChannel { operator: linalg::sigma_minus(), rate }]).ok()
    }

    fn decoherence(&self) -> Option<DecoherenceFunction> {
        Some(self.decoherence_function())
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.width
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{trace_distance, DensityMatrix};
    use approx::assert_relative_eq;

    /// Roots of `r² + (λ+iΔ) r + γ₀λ/2 = 0` give `G = (r₂e^{r₁t} − r₁e^{r₂t})/(r₂ − r₁)`.
    fn exponential_oracle(m: &LossyCavity, t: f64) -> Complex64 {
        let b = Complex64::new(m.width, m.detuning);
        let disc = (b * b - 2.0 * m.gamma0 * m.width).sqrt();
        let r1 = (-b + disc) / 2.0;
        let r2 = (-b - disc) / 2.0;
        (r2 * (r1 * t).exp() - r1 * (r2 * t).exp()) / (r2 - r1)
    }

    #[test]
    fn closed_form_matches_exponential_solution() {
        for &g0 in &[0.1, 0.45, 2.0, 5.0] {
            let m = LossyCavity::resonant(g0, 1.0).unwrap();
            for &t in &[0.0, 0.3, 2.0, 9.0] {
                let diff = (m.g(t).unwrap() - exponential_oracle(&m, t)).norm();
                assert!(diff < 1e-12, "γ₀ = {g0}, t = {t}: {diff}");
            }
        }
    }

    #[test]
    fn critical_coupling_uses_series() {
        // d = 0 at γ₀ = λ/2: G = e^{−λt/2}(1 + λt/2)
        let m = LossyCavity::resonant(0.5, 1.0).unwrap();
        for &t in &[0.5, 4.0] {
            assert_relative_eq!(m.g(t).unwrap().re, (-0.5 * t).exp() * (1.0 + 0.5 * t), max_relative = 1e-12);
        }
    }

    #[test]
    fn detuned_ode_matches_exponential_solution() {
        let m = LossyCavity::new(3.0, 1.0, 1.7).unwrap();
        let times: Vec<f64> = (0..=40).map(|k| 0.25 * k as f64).collect();
        let traj = m.ode_trajectory(&times).unwrap();
        for (t, (g, _)) in times.iter().zip(traj) {
            assert!((g - exponential_oracle(&m, *t)).norm() < 1e-8);
        }
    }

    #[test]
    fn detuned_ode_matches_volterra_discretisation() {
        // trapezoid discretisation of Ġ(t) = −∫₀ᵗ f(t−s) G(s) ds
        let m = LossyCavity::new(2.0, 1.0, 0.8).unwrap();
        let h = 2e-4;
        let n = 20_000;
        let f = |tau: f64| 0.5 * m.gamma0 * m.width * (-Complex64::new(m.width, m.detuning) * tau).exp();
        let fk: Vec<Complex64> = (0..=n).map(|k| f(k as f64 * h)).collect();
        let mut g = vec![Complex64::new(1.0, 0.0)];
        let mut dg = vec![Complex64::new(0.0, 0.0)];
        for i in 1..=n {
            // predictor, then one corrector pass
            let conv = |g: &[Complex64], gi: Complex64| {
                let mut acc = 0.5 * fk[i] * g[0] + 0.5 * fk[0] * gi;
                for j in 1..i {
                    acc += fk[i - j] * g[j];
                }
                -acc * h
            };
            let mut gi = g[i - 1] + h * dg[i - 1];
            for _ in 0..3 {
                let d = conv(&g, gi);
                gi = g[i - 1] + 0.5 * h * (dg[i - 1] + d);
            }
            dg.push(conv(&g, gi));
            g.push(gi);
        }
        let t = n as f64 * h;
        let ode = m.g(t).unwrap();
        assert!((ode - g[n]).norm() < 1e-6, "{ode} vs {}", g[n]);
    }

    #[test]
    fn first_zero_at_strong_coupling() {
        let m = LossyCavity::resonant(2.0, 1.0).unwrap();
        let t0 = 4.0 * std::f64::consts::PI / (3.0 * 3f64.sqrt());
        assert_relative_eq!(m.first_zero().unwrap(), t0, max_relative = 1e-12);
        assert!(m.g(t0).unwrap().norm() < 1e-8);
        assert!(matches!(m.generator_rates(t0), Err(Error::ZeroCrossing { .. })));
        // rate grows without bound approaching the zero
        let near = m.generator_rates(t0 - 1e-6).unwrap().1;
        assert!(near > 1e5);
    }

    #[test]
    fn weak_coupling_is_monotone() {
        let m = LossyCavity::resonant(0.4, 1.0).unwrap();
        let mut prev = 1.0;
        for k in 1..=2000 {
            let g = m.g(k as f64 * 0.01).unwrap().norm();
            assert!(g < prev);
            prev = g;
        }
    }

    #[test]
    fn lindblad_limit() {
        let m = LossyCavity::resonant(0.001, 1.0).unwrap();
        let rate = m.generator_rates(50.0).unwrap().1;
        assert_relative_eq!(rate, 0.001, max_relative = 2e-3);
    }

    #[test]
    fn map_at_zero_is_identity() {
        let m = LossyCavity::new(1.0, 1.0, 0.3).unwrap();
        let choi = m.map(0.0).unwrap().choi();
        assert!(linalg::max_abs_diff(&choi, &QuantumMap::identity(2).choi()) < 1e-10);
    }

    #[test]
    fn trace_distance_closed_form() {
        let m = LossyCavity::resonant(3.0, 1.0).unwrap();
        let r1 = DensityMatrix::from_bloch([0.3, -0.4, 0.5]).unwrap();
        let r2 = DensityMatrix::from_bloch([-0.2, 0.1, -0.6]).unwrap();
        let a = r1.population(1) - r2.population(1);
        let b = (r1.element(1, 0) - r2.element(1, 0)).norm();
        for &t in &[0.5, 1.7, 3.0] {
            let map = m.map(t).unwrap();
            let d = trace_distance(
                &crate::channel::apply_map(&map, &r1).unwrap(),
                &crate::channel::apply_map(&map, &r2).unwrap(),
            )
            .unwrap();
            let g = m.g(t).unwrap().norm();
            assert!((d - g * (g * g * a * a + b * b).sqrt()).abs() < 1e-9);
            let affine = m.affine(t).unwrap().to_map();
            assert!(linalg::max_abs_diff(&affine.choi(), &map.choi()) < 1e-12);
        }
    }

    #[test]
    fn generator_reproduces_the_map() {
        let m = LossyCavity::new(0.3, 1.0, 0.5).unwrap();
        let gen = m.generator().unwrap();
        let r0 = [0.5, 0.2, -0.3];
        let times = [0.0, 1.0, 3.0];
        let states = gen.evolve(&linalg::from_bloch(1.0, r0), &times, 1e-11).unwrap();
        for (t, rho) in times.iter().zip(&states) {
            let exact = m.affine(*t).unwrap().apply(&nalgebra::Vector3::from(r0));
            let got = linalg::bloch_components(rho);
            for i in 0..3 {
                assert!((got[i] - exact[i]).abs() < 1e-7);
            }
        }
    }
}
