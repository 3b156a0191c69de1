use std::fmt;
use std::sync::Arc;

use super::QubitModel;
use crate::channel::{BlochAffine, QuantumMap};
use crate::error::Result;
use crate::generator::{DecayChannel, RateFn, TimeLocalGenerator};
use crate::linalg;
use crate::numerics::quadrature::{integrate_with_breaks, QuadOptions};

/// Pauli-channel model `dρ/dt = ½ Σ_i γ_i(t) (σ_i ρ σ_i − ρ)` with map
/// `Φ_t(ρ) = Σ_{i=0}^{3} p_i(t) σ_i ρ σ_i`.
#[derive(Clone)]
pub struct RandomUnitary {
    rates: [RateFn; 3],
    breakpoints: Vec<f64>,
    time_scale: f64,
}

impl fmt::Debug for RandomUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandomUnitary")
            .field("rates_at_zero", &self.rates_at(0.0))
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

const QUAD: QuadOptions = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-10, max_intervals: 4000 };

impl RandomUnitary {
    pub fn new(rates: [RateFn; 3]) -> Self {
        Self { rates, breakpoints: vec![], time_scale: 1.0 }
    }

    pub fn constant(gammas: [f64; 3]) -> Self {
        let [a, b, c] = gammas;
        let scale = 1.0 / gammas.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(1e-12);
        Self::new([Arc::new(move |_| a), Arc::new(move |_| b), Arc::new(move |_| c)]).with_time_scale(scale)
    }

    /// Times where a rate has a kink or jump; quadrature panels split there.
    pub fn with_breakpoints(mut self, mut breakpoints: Vec<f64>) -> Self {
        breakpoints.retain(|t| t.is_finite() && *t > 0.0);
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        self.breakpoints = breakpoints;
        self
    }

    pub fn with_time_scale(mut self, time_scale: f64) -> Self {
        self.time_scale = time_scale;
        self
    }

    pub fn rates_at(&self, t: f64) -> [f64; 3] {
        [(self.rates[0])(t), (self.rates[1])(t), (self.rates[2])(t)]
    }

    fn segment_integral(&self, a: f64, b: f64) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        if b <= a {
            return Ok(out);
        }
        let mut breaks = vec![a];
        breaks.extend(self.breakpoints.iter().copied().filter(|&x| x > a && x < b));
        breaks.push(b);
        for (i, r) in self.rates.iter().enumerate() {
            out[i] = integrate_with_breaks(|t| r(t), &breaks, QUAD)?.value;
        }
        Ok(out)
    }

    /// `Γ_i(t) = ∫₀ᵗ γ_i`.
    pub fn integrated_rates(&self, t: f64) -> Result<[f64; 3]> {
        self.segment_integral(0.0, t)
    }

    /// `Γ_i` on a nondecreasing grid, accumulated segment by segment.
    pub fn integrated_trajectory(&self, times: &[f64]) -> Result<Vec<[f64; 3]>> {
        let mut acc = [0.0; 3];
        let mut last = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let seg = if t >= last { self.segment_integral(last, t)? } else { return self.pointwise(times) };
            for i in 0..3 {
                acc[i] += seg[i];
            }
            last = t;
            out.push(acc);
        }
        Ok(out)
    }

    fn pointwise(&self, times: &[f64]) -> Result<Vec<[f64; 3]>> {
        times.iter().map(|&t| self.integrated_rates(t)).collect()
    }

    /// Bloch contraction factors `(A₂₃, A₁₃, A₁₂)` with `A_ij = e^{−(Γ_i+Γ_j)}`.
    pub fn bloch_factors(integrated: [f64; 3]) -> [f64; 3] {
        let [g1, g2, g3] = integrated;
        [(-(g2 + g3)).exp(), (-(g1 + g3)).exp(), (-(g1 + g2)).exp()]
    }

    /// `p₀..p₃` from the integrated rates; the last entry closes the sum to one.
    pub fn coefficients_from_integrated(integrated: [f64; 3]) -> [f64; 4] {
        let [a23, a13, a12] = Self::bloch_factors(integrated);
        let p0 = 0.25 * (1.0 + a12 + a13 + a23);
        let p1 = 0.25 * (1.0 - a12 - a13 + a23);
        let p2 = 0.25 * (1.0 - a12 + a13 - a23);
        [p0, p1, p2, 1.0 - p0 - p1 - p2]
    }

    pub fn coefficients(&self, t: f64) -> Result<[f64; 4]> {
        Ok(Self::coefficients_from_integrated(self.integrated_rates(t)?))
    }

    /// `T_i = 1/(γ_j + γ_k)`; infinite when the pair sum vanishes, negative when it is negative.
    pub fn relaxation_times(&self, t: f64) -> [f64; 3] {
        let [a, b, c] = self.rates_at(t);
        [1.0 / (b + c), 1.0 / (a + c), 1.0 / (a + b)]
    }

    fn map_from_integrated(integrated: [f64; 3]) -> Result<QuantumMap> {
        let p = Self::coefficients_from_integrated(integrated);
        if p.iter().all(|&x| x >= 0.0) {
            let ops = [linalg::identity(2), linalg::sigma_x(), linalg::sigma_y(), linalg::sigma_z()];
            let kraus = ops.iter().zip(p).filter(|(_, w)| *w > 0.0).map(|(s, w)| s.scale(w.sqrt())).collect();
            QuantumMap::from_kraus(kraus)
        } else {
            Ok(BlochAffine::diagonal(Self::bloch_factors(integrated)).to_map())
        }
    }
}

impl QubitModel for RandomUnitary {
    fn name(&self) -> String {
        "random unitary".into()
    }

    fn affine(&self, t: f64) -> Result<BlochAffine> {
        Ok(BlochAffine::diagonal(Self::bloch_factors(self.integrated_rates(t)?)))
    }

    fn affine_trajectory(&self, times: &[f64]) -> Result<Vec<BlochAffine>> {
        Ok(self
            .integrated_trajectory(times)?
            .into_iter()
            .map(|g| BlochAffine::diagonal(Self::bloch_factors(g)))
            .collect())
    }

    /// Kraus form `√p_i σ_i` when every `p_i ≥ 0`, Choi form otherwise.
    fn map(&self, t: f64) -> Result<QuantumMap> {
        Self::map_from_integrated(self.integrated_rates(t)?)
    }

    /// Channels `σ_i` with rates `γ_i/2`.
    fn generator(&self) -> Option<TimeLocalGenerator> {
        let channels = linalg::paulis()
            .into_iter()
            .zip(self.rates.iter().cloned())
            .map(|(op, r)| DecayChannel { operator: op, rate: Arc::new(move |t| 0.5 * r(t)) as RateFn })
            .collect();
        TimeLocalGenerator::dissipative(2, channels).ok()
    }

    fn time_scale(&self) -> f64 {
        self.time_scale
    }
}
