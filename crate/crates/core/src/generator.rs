//! Time-local master equation generators
//! `dρ/dt = −i[H(t), ρ] + Σ_i γ_i(t) (A_i ρ A_i† − ½{A_i†A_i, ρ})`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::numerics::ode::Dopri5;

pub type HamiltonianFn = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;
pub type RateFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct DecayChannel {
    pub operator: CMatrix,
    pub rate: RateFn,
}

#[derive(Clone)]
pub struct TimeLocalGenerator {
    dim: usize,
    hamiltonian: HamiltonianFn,
    channels: Vec<DecayChannel>,
}

impl fmt::Debug for TimeLocalGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeLocalGenerator")
            .field("dim", &self.dim)
            .field("channels", &self.channels.len())
            .finish()
    }
}

/// Times at which the Hamiltonian is sampled for the Hermiticity check.
const HERMITICITY_PROBES: [f64; 4] = [0.0, 0.37, 1.3, 4.1];

impl TimeLocalGenerator {
    pub fn new(dim: usize, hamiltonian: HamiltonianFn, channels: Vec<DecayChannel>) -> Result<Self> {
        for ch in &channels {
            linalg::check_square(&ch.operator, dim)?;
        }
        for &t in &HERMITICITY_PROBES {
            let h = hamiltonian(t);
            linalg::check_square(&h, dim)?;
            let dev = linalg::hermiticity_error(&h);
            if dev > 1e-12 {
                return Err(Error::NotHermitian { deviation: dev });
            }
        }
        if !channels.is_empty() {
            // Gram matrix of the vectorised Lindblad operators must be nonsingular.
            let n = channels.len();
            let vecs: Vec<CVector> = channels.iter().map(|c| linalg::vec_col(&c.operator)).collect();
            let gram = CMatrix::from_fn(n, n, |i, j| vecs[i].dotc(&vecs[j]));
            let min = linalg::eigvalsh(&gram)[0];
            if min < 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "Lindblad operators are linearly dependent (Gram eigenvalue {min:.3e})"
                )));
            }
        }
        Ok(Self { dim, hamiltonian, channels })
    }

    /// Generator without coherent part.
    pub fn dissipative(dim: usize, channels: Vec<DecayChannel>) -> Result<Self> {
        Self::new(dim, Arc::new(move |_| CMatrix::zeros(dim, dim)), channels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channels(&self) -> &[DecayChannel] {
        &self.channels
    }

    pub fn hamiltonian(&self, t: f64) -> CMatrix {
        (self.hamiltonian)(t)
    }

    pub fn rates(&self, t: f64) -> Vec<f64> {
        self.channels.iter().map(|c| (c.rate)(t)).collect()
    }

    /// `K_t(ρ)`.
    pub fn apply(&self, t: f64, rho: &CMatrix) -> CMatrix {
        let h = self.hamiltonian(t);
        let mut out = (&h * rho - rho * &h) * linalg::c(0.0, -1.0);
        for ch in &self.channels {
            let g = (ch.rate)(t);
            if g == 0.0 {
                continue;
            }
            let a = &ch.operator;
            let ad = a.adjoint();
            let ada = &ad * a;
            let term = a * rho * &ad - (&ada * rho + rho * &ada).scale(0.5);
            out += term.scale(g);
        }
        out
    }

    /// Superoperator matrix of `K_t` on column-stacked vectors.
    pub fn superoperator(&self, t: f64) -> CMatrix {
        let d = self.dim;
        let mut s = CMatrix::zeros(d * d, d * d);
        for j in 0..d {
            for i in 0..d {
                let mut e = CMatrix::zeros(d, d);
                e[(i, j)] = linalg::ONE;
                let img = self.apply(t, &e);
                s.set_column(i + d * j, &linalg::vec_col(&img));
            }
        }
        s
    }

    /// Integrates the master equation from `times[0]`; returns states at every time.
    pub fn evolve(&self, rho0: &CMatrix, times: &[f64], rtol: f64) -> Result<Vec<CMatrix>> {
        linalg::check_square(rho0, self.dim)?;
        let d = self.dim;
        let n = d * d;
        let mut y0 = vec![0.0; 2 * n];
        for (k, z) in rho0.as_slice().iter().enumerate() {
            y0[k] = z.re;
            y0[n + k] = z.im;
        }
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let rho = CMatrix::from_fn(d, d, |i, j| linalg::c(y[i + d * j], y[n + i + d * j]));
            let out = self.apply(t, &rho);
            for (k, z) in out.as_slice().iter().enumerate() {
                dy[k] = z.re;
                dy[n + k] = z.im;
            }
        };
        let solver = Dopri5 { rtol, atol: rtol * 1e-3, ..Dopri5::default() };
        let states = solver.integrate(rhs, times[0], &y0, times)?;
        Ok(states
            .into_iter()
            .map(|y| CMatrix::from_fn(d, d, |i, j| linalg::c(y[i + d * j], y[n + i + d * j])))
            .collect())
    }

    /// Smallest value of the P-divisibility condition `Σ_i γ_i |⟨n|A_i|m⟩|²`
    /// over `n ≠ m` of the given orthonormal bases (columns).
    pub fn p_divisibility_margin(&self, t: f64, bases: &[CMatrix]) -> f64 {
        let rates = self.rates(t);
        let mut worst = f64::INFINITY;
        for basis in bases {
            for n in 0..self.dim {
                for m in 0..self.dim {
                    if n == m {
                        continue;
                    }
                    let bn = basis.column(n);
                    let bm = basis.column(m);
                    let mut acc = 0.0;
                    for (ch, &g) in self.channels.iter().zip(&rates) {
                        let elem = (bn.adjoint() * &ch.operator * bm)[(0, 0)];
                        acc += g * elem.norm_sqr();
                    }
                    worst = worst.min(acc);
                }
            }
        }
        worst
    }

    /// Rate-based integrand of the CP-divisibility measure,
    /// `(2/d) Σ_{γ_i<0} |γ_i| ‖A_i‖²_HS`. Valid for traceless, mutually
    /// Hilbert–Schmidt-orthogonal Lindblad operators; `None` otherwise.
    pub fn rhp_rate_integrand(&self, t: f64) -> Option<f64> {
        let n = self.channels.len();
        for i in 0..n {
            let a = &self.channels[i].operator;
            if a.trace().norm() > 1e-12 {
                return None;
            }
            for j in (i + 1)..n {
                let overlap = (a.adjoint() * &self.channels[j].operator).trace().norm();
                if overlap > 1e-12 {
                    return None;
                }
            }
        }
        let d = self.dim as f64;
        Some(
            self.channels
                .iter()
                .map(|ch| {
                    let g = (ch.rate)(t);
                    if g < 0.0 {
                        -g * ch.operator.norm_squared() * 2.0 / d
                    } else {
                        0.0
                    }
                })
                .sum(),
        )
    }
}

/// Orthonormal qubit bases `{|n⟩, |−n⟩}` for directions on a Fibonacci grid plus the axes.
pub fn qubit_basis_grid(n: usize) -> Vec<CMatrix> {
    let mut dirs = crate::channel::fibonacci_sphere(n);
    dirs.extend([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    dirs.into_iter()
        .map(|p| {
            let theta = p[2].clamp(-1.0, 1.0).acos();
            let phi = p[1].atan2(p[0]);
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let e = num_complex::Complex64::from_polar(1.0, phi);
            CMatrix::from_row_slice(2, 2, &[linalg::c(c, 0.0), -e.conj() * s, e * s, linalg::c(c, 0.0)])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn constant(g: f64) -> RateFn {
        Arc::new(move |_| g)
    }

    #[test]
    fn dependent_operators_are_rejected() {
        let a = linalg::sigma_z();
        let err = TimeLocalGenerator::dissipative(
            2,
            vec![
                DecayChannel { operator: a.clone(), rate: constant(1.0) },
                DecayChannel { operator: a.scale(2.0), rate: constant(1.0) },
            ],
        );
        assert!(err.is_err());
    }

    #[test]
    fn non_hermitian_hamiltonian_is_rejected() {
        let h: HamiltonianFn = Arc::new(|_| linalg::sigma_minus());
        assert!(matches!(TimeLocalGenerator::new(2, h, vec![]), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn amplitude_damping_evolution_matches_exponential() {
        let gen = TimeLocalGenerator::dissipative(
            2,
            vec![DecayChannel { operator: linalg::sigma_minus(), rate: constant(0.7) }],
        )
        .unwrap();
        let rho0 = linalg::from_bloch(1.0, [0.3, 0.2, -0.5]);
        let times = [0.0, 0.5, 1.0, 2.0];
        let states = gen.evolve(&rho0, &times, 1e-10).unwrap();
        for (t, rho) in times.iter().zip(&states) {
            let p1 = rho0[(1, 1)].re * (-0.7 * t).exp();
            assert_abs_diff_eq!(rho[(1, 1)].re, p1, epsilon = 1e-9);
            let coh = rho0[(1, 0)] * (-0.35 * t).exp();
            assert_abs_diff_eq!((rho[(1, 0)] - coh).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn superoperator_matches_apply() {
        let h: HamiltonianFn = Arc::new(|t| linalg::sigma_x().scale(0.3 * t));
        let gen = TimeLocalGenerator::new(
            2,
            h,
            vec![DecayChannel { operator: linalg::sigma_z(), rate: constant(-0.2) }],
        )
        .unwrap();
        let rho = linalg::from_bloch(1.0, [0.1, 0.5, 0.2]);
        let direct = gen.apply(1.5, &rho);
        let via = linalg::unvec_col(&(gen.superoperator(1.5) * linalg::vec_col(&rho)), 2, 2);
        assert!(linalg::max_abs_diff(&direct, &via) < 1e-14);
    }

    #[test]
    fn pauli_rates_reduce_to_pairwise_sums() {
        // ½ Σ γ_i (σ_i ρ σ_i − ρ) written with rates γ_i/2
        let rates = [1.0, 1.0, -0.6];
        let channels = linalg::paulis()
            .into_iter()
            .zip(rates)
            .map(|(op, g)| DecayChannel { operator: op, rate: constant(0.5 * g) })
            .collect();
        let gen = TimeLocalGenerator::dissipative(2, channels).unwrap();
        let margin = gen.p_divisibility_margin(0.0, &qubit_basis_grid(400));
        // minimum over directions is ½ min_{i<j}(γ_i + γ_j) = 0.2
        assert_abs_diff_eq!(margin, 0.2, epsilon = 1e-9);
        assert_abs_diff_eq!(gen.rhp_rate_integrand(0.0).unwrap(), 0.6, epsilon = 1e-14);
    }
}
