//! Classical Markov jump processes: Pauli master equation, stochastic transition
//! matrices, Kolmogorov distance and the reduction of diagonal-preserving quantum
//! generators to classical rates.
//!
//! Probability vectors are columns and transition matrices are column-stochastic,
//! so `T(t, s) = T(t, τ) T(τ, s)` composes like dynamical maps.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::generator::TimeLocalGenerator;
use crate::linalg::{self, CMatrix};
use crate::numerics::ode::Dopri5;

pub type RateFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// Time-dependent rates `W_xz(t)` for jumps `z → x`. Diagonal entries are ignored.
#[derive(Clone)]
pub struct RateMatrix {
    n_states: usize,
    rates: RateFn,
}

impl fmt::Debug for RateMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RateMatrix").field("n_states", &self.n_states).finish()
    }
}

impl RateMatrix {
    pub fn new(n_states: usize, rates: RateFn) -> Self {
        Self { n_states, rates }
    }

    pub fn constant(w: DMatrix<f64>) -> Result<Self> {
        if w.nrows() != w.ncols() {
            return Err(Error::DimensionMismatch { expected: w.nrows(), found: w.ncols() });
        }
        let rm = Self { n_states: w.nrows(), rates: Arc::new(move |_| w.clone()) };
        rm.validate(&[0.0])?;
        Ok(rm)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// `W(t)` with its diagonal zeroed.
    pub fn at(&self, t: f64) -> DMatrix<f64> {
        let mut w = (self.rates)(t);
        w.fill_diagonal(0.0);
        w
    }

    /// `L(t) = W(t) − diag(Σ_x W_xz(t))`, so that `dP/dt = L P`.
    pub fn generator(&self, t: f64) -> DMatrix<f64> {
        let w = self.at(t);
        let mut l = w.clone();
        for z in 0..self.n_states {
            l[(z, z)] = -w.column(z).sum();
        }
        l
    }

    /// Errors on the first negative off-diagonal rate at the given times.
    pub fn validate(&self, times: &[f64]) -> Result<()> {
        for &t in times {
            let w = self.at(t);
            for col in 0..self.n_states {
                for row in 0..self.n_states {
                    if row != col && w[(row, col)] < 0.0 {
                        return Err(Error::NegativeRate { row, col, value: w[(row, col)], time: t });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Column-stochastic matrix `T(x|y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    matrix: DMatrix<f64>,
}

const STOCHASTIC_TOL: f64 = 1e-12;

impl TransitionMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        for (j, col) in matrix.column_iter().enumerate() {
            if (col.sum() - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidMap(format!("column {j} sums to {}", col.sum())));
            }
            if col.iter().any(|&p| !(-STOCHASTIC_TOL..=1.0 + STOCHASTIC_TOL).contains(&p)) {
                return Err(Error::InvalidMap(format!("column {j} has an entry outside [0, 1]")));
            }
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: DMatrix::identity(n, n) }
    }

    /// `exp(L t)` for a constant rate matrix.
    pub fn from_constant_rates(w: &RateMatrix, t: f64) -> Result<Self> {
        Self::cleaned((w.generator(0.0) * t).exp())
    }

    /// Clips round-off negatives and renormalises columns before validating.
    fn cleaned(mut m: DMatrix<f64>) -> Result<Self> {
        for mut col in m.column_iter_mut() {
            for p in col.iter_mut() {
                if *p < 0.0 && *p > -1e-9 {
                    *p = 0.0;
                }
            }
            let s = col.sum();
            if s > 0.0 {
                col /= s;
            }
        }
        Self::new(m)
    }

    pub fn n_states(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, p: &DVector<f64>) -> DVector<f64> {
        &self.matrix * p
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &TransitionMatrix) -> TransitionMatrix {
        TransitionMatrix { matrix: &self.matrix * &first.matrix }
    }
}

fn check_distribution(p: &DVector<f64>, n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.len() });
    }
    if (p.sum() - 1.0).abs() > 1e-10 || p.iter().any(|&x| x < -1e-12) {
        return Err(Error::InvalidParameter(format!("initial distribution is not normalized: sum {}", p.sum())));
    }
    Ok(())
}

/// Integrates `dP(x)/dt = Σ_z [W_xz P(z) − W_zx P(x)]` from `times[0]`.
pub fn pauli_evolve(w: &RateMatrix, p0: &DVector<f64>, times: &[f64]) -> Result<Vec<DVector<f64>>> {
    let n = w.n_states();
    check_distribution(p0, n)?;
    w.validate(times)?;
    let Some(&t0) = times.first() else {
        return Ok(vec![]);
    };
    let mut negative = None;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let l = w.generator(t);
        if negative.is_none() {
            negative = w.validate(&[t]).err();
        }
        let p = DVector::from_column_slice(y);
        dy.copy_from_slice((l * p).as_slice());
    };
    let solver = Dopri5 { rtol: 1e-12, atol: 1e-14, ..Dopri5::default() };
    let out = solver.integrate(rhs, t0, p0.as_slice(), times)?;
    if let Some(e) = negative {
        return Err(e);
    }
    let traj: Vec<DVector<f64>> = out.into_iter().map(DVector::from_vec).collect();
    for (p, &t) in traj.iter().zip(times) {
        let drift = (p.sum() - 1.0).abs();
        let min = p.min();
        if drift >= 1e-9 || min < -1e-9 {
            return Err(Error::Integration(format!(
                "Pauli master equation lost normalization or positivity at t = {t} (drift {drift:.3e}, min {min:.3e})"
            )));
        }
    }
    Ok(traj)
}

/// `T(t, s)` from evolving every delta distribution `δ_y` from `s` to `t`.
pub fn transition_matrix(w: &RateMatrix, s: f64, t: f64) -> Result<TransitionMatrix> {
    let n = w.n_states();
    let mut m = DMatrix::zeros(n, n);
    for y in 0..n {
        let mut delta = DVector::zeros(n);
        delta[y] = 1.0;
        let traj = pauli_evolve(w, &delta, &[s, t])?;
        m.set_column(y, &traj[1]);
    }
    TransitionMatrix::cleaned(m)
}

/// Weighted L1 distance `Σ_x |w₁ p¹(x) − w₂ p²(x)|`.
///
/// # Panics
/// If the vectors have different lengths.
pub fn kolmogorov_distance(p1: &DVector<f64>, p2: &DVector<f64>, weights: (f64, f64)) -> f64 {
    assert_eq!(p1.len(), p2.len(), "distributions of different length");
    p1.iter().zip(p2.iter()).map(|(a, b)| (weights.0 * a - weights.1 * b).abs()).sum()
}

/// Joint distribution `P(x_m, …, x_1)` of a Markov chain started from `p1`, with
/// `steps[k]` the transition from time `k+1` to `k+2`. Index `x_1 + n x_2 + n² x_3 + …`.
pub fn markov_joint(p1: &DVector<f64>, steps: &[TransitionMatrix]) -> Vec<f64> {
    let n = p1.len();
    let mut joint: Vec<f64> = p1.iter().copied().collect();
    let mut stride = 1;
    for step in steps {
        let mut next = vec![0.0; joint.len() * n];
        for (idx, &p) in joint.iter().enumerate() {
            let last = (idx / stride) % n;
            for x in 0..n {
                next[idx + joint.len() * x] = step.matrix[(x, last)] * p;
            }
        }
        stride *= n;
        joint = next;
    }
    joint
}

/// Sums out the most recent time of a joint distribution built by [`markov_joint`].
pub fn marginalize_last(joint: &[f64], n: usize) -> Vec<f64> {
    let len = joint.len() / n;
    (0..len).map(|idx| (0..n).map(|x| joint[idx + len * x]).sum()).collect()
}

/// Times at which diagonal preservation of a generator is checked.
const LEAKAGE_PROBES: [f64; 5] = [0.0, 0.37, 1.3, 4.1, 9.7];
const LEAKAGE_TOL: f64 = 1e-10;

/// Largest off-diagonal element (in `basis`) of `K_t(|m⟩⟨m|)` over basis states and probe times.
pub fn diagonal_leakage(gen: &TimeLocalGenerator, basis: &CMatrix) -> Result<f64> {
    let d = gen.dim();
    linalg::check_square(basis, d)?;
    let bd = basis.adjoint();
    let mut worst: f64 = 0.0;
    for &t in &LEAKAGE_PROBES {
        for m in 0..d {
            let v = basis.column(m).into_owned();
            let img = &bd * gen.apply(t, &(&v * v.adjoint())) * basis;
            for i in 0..d {
                for j in 0..d {
                    if i != j {
                        worst = worst.max(img[(i, j)].norm());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Classical rates `W_nm(t) = Σ_i γ_i(t) |⟨n|A_i|m⟩|²` of a generator that maps
/// diagonal states (in the orthonormal columns of `basis`) to diagonal states.
///
/// Negative rates are kept; [`pauli_evolve`] rejects them.
pub fn quantum_to_classical(gen: &TimeLocalGenerator, basis: &CMatrix) -> Result<RateMatrix> {
    let leakage = diagonal_leakage(gen, basis)?;
    if leakage >= LEAKAGE_TOL {
        return Err(Error::NotDiagonalPreserving { leakage });
    }
    let d = gen.dim();
    let bd = basis.adjoint();
    let weights: Vec<DMatrix<f64>> = gen
        .channels()
        .iter()
        .map(|ch| {
            let a = &bd * &ch.operator * basis;
            DMatrix::from_fn(d, d, |n, m| if n == m { 0.0 } else { a[(n, m)].norm_sqr() })
        })
        .collect();
    let gen = gen.clone();
    Ok(RateMatrix::new(
        d,
        Arc::new(move |t| {
            let mut w = DMatrix::zeros(d, d);
            for (g, k) in gen.rates(t).into_iter().zip(&weights) {
                w += k * g;
            }
            w
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::DecayChannel;
    use approx::assert_relative_eq;
    use nalgebra::dvector;

    fn two_state(w: f64) -> RateMatrix {
        RateMatrix::constant(DMatrix::from_row_slice(2, 2, &[0.0, w, w, 0.0])).unwrap()
    }

    #[test]
    fn symmetric_two_state_relaxes_exponentially() {
        let w = 0.7;
        let times: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
        let traj = pauli_evolve(&two_state(w), &dvector![0.9, 0.1], &times).unwrap();
        for (p, t) in traj.iter().zip(&times) {
            assert_relative_eq!(p[0], 0.5 + 0.4 * (-2.0 * w * t).exp(), epsilon = 1e-11);
        }
    }

    #[test]
    fn zero_rates_freeze_the_distribution() {
        let traj = pauli_evolve(&two_state(0.0), &dvector![0.3, 0.7], &[0.0, 5.0]).unwrap();
        assert_eq!(traj[1], dvector![0.3, 0.7]);
    }

    #[test]
    fn negative_rates_are_rejected() {
        let w = DMatrix::from_row_slice(2, 2, &[0.0, -0.1, 0.2, 0.0]);
        assert!(matches!(RateMatrix::constant(w), Err(Error::NegativeRate { row: 0, col: 1, .. })));
        let late = RateMatrix::new(2, Arc::new(|t| DMatrix::from_row_slice(2, 2, &[0.0, 1.0 - t, 1.0, 0.0])));
        let r = pauli_evolve(&late, &dvector![0.5, 0.5], &[0.0, 0.5, 2.0]);
        assert!(matches!(r, Err(Error::NegativeRate { .. })));
    }

    #[test]
    fn chapman_kolmogorov_for_constant_rates() {
        let w = RateMatrix::constant(DMatrix::from_row_slice(3, 3, &[0.0, 0.4, 0.1, 0.3, 0.0, 0.5, 0.2, 0.7, 0.0]))
            .unwrap();
        let t_ts = transition_matrix(&w, 0.8, 2.0).unwrap();
        let t_ss = transition_matrix(&w, 0.0, 0.8).unwrap();
        let full = transition_matrix(&w, 0.0, 2.0).unwrap();
        let diff = (t_ts.compose(&t_ss).matrix() - full.matrix()).abs().max();
        assert!(diff < 1e-8, "{diff}");
        let expm = TransitionMatrix::from_constant_rates(&w, 2.0).unwrap();
        assert!((expm.matrix() - full.matrix()).abs().max() < 1e-9);
    }

    #[test]
    fn kolmogorov_distance_examples() {
        let p = dvector![0.7, 0.3];
        let q = dvector![0.3, 0.7];
        assert_eq!(kolmogorov_distance(&p, &p, (0.5, 0.5)), 0.0);
        assert_relative_eq!(kolmogorov_distance(&dvector![1.0, 0.0], &dvector![0.0, 1.0], (0.5, 0.5)), 1.0);
        assert_relative_eq!(kolmogorov_distance(&p, &q, (0.5, 0.5)), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn transition_matrix_validation() {
        assert!(TransitionMatrix::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.5, 0.8])).is_ok());
        assert!(TransitionMatrix::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.6, 0.8])).is_err());
        assert!(TransitionMatrix::new(DMatrix::from_row_slice(2, 2, &[1.2, 0.2, -0.2, 0.8])).is_err());
    }

    #[test]
    fn joint_distribution_marginalizes() {
        let t1 = TransitionMatrix::new(DMatrix::from_row_slice(2, 2, &[0.9, 0.3, 0.1, 0.7])).unwrap();
        let t2 = TransitionMatrix::new(DMatrix::from_row_slice(2, 2, &[0.6, 0.5, 0.4, 0.5])).unwrap();
        let p1 = dvector![0.25, 0.75];
        let j2 = markov_joint(&p1, std::slice::from_ref(&t1));
        let j3 = markov_joint(&p1, &[t1.clone(), t2]);
        let back = marginalize_last(&j3, 2);
        for (a, b) in back.iter().zip(&j2) {
            assert!((a - b).abs() < 1e-12);
        }
        // P(x_1 = 1, x_2 = 0) = T(0|1) p(1)
        assert_relative_eq!(j2[1], 0.3 * 0.75, epsilon = 1e-15);
        assert_relative_eq!(marginalize_last(&j2, 2)[1], 0.75, epsilon = 1e-15);
    }

    fn computational_basis() -> CMatrix {
        linalg::identity(2)
    }

    #[test]
    fn amplitude_damping_rates() {
        let gen = TimeLocalGenerator::dissipative(
            2,
            vec![DecayChannel { operator: linalg::sigma_minus(), rate: Arc::new(|_| 0.8) }],
        )
        .unwrap();
        let w = quantum_to_classical(&gen, &computational_basis()).unwrap().at(1.0);
        // |1⟩ → |0⟩ at rate γ, never the reverse
        assert_eq!(w[(0, 1)], 0.8);
        assert_eq!(w[(1, 0)], 0.0);
    }

    #[test]
    fn pure_dephasing_freezes_populations() {
        let gen = TimeLocalGenerator::dissipative(
            2,
            vec![DecayChannel { operator: linalg::sigma_z(), rate: Arc::new(|t: f64| t.cos()) }],
        )
        .unwrap();
        let w = quantum_to_classical(&gen, &computational_basis()).unwrap();
        for t in [0.0, 1.0, 3.0] {
            assert_eq!(w.at(t), DMatrix::zeros(2, 2));
        }
    }

    #[test]
    fn coherence_generating_generators_are_rejected() {
        let gen = TimeLocalGenerator::dissipative(
            2,
            vec![DecayChannel { operator: linalg::sigma_minus(), rate: Arc::new(|_| 1.0) }],
        )
        .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus_basis = CMatrix::from_row_slice(2, 2, &[linalg::c(s, 0.0), linalg::c(s, 0.0), linalg::c(s, 0.0), linalg::c(-s, 0.0)]);
        assert!(matches!(quantum_to_classical(&gen, &plus_basis), Err(Error::NotDiagonalPreserving { .. })));
    }
}
