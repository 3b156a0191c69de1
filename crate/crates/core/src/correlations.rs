//! Closed system–environment dynamics for small composite systems: the split of
//! distinguishability into internal and external parts, the initial-correlation
//! witness and the local lower bound on discord-type correlations.

use crate::channel::QuantumMap;
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::state::DensityMatrix;

/// Largest composite dimension handled with dense algebra.
pub const DIM_CAP: usize = 4096;

/// Reduced eigenvalues closer than this are treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// `H = H_S ⊗ I_E + I_S ⊗ H_E + H_I` with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct TotalSystem {
    dim_s: usize,
    dim_e: usize,
    h_s: CMatrix,
    h_e: CMatrix,
    h_i: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    let dev = linalg::hermiticity_error(m);
    if dev > 1e-10 {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

impl TotalSystem {
    pub fn new(h_s: CMatrix, h_e: CMatrix, h_i: CMatrix) -> Result<Self> {
        let (dim_s, dim_e) = (h_s.nrows(), h_e.nrows());
        let dim = dim_s * dim_e;
        if dim > DIM_CAP {
            return Err(Error::DimensionCap { dim, cap: DIM_CAP });
        }
        linalg::check_square(&h_s, dim_s)?;
        linalg::check_square(&h_e, dim_e)?;
        linalg::check_square(&h_i, dim)?;
        for h in [&h_s, &h_e, &h_i] {
            check_hermitian(h)?;
        }
        let total = linalg::kron(&h_s, &linalg::identity(dim_e)) + linalg::kron(&linalg::identity(dim_s), &h_e) + &h_i;
        let (eigenvalues, eigenvectors) = linalg::eigh(&linalg::hermitian_part(&total));
        Ok(Self { dim_s, dim_e, h_s, h_e, h_i, eigenvalues, eigenvectors })
    }

    /// Qubit coupled through `σ_z ⊗ g(b + b†)` to one oscillator of frequency `omega`,
    /// truncated to `levels` Fock states.
    pub fn qubit_single_mode(omega: f64, g: f64, levels: usize) -> Result<Self> {
        let mut b = CMatrix::zeros(levels, levels);
        for n in 1..levels {
            b[(n - 1, n)] = linalg::c((n as f64).sqrt(), 0.0);
        }
        let number = b.adjoint() * &b;
        let x = &b + b.adjoint();
        Self::new(CMatrix::zeros(2, 2), number.scale(omega), linalg::kron(&linalg::sigma_z(), &x).scale(g))
    }

    /// Two qubits with level splittings `omega_s`, `omega_e` and exchange
    /// coupling `j (σ₊σ₋ + σ₋σ₊)`.
    pub fn exchange_qubits(omega_s: f64, omega_e: f64, j: f64) -> Result<Self> {
        let sz = linalg::sigma_z();
        let sm = linalg::sigma_minus();
        let sp = sm.adjoint();
        let hi = (linalg::kron(&sp, &sm) + linalg::kron(&sm, &sp)).scale(j);
        Self::new(sz.scale(-0.5 * omega_s), sz.scale(-0.5 * omega_e), hi)
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn dim(&self) -> usize {
        self.dim_s * self.dim_e
    }

    pub fn parts(&self) -> (&CMatrix, &CMatrix, &CMatrix) {
        (&self.h_s, &self.h_e, &self.h_i)
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        linalg::unitary_from_eigh(&self.eigenvalues, &self.eigenvectors, t)
    }

    fn check_state(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.dim() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TotalTrajectory {
    pub times: Vec<f64>,
    pub total: Vec<DensityMatrix>,
    pub system: Vec<DensityMatrix>,
    pub environment: Vec<DensityMatrix>,
    /// Largest `‖U†U − I‖_max` over the grid.
    pub unitarity_drift: f64,
}

/// `ρ_SE(t) = U(t) ρ_SE(0) U†(t)` and its marginals on the grid.
pub fn evolve_total(ts: &TotalSystem, rho0: &DensityMatrix, times: &[f64]) -> Result<TotalTrajectory> {
    ts.check_state(rho0)?;
    let (ds, de) = (ts.dim_s, ts.dim_e);
    let id = linalg::identity(ts.dim());
    let mut out = TotalTrajectory {
        times: times.to_vec(),
        total: Vec::with_capacity(times.len()),
        system: Vec::with_capacity(times.len()),
        environment: Vec::with_capacity(times.len()),
        unitarity_drift: 0.0,
    };
    for &t in times {
        let u = ts.unitary(t);
        out.unitarity_drift = out.unitarity_drift.max(linalg::max_abs_diff(&(u.adjoint() * &u), &id));
        let rho = linalg::hermitian_part(&(&u * rho0.matrix() * u.adjoint()));
        out.system.push(DensityMatrix::from_trusted(linalg::partial_trace_b(&rho, ds, de)));
        out.environment.push(DensityMatrix::from_trusted(linalg::partial_trace_a(&rho, ds, de)));
        out.total.push(DensityMatrix::from_trusted(rho));
    }
    if out.unitarity_drift >= 1e-10 {
        return Err(Error::Integration(format!("propagator drifted from unitarity by {:.3e}", out.unitarity_drift)));
    }
    Ok(out)
}

fn distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    0.5 * linalg::trace_norm_hermitian(&(a.matrix() - b.matrix()))
}

fn product_distance(total: &DensityMatrix, s: &DensityMatrix, e: &DensityMatrix) -> f64 {
    distance(total, &s.tensor(e))
}

/// Internal and external distinguishability with the terms bounding the latter.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoFlowRecord {
    pub times: Vec<f64>,
    /// `D(ρ_S¹(t), ρ_S²(t))`.
    pub internal: Vec<f64>,
    /// `D(ρ_SE¹, ρ_SE²) − D(ρ_S¹(t), ρ_S²(t))`.
    pub external: Vec<f64>,
    /// `D(ρ_SE¹(t), ρ_S¹(t) ⊗ ρ_E¹(t))`.
    pub correlations1: Vec<f64>,
    /// `D(ρ_SE²(t), ρ_S²(t) ⊗ ρ_E²(t))`.
    pub correlations2: Vec<f64>,
    /// `D(ρ_E¹(t), ρ_E²(t))`.
    pub environment: Vec<f64>,
}

impl InfoFlowRecord {
    /// `max_t |I_int(t) + I_ext(t) − I_int(0) − I_ext(0)|`.
    pub fn conservation_error(&self) -> f64 {
        let c0 = self.internal[0] + self.external[0];
        self.internal.iter().zip(&self.external).map(|(i, e)| (i + e - c0).abs()).fold(0.0, f64::max)
    }

    pub fn bound(&self, k: usize) -> f64 {
        self.correlations1[k] + self.correlations2[k] + self.environment[k]
    }

    /// First index where `I_ext` exceeds its bound by more than `slack`.
    pub fn bound_violation(&self, slack: f64) -> Option<usize> {
        (0..self.times.len()).find(|&k| self.external[k] > self.bound(k) + slack)
    }
}

/// Evolves both initial states and records the information split.
pub fn info_flow(
    ts: &TotalSystem,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    times: &[f64],
) -> Result<InfoFlowRecord> {
    let a = evolve_total(ts, rho1, times)?;
    let b = evolve_total(ts, rho2, times)?;
    let n = times.len();
    let mut rec = InfoFlowRecord {
        times: times.to_vec(),
        internal: Vec::with_capacity(n),
        external: Vec::with_capacity(n),
        correlations1: Vec::with_capacity(n),
        correlations2: Vec::with_capacity(n),
        environment: Vec::with_capacity(n),
    };
    for k in 0..n {
        let internal = distance(&a.system[k], &b.system[k]);
        rec.internal.push(internal);
        rec.external.push(distance(&a.total[k], &b.total[k]) - internal);
        rec.correlations1.push(product_distance(&a.total[k], &a.system[k], &a.environment[k]));
        rec.correlations2.push(product_distance(&b.total[k], &b.system[k], &b.environment[k]));
        rec.environment.push(distance(&a.environment[k], &b.environment[k]));
    }
    if let Some(k) = rec.bound_violation(1e-9) {
        return Err(Error::Integration(format!(
            "external information {:.6e} exceeds its bound {:.6e} at t = {}",
            rec.external[k],
            rec.bound(k),
            times[k]
        )));
    }
    Ok(rec)
}

/// `(Λ ⊗ I)ρ` for a map acting on the first factor.
pub fn apply_local(map: &QuantumMap, rho: &DensityMatrix, dim_s: usize) -> Result<DensityMatrix> {
    if map.dim_in() != dim_s || map.dim_out() != dim_s || rho.dim() % dim_s != 0 {
        return Err(Error::DimensionMismatch { expected: dim_s, found: map.dim_in() });
    }
    let de = rho.dim() / dim_s;
    let m = rho.matrix();
    let mut out = CMatrix::zeros(rho.dim(), rho.dim());
    for k in 0..de {
        for l in 0..de {
            let block = CMatrix::from_fn(dim_s, dim_s, |i, j| m[(i * de + k, j * de + l)]);
            let img = map.apply_operator(&block)?;
            for i in 0..dim_s {
                for j in 0..dim_s {
                    out[(i * de + k, j * de + l)] = img[(i, j)];
                }
            }
        }
    }
    Ok(DensityMatrix::from_trusted(linalg::hermitian_part(&out)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessResult {
    pub times: Vec<f64>,
    /// `D(ρ_S¹(t), ρ_S²(t)) − D(ρ_S¹(0), ρ_S²(0))`.
    pub excursion: Vec<f64>,
    pub max_excursion: f64,
    /// `D(ρ_S¹(0), ρ_S²(0))`.
    pub initial: f64,
    /// The excursion exceeds the witness threshold somewhere on the grid.
    pub correlated: bool,
}

fn witness_from(ts: &TotalSystem, rho1: &DensityMatrix, rho2: &DensityMatrix, times: &[f64]) -> Result<WitnessResult> {
    let a = evolve_total(ts, rho1, times)?;
    let b = evolve_total(ts, rho2, times)?;
    let d0 = distance(&a.system[0], &b.system[0]);
    let excursion: Vec<f64> = a.system.iter().zip(&b.system).map(|(x, y)| distance(x, y) - d0).collect();
    let max_excursion = excursion.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(WitnessResult {
        times: times.to_vec(),
        excursion,
        max_excursion,
        initial: d0,
        correlated: max_excursion > Tolerances::default().witness,
    })
}

/// Compares `ρ_SE¹` with `(Λ ⊗ I)ρ_SE¹`; a rise of the reduced trace distance
/// above its initial value witnesses initial system–environment correlations.
/// The grid should start at `t = 0`.
pub fn initial_correlation_witness(
    ts: &TotalSystem,
    rho1: &DensityMatrix,
    local: &QuantumMap,
    times: &[f64],
) -> Result<WitnessResult> {
    ts.check_state(rho1)?;
    let rho2 = apply_local(local, rho1, ts.dim_s)?;
    witness_from(ts, rho1, &rho2, times)
}

/// Complete dephasing in the orthonormal columns of `basis`.
pub fn dephasing_map(basis: &CMatrix) -> Result<QuantumMap> {
    let ops = (0..basis.ncols())
        .map(|k| {
            let v = basis.column(k).into_owned();
            &v * v.adjoint()
        })
        .collect();
    QuantumMap::from_kraus(ops)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscordBound {
    /// `max_t D(ρ_S¹(t), ρ_S²(t))`.
    pub bound: f64,
    /// `C(ρ_SE¹(0)) = D(ρ_SE¹(0), ρ_SE²(0))`.
    pub correlations: f64,
    /// Columns of the dephasing basis on `S`.
    pub basis: CMatrix,
    pub witness: WitnessResult,
}

/// Lower bound on the correlations destroyed by dephasing `S` in the eigenbasis of
/// its reduced state. `basis` must be given when that eigenbasis is degenerate.
pub fn discord_lower_bound(
    ts: &TotalSystem,
    rho1: &DensityMatrix,
    times: &[f64],
    basis: Option<&CMatrix>,
) -> Result<DiscordBound> {
    ts.check_state(rho1)?;
    let basis = match basis {
        Some(b) => {
            linalg::check_square(b, ts.dim_s)?;
            b.clone()
        }
        None => {
            let reduced = linalg::partial_trace_b(rho1.matrix(), ts.dim_s, ts.dim_e);
            let (vals, vecs) = linalg::eigh(&linalg::hermitian_part(&reduced));
            let gap = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            if gap < DEGENERACY_GAP {
                return Err(Error::DegenerateBasis { gap });
            }
            vecs
        }
    };
    let rho2 = apply_local(&dephasing_map(&basis)?, rho1, ts.dim_s)?;
    let correlations = distance(rho1, &rho2);
    let witness = witness_from(ts, rho1, &rho2, times)?;
    let bound = witness.max_excursion + witness.initial;
    if bound > correlations + 1e-9 {
        return Err(Error::Integration(format!("discord bound {bound:.6e} exceeds C = {correlations:.6e}")));
    }
    Ok(DiscordBound { bound, correlations, basis, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{random_density_matrix, random_unitary_matrix};
    use crate::linalg::c;
    use crate::state::trace_distance;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
    }

    fn pure(amps: &[(f64, f64)]) -> DensityMatrix {
        let v = crate::linalg::CVector::from_iterator(amps.len(), amps.iter().map(|&(r, i)| c(r, i)));
        DensityMatrix::pure(&v.unscale(v.norm())).unwrap()
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let r = TotalSystem::new(linalg::identity(2), linalg::identity(2049), CMatrix::zeros(4098, 4098));
        assert!(matches!(r, Err(Error::DimensionCap { dim: 4098, cap: DIM_CAP })));
    }

    #[test]
    fn uncoupled_system_evolves_under_its_own_hamiltonian() {
        let h_s = linalg::sigma_x().scale(0.7);
        let ts = TotalSystem::new(h_s.clone(), linalg::sigma_z(), CMatrix::zeros(4, 4)).unwrap();
        let rs = pure(&[(1.0, 0.0), (0.0, 0.0)]);
        let re = DensityMatrix::maximally_mixed(2);
        let traj = evolve_total(&ts, &rs.tensor(&re), &[0.0, 1.3]).unwrap();
        let (vals, vecs) = linalg::eigh(&h_s);
        let u = linalg::unitary_from_eigh(&vals, &vecs, 1.3);
        let expected = &u * rs.matrix() * u.adjoint();
        assert!(linalg::max_abs_diff(traj.system[1].matrix(), &expected) < 1e-12);
        assert!(linalg::max_abs_diff(traj.environment[1].matrix(), re.matrix()) < 1e-12);
    }

    #[test]
    fn product_states_with_common_environment_carry_no_external_information() {
        let ts = TotalSystem::exchange_qubits(1.0, 1.2, 0.4).unwrap();
        let re = pure(&[(0.6, 0.0), (0.8, 0.0)]);
        let a = pure(&[(1.0, 0.0), (0.0, 0.0)]).tensor(&re);
        let b = pure(&[(0.0, 0.0), (1.0, 0.0)]).tensor(&re);
        let rec = info_flow(&ts, &a, &b, &grid(10.0, 101)).unwrap();
        assert!(rec.external[0].abs() < 1e-12);
        assert!(rec.conservation_error() < 1e-9);
        // information returns to S: I_int(t) − I_int(0) ≤ I_ext(0) = 0
        assert!(rec.internal.iter().all(|&i| i <= rec.internal[0] + 1e-9));
    }

    #[test]
    fn identical_states_give_zero_everywhere() {
        let ts = TotalSystem::exchange_qubits(1.0, 1.0, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density_matrix(4, 4, &mut rng);
        let rec = info_flow(&ts, &rho, &rho, &grid(3.0, 11)).unwrap();
        for k in 0..11 {
            assert!(rec.internal[k] < 1e-12 && rec.external[k].abs() < 1e-12 && rec.environment[k] < 1e-12);
        }
    }

    #[test]
    fn correlated_state_has_positive_bound_terms() {
        // ½(|00⟩⟨00| + |11⟩⟨11|) against its marginal product I/4
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(0.5, 0.0);
        m[(3, 3)] = c(0.5, 0.0);
        let rho1 = DensityMatrix::new(m).unwrap();
        let rho2 = DensityMatrix::maximally_mixed(4);
        let ts = TotalSystem::exchange_qubits(1.0, 1.0, 0.0).unwrap();
        let rec = info_flow(&ts, &rho1, &rho2, &[0.0]).unwrap();
        // eigenvalues of ρ₁ − I/4 are ±¼ twice: trace norm 1
        assert_relative_eq!(rec.correlations1[0], 0.5, epsilon = 1e-12);
        assert!(rec.correlations2[0] < 1e-12);
    }

    #[test]
    fn identity_map_never_witnesses() {
        let ts = TotalSystem::exchange_qubits(1.0, 0.8, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density_matrix(4, 2, &mut rng);
        let w = initial_correlation_witness(&ts, &rho, &QuantumMap::identity(2), &grid(5.0, 51)).unwrap();
        assert!(w.excursion.iter().all(|e| e.abs() < 1e-12));
        assert!(!w.correlated);
    }

    #[test]
    fn product_states_never_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ts = TotalSystem::exchange_qubits(1.0, 0.7, 0.9).unwrap();
        let rs = random_density_matrix(2, 2, &mut rng);
        let re = random_density_matrix(2, 1, &mut rng);
        let u = QuantumMap::unitary(random_unitary_matrix(2, &mut rng)).unwrap();
        let w = initial_correlation_witness(&ts, &rs.tensor(&re), &u, &grid(8.0, 81)).unwrap();
        assert!(!w.correlated, "{}", w.max_excursion);
    }

    /// `½(|01⟩⟨01| + |10⟩⟨10|) + c(|01⟩⟨10| + h.c.)`: maximally mixed marginals,
    /// correlations held in the single-excitation coherence.
    fn coherent_exchange_state(c: f64) -> DensityMatrix {
        let mut m = CMatrix::zeros(4, 4);
        m[(1, 1)] = linalg::c(0.5, 0.0);
        m[(2, 2)] = linalg::c(0.5, 0.0);
        m[(1, 2)] = linalg::c(c, 0.0);
        m[(2, 1)] = linalg::c(c, 0.0);
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn correlated_state_under_flip_is_witnessed() {
        // the flip moves the state into the stationary |00⟩, |11⟩ sector, while
        // detuned exchange turns the coherence of the original into polarization
        let rho = coherent_exchange_state(0.45);
        let flip = QuantumMap::unitary(linalg::sigma_x()).unwrap();
        let best = [0.25, 0.5, 1.0]
            .iter()
            .map(|&j| {
                let ts = TotalSystem::exchange_qubits(1.0, 2.0, j).unwrap();
                initial_correlation_witness(&ts, &rho, &flip, &grid(10.0, 501)).unwrap()
            })
            .max_by(|a, b| a.max_excursion.total_cmp(&b.max_excursion))
            .unwrap();
        assert!(best.correlated);
        assert!(best.max_excursion > 0.05);
    }

    #[test]
    fn classical_quantum_state_has_no_discord_bound() {
        // 0.7|0⟩⟨0| ⊗ |+⟩⟨+| + 0.3|1⟩⟨1| ⊗ |0⟩⟨0|; unequal weights keep the marginal nondegenerate
        let plus = pure(&[(1.0, 0.0), (1.0, 0.0)]);
        let zero = pure(&[(1.0, 0.0), (0.0, 0.0)]);
        let p0 = DensityMatrix::basis(2, 0).tensor(&plus).into_matrix().scale(0.7);
        let p1 = DensityMatrix::basis(2, 1).tensor(&zero).into_matrix().scale(0.3);
        let rho = DensityMatrix::new(p0 + p1).unwrap();
        let ts = TotalSystem::exchange_qubits(1.0, 1.3, 0.6).unwrap();
        let res = discord_lower_bound(&ts, &rho, &grid(6.0, 61), None).unwrap();
        assert!(res.correlations < 1e-12);
        assert!(res.bound < 1e-12);
    }

    #[test]
    fn perturbed_bell_state_respects_bound() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = pure(&[(0.0, 0.0), (s, 0.0), (s, 0.0), (0.0, 0.0)]);
        let eps = 0.05;
        let mix = DensityMatrix::basis(2, 0).tensor(&DensityMatrix::maximally_mixed(2));
        let rho = DensityMatrix::new(bell.matrix().scale(1.0 - eps) + mix.matrix().scale(eps)).unwrap();
        let ts = TotalSystem::exchange_qubits(1.0, 2.0, 0.5).unwrap();
        let res = discord_lower_bound(&ts, &rho, &grid(6.0, 121), None).unwrap();
        // the marginal is diagonal, so the eigenbasis is the computational one
        let dephased = apply_local(&dephasing_map(&linalg::identity(2)).unwrap(), &rho, 2).unwrap();
        assert_relative_eq!(res.correlations, trace_distance(&rho, &dephased).unwrap(), epsilon = 1e-12);
        assert!(res.correlations > 0.45 && res.correlations < 0.5);
        assert!(res.bound <= res.correlations + 1e-9);
        assert!(res.bound > 0.0);
    }

    #[test]
    fn degenerate_marginal_needs_explicit_basis() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = pure(&[(s, 0.0), (0.0, 0.0), (0.0, 0.0), (s, 0.0)]);
        let ts = TotalSystem::exchange_qubits(1.0, 1.0, 0.5).unwrap();
        let times = grid(2.0, 21);
        assert!(matches!(discord_lower_bound(&ts, &bell, &times, None), Err(Error::DegenerateBasis { .. })));
        let res = discord_lower_bound(&ts, &bell, &times, Some(&linalg::identity(2))).unwrap();
        assert_relative_eq!(res.correlations, 0.5, epsilon = 1e-12);
    }
}
