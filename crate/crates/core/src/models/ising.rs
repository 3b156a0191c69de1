use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{DecoherenceFunction, Provenance, QubitModel};
use crate::channel::BlochAffine;
use crate::error::{Error, Result};

/// Largest chain handled by dense diagonalisation.
const DENSE_CAP: usize = 10;
/// Largest chain handled at all.
const SPIN_CAP: usize = 12;
const KRYLOV_DIM: usize = 30;
const KRYLOV_STEP_TOL: f64 = 1e-13;

/// Initial state of the environment chain.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvironmentState {
    /// Ground state of `H_E`.
    Ground,
    /// Explicit state vector in the `σ^z` product basis (bit `j` set means spin `j` down).
    Vector(Vec<Complex64>),
}

/// Probe qubit coupled to a periodic transverse-field Ising chain,
/// `H_E = −J Σ_j (σ^z_j σ^z_{j+1} + λ σ^x_j)`, `H_I = −Jδ |e⟩⟨e| Σ_j σ^x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinChainSpec {
    pub spins: usize,
    pub coupling: f64,
    pub field: f64,
    pub delta: f64,
    pub initial: EnvironmentState,
}

impl SpinChainSpec {
    pub fn new(spins: usize, coupling: f64, field: f64, delta: f64) -> Self {
        Self { spins, coupling, field, delta, initial: EnvironmentState::Ground }
    }

    /// Field felt by the chain when the probe is excited, `λ* = λ + δ`.
    pub fn shifted_field(&self) -> f64 {
        self.field + self.delta
    }

    fn validate(&self) -> Result<()> {
        if self.spins > SPIN_CAP {
            return Err(Error::DimensionCap { dim: 1 << self.spins.min(60), cap: 1 << SPIN_CAP });
        }
        if self.spins < 2 {
            return Err(Error::InvalidParameter("the chain needs at least two spins".into()));
        }
        if !self.coupling.is_finite() || !self.field.is_finite() || !self.delta.is_finite() {
            return Err(Error::InvalidParameter("chain parameters must be finite".into()));
        }
        if let EnvironmentState::Vector(v) = &self.initial {
            if v.len() != 1 << self.spins {
                return Err(Error::DimensionMismatch { expected: 1 << self.spins, found: v.len() });
            }
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::Unnormalized { total: norm });
            }
        }
        Ok(())
    }
}

/// Matrix-free Ising Hamiltonian `−J Σ (z_j z_{j+1} + h x_j)` on a periodic ring.
#[derive(Debug, Clone)]
struct IsingHamiltonian {
    spins: usize,
    coupling: f64,
    field: f64,
    diagonal: Vec<f64>,
}

impl IsingHamiltonian {
    fn new(spins: usize, coupling: f64, field: f64) -> Self {
        let dim = 1usize << spins;
        let diagonal = (0..dim)
            .map(|s| {
                let zz: f64 = (0..spins)
                    .map(|j| {
                        let a = (s >> j) & 1;
                        let b = (s >> ((j + 1) % spins)) & 1;
                        if a == b {
                            1.0
                        } else {
                            -1.0
                        }
                    })
                    .sum();
                -coupling * zz
            })
            .collect();
        Self { spins, coupling, field, diagonal }
    }

    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let hx = -self.coupling * self.field;
        for (s, o) in out.iter_mut().enumerate() {
            let mut acc = v[s] * self.diagonal[s];
            for j in 0..self.spins {
                acc += v[s ^ (1 << j)] * hx;
            }
            *o = acc;
        }
    }

    fn dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let hx = -self.coupling * self.field;
        let mut m = DMatrix::zeros(d, d);
        for s in 0..d {
            m[(s, s)] = self.diagonal[s];
            for j in 0..self.spins {
                m[(s ^ (1 << j), s)] += hx;
            }
        }
        m
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Lanczos recursion with full reorthogonalisation; returns the basis and the
/// tridiagonal coefficients `(α, β)`, stopping early on an invariant subspace.
fn lanczos(h: &IsingHamiltonian, start: &[Complex64], m: usize) -> (Vec<Vec<Complex64>>, Vec<f64>, Vec<f64>) {
    let n0 = norm(start);
    let mut basis = vec![start.iter().map(|z| z / n0).collect::<Vec<_>>()];
    let mut alpha = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);
    let mut w = vec![Complex64::new(0.0, 0.0); h.dim()];
    for j in 0..m {
        h.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let proj = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= proj * qi;
                }
            }
        }
        let b = norm(&w);
        beta.push(b);
        if b < 1e-12 || j + 1 == m {
            break;
        }
        basis.push(w.iter().map(|z| z / b).collect());
    }
    (basis, alpha, beta)
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    SymmetricEigen::new(t)
}

/// Ground state by Lanczos from the uniform vector, which overlaps the unique
/// nodeless ground state of a stoquastic Hamiltonian.
fn lanczos_ground(h: &IsingHamiltonian) -> Result<(f64, Vec<Complex64>)> {
    let d = h.dim();
    let start = vec![Complex64::new(1.0, 0.0); d];
    let (basis, alpha, beta) = lanczos(h, &start, 300.min(d));
    let eig = tridiagonal_eigen(&alpha, &beta);
    let k = (0..eig.eigenvalues.len()).min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
    let e0 = eig.eigenvalues[k];
    let mut psi = vec![Complex64::new(0.0, 0.0); d];
    for (q, &s) in basis.iter().zip(eig.eigenvectors.column(k).iter()) {
        for (p, qi) in psi.iter_mut().zip(q) {
            *p += qi * s;
        }
    }
    let n = norm(&psi);
    psi.iter_mut().for_each(|z| *z /= n);
    let mut hpsi = vec![Complex64::new(0.0, 0.0); d];
    h.apply(&psi, &mut hpsi);
    let residual: f64 = hpsi.iter().zip(&psi).map(|(a, b)| (a - b * e0).norm_sqr()).sum::<f64>().sqrt();
    if residual > 1e-8 {
        return Err(Error::Integration(format!("Lanczos ground state did not converge (residual {residual:.2e})")));
    }
    Ok((e0, psi))
}

/// One Krylov step `e^{−iHdt} v`; returns the result and the a-posteriori error estimate.
fn krylov_step(h: &IsingHamiltonian, v: &[Complex64], dt: f64) -> (Vec<Complex64>, f64) {
    let nv = norm(v);
    let (basis, alpha, beta) = lanczos(h, v, KRYLOV_DIM.min(h.dim()));
    let eig = tridiagonal_eigen(&alpha, &beta);
    let k = alpha.len();
    let s = &eig.eigenvectors;
    let y: Vec<Complex64> = (0..k)
        .map(|i| {
            (0..k)
                .map(|l| s[(i, l)] * s[(0, l)] * Complex64::from_polar(1.0, -eig.eigenvalues[l] * dt))
                .sum::<Complex64>()
                * nv
        })
        .collect();
    let err = beta[k - 1] * y[k - 1].norm();
    let mut out = vec![Complex64::new(0.0, 0.0); h.dim()];
    for (q, yi) in basis.iter().zip(&y) {
        for (o, qi) in out.iter_mut().zip(q) {
            *o += qi * yi;
        }
    }
    (out, err)
}

/// Evolves `v` under `H` to each requested (nondecreasing) time.
fn krylov_evolve(h: &IsingHamiltonian, v: &[Complex64], times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    let mut state = v.to_vec();
    let mut now = 0.0;
    let mut dt = 0.1 / h.coupling.abs().max(1e-12);
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < now {
            return Err(Error::InvalidParameter("times must be nondecreasing".into()));
        }
        while now < target {
            let step = dt.min(target - now);
            let (next, err) = krylov_step(h, &state, step);
            if err > KRYLOV_STEP_TOL && step > 1e-10 {
                dt = 0.5 * step;
                continue;
            }
            state = next;
            now += step;
            if err < 1e-3 * KRYLOV_STEP_TOL {
                dt = 1.5 * step.max(dt);
            }
        }
        let drift = (norm(&state) - 1.0).abs();
        if drift > 1e-9 {
            return Err(Error::Integration(format!("Krylov unitarity drift {drift:.2e} exceeds 1e-9")));
        }
        out.push(state.clone());
    }
    Ok(out)
}

#[derive(Debug)]
struct DenseSpectrum {
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

impl DenseSpectrum {
    fn new(h: &IsingHamiltonian) -> Self {
        let eig = SymmetricEigen::new(h.dense());
        Self { energies: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    fn coefficients(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.energies.len())
            .map(|k| self.vectors.column(k).iter().zip(v).map(|(a, b)| b * *a).sum())
            .collect()
    }

    fn ground(&self) -> (f64, Vec<Complex64>) {
        let k = self.energies.imin();
        (self.energies[k], self.vectors.column(k).iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    fn evolve(&self, coeffs: &[Complex64], t: f64) -> Vec<Complex64> {
        let phased: Vec<Complex64> = coeffs
            .iter()
            .zip(self.energies.iter())
            .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t))
            .collect();
        let d = self.energies.len();
        (0..d).map(|s| (0..d).map(|k| phased[k] * self.vectors[(s, k)]).sum()).collect()
    }
}

#[derive(Debug)]
enum Engine {
    /// Ground-state initial condition: `G = e^{iE₀t} Σ_k |c_k|² e^{−iε_k t}`.
    DenseGround { e0: f64, weights: Vec<f64>, energies: Vec<f64> },
    DenseGeneral { excited: DenseSpectrum, ground: DenseSpectrum, ce: Vec<Complex64>, cg: Vec<Complex64> },
    Krylov { e0: Option<f64>, phi: Vec<Complex64>, h_g: IsingHamiltonian, h_e: IsingHamiltonian },
}

/// Decoherence function of the Ising probe, `G(t) = ⟨Φ|e^{iH_g t} e^{−iH_e t}|Φ⟩`.
#[derive(Debug, Clone)]
pub struct IsingProbe {
    spec: SpinChainSpec,
    engine: Arc<Engine>,
}

impl IsingProbe {
    pub fn new(spec: SpinChainSpec) -> Result<Self> {
        spec.validate()?;
        let h_g = IsingHamiltonian::new(spec.spins, spec.coupling, spec.field);
        let h_e = IsingHamiltonian::new(spec.spins, spec.coupling, spec.shifted_field());
        let engine = if spec.spins <= DENSE_CAP {
            let excited = DenseSpectrum::new(&h_e);
            match &spec.initial {
                EnvironmentState::Ground => {
                    let ground = DenseSpectrum::new(&h_g);
                    let (e0, phi) = ground.ground();
                    let weights = excited.coefficients(&phi).iter().map(|c| c.norm_sqr()).collect();
                    Engine::DenseGround { e0, weights, energies: excited.energies.iter().copied().collect() }
                }
                EnvironmentState::Vector(phi) => {
                    let ground = DenseSpectrum::new(&h_g);
                    let ce = excited.coefficients(phi);
                    let cg = ground.coefficients(phi);
                    Engine::DenseGeneral { excited, ground, ce, cg }
                }
            }
        } else {
            match &spec.initial {
                EnvironmentState::Ground => {
                    let (e0, phi) = lanczos_ground(&h_g)?;
                    Engine::Krylov { e0: Some(e0), phi, h_g, h_e }
                }
                EnvironmentState::Vector(phi) => Engine::Krylov { e0: None, phi: phi.clone(), h_g, h_e },
            }
        };
        Ok(Self { spec, engine: Arc::new(engine) })
    }

    pub fn spec(&self) -> &SpinChainSpec {
        &self.spec
    }

    pub fn g(&self, t: f64) -> Result<Complex64> {
        Ok(self.trajectory(&[t])?[0])
    }

    /// `G` on a grid; for the Krylov engine the grid must be nondecreasing.
    pub fn trajectory(&self, times: &[f64]) -> Result<Vec<Complex64>> {
        match &*self.engine {
            Engine::DenseGround { e0, weights, energies } => Ok(times
                .iter()
                .map(|&t| {
                    let s: Complex64 = weights
                        .iter()
                        .zip(energies)
                        .map(|(w, &e)| Complex64::from_polar(*w, -e * t))
                        .sum();
                    s * Complex64::from_polar(1.0, e0 * t)
                })
                .collect()),
            Engine::DenseGeneral { excited, ground, ce, cg } => Ok(times
                .iter()
                .map(|&t| dot(&ground.evolve(cg, t), &excited.evolve(ce, t)))
                .collect()),
            Engine::Krylov { e0, phi, h_g, h_e } => {
                let pe = krylov_evolve(h_e, phi, times)?;
                match e0 {
                    Some(e0) => Ok(pe
                        .iter()
                        .zip(times)
                        .map(|(v, &t)| dot(phi, v) * Complex64::from_polar(1.0, e0 * t))
                        .collect()),
                    None => {
                        let pg = krylov_evolve(h_g, phi, times)?;
                        Ok(pg.iter().zip(&pe).map(|(a, b)| dot(a, b)).collect())
                    }
                }
            }
        }
    }

    /// Loschmidt echo `L(t) = |G(t)|²`.
    pub fn loschmidt_echo(&self, t: f64) -> Result<f64> {
        Ok(self.g(t)?.norm_sqr())
    }

    pub fn decoherence_function(&self) -> DecoherenceFunction {
        let pv = self.clone();
        let pt = self.clone();
        DecoherenceFunction::new(Provenance::LoschmidtEd, self.time_scale(), move |t| pv.g(t)).with_trajectory(
            move |times| {
                let g = pt.trajectory(times)?;
                // derivative from the same spectral data by central differences
                let h = 1e-6 * pt.time_scale();
                let shifted: Vec<f64> = times.iter().flat_map(|&t| [t + h, t + 2.0 * h]).collect();
                let gs = pt.trajectory_any_order(&shifted)?;
                Ok(g.iter()
                    .enumerate()
                    .map(|(i, &gi)| {
                        let (g1, g2) = (gs[2 * i], gs[2 * i + 1]);
                        (gi, (-3.0 * gi + 4.0 * g1 - g2) / (2.0 * h))
                    })
                    .collect())
            },
        )
    }

    fn trajectory_any_order(&self, times: &[f64]) -> Result<Vec<Complex64>> {
        match &*self.engine {
            Engine::Krylov { .. } => times.iter().map(|&t| self.g(t)).collect(),
            _ => self.trajectory(times),
        }
    }
}

/// `G(t)` for a single time.
pub fn ising_probe_g(spec: &SpinChainSpec, t: f64) -> Result<Complex64> {
    IsingProbe::new(spec.clone())?.g(t)
}

impl QubitModel for IsingProbe {
    fn name(&self) -> String {
        format!(
            "Ising probe (N = {}, λ = {}, δ = {})",
            self.spec.spins, self.spec.field, self.spec.delta
        )
    }

    fn affine(&self, t: f64) -> Result<BlochAffine> {
        Ok(BlochAffine::from_decoherence(self.g(t)?, 1.0))
    }

    fn affine_trajectory(&self, times: &[f64]) -> Result<Vec<BlochAffine>> {
        Ok(self.trajectory(times)?.into_iter().map(|g| BlochAffine::from_decoherence(g, 1.0)).collect())
    }

    fn decoherence(&self) -> Option<DecoherenceFunction> {
        Some(self.decoherence_function())
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.spec.coupling.abs().max(1e-12)
    }
}
