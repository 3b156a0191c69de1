//! Linear maps on operators: Kraus and Choi representations, composition,
//! intermediate maps and positivity tests.
//!
//! Choi convention: `C = Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`, so the entry
//! `(i·d_out + a, j·d_out + b)` equals `⟨a|Φ(|i⟩⟨j|)|b⟩`. The normalised Choi
//! matrix divides by `d_in`. Superoperators act on column-stacked vectors.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};
use crate::state::DensityMatrix;

#[derive(Debug, Clone)]
pub struct QuantumMap {
    dim_in: usize,
    dim_out: usize,
    kraus: Option<Vec<CMatrix>>,
    choi: Option<CMatrix>,
    trace_preserving: bool,
}

impl QuantumMap {
    pub fn from_kraus(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or(Error::MissingRepresentation)?;
        let (dim_out, dim_in) = first.shape();
        if ops.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::InvalidMap("Kraus operators have inconsistent shapes".into()));
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &ops {
            sum += k.adjoint() * k;
        }
        let tp = linalg::max_abs_diff(&sum, &linalg::identity(dim_in)) <= Tolerances::default().kraus;
        Ok(Self { dim_in, dim_out, kraus: Some(ops), choi: None, trace_preserving: tp })
    }

    pub fn from_choi(choi: CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if choi.shape() != (dim_in * dim_out, dim_in * dim_out) {
            return Err(Error::DimensionMismatch { expected: dim_in * dim_out, found: choi.nrows() });
        }
        let tp = choi_is_trace_preserving(&choi, dim_in, dim_out, Tolerances::default().kraus);
        Ok(Self { dim_in, dim_out, kraus: None, choi: Some(choi), trace_preserving: tp })
    }

    /// Stores both representations after checking that they agree.
    pub fn from_kraus_and_choi(ops: Vec<CMatrix>, choi: CMatrix) -> Result<Self> {
        let mut map = Self::from_kraus(ops)?;
        let built = map.choi();
        if built.shape() != choi.shape() {
            return Err(Error::DimensionMismatch { expected: built.nrows(), found: choi.nrows() });
        }
        let diff = linalg::max_abs_diff(&built, &choi);
        if diff > Tolerances::default().kraus {
            return Err(Error::InvalidMap(format!("Kraus and Choi disagree by {diff:.3e}")));
        }
        map.choi = Some(choi);
        Ok(map)
    }

    pub fn from_superoperator(s: &CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        if s.shape() != (dim_out * dim_out, dim_in * dim_in) {
            return Err(Error::DimensionMismatch { expected: dim_out * dim_out, found: s.nrows() });
        }
        let mut choi = CMatrix::zeros(dim_in * dim_out, dim_in * dim_out);
        for i in 0..dim_in {
            for j in 0..dim_in {
                for a in 0..dim_out {
                    for b in 0..dim_out {
                        choi[(i * dim_out + a, j * dim_out + b)] =
                            s[(a + dim_out * b, i + dim_in * j)];
                    }
                }
            }
        }
        Self::from_choi(choi, dim_in, dim_out)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(vec![linalg::identity(d)]).expect("identity is a valid map")
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::from_kraus(vec![u])
    }

    /// The transpose map `X ↦ Xᵀ`, which is positive but not completely positive.
    pub fn transpose(d: usize) -> Self {
        let mut choi = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                // Φ(|i⟩⟨j|) = |j⟩⟨i|
                choi[(i * d + j, j * d + i)] = ONE;
            }
        }
        Self::from_choi(choi, d, d).expect("shape is consistent")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    pub fn stored_choi(&self) -> Option<&CMatrix> {
        self.choi.as_ref()
    }

    /// Unnormalised Choi matrix, built from the Kraus set if none is stored.
    pub fn choi(&self) -> CMatrix {
        if let Some(c) = &self.choi {
            return c.clone();
        }
        let n = self.dim_in * self.dim_out;
        let mut choi = CMatrix::zeros(n, n);
        for k in self.kraus.as_deref().unwrap_or(&[]) {
            let mut w = CVector::zeros(n);
            for i in 0..self.dim_in {
                for a in 0..self.dim_out {
                    w[i * self.dim_out + a] = k[(a, i)];
                }
            }
            choi += &w * w.adjoint();
        }
        choi
    }

    pub fn normalized_choi(&self) -> CMatrix {
        self.choi().unscale(self.dim_in as f64)
    }

    pub fn superoperator(&self) -> CMatrix {
        let (di, dout) = (self.dim_in, self.dim_out);
        if let Some(ops) = &self.kraus {
            let mut s = CMatrix::zeros(dout * dout, di * di);
            for k in ops {
                s += k.conjugate().kronecker(k);
            }
            return s;
        }
        let choi = self.choi();
        let mut s = CMatrix::zeros(dout * dout, di * di);
        for i in 0..di {
            for j in 0..di {
                for a in 0..dout {
                    for b in 0..dout {
                        s[(a + dout * b, i + di * j)] = choi[(i * dout + a, j * dout + b)];
                    }
                }
            }
        }
        s
    }

    /// Applies the map to an arbitrary operator.
    pub fn apply_operator(&self, x: &CMatrix) -> Result<CMatrix> {
        linalg::check_square(x, self.dim_in)?;
        if let Some(ops) = &self.kraus {
            let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
            for k in ops {
                out += k * x * k.adjoint();
            }
            return Ok(out);
        }
        let choi = self.choi.as_ref().ok_or(Error::MissingRepresentation)?;
        let d = self.dim_out;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..self.dim_in {
            for j in 0..self.dim_in {
                let xij = x[(i, j)];
                if xij == ZERO {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        out[(a, b)] += xij * choi[(i * d + a, j * d + b)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Same as [`apply_operator`](Self::apply_operator) but forces the Choi route.
    pub fn apply_via_choi(&self, x: &CMatrix) -> Result<CMatrix> {
        let as_choi = Self { kraus: None, choi: Some(self.choi()), ..self.clone() };
        as_choi.apply_operator(x)
    }
}

fn choi_is_trace_preserving(choi: &CMatrix, dim_in: usize, dim_out: usize, tol: f64) -> bool {
    // Tr_out C = I_in
    for i in 0..dim_in {
        for j in 0..dim_in {
            let mut acc = ZERO;
            for a in 0..dim_out {
                acc += choi[(i * dim_out + a, j * dim_out + a)];
            }
            let target = if i == j { ONE } else { ZERO };
            if (acc - target).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// `ρ ↦ Φ(ρ)`, returning a validated state.
pub fn apply_map(m: &QuantumMap, r: &DensityMatrix) -> Result<DensityMatrix> {
    let out = m.apply_operator(r.matrix())?;
    DensityMatrix::with_tolerances(
        out,
        &Tolerances { hermitian: 1e-10, trace: 1e-10, ..Tolerances::default() },
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpReport {
    pub completely_positive: bool,
    pub min_choi_eigenvalue: f64,
}

/// Choi criterion on the normalised Choi matrix.
pub fn is_completely_positive(m: &QuantumMap, tol: f64) -> CpReport {
    let choi = m.normalized_choi();
    let herm = linalg::hermiticity_error(&choi);
    let min = linalg::eigvalsh(&choi)[0];
    CpReport { completely_positive: herm <= tol.max(1e-12) && min >= -tol, min_choi_eigenvalue: min }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    /// True for qubit maps, where checking all pure inputs is exhaustive.
    pub exhaustive: bool,
    pub samples: usize,
    pub min_output_eigenvalue: f64,
}

const FIBONACCI_POINTS: usize = 1024;

/// Deterministic quasi-uniform points on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * k as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

pub fn random_pure_state(d: usize, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    let n = v.norm();
    v.unscale(n)
}

fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Random state `G G† / Tr(G G†)` from a `d × rank` Ginibre matrix.
pub fn random_density_matrix(d: usize, rank: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(linalg::hermitian_part(&m.unscale(tr))).expect("Ginibre states are valid")
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary_matrix(d: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let phase = r[(k, k)] / r[(k, k)].norm();
        for i in 0..d {
            q[(i, k)] *= phase;
        }
    }
    q
}

/// Random CPTP map on `d` dimensions with `n_kraus` Kraus operators cut from a
/// random isometry.
pub fn random_channel(d: usize, n_kraus: usize, rng: &mut ChaCha8Rng) -> QuantumMap {
    let n = n_kraus.max(1);
    let v = ginibre(d * n, d, rng).qr().q();
    let ops = (0..n).map(|k| v.rows(k * d, d).into_owned()).collect();
    QuantumMap::from_kraus(ops).expect("isometry blocks are a Kraus family")
}

fn min_output_eigenvalue(m: &QuantumMap, psi: &CVector) -> Result<f64> {
    let out = m.apply_operator(&linalg::projector(psi))?;
    Ok(linalg::eigvalsh(&out)[0])
}

fn qubit_from_direction(theta: f64, phi: f64) -> CVector {
    CVector::from_vec(vec![
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ])
}

/// Positivity test over pure inputs: a Fibonacci grid plus local refinement for
/// qubits, and `n_samples` random pure states in any dimension.
pub fn is_positive_map(m: &QuantumMap, n_samples: usize, tol: f64, seed: u64) -> Result<PositivityReport> {
    let mut worst = f64::INFINITY;
    let mut samples = 0;
    let exhaustive = m.dim_in() == 2;
    if exhaustive {
        let mut best_dir = (0.0, 0.0);
        for p in fibonacci_sphere(FIBONACCI_POINTS) {
            let theta = p[2].clamp(-1.0, 1.0).acos();
            let phi = p[1].atan2(p[0]);
            let v = min_output_eigenvalue(m, &qubit_from_direction(theta, phi))?;
            samples += 1;
            if v < worst {
                worst = v;
                best_dir = (theta, phi);
            }
        }
        // pattern search around the worst grid point
        let (mut theta, mut phi) = best_dir;
        let mut step = 0.1;
        while step > 1e-7 {
            let mut improved = false;
            for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let v = min_output_eigenvalue(m, &qubit_from_direction(theta + dt, phi + dp))?;
                samples += 1;
                if v < worst {
                    worst = v;
                    theta += dt;
                    phi += dp;
                    improved = true;
                    break;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_samples {
        let psi = random_pure_state(m.dim_in(), &mut rng);
        worst = worst.min(min_output_eigenvalue(m, &psi)?);
        samples += 1;
    }
    Ok(PositivityReport { positive: worst >= -tol, exhaustive, samples, min_output_eigenvalue: worst })
}

/// `m2 ∘ m1`.
pub fn compose(m2: &QuantumMap, m1: &QuantumMap) -> Result<QuantumMap> {
    if m2.dim_in() != m1.dim_out() {
        return Err(Error::DimensionMismatch { expected: m1.dim_out(), found: m2.dim_in() });
    }
    if let (Some(k2), Some(k1)) = (m2.kraus(), m1.kraus()) {
        let ops = k2.iter().flat_map(|a| k1.iter().map(move |b| a * b)).collect();
        return QuantumMap::from_kraus(ops);
    }
    let s = m2.superoperator() * m1.superoperator();
    QuantumMap::from_superoperator(&s, m1.dim_in(), m2.dim_out())
}

/// `Φ_{t,s} = Φ_t ∘ Φ_s⁻¹`, stored through its Choi matrix.
pub fn intermediate_map(phi_t: &QuantumMap, phi_s: &QuantumMap) -> Result<QuantumMap> {
    intermediate_map_with(phi_t, phi_s, Tolerances::default().condition_cap)
}

pub fn intermediate_map_with(phi_t: &QuantumMap, phi_s: &QuantumMap, condition_cap: f64) -> Result<QuantumMap> {
    if phi_s.dim_in() != phi_s.dim_out() || phi_t.dim_in() != phi_s.dim_in() {
        return Err(Error::DimensionMismatch { expected: phi_s.dim_in(), found: phi_t.dim_in() });
    }
    let ss = phi_s.superoperator();
    let svd = ss.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 || smax / smin > condition_cap {
        return Err(Error::NonInvertible { smallest_singular_value: smin });
    }
    let inv = svd
        .pseudo_inverse(smin * 0.5)
        .map_err(|e| Error::InvalidMap(e.to_string()))?;
    let s = phi_t.superoperator() * inv;
    QuantumMap::from_superoperator(&s, phi_s.dim_out(), phi_t.dim_out())
}

/// Kraus operators from the spectral decomposition of the Choi matrix.
pub fn kraus_from_choi(choi: &CMatrix, dim_in: usize, dim_out: usize, tol: f64) -> Result<Vec<CMatrix>> {
    let (vals, vecs) = linalg::eigh(choi);
    if vals[0] < -tol {
        return Err(Error::InvalidMap(format!("Choi matrix has negative eigenvalue {:.3e}", vals[0])));
    }
    let mut ops = Vec::new();
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= tol {
            continue;
        }
        let scale = lam.sqrt();
        let mut op = CMatrix::zeros(dim_out, dim_in);
        for i in 0..dim_in {
            for a in 0..dim_out {
                op[(a, i)] = vecs[(i * dim_out + a, k)] * scale;
            }
        }
        ops.push(op);
    }
    Ok(ops)
}

/// Trace-preserving qubit map in Bloch form, `r ↦ M r + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAffine {
    pub m: Matrix3<f64>,
    pub c: Vector3<f64>,
}

impl BlochAffine {
    pub fn identity() -> Self {
        Self { m: Matrix3::identity(), c: Vector3::zeros() }
    }

    pub fn diagonal(factors: [f64; 3]) -> Self {
        Self { m: Matrix3::from_diagonal(&Vector3::from(factors)), c: Vector3::zeros() }
    }

    /// Coherence multiplied by the complex `g`, excited population by `pop`, the
    /// remainder relaxing into the ground state `|0⟩`.
    pub fn from_decoherence(g: Complex64, pop: f64) -> Self {
        let m = Matrix3::new(g.re, -g.im, 0.0, g.im, g.re, 0.0, 0.0, 0.0, pop);
        Self { m, c: Vector3::new(0.0, 0.0, 1.0 - pop) }
    }

    pub fn apply(&self, r: &Vector3<f64>) -> Vector3<f64> {
        self.m * r + self.c
    }

    pub fn compose(&self, first: &BlochAffine) -> BlochAffine {
        BlochAffine { m: self.m * first.m, c: self.m * first.c + self.c }
    }

    pub fn inverse(&self, condition_cap: f64) -> Result<BlochAffine> {
        let sv = self.m.singular_values();
        let (smin, smax) = (sv.min(), sv.max());
        if smin <= 0.0 || smax / smin > condition_cap {
            return Err(Error::NonInvertible { smallest_singular_value: smin });
        }
        let inv = self.m.try_inverse().ok_or(Error::NonInvertible { smallest_singular_value: smin })?;
        Ok(BlochAffine { m: inv, c: -(inv * self.c) })
    }

    pub fn determinant(&self) -> f64 {
        self.m.determinant()
    }

    /// Image of a general Hermitian operator `(τ I + v·σ)/2`, returned as `(τ, v')`.
    pub fn apply_hermitian(&self, tau: f64, v: &Vector3<f64>) -> (f64, Vector3<f64>) {
        (tau, self.m * v + self.c * tau)
    }

    pub fn from_map(map: &QuantumMap) -> Result<Self> {
        if map.dim_in() != 2 || map.dim_out() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: map.dim_in() });
        }
        let p = linalg::paulis();
        let img_id = map.apply_operator(&linalg::identity(2))?;
        let c = Vector3::from(linalg::bloch_components(&img_id).map(|x| 0.5 * x));
        let mut m = Matrix3::zeros();
        for j in 0..3 {
            let img = map.apply_operator(&p[j])?;
            let col = linalg::bloch_components(&img);
            for i in 0..3 {
                m[(i, j)] = 0.5 * col[i];
            }
        }
        Ok(Self { m, c })
    }

    pub fn to_map(&self) -> QuantumMap {
        // images of |i⟩⟨j| through the Pauli expansion
        let img = |tau: Complex64, v: [Complex64; 3]| -> CMatrix {
            // Φ((τ I + v·σ)/2) = (τ (I + c·σ) + (M v)·σ)/2
            let p = linalg::paulis();
            let mut out = linalg::identity(2) * tau;
            for i in 0..3 {
                let mut coef = tau * self.c[i];
                for j in 0..3 {
                    coef += v[j] * self.m[(i, j)];
                }
                out += &p[i] * coef;
            }
            out * Complex64::new(0.5, 0.0)
        };
        let i_ = linalg::I;
        let blocks = [
            [img(ONE, [ZERO, ZERO, ONE]), img(ZERO, [ONE, i_, ZERO])],
            [img(ZERO, [ONE, -i_, ZERO]), img(ONE, [ZERO, ZERO, -ONE])],
        ];
        let mut choi = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        choi[(i * 2 + a, j * 2 + b)] = blocks[i][j][(a, b)];
                    }
                }
            }
        }
        QuantumMap::from_choi(choi, 2, 2).expect("qubit Choi has consistent shape")
    }

    /// Kraus form when the map is completely positive.
    pub fn to_kraus_map(&self, tol: f64) -> Result<QuantumMap> {
        let choi = self.to_map().choi();
        let ops = kraus_from_choi(&choi, 2, 2, tol)?;
        QuantumMap::from_kraus(ops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::trace_distance;
    use approx::assert_abs_diff_eq;

    fn dephasing_kraus(p: f64) -> QuantumMap {
        QuantumMap::from_kraus(vec![
            linalg::identity(2).scale(p.sqrt()),
            linalg::sigma_z().scale((1.0 - p).sqrt()),
        ])
        .unwrap()
    }

    fn coherent_state() -> DensityMatrix {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = linalg::c(0.3, 0.0);
        m[(1, 1)] = linalg::c(0.7, 0.0);
        m[(1, 0)] = linalg::c(0.2, 0.25);
        m[(0, 1)] = linalg::c(0.2, -0.25);
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn identity_and_trivial_dephasing_leave_states_unchanged() {
        let rho = coherent_state();
        let out = apply_map(&QuantumMap::identity(2), &rho).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
        let out = apply_map(&dephasing_kraus(1.0), &rho).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn full_dephasing_kills_coherence() {
        let rho = coherent_state();
        let out = apply_map(&dephasing_kraus(0.5), &rho).unwrap();
        assert_abs_diff_eq!(out.element(1, 0).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.population(0), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(out.population(1), 0.7, epsilon = 1e-15);
    }

    #[test]
    fn missing_representation_is_an_error() {
        let m = QuantumMap { dim_in: 2, dim_out: 2, kraus: None, choi: None, trace_preserving: true };
        assert!(matches!(
            m.apply_operator(&linalg::identity(2)),
            Err(Error::MissingRepresentation)
        ));
        assert!(QuantumMap::from_kraus(vec![]).is_err());
    }

    #[test]
    fn transpose_is_positive_but_not_cp() {
        let t = QuantumMap::transpose(2);
        let cp = is_completely_positive(&t, 1e-10);
        assert!(!cp.completely_positive);
        assert_abs_diff_eq!(cp.min_choi_eigenvalue, -0.5, epsilon = 1e-12);
        let pos = is_positive_map(&t, 50, 1e-10, 1).unwrap();
        assert!(pos.positive && pos.exhaustive);
    }

    #[test]
    fn unitary_conjugation_is_cp() {
        let u = (linalg::sigma_x() + linalg::sigma_z()).unscale(2f64.sqrt());
        let cp = is_completely_positive(&QuantumMap::unitary(u).unwrap(), 1e-10);
        assert!(cp.completely_positive);
    }

    #[test]
    fn over_stretched_bloch_map_is_not_positive() {
        let m = BlochAffine::diagonal([1.2, 0.5, 0.5]).to_map();
        let pos = is_positive_map(&m, 20, 1e-10, 3).unwrap();
        assert!(!pos.positive);
        // pure x state maps to Bloch length 1.2: eigenvalue (1 - 1.2)/2
        assert_abs_diff_eq!(pos.min_output_eigenvalue, -0.1, epsilon = 1e-9);
    }

    #[test]
    fn higher_dimensional_positivity_is_sampled() {
        let pos = is_positive_map(&QuantumMap::identity(3), 40, 1e-10, 5).unwrap();
        assert!(pos.positive);
        assert!(!pos.exhaustive);
        assert_eq!(pos.samples, 40);
    }

    #[test]
    fn kraus_and_choi_agreement_is_checked() {
        let k = dephasing_kraus(0.3);
        let choi = k.choi();
        assert!(QuantumMap::from_kraus_and_choi(k.kraus().unwrap().to_vec(), choi.clone()).is_ok());
        let mut bad = choi;
        bad[(0, 0)] += linalg::c(1e-6, 0.0);
        assert!(QuantumMap::from_kraus_and_choi(k.kraus().unwrap().to_vec(), bad).is_err());
    }

    #[test]
    fn intermediate_map_with_identity_returns_the_map() {
        let phi = BlochAffine::from_decoherence(linalg::c(0.4, 0.3), 0.6).to_map();
        let mid = intermediate_map(&phi, &QuantumMap::identity(2)).unwrap();
        assert!(linalg::max_abs_diff(&mid.choi(), &phi.choi()) < 1e-12);
    }

    #[test]
    fn dephasing_intermediate_map_amplifies_coherence() {
        let phi_s = BlochAffine::from_decoherence(linalg::c(0.5, 0.0), 1.0).to_map();
        let phi_t = BlochAffine::from_decoherence(linalg::c(0.8, 0.0), 1.0).to_map();
        let mid = intermediate_map(&phi_t, &phi_s).unwrap();
        let affine = BlochAffine::from_map(&mid).unwrap();
        assert_abs_diff_eq!(affine.m[(0, 0)], 1.6, epsilon = 1e-12);
        let cp = is_completely_positive(&mid, 1e-10);
        assert!(!cp.completely_positive);
        // normalised Choi eigenvalues (1 ± 1.6)/2
        assert_abs_diff_eq!(cp.min_choi_eigenvalue, -0.3, epsilon = 1e-12);
        // divisibility: Φ_t = Φ_{t,s} Φ_s
        let rebuilt = compose(&mid, &phi_s).unwrap();
        assert!(linalg::max_abs_diff(&rebuilt.choi(), &phi_t.choi()) < 1e-8);
    }

    #[test]
    fn singular_map_is_not_invertible() {
        let phi = BlochAffine::from_decoherence(linalg::c(0.0, 0.0), 0.0).to_map();
        match intermediate_map(&QuantumMap::identity(2), &phi) {
            Err(Error::NonInvertible { smallest_singular_value }) => assert!(smallest_singular_value < 1e-12),
            other => panic!("expected NonInvertible, got {other:?}"),
        }
    }

    #[test]
    fn bloch_affine_round_trip() {
        let a = BlochAffine {
            m: Matrix3::new(0.5, 0.1, 0.0, -0.1, 0.4, 0.05, 0.0, 0.02, 0.7),
            c: Vector3::new(0.05, 0.0, 0.1),
        };
        let back = BlochAffine::from_map(&a.to_map()).unwrap();
        assert!((back.m - a.m).abs().max() < 1e-14);
        assert!((back.c - a.c).abs().max() < 1e-14);
        assert!(a.to_map().is_trace_preserving());
    }

    #[test]
    fn trace_distance_invariant_under_map_of_identical_states() {
        let rho = coherent_state();
        let out = apply_map(&dephasing_kraus(0.2), &rho).unwrap();
        assert_eq!(trace_distance(&out, &out).unwrap(), 0.0);
    }
}
