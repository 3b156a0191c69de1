//! Density matrices, Helstrom matrices and the distances built on them.

use num_complex::Complex64;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::InvalidState(format!(
                "matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = linalg::hermiticity_error(&matrix);
        if herm > tol.hermitian {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = linalg::eigvalsh(&matrix)[0];
        if min < -tol.min_eigenvalue {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// Pure state from a (not necessarily normalised) vector.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi.unscale(norm);
        Self::new(linalg::projector(&v))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = linalg::ONE;
        Self { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: linalg::identity(dim).unscale(dim as f64) }
    }

    /// Qubit state `(I + r·σ)/2`; requires `|r| ≤ 1`.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if len > 1.0 + 1e-12 {
            return Err(Error::InvalidState(format!("Bloch vector length {len} exceeds 1")));
        }
        Self::new(linalg::from_bloch(1.0, r))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Bloch vector; only meaningful for qubits.
    pub fn bloch(&self) -> [f64; 3] {
        linalg::bloch_components(&self.matrix)
    }

    pub fn population(&self, k: usize) -> f64 {
        self.matrix[(k, k)].re
    }

    /// Matrix element `⟨i|ρ|j⟩`.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { matrix: linalg::kron(&self.matrix, &other.matrix) }
    }

    /// Bypasses validation; callers guarantee the invariants.
    pub(crate) fn from_trusted(matrix: CMatrix) -> Self {
        Self { matrix }
    }
}

/// The weighted difference `p1 ρ¹ − p2 ρ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct HelstromMatrix {
    p1: f64,
    p2: f64,
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    delta: CMatrix,
}

impl HelstromMatrix {
    pub fn new(p1: f64, rho1: DensityMatrix, p2: f64, rho2: DensityMatrix) -> Result<Self> {
        if p1 < 0.0 || p2 < 0.0 || (p1 + p2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidWeights { p1, p2 });
        }
        if rho1.dim() != rho2.dim() {
            return Err(Error::DimensionMismatch { expected: rho1.dim(), found: rho2.dim() });
        }
        let delta = rho1.matrix().scale(p1) - rho2.matrix().scale(p2);
        Ok(Self { p1, p2, rho1, rho2, delta })
    }

    pub fn unbiased(rho1: DensityMatrix, rho2: DensityMatrix) -> Result<Self> {
        Self::new(0.5, rho1, 0.5, rho2)
    }

    pub fn weights(&self) -> (f64, f64) {
        (self.p1, self.p2)
    }

    pub fn states(&self) -> (&DensityMatrix, &DensityMatrix) {
        (&self.rho1, &self.rho2)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.delta
    }

    pub fn dim(&self) -> usize {
        self.delta.nrows()
    }
}

/// `½‖ρ¹ − ρ²‖₁`.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    trace_distance_matrices(r1.matrix(), r2.matrix(), &Tolerances::default())
}

/// Trace distance on raw operators, validating only dimensions and Hermiticity of the difference.
pub fn trace_distance_matrices(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    let diff = a - b;
    let herm = linalg::hermiticity_error(&diff);
    if herm > tol.hermitian.max(1e-9) {
        return Err(Error::NotHermitian { deviation: herm });
    }
    Ok((0.5 * linalg::trace_norm_hermitian(&diff)).clamp(0.0, 1.0))
}

/// Trace norm of the Helstrom matrix; the optimal biased discrimination bias.
pub fn helstrom_norm(h: &HelstromMatrix) -> f64 {
    linalg::trace_norm_hermitian(h.matrix()).clamp(0.0, 1.0)
}

/// Success probability of the optimal two-state discrimination.
pub fn success_probability(h: &HelstromMatrix) -> f64 {
    0.5 * (1.0 + helstrom_norm(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_states_have_zero_distance() {
        let r = DensityMatrix::from_bloch([0.2, -0.3, 0.4]).unwrap();
        assert_abs_diff_eq!(trace_distance(&r, &r).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_basis_states_are_perfectly_distinguishable() {
        let a = DensityMatrix::basis(2, 0);
        let b = DensityMatrix::basis(2, 1);
        assert_abs_diff_eq!(trace_distance(&a, &b).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn antipodal_x_states() {
        let a = DensityMatrix::from_bloch([0.6, 0.0, 0.0]).unwrap();
        let b = DensityMatrix::from_bloch([-0.6, 0.0, 0.0]).unwrap();
        // difference is 0.6 σx with eigenvalues ±0.6
        assert_abs_diff_eq!(trace_distance(&a, &b).unwrap(), 0.6, epsilon = 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = DensityMatrix::maximally_mixed(2);
        let b = DensityMatrix::maximally_mixed(3);
        assert!(matches!(trace_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn non_hermitian_difference_is_rejected() {
        let a = CMatrix::identity(2, 2).unscale(2.0);
        let mut b = a.clone();
        b[(0, 1)] = linalg::c(0.1, 0.0);
        let err = trace_distance_matrices(&a, &b, &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn invalid_states_are_rejected() {
        assert!(DensityMatrix::new(CMatrix::identity(2, 2)).is_err());
        assert!(DensityMatrix::from_bloch([1.0, 1.0, 0.0]).is_err());
        let mut m = CMatrix::identity(2, 2).unscale(2.0);
        m[(0, 1)] = linalg::c(0.0, 0.2);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn helstrom_examples() {
        let r = DensityMatrix::from_bloch([0.0, 0.5, 0.0]).unwrap();
        let h = HelstromMatrix::unbiased(r.clone(), r).unwrap();
        assert_abs_diff_eq!(helstrom_norm(&h), 0.0, epsilon = 1e-15);

        let h = HelstromMatrix::unbiased(DensityMatrix::basis(2, 0), DensityMatrix::basis(2, 1)).unwrap();
        assert_abs_diff_eq!(helstrom_norm(&h), 1.0, epsilon = 1e-14);

        let mixed = DensityMatrix::maximally_mixed(2);
        let h = HelstromMatrix::new(0.7, mixed.clone(), 0.3, mixed).unwrap();
        // Δ = 0.2·I/2 per state → eigenvalues 0.2, 0.2
        assert_abs_diff_eq!(helstrom_norm(&h), 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(h.matrix().trace().re, 0.4, epsilon = 1e-14);
    }

    #[test]
    fn helstrom_rejects_bad_weights() {
        let m = DensityMatrix::maximally_mixed(2);
        assert!(matches!(
            HelstromMatrix::new(0.7, m.clone(), 0.4, m),
            Err(Error::InvalidWeights { .. })
        ));
    }
}
