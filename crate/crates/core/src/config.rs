//! Numerical tolerances shared by every module.

/// Central tolerance record. `Default` holds the library-wide defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Entrywise Hermiticity tolerance for states.
    pub hermitian: f64,
    /// Unit-trace tolerance for states.
    pub trace: f64,
    /// Smallest eigenvalue admitted for a state or a CP Choi matrix.
    pub min_eigenvalue: f64,
    /// Kraus completeness and Kraus/Choi agreement.
    pub kraus: f64,
    /// Condition number above which a map counts as numerically singular.
    pub condition_cap: f64,
    /// Overlap below which two supports are treated as orthogonal.
    pub orthogonal_support: f64,
    /// Hysteresis band for registering an increase of a distinguishability curve.
    pub hysteresis: f64,
    /// Threshold for the initial-correlation witness.
    pub witness: f64,
    /// Slack on rates when certifying divisibility from rates.
    pub rate: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            trace: 1e-12,
            min_eigenvalue: 1e-10,
            kraus: 1e-10,
            condition_cap: 1e12,
            orthogonal_support: 1e-10,
            hysteresis: 1e-10,
            witness: 1e-8,
            rate: 1e-12,
        }
    }
}
