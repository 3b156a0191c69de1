//! Exchange-coupled qubits: the split of distinguishability into system and
//! external parts, a witness for initial correlations and a discord bound.

use num_complex::Complex64;

use nmflow::correlations::{discord_lower_bound, info_flow, initial_correlation_witness, TotalSystem};
use nmflow::linalg::{self, CMatrix};
use nmflow::{DensityMatrix, QuantumMap};

fn main() -> nmflow::Result<()> {
    let ts = TotalSystem::exchange_qubits(1.0, 2.0, 0.5)?;
    let times: Vec<f64> = (0..=100).map(|k| 0.2 * k as f64).collect();

    // ½(|01⟩⟨01| + |10⟩⟨10|) + c(|01⟩⟨10| + h.c.)
    let mut m = CMatrix::zeros(4, 4);
    m[(1, 1)] = Complex64::new(0.5, 0.0);
    m[(2, 2)] = Complex64::new(0.5, 0.0);
    m[(1, 2)] = Complex64::new(0.45, 0.0);
    m[(2, 1)] = Complex64::new(0.45, 0.0);
    let correlated = DensityMatrix::new(m)?;
    let product = DensityMatrix::basis(2, 0).tensor(&DensityMatrix::maximally_mixed(2));

    let rec = info_flow(&ts, &correlated, &product, &times)?;
    println!("I_int(0) = {:.6}, I_ext(0) = {:.6}", rec.internal[0], rec.external[0]);
    println!("max I_int = {:.6}", rec.internal.iter().copied().fold(0.0, f64::max));
    println!("conservation error {:.2e}", rec.conservation_error());

    let flip = QuantumMap::unitary(linalg::sigma_x())?;
    let w = initial_correlation_witness(&ts, &correlated, &flip, &times)?;
    println!("witness: max excursion {:.6}, correlated {}", w.max_excursion, w.correlated);
    let w = initial_correlation_witness(&ts, &product, &flip, &times)?;
    println!("product state: max excursion {:.2e}, correlated {}", w.max_excursion, w.correlated);

    let d = discord_lower_bound(&ts, &correlated, &times, Some(&linalg::identity(2)))?;
    println!("discord bound {:.6} <= C = {:.6}", d.bound, d.correlations);
    Ok(())
}
