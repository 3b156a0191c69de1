//! Amplitude damping restricted to diagonal states is a classical Markov chain.
//! The Pauli master equation reproduces the quantum populations and the
//! Kolmogorov distance contracts.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use nmflow::classical::{kolmogorov_distance, markov_joint, pauli_evolve, quantum_to_classical, transition_matrix};
use nmflow::linalg::{self, CMatrix};
use nmflow::{DecayChannel, TimeLocalGenerator};

fn main() -> nmflow::Result<()> {
    let gamma = 0.7;
    let gen = TimeLocalGenerator::dissipative(
        2,
        vec![DecayChannel { operator: linalg::sigma_minus(), rate: Arc::new(move |_| gamma) }],
    )?;
    let w = quantum_to_classical(&gen, &linalg::identity(2))?;
    println!("rates at t = 0:\n{}", w.at(0.0));

    let times: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
    let p0 = DVector::from_vec(vec![0.2, 0.8]);
    let rho0 = CMatrix::from_diagonal(&p0.map(|x| Complex64::new(x, 0.0)));
    let quantum = gen.evolve(&rho0, &times, 1e-12)?;
    let classical = pauli_evolve(&w, &p0, &times)?;
    let (a, b) = (DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 1.0]));
    println!("{:>5} {:>12} {:>12} {:>12}", "t", "P(1) quantum", "P(1) pauli", "kolmogorov");
    for ((rho, p), &t) in quantum.iter().zip(&classical).zip(&times) {
        let tm = transition_matrix(&w, 0.0, t)?;
        let k = kolmogorov_distance(&tm.apply(&a), &tm.apply(&b), (0.5, 0.5));
        println!("{t:>5.2} {:>12.9} {:>12.9} {k:>12.9}", rho[(1, 1)].re, p[1]);
    }

    let steps = [transition_matrix(&w, 0.0, 1.0)?, transition_matrix(&w, 1.0, 2.0)?];
    let joint = markov_joint(&p0, &steps);
    println!("joint P(x3, x2, x1) = {joint:.6?}");
    Ok(())
}
