//! Kraus and Choi representations, positivity versus complete positivity, and
//! contraction of the trace distance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nmflow::channel::{kraus_from_choi, random_channel, random_density_matrix};
use nmflow::{apply_map, is_completely_positive, is_positive_map, trace_distance, QuantumMap};

fn main() -> nmflow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let channel = random_channel(3, 2, &mut rng);
    let kraus = kraus_from_choi(&channel.choi(), 3, 3, 1e-12)?;
    println!("random qutrit channel: {} Kraus operators recovered from the Choi matrix", kraus.len());
    println!("CP: {:?}", is_completely_positive(&channel, 1e-10));

    let a = random_density_matrix(3, 1, &mut rng);
    let b = random_density_matrix(3, 3, &mut rng);
    println!(
        "trace distance {:.6} -> {:.6}",
        trace_distance(&a, &b)?,
        trace_distance(&apply_map(&channel, &a)?, &apply_map(&channel, &b)?)?
    );

    let transpose = QuantumMap::transpose(2);
    println!("transpose positive: {:?}", is_positive_map(&transpose, 500, 1e-10, 7)?);
    println!("transpose CP: {:?}", is_completely_positive(&transpose, 1e-10));
    Ok(())
}
