//! Damped Jaynes-Cummings qubit: backflow and CP-divisibility violation across
//! the coupling strength.

use nmflow::measures::{blp_measure, rhp_measure, RhpConfig, SearchConfig, TimeWindow};
use nmflow::models::LossyCavity;

fn main() -> nmflow::Result<()> {
    let window = TimeWindow::new(40.0, 2001)?;
    println!("{:>8} {:>14} {:>14} {:>10}", "gamma0", "blp", "rhp", "first zero");
    for k in 1..=12 {
        let gamma0 = 0.25 * k as f64;
        let model = LossyCavity::resonant(gamma0, 1.0)?;
        let blp = blp_measure(&model, &window, &SearchConfig::default())?;
        let rhp = rhp_measure(&model, &window, &RhpConfig::default())?;
        let zero = model.first_zero().map_or("-".to_string(), |t| format!("{t:.4}"));
        let rhp = if rhp.infinite { "inf".to_string() } else { format!("{:.6e}", rhp.value) };
        println!("{gamma0:>8.2} {:>14.6e} {rhp:>14} {zero:>10}", blp.value);
    }
    Ok(())
}
