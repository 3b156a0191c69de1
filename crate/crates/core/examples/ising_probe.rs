//! Qubit probe coupled to a transverse-field Ising ring. Backflow in the
//! window before the first finite-size revival is suppressed near the critical
//! field.

use nmflow::measures::{blp_measure, SearchConfig, TimeWindow};
use nmflow::models::{IsingProbe, SpinChainSpec};

fn main() -> nmflow::Result<()> {
    let (spins, coupling, delta) = (8, 1.0, 0.1);
    // first revival arrives near N/(4J)
    let window = TimeWindow::new(spins as f64 / (4.0 * coupling), 401)?;
    println!("{:>8} {:>14} {:>12}", "lambda*", "blp", "|G(t_max)|");
    for k in 0..=12 {
        let lambda = 0.25 + 0.125 * k as f64;
        let probe = IsingProbe::new(SpinChainSpec::new(spins, coupling, lambda - delta, delta))?;
        let blp = blp_measure(&probe, &window, &SearchConfig::default())?;
        println!("{lambda:>8.3} {:>14.6e} {:>12.6}", blp.value, probe.g(window.t_max)?.norm());
    }
    Ok(())
}
