//! Random-unitary (Pauli) channels that sit at different levels of the
//! divisibility hierarchy. A temporarily negative rate can break CP-divisibility
//! while keeping every trace distance monotone.

use std::sync::Arc;

use nmflow::measures::{analyze, AnalysisConfig, MeasureSelection, TimeWindow};
use nmflow::models::RandomUnitary;

fn main() -> nmflow::Result<()> {
    let window = TimeWindow::new(4.0, 801)?;
    let models = [
        ("constant rates", RandomUnitary::constant([0.3, 0.2, 0.1])),
        (
            "one rate -tanh(t)",
            RandomUnitary::new([Arc::new(|_| 1.0), Arc::new(|_| 1.0), Arc::new(|t: f64| -t.tanh())]),
        ),
        (
            "rates 1 + 2cos(2t)",
            RandomUnitary::new([
                Arc::new(|t: f64| 1.0 + 2.0 * (2.0 * t).cos()),
                Arc::new(|t: f64| 1.0 + 2.0 * (2.0 * t).cos()),
                Arc::new(|t: f64| 1.0 + 2.0 * (2.0 * t).cos()),
            ]),
        ),
    ];
    let cfg = AnalysisConfig::default();
    for (name, model) in &models {
        let r = analyze(model, &window, &MeasureSelection::default(), &cfg)?;
        let div = r.divisibility.as_ref().unwrap();
        println!("{name}");
        println!("  class            {}", div.class);
        println!("  first CP / P     {:?} / {:?}", div.first_cp_violation, div.first_p_violation);
        println!("  blp              {:.6e}", r.blp_value().unwrap());
        println!("  helstrom         {:.6e}", r.helstrom_value().unwrap());
        println!("  volume monotone  {}", r.volume_monotone().unwrap());
    }
    Ok(())
}
