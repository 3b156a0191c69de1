//! Pure dephasing from Ohmic-family baths: the memory effects switch on as the
//! spectrum becomes super-Ohmic, and temperature pushes the onset further out.

use nmflow::measures::{analyze, AnalysisConfig, MeasureSelection, TimeWindow};
use nmflow::models::{DephasingModel, SpectralDensity, Temperature};

fn main() -> nmflow::Result<()> {
    let window = TimeWindow::new(20.0, 801)?;
    let selection = MeasureSelection { helstrom: false, ..MeasureSelection::default() };
    let cfg = AnalysisConfig::default();

    for temp in [Temperature::Zero, Temperature::Beta(2.0)] {
        println!("temperature {temp:?}");
        for s in [0.5, 1.0, 2.0, 3.0, 4.0] {
            let j = SpectralDensity::OhmicFamily { alpha: 0.1, s, cutoff: 1.0 };
            let model = DephasingModel::new(format!("ohmic s = {s}"), j.decoherence_function(temp));
            let report = analyze(&model, &window, &selection, &cfg)?;
            println!(
                "  s = {s:<4} blp {:.6e}  rhp {:.6e}  {}",
                report.blp_value().unwrap_or(0.0),
                report.rhp.as_ref().map_or(0.0, |r| r.value),
                report.divisibility_class().map(|c| c.to_string()).unwrap_or_default()
            );
        }
    }
    Ok(())
}
