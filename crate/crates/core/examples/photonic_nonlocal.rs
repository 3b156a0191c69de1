//! Photonic dephasing. A two-peak frequency spectrum gives single-photon
//! backflow; anticorrelated frequencies of a photon pair give backflow in the
//! global state while both local states decay monotonically.

use nmflow::measures::{blp_measure, SearchConfig, TimeWindow};
use nmflow::models::{FrequencySpectrum, NonlocalDephasing, PlateSchedule};

fn main() -> nmflow::Result<()> {
    let window = TimeWindow::new(12.0, 1201)?;
    let search = SearchConfig::default();
    for sigma in [0.1, 0.3, 0.6] {
        let spectrum = FrequencySpectrum::gaussian_mixture(&[(0.0, sigma, 1.0), (2.0, sigma, 1.0)], 2001)?;
        let blp = blp_measure(&spectrum.dephasing_model(1.0), &window, &search)?;
        println!("two peaks, width {sigma}: blp {:.6e}", blp.value);
    }

    let schedule = PlateSchedule::Consecutive { plate2: 4.0, plate1: 4.0 };
    for k in [0.0, -0.4, -0.8] {
        let pair = NonlocalDephasing::new(1.0, k, 1.0, schedule.clone())?;
        let tr = pair.trajectories(801)?;
        println!(
            "K = {k:+.1}: global blp {:.6e}, local max rise {:.1e} / {:.1e}",
            tr.global.backflow(1e-10),
            tr.local1.max_step_increase(),
            tr.local2.max_step_increase()
        );
    }
    Ok(())
}
