use std::sync::Arc;

use approx::assert_relative_eq;
use num_complex::Complex64;

use super::*;
use crate::channel::BlochAffine;
use crate::models::{DecoherenceFunction, DephasingModel, LossyCavity, RandomUnitary};

/// `G(t) = e^{−κt} cos(ωt)`: decaying oscillation with revivals of `|G|`.
fn oscillating_dephasing(kappa: f64, omega: f64) -> DephasingModel {
    let g = DecoherenceFunction::closed_form(1.0, move |t| Complex64::new((-kappa * t).exp() * (omega * t).cos(), 0.0))
        .with_derivative(move |t| {
            let e = (-kappa * t).exp();
            Ok(Complex64::new(-e * (kappa * (omega * t).cos() + omega * (omega * t).sin()), 0.0))
        });
    DephasingModel::new("oscillating", g)
}

/// `G(t) = e^{−κt}(1 + a cos ωt)/(1 + a)`: positive, with revivals for `aω > κ`.
fn revival_dephasing(kappa: f64, a: f64, omega: f64) -> DephasingModel {
    let g = DecoherenceFunction::closed_form(1.0, move |t| {
        Complex64::new((-kappa * t).exp() * (1.0 + a * (omega * t).cos()) / (1.0 + a), 0.0)
    })
    .with_derivative(move |t| {
        let e = (-kappa * t).exp() / (1.0 + a);
        Ok(Complex64::new(-e * (kappa * (1.0 + a * (omega * t).cos()) + a * omega * (omega * t).sin()), 0.0))
    });
    DephasingModel::new("revival", g)
}

/// Sum of rises of `|G|` over its increase intervals, located from the analytic
/// extrema: zeros at `(k+½)π/ω` and maxima where `tan(ωt) = −κ/ω`.
fn revival_oracle(kappa: f64, omega: f64, t_max: f64) -> f64 {
    let g = |t: f64| ((-kappa * t).exp() * (omega * t).cos()).abs();
    let shift = (-kappa / omega).atan(); // in (−π/2, 0]
    let mut total = 0.0;
    let mut k = 0;
    loop {
        let zero = (k as f64 + 0.5) * std::f64::consts::PI / omega;
        if zero >= t_max {
            break;
        }
        let peak = ((k + 1) as f64 * std::f64::consts::PI + shift) / omega;
        total += g(peak.min(t_max)) - g(zero);
        k += 1;
    }
    total
}

#[test]
fn dephasing_backflow_matches_revival_sum() {
    let model = oscillating_dephasing(0.2, 1.0);
    // the grid misses the kinks of |G| by O(Δt), so the grid must be fine
    let window = TimeWindow::new(20.0, 40001).unwrap();
    let res = blp_measure(&model, &window, &SearchConfig::default()).unwrap();
    let oracle = revival_oracle(0.2, 1.0, 20.0);
    assert_relative_eq!(res.value, oracle, max_relative = 1e-3);
    // optimum on the equator
    assert!(res.pair.bloch1.z.abs() < 1e-3);
    assert!(res.grid_error < 1e-3 * oracle);
}

#[test]
fn helstrom_agrees_with_blp_for_dephasing() {
    let model = oscillating_dephasing(0.3, 1.5);
    let window = TimeWindow::new(10.0, 1001).unwrap();
    let cfg = SearchConfig::default();
    let blp = blp_measure(&model, &window, &cfg).unwrap();
    let hel = helstrom_measure(&model, &window, &cfg).unwrap();
    assert!(hel.value >= blp.value - 1e-12);
    assert_relative_eq!(hel.value, blp.value, max_relative = 1e-6);
}

#[test]
fn weak_coupling_cavity_is_markovian() {
    let model = LossyCavity::resonant(0.4, 1.0).unwrap();
    let window = TimeWindow::new(40.0, 801).unwrap();
    let res = blp_measure(&model, &window, &SearchConfig::default()).unwrap();
    assert!(res.certified_zero);
    let uncertified = SearchConfig { certify: false, ..SearchConfig::default() };
    assert!(blp_measure(&model, &window, &uncertified).unwrap().value <= 1e-12);
}

#[test]
fn local_representation_reproduces_blp() {
    let model = oscillating_dephasing(0.2, 1.0);
    let window = TimeWindow::new(12.0, 1201).unwrap();
    let cfg = SearchConfig::default();
    let blp = blp_measure(&model, &window, &cfg).unwrap().value;
    let local = local_representation_blp(&model, &window, &cfg, 0.1).unwrap();
    assert_relative_eq!(local, blp, max_relative = 1e-6);
}

#[test]
fn rhp_vanishes_for_semigroup() {
    let model = DephasingModel::semigroup(0.5);
    let window = TimeWindow::new(5.0, 101).unwrap();
    let res = rhp_measure(&model, &window, &RhpConfig::default()).unwrap();
    assert!(res.value < 1e-9);
    assert!(!res.infinite);
}

#[test]
fn rhp_choi_matches_rates_for_dephasing() {
    let (kappa, a, omega) = (0.1, 0.5, 1.0);
    let model = revival_dephasing(kappa, a, omega);
    let t_max = 10.0;
    let window = TimeWindow::new(t_max, 2001).unwrap();
    let choi = rhp_measure(&model, &window, &RhpConfig::default()).unwrap();
    let rates = rhp_from_rates(&model, &window).unwrap();
    assert!(!choi.infinite);
    assert_relative_eq!(choi.value, rates, max_relative = 1e-3);
    // the integral of |Re Ġ/G| over rising stretches of G is the total rise of ln G
    let g = |t: f64| (-kappa * t).exp() * (1.0 + a * (omega * t).cos());
    let n = 200_000;
    let mut log_rise = 0.0;
    for k in 1..=n {
        let (t0, t1) = (t_max * (k - 1) as f64 / n as f64, t_max * k as f64 / n as f64);
        log_rise += (g(t1).ln() - g(t0).ln()).max(0.0);
    }
    assert_relative_eq!(choi.value, log_rise, max_relative = 1e-3);
}

#[test]
fn strong_coupling_cavity_is_singular() {
    let model = LossyCavity::resonant(2.0, 1.0).unwrap();
    let window = TimeWindow::new(6.0, 601).unwrap();
    let res = rhp_measure(&model, &window, &RhpConfig::default()).unwrap();
    assert!(res.infinite);
    let t0 = model.first_zero().unwrap();
    assert!((res.singular_time.unwrap() - t0).abs() < 1e-6);
    let class = classify_divisibility(&model, &window, &DivisibilityConfig::default()).unwrap();
    assert_eq!(class.class, DivisibilityClass::NonInvertible);
}

#[test]
fn decay_to_zero_truncates_instead_of_diverging() {
    let model = DephasingModel::semigroup(20.0);
    let window = TimeWindow::new(5.0, 201).unwrap();
    let res = rhp_measure(&model, &window, &RhpConfig::default()).unwrap();
    assert!(!res.infinite);
    assert!(res.truncated_at.is_some());
    assert!(res.value < 1e-9);
}

fn tanh_model() -> RandomUnitary {
    RandomUnitary::new([Arc::new(|_| 1.0), Arc::new(|_| 1.0), Arc::new(|t: f64| -t.tanh())])
}

#[test]
fn eternal_non_markovianity_is_p_divisible_only() {
    let model = tanh_model();
    let window = TimeWindow::new(4.0, 401).unwrap();
    let report = analyze(&model, &window, &MeasureSelection::default(), &AnalysisConfig::default()).unwrap();
    assert_eq!(report.divisibility_class(), Some(DivisibilityClass::PDivisibleOnly));
    assert!(report.blp_value().unwrap() <= 1e-8);
    assert!(report.helstrom_value().unwrap() <= 1e-8);
    let rhp = report.rhp.unwrap();
    assert!(rhp.value > 0.1);
    // Choi route against the closed-form integral ∫ tanh = ln cosh
    assert_relative_eq!(rhp.value, 4f64.cosh().ln(), max_relative = 1e-3);
}

/// Hides the generator so classification must go through intermediate maps.
struct MapsOnly<M>(M);

impl<M: crate::models::QubitModel> crate::models::QubitModel for MapsOnly<M> {
    fn name(&self) -> String {
        self.0.name()
    }
    fn affine(&self, t: f64) -> crate::Result<BlochAffine> {
        self.0.affine(t)
    }
    fn time_scale(&self) -> f64 {
        self.0.time_scale()
    }
}

#[test]
fn map_path_agrees_with_rate_path() {
    let window = TimeWindow::new(3.0, 121).unwrap();
    let cfg = DivisibilityConfig::default();
    let cases = [
        (RandomUnitary::constant([0.5, 0.4, 0.3]), DivisibilityClass::CpDivisible),
        (tanh_model(), DivisibilityClass::PDivisibleOnly),
        (
            RandomUnitary::new([Arc::new(|_| 1.0), Arc::new(|_| 1.0), Arc::new(|t: f64| if t < 1.0 { 1.0 } else { -1.5 })])
                .with_breakpoints(vec![1.0]),
            DivisibilityClass::NonPDivisible,
        ),
    ];
    for (model, expected) in cases {
        let rates = classify_divisibility(&model, &window, &cfg).unwrap();
        assert_eq!(rates.path, DivisibilityPath::Rates);
        assert_eq!(rates.class, expected);
        let maps = classify_divisibility(&MapsOnly(model), &window, &cfg).unwrap();
        assert_eq!(maps.path, DivisibilityPath::Maps);
        assert_eq!(maps.class, expected);
    }
}

#[test]
fn volume_is_weaker_than_p_divisibility() {
    let model = RandomUnitary::new([
        Arc::new(|_| 0.1),
        Arc::new(|_| 0.1),
        Arc::new(|t: f64| if (2.0..4.0).contains(&t) { -0.15 } else { 0.15 }),
    ])
    .with_breakpoints(vec![2.0, 4.0]);
    let window = TimeWindow::new(6.0, 601).unwrap();
    let vol = volume_monotone(&model, &window, 1e-9).unwrap();
    assert!(vol.monotone);
    let blp = blp_measure(&model, &window, &SearchConfig::default()).unwrap();
    assert!(blp.value > 1e-4);
}

#[test]
fn dephasing_volume_is_g_squared() {
    let model = oscillating_dephasing(0.2, 1.0);
    let window = TimeWindow::new(6.0, 61).unwrap();
    let vol = volume_monotone(&model, &window, 1e-9).unwrap();
    for (t, v) in vol.times.iter().zip(&vol.volumes) {
        let g = (-0.2 * t).exp() * t.cos();
        assert_relative_eq!(*v, g * g, epsilon = 1e-14);
    }
    assert!(!vol.monotone);
}

#[test]
fn sigma_sign_opposes_rate_for_single_channel() {
    let model = revival_dephasing(0.1, 0.5, 1.0);
    let window = TimeWindow::new(10.0, 1001).unwrap();
    let res = blp_measure(&model, &window, &SearchConfig::default()).unwrap();
    let sigma = res.trajectory.sigma();
    let gen = model.generator().unwrap();
    for (t, s) in res.trajectory.times().iter().zip(sigma) {
        let rate = gen.rates(*t)[0];
        if rate.abs() > 1e-3 && s.abs() > 1e-6 {
            assert_eq!(s.signum(), -rate.signum(), "t = {t}");
        }
    }
}

#[test]
fn blp_is_stable_under_grid_refinement() {
    let model = oscillating_dephasing(0.2, 1.0);
    let window = TimeWindow::new(15.0, 1501).unwrap();
    let cfg = SearchConfig::default();
    let base = blp_measure(&model, &window, &cfg).unwrap().value;
    let finer_time = blp_measure(&model, &window.refined(2), &cfg).unwrap().value;
    let finer_dirs = blp_measure(&model, &window, &cfg.refined()).unwrap().value;
    assert!((finer_time - base).abs() < 0.01 * base);
    assert!((finer_dirs - base).abs() < 0.01 * base);
}

#[test]
fn divisibility_class_round_trips_through_strings() {
    for c in [
        DivisibilityClass::CpDivisible,
        DivisibilityClass::PDivisibleOnly,
        DivisibilityClass::NonPDivisible,
        DivisibilityClass::NonInvertible,
    ] {
        assert_eq!(c.as_str().parse::<DivisibilityClass>().unwrap(), c);
    }
}
