//! Optimisation of the trace-distance and Helstrom backflow over initial pairs
//! of a qubit model.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rayon::prelude::*;

use super::trajectory::{backflow, DistinguishabilityTrajectory, PairMetadata};
use super::{SearchConfig, TimeWindow};
use crate::channel::BlochAffine;
use crate::error::Result;
use crate::models::QubitModel;

/// Outcome of the unbiased pair search.
#[derive(Debug, Clone)]
pub struct BlpResult {
    pub value: f64,
    pub pair: PairMetadata,
    /// Difference to the value on the half-density time grid.
    pub grid_error: f64,
    /// Zero established from the model's rates without searching.
    pub certified_zero: bool,
    pub trajectory: DistinguishabilityTrajectory,
    pub evaluations: usize,
}

/// Outcome of the biased (Helstrom) search.
#[derive(Debug, Clone)]
pub struct HelstromResult {
    pub value: f64,
    pub pair: PairMetadata,
    pub grid_error: f64,
    pub trajectory: DistinguishabilityTrajectory,
    pub evaluations: usize,
}

pub fn direction(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// `D_k = ½|M_k (r¹ − r²)|` for a pair of Bloch vectors.
pub fn pair_values(affines: &[BlochAffine], r1: &Vector3<f64>, r2: &Vector3<f64>) -> Vec<f64> {
    let diff = r1 - r2;
    affines.iter().map(|a| 0.5 * (a.m * diff).norm()).collect()
}

/// `‖Φ_t(Δ)‖₁ = max(|τ|, |M v + τ c|)` for `Δ = (τ I + v·σ)/2`.
pub fn helstrom_values(affines: &[BlochAffine], tau: f64, v: &Vector3<f64>) -> Vec<f64> {
    affines.iter().map(|a| tau.abs().max((a.m * v + a.c * tau).norm())).collect()
}

fn antipodal_values(affines: &[BlochAffine], n: &Vector3<f64>) -> Vec<f64> {
    affines.iter().map(|a| (a.m * n).norm()).collect()
}

/// Local pattern search maximising `f` from `start`, with coordinate steps
/// halving from `step` down to `min_step`.
fn pattern_ascent<F: Fn(&[f64]) -> f64>(
    f: F,
    start: Vec<f64>,
    start_value: f64,
    step: f64,
    min_step: f64,
    evaluations: &mut usize,
) -> (Vec<f64>, f64) {
    let mut x = start;
    let mut best = start_value;
    let mut h = step;
    let mut iterations = 0;
    while h > min_step && iterations < 2000 {
        iterations += 1;
        let mut improved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += sign * h;
                let v = f(&y);
                *evaluations += 1;
                if v > best {
                    best = v;
                    x = y;
                    improved = true;
                    break;
                }
            }
            if improved {
                break;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, best)
}

/// The deterministic direction grid `θ_i = iπ/n_θ`, `φ_j = 2πj/n_φ`; the poles appear once.
pub fn direction_grid(cfg: &SearchConfig) -> Vec<(f64, f64)> {
    let mut out = vec![];
    for i in 0..=cfg.theta_steps {
        let theta = PI * i as f64 / cfg.theta_steps as f64;
        let pole = i == 0 || i == cfg.theta_steps;
        for j in 0..if pole { 1 } else { cfg.phi_steps } {
            out.push((theta, 2.0 * PI * j as f64 / cfg.phi_steps as f64));
        }
    }
    out
}

/// True when the model has a single decay channel with nonnegative rate on the grid,
/// which makes every distinguishability monotone.
pub fn rates_certify_monotone(model: &dyn QubitModel, times: &[f64], tol: f64) -> bool {
    let Some(gen) = model.generator() else {
        return false;
    };
    if gen.channels().len() != 1 {
        return false;
    }
    times.iter().all(|&t| {
        let g = gen.rates(t)[0];
        g.is_finite() && g >= -tol
    })
}

/// Maximal trace-distance backflow over antipodal pure pairs of a qubit model.
pub fn blp_search(
    model: &dyn QubitModel,
    window: &TimeWindow,
    cfg: &SearchConfig,
    affines: Option<&[BlochAffine]>,
) -> Result<BlpResult> {
    let times = window.grid();
    let owned;
    let affines = match affines {
        Some(a) => a,
        None => {
            owned = model.affine_trajectory(&times)?;
            &owned
        }
    };
    let band = cfg.hysteresis;
    let objective = |theta: f64, phi: f64| backflow(&times, &antipodal_values(affines, &direction(theta, phi)), band);

    if cfg.certify && rates_certify_monotone(model, &times, 1e-12) {
        let n = direction(PI / 2.0, 0.0);
        let values = antipodal_values(affines, &n);
        let pair = PairMetadata::antipodal(n);
        return Ok(BlpResult {
            value: 0.0,
            pair,
            grid_error: 0.0,
            certified_zero: true,
            trajectory: DistinguishabilityTrajectory::new(times, values)?.with_pair(pair),
            evaluations: 0,
        });
    }

    let grid = direction_grid(cfg);
    let mut scored: Vec<((f64, f64), f64)> =
        grid.par_iter().map(|&(th, ph)| ((th, ph), objective(th, ph))).collect();
    let mut evaluations = scored.len();
    // stable ordering: value descending, then grid order
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut best = scored[0];
    if cfg.refine && best.1 > 0.0 {
        let starts: Vec<((f64, f64), f64)> = scored.iter().take(cfg.seeds.max(1)).copied().collect();
        let refined: Vec<((f64, f64), f64, usize)> = starts
            .par_iter()
            .map(|&((th, ph), v)| {
                let mut evals = 0;
                let (x, val) = pattern_ascent(
                    |x| objective(x[0], x[1]),
                    vec![th, ph],
                    v,
                    PI / (2.0 * cfg.theta_steps as f64),
                    1e-6,
                    &mut evals,
                );
                ((x[0], x[1]), val, evals)
            })
            .collect();
        for (x, v, e) in refined {
            evaluations += e;
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    let n = direction(best.0 .0, best.0 .1);
    let pair = PairMetadata::antipodal(n);
    let trajectory = DistinguishabilityTrajectory::new(times, antipodal_values(affines, &n))?.with_pair(pair);
    let grid_error = (trajectory.backflow(band) - trajectory.coarsened().backflow(band)).abs();
    Ok(BlpResult { value: best.1, pair, grid_error, certified_zero: false, trajectory, evaluations })
}

/// Maximal Helstrom-norm backflow over `Δ = (τ I + n·σ)/2`, `τ ∈ [−1, 1]`, `|n| = 1`,
/// seeded with the unbiased optimum so that the result never falls below it.
pub fn helstrom_search(
    model: &dyn QubitModel,
    window: &TimeWindow,
    cfg: &SearchConfig,
    affines: Option<&[BlochAffine]>,
    unbiased_seed: Option<&BlpResult>,
) -> Result<HelstromResult> {
    let times = window.grid();
    let owned;
    let affines = match affines {
        Some(a) => a,
        None => {
            owned = model.affine_trajectory(&times)?;
            &owned
        }
    };
    let band = cfg.hysteresis;
    let objective = |x: &[f64]| {
        let tau = x[0].clamp(-1.0, 1.0);
        backflow(&times, &helstrom_values(affines, tau, &direction(x[1], x[2])), band)
    };
    let taus: Vec<f64> = (0..=cfg.tau_steps).map(|k| -1.0 + 2.0 * k as f64 / cfg.tau_steps as f64).collect();
    let dirs = direction_grid(cfg);
    let candidates: Vec<[f64; 3]> =
        taus.iter().flat_map(|&tau| dirs.iter().map(move |&(th, ph)| [tau, th, ph])).collect();
    let mut scored: Vec<([f64; 3], f64)> = candidates.par_iter().map(|x| (*x, objective(x))).collect();
    let mut evaluations = scored.len();
    if let Some(seed) = unbiased_seed {
        let n = seed.pair.bloch1;
        let theta = n.z.clamp(-1.0, 1.0).acos();
        let phi = n.y.atan2(n.x);
        let x = [0.0, theta, phi];
        scored.push((x, objective(&x)));
        evaluations += 1;
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut best = scored[0];
    if cfg.refine && best.1 > 0.0 {
        let starts: Vec<([f64; 3], f64)> = scored.iter().take(cfg.seeds.max(1)).copied().collect();
        let refined: Vec<([f64; 3], f64, usize)> = starts
            .par_iter()
            .map(|&(x0, v)| {
                let mut evals = 0;
                let (x, val) =
                    pattern_ascent(objective, x0.to_vec(), v, PI / (2.0 * cfg.theta_steps as f64), 1e-6, &mut evals);
                ([x[0].clamp(-1.0, 1.0), x[1], x[2]], val, evals)
            })
            .collect();
        for (x, v, e) in refined {
            evaluations += e;
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    let [tau, th, ph] = best.0;
    let n = direction(th, ph);
    let p1 = 0.5 * (1.0 + tau);
    let pair = PairMetadata { bloch1: n, bloch2: -n, p1 };
    let trajectory = DistinguishabilityTrajectory::new(times, helstrom_values(affines, tau, &n))?.with_pair(pair);
    let grid_error = (trajectory.backflow(band) - trajectory.coarsened().backflow(band)).abs();
    Ok(HelstromResult { value: best.1, pair, grid_error, trajectory, evaluations })
}

/// Validation mode of the local representation: pairs `(I/2, ρ)` with `ρ` on the
/// sphere of Bloch radius `radius`, backflow scaled by the initial distance.
pub fn local_representation_blp(
    model: &dyn QubitModel,
    window: &TimeWindow,
    cfg: &SearchConfig,
    radius: f64,
) -> Result<f64> {
    let times = window.grid();
    let affines = model.affine_trajectory(&times)?;
    let zero = Vector3::zeros();
    let best = direction_grid(cfg)
        .par_iter()
        .map(|&(th, ph)| {
            let r = direction(th, ph) * radius;
            backflow(&times, &pair_values(&affines, &r, &zero), cfg.hysteresis) / (0.5 * radius)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}
