//! Adaptive Dormand–Prince 5(4) integrator for real first-order systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Upper bound on the step size; `0` means unbounded.
    pub h_max: f64,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-12, max_steps: 1_000_000, h_max: 0.0 }
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Dopri5 {
    /// Integrates `y' = f(t, y)` from `(t0, y0)`, returning the state at each of
    /// `outputs` (nondecreasing, all `≥ t0`).
    pub fn integrate<F>(&self, mut f: F, t0: f64, y0: &[f64], outputs: &[f64]) -> Result<Vec<Vec<f64>>>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y0.len();
        let mut y = y0.to_vec();
        let mut t = t0;
        let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
        let mut tmp = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        let mut out = Vec::with_capacity(outputs.len());
        f(t, &y, &mut k[0]);
        let span = outputs.last().map_or(0.0, |&e| (e - t0).abs()).max(1e-12);
        let mut h = span * 1e-3;
        let mut steps = 0;
        for &target in outputs {
            if target < t {
                return Err(Error::Integration(format!("output time {target} precedes {t}")));
            }
            while t < target {
                if steps >= self.max_steps {
                    return Err(Error::Integration(format!("step limit reached at t = {t}")));
                }
                steps += 1;
                if self.h_max > 0.0 {
                    h = h.min(self.h_max);
                }
                let last = t + h >= target;
                let step = if last { target - t } else { h };
                for s in 1..7 {
                    for i in 0..n {
                        let mut acc = y[i];
                        for (j, kj) in k.iter().enumerate().take(s) {
                            acc += step * A[s][j] * kj[i];
                        }
                        tmp[i] = acc;
                    }
                    let (head, tail) = k.split_at_mut(s);
                    let _ = head;
                    f(t + C[s] * step, &tmp, &mut tail[0]);
                    if s == 6 {
                        y_new.copy_from_slice(&tmp);
                    }
                }
                let mut err = 0.0;
                for i in 0..n {
                    let mut e = 0.0;
                    for (j, kj) in k.iter().enumerate() {
                        e += E[j] * kj[i];
                    }
                    e *= step;
                    let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                    err += (e / sc) * (e / sc);
                }
                let err = (err / n as f64).sqrt();
                if !err.is_finite() {
                    return Err(Error::Integration(format!("non-finite state at t = {t}")));
                }
                if err <= 1.0 {
                    t = if last { target } else { t + step };
                    y.copy_from_slice(&y_new);
                    // FSAL: last stage is the derivative at the new point
                    let (first, rest) = k.split_at_mut(1);
                    first[0].copy_from_slice(&rest[5]);
                }
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let proposed = step * factor;
                if err <= 1.0 && last {
                    h = h.max(proposed);
                } else {
                    h = proposed;
                }
                if h < 1e-14 * span.max(t.abs()) {
                    return Err(Error::Integration(format!("step size underflow at t = {t}")));
                }
            }
            out.push(y.clone());
        }
        Ok(out)
    }
}
