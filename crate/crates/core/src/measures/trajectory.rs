use nalgebra::Vector3;

use crate::error::{Error, Result};

/// The pair of initial conditions behind a trajectory (qubit Bloch form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMetadata {
    /// Bloch vectors of `ρ¹` and `ρ²`.
    pub bloch1: Vector3<f64>,
    pub bloch2: Vector3<f64>,
    /// Prior weight of `ρ¹`; `0.5` for the unbiased trace distance.
    pub p1: f64,
}

impl PairMetadata {
    /// Antipodal pure pair `±n`.
    pub fn antipodal(n: Vector3<f64>) -> Self {
        let n = n.normalize();
        Self { bloch1: n, bloch2: -n, p1: 0.5 }
    }

    /// Initial Helstrom norm of the pair.
    pub fn initial_value(&self) -> f64 {
        let p2 = 1.0 - self.p1;
        let tau = self.p1 - p2;
        let v = self.bloch1 * self.p1 - self.bloch2 * p2;
        tau.abs().max(v.norm())
    }
}

/// Sampled distinguishability `D(t)` (or Helstrom norm) on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DistinguishabilityTrajectory {
    times: Vec<f64>,
    values: Vec<f64>,
    pair: Option<PairMetadata>,
    normalization: f64,
}

/// Slack on the `[0, 1]` range before a value is rejected rather than clamped.
const RANGE_SLACK: f64 = 1e-9;

impl DistinguishabilityTrajectory {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "trajectory needs at least two matching samples ({} times, {} values)",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("trajectory times must be strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= -RANGE_SLACK && **v <= 1.0 + RANGE_SLACK)) {
            return Err(Error::InvalidParameter(format!("distinguishability {v} outside [0, 1]")));
        }
        let values = values.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(Self { times, values, pair: None, normalization: 1.0 })
    }

    pub fn with_pair(mut self, pair: PairMetadata) -> Self {
        self.pair = Some(pair);
        self
    }

    /// Divides `σ` by this factor, e.g. the initial distinguishability for the scaled rate.
    pub fn with_normalization(mut self, normalization: f64) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pair(&self) -> Option<&PairMetadata> {
        self.pair.as_ref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `σ(t) = dD/dt` by central differences (second-order one-sided at the ends).
    pub fn sigma(&self) -> Vec<f64> {
        let (t, d) = (&self.times, &self.values);
        let n = t.len();
        let scale = 1.0 / self.normalization;
        (0..n)
            .map(|k| {
                let raw = if n == 2 {
                    (d[1] - d[0]) / (t[1] - t[0])
                } else if k == 0 {
                    three_point(t[0], t[1], t[2], d[0], d[1], d[2], t[0])
                } else if k == n - 1 {
                    three_point(t[n - 3], t[n - 2], t[n - 1], d[n - 3], d[n - 2], d[n - 1], t[n - 1])
                } else {
                    three_point(t[k - 1], t[k], t[k + 1], d[k - 1], d[k], d[k + 1], t[k])
                };
                raw * scale
            })
            .collect()
    }

    /// Total increase of `D`, counting only excursions larger than `band`
    /// (a Schmitt trigger on the running extrema).
    pub fn backflow(&self, band: f64) -> f64 {
        self.increase_intervals(band).iter().fold(0.0, |acc, iv| acc + iv.rise) / self.normalization
    }

    /// Maximal increase intervals `[t_i, t_f]` with their rises `D(t_f) − D(t_i)`.
    pub fn increase_intervals(&self, band: f64) -> Vec<IncreaseInterval> {
        increase_intervals(&self.times, &self.values, band)
    }

    /// Largest single-step increase.
    pub fn max_step_increase(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// No step increases by more than `tol`.
    pub fn is_monotone_nonincreasing(&self, tol: f64) -> bool {
        self.max_step_increase() <= tol
    }

    /// Every other sample, keeping the last one; used for grid-error estimates.
    pub fn coarsened(&self) -> Self {
        let n = self.times.len();
        let keep: Vec<usize> = (0..n).filter(|k| k % 2 == 0 || *k == n - 1).collect();
        Self {
            times: keep.iter().map(|&k| self.times[k]).collect(),
            values: keep.iter().map(|&k| self.values[k]).collect(),
            pair: self.pair,
            normalization: self.normalization,
        }
    }
}

/// Derivative at `x` of the parabola through three points.
fn three_point(t0: f64, t1: f64, t2: f64, d0: f64, d1: f64, d2: f64, x: f64) -> f64 {
    let l0 = (2.0 * x - t1 - t2) / ((t0 - t1) * (t0 - t2));
    let l1 = (2.0 * x - t0 - t2) / ((t1 - t0) * (t1 - t2));
    let l2 = (2.0 * x - t0 - t1) / ((t2 - t0) * (t2 - t1));
    d0 * l0 + d1 * l1 + d2 * l2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncreaseInterval {
    pub start: f64,
    pub end: f64,
    pub rise: f64,
}

/// Schmitt-trigger detection of increase intervals on raw samples.
pub fn increase_intervals(times: &[f64], values: &[f64], band: f64) -> Vec<IncreaseInterval> {
    let mut out = vec![];
    if values.is_empty() {
        return out;
    }
    let mut rising = false;
    let (mut lo, mut lo_t) = (values[0], times[0]);
    let (mut hi, mut hi_t) = (values[0], times[0]);
    for (&t, &v) in times.iter().zip(values).skip(1) {
        if rising {
            if v > hi {
                hi = v;
                hi_t = t;
            } else if v < hi - band {
                out.push(IncreaseInterval { start: lo_t, end: hi_t, rise: hi - lo });
                rising = false;
                lo = v;
                lo_t = t;
            }
        } else if v < lo {
            lo = v;
            lo_t = t;
        } else if v > lo + band {
            rising = true;
            hi = v;
            hi_t = t;
        }
    }
    if rising {
        out.push(IncreaseInterval { start: lo_t, end: hi_t, rise: hi - lo });
    }
    out
}

/// Backflow of raw samples; see [`DistinguishabilityTrajectory::backflow`].
pub fn backflow(times: &[f64], values: &[f64], band: f64) -> f64 {
    increase_intervals(times, values, band).iter().fold(0.0, |acc, iv| acc + iv.rise)
}
