//! Bessel functions of the first kind of integer order.
//!
//! Uses the periodic integral `J_n(x) = (1/2π)∫₀^{2π} cos(nτ − x sin τ) dτ`.
//! The trapezoid rule on a periodic analytic integrand converges geometrically;
//! with `N > |x| + n + 40` nodes the aliasing error is below double precision.

pub fn bessel_j(n: i32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x.abs() < 1.0 {
        return series(n, x);
    }
    let nodes = (x.abs() + n.unsigned_abs() as f64 + 48.0).ceil() as usize;
    let nodes = nodes.next_multiple_of(4);
    let step = std::f64::consts::TAU / nodes as f64;
    let nf = n as f64;
    let mut acc = 0.0;
    for k in 0..nodes {
        let tau = k as f64 * step;
        acc += (nf * tau - x * tau.sin()).cos();
    }
    acc / nodes as f64
}

/// Power series, used where the quadrature would lose relative accuracy.
fn series(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs();
    let half = 0.5 * x;
    let mut term = (1..=m).fold(1.0, |acc, k| acc * half / k as f64);
    let mut sum = term;
    for k in 1..30 {
        term *= -half * half / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    if n < 0 && m % 2 == 1 {
        -sum
    } else {
        sum
    }
}
