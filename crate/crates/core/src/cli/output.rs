//! CSV artifacts and the text report.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::config::{ScenarioConfig, SweepPoint};
use super::evaluate::{Measures, PointError, PointOutcome, TrajectoryRow};
use crate::measures::{HelstromResult, PairMetadata};

/// 17 significant digits, `.` decimal separator.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        format!("{:.16e}", 0.0)
    } else if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn flag(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

/// Quotes a field if it contains separators or quotes.
fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const TRAJECTORY_HEADER: &str = "t,D,sigma,G_abs,G_phase,volume";

pub fn write_trajectory(path: &Path, rows: &[TrajectoryRow]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", num(r.t), num(r.d), num(r.sigma), opt(r.g_abs), opt(r.g_phase), opt(r.volume))?;
    }
    w.flush()
}

pub const MEASURE_COLUMNS: [&str; 7] =
    ["blp", "helstrom", "rhp", "rhp_infinite_flag", "divisibility_class", "volume_monotone", "errors"];

const CORRELATION_COLUMNS: [&str; 4] = ["witness_max", "discord_bound", "discord_c", "info_conservation_error"];

pub fn measures_header(params: &[String], correlations: bool) -> String {
    let mut cols: Vec<&str> = params.iter().map(String::as_str).collect();
    cols.extend(MEASURE_COLUMNS);
    if correlations {
        cols.extend(CORRELATION_COLUMNS);
    }
    cols.join(",")
}

pub fn measures_row(params: &[f64], outcome: &Result<PointOutcome, PointError>, correlations: bool) -> String {
    let mut cols: Vec<String> = params.iter().map(|&p| num(p)).collect();
    match outcome {
        Ok(o) => {
            match &o.measures {
                Measures::Qubit(r) => {
                    cols.push(opt(r.blp_value()));
                    cols.push(opt(r.helstrom_value()));
                    cols.push(opt(r.rhp.as_ref().map(|x| x.value)));
                    cols.push(flag(r.rhp.as_ref().map(|x| x.infinite)));
                    cols.push(r.divisibility_class().map(|c| c.to_string()).unwrap_or_default());
                    cols.push(flag(r.volume_monotone()));
                }
                Measures::Nonlocal { blp, .. } => {
                    cols.push(num(*blp));
                    cols.extend(std::iter::repeat_n(String::new(), 5));
                }
            }
            cols.push(String::new());
            if correlations {
                let c = o.correlations.as_ref();
                cols.push(opt(c.and_then(|c| c.witness.as_ref()).map(|w| w.max_excursion)));
                cols.push(opt(c.and_then(|c| c.discord.as_ref()).map(|d| d.bound)));
                cols.push(opt(c.and_then(|c| c.discord.as_ref()).map(|d| d.correlations)));
                cols.push(opt(c.and_then(|c| c.info_flow.as_ref()).map(|i| i.conservation_error())));
            }
        }
        Err(e) => {
            cols.extend(std::iter::repeat_n(String::new(), 6));
            cols.push(field(&e.to_string()));
            if correlations {
                cols.extend(std::iter::repeat_n(String::new(), 4));
            }
        }
    }
    cols.join(",")
}

pub fn write_correlations(path: &Path, outcome: &PointOutcome) -> io::Result<()> {
    let Some(c) = &outcome.correlations else {
        return Ok(());
    };
    let times = c
        .info_flow
        .as_ref()
        .map(|i| i.times.clone())
        .or_else(|| c.witness.as_ref().map(|w| w.times.clone()))
        .or_else(|| c.discord.as_ref().map(|d| d.witness.times.clone()))
        .unwrap_or_default();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,I_int,I_ext,I_ext_bound,witness_excursion,discord_excursion")?;
    for (k, &t) in times.iter().enumerate() {
        let info = c.info_flow.as_ref();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(t),
            opt(info.map(|i| i.internal[k])),
            opt(info.map(|i| i.external[k])),
            opt(info.map(|i| i.bound(k))),
            opt(c.witness.as_ref().map(|x| x.excursion[k])),
            opt(c.discord.as_ref().map(|d| d.witness.excursion[k])),
        )?;
    }
    w.flush()
}

fn bloch(v: &nalgebra::Vector3<f64>) -> String {
    format!("({:+.6}, {:+.6}, {:+.6})", v.x, v.y, v.z)
}

fn pair_line(label: &str, pair: &PairMetadata) -> String {
    format!("  {label}: rho1 = {}, rho2 = {}, p1 = {:.6}\n", bloch(&pair.bloch1), bloch(&pair.bloch2), pair.p1)
}

fn helstrom_lines(h: &HelstromResult) -> String {
    format!("helstrom          {}  (grid error {:.3e})\n{}", num(h.value), h.grid_error, pair_line("optimal Helstrom pair", &h.pair))
}

/// Human-readable summary of one evaluated point.
pub fn point_report(config: &ScenarioConfig, outcome: &PointOutcome) -> String {
    let mut s = String::new();
    let w = config.window();
    let _ = writeln!(s, "model             {}", outcome.model);
    let _ = writeln!(s, "window            t_max = {}, points = {}", w.t_max, w.points);
    match &outcome.measures {
        Measures::Qubit(r) => {
            if let Some(b) = &r.blp {
                let _ = writeln!(
                    s,
                    "blp               {}  (grid error {:.3e}{})",
                    num(b.value),
                    b.grid_error,
                    if b.certified_zero { ", certified by nonnegative rate" } else { "" }
                );
                s.push_str(&pair_line("optimal pair", &b.pair));
            }
            if let Some(h) = &r.helstrom {
                s.push_str(&helstrom_lines(h));
            }
            if let Some(x) = &r.rhp {
                let _ = write!(s, "rhp               {}", num(x.value));
                if let Some(t) = x.singular_time {
                    let _ = write!(s, "  infinite: map not invertible at t = {t:.9}");
                }
                if let Some(t) = x.truncated_at {
                    let _ = write!(s, "  truncated at t = {t:.9} (map decayed to singular)");
                }
                s.push('\n');
            }
            if let Some(d) = &r.divisibility {
                let _ = writeln!(s, "divisibility      {} (from {:?})", d.class, d.path);
                if let Some(t) = d.first_cp_violation {
                    let _ = writeln!(s, "  first CP violation at t = {t}");
                }
                if let Some(t) = d.first_p_violation {
                    let _ = writeln!(s, "  first P violation at t = {t}");
                }
            }
            if let Some(v) = &r.volume {
                let _ = writeln!(s, "volume monotone   {}", v.monotone);
            }
            let dg = &r.diagnostics;
            let _ = writeln!(
                s,
                "diagnostics       {} time points, {} directions, {} + {} objective evaluations",
                dg.time_points, dg.direction_points, dg.blp_evaluations, dg.helstrom_evaluations
            );
        }
        Measures::Nonlocal { blp, local1_monotone, local2_monotone, trajectories } => {
            let _ = writeln!(s, "global blp        {}", num(*blp));
            let _ = writeln!(
                s,
                "local monotone    photon 1: {local1_monotone} (max rise {:.3e}), photon 2: {local2_monotone} (max rise {:.3e})",
                trajectories.local1.max_step_increase(),
                trajectories.local2.max_step_increase()
            );
        }
    }
    if let Some(a) = &outcome.audit {
        let _ = writeln!(s, "pair audit        {} random pairs (seed {}), max backflow {}", a.samples, config.seed, num(a.max_backflow));
    }
    if let Some(c) = &outcome.correlations {
        if let Some(i) = &c.info_flow {
            let _ = writeln!(
                s,
                "information flow  I_int(0) = {}, I_ext(0) = {}, conservation error {:.3e}",
                num(i.internal[0]),
                num(i.external[0]),
                i.conservation_error()
            );
        }
        if let Some(wt) = &c.witness {
            let _ = writeln!(s, "witness           max excursion {}, correlated: {}", num(wt.max_excursion), wt.correlated);
        }
        if let Some(d) = &c.discord {
            let _ = writeln!(s, "discord bound     {} <= C = {}", num(d.bound), num(d.correlations));
        }
    }
    s
}

pub fn sweep_report(points: &[SweepPoint], outcomes: &[(usize, Result<PointOutcome, PointError>)]) -> String {
    let mut s = String::new();
    let failed = outcomes.iter().filter(|(_, o)| o.is_err()).count();
    let _ = writeln!(s, "sweep of {} points, {} failed\n", points.len(), failed);
    for (idx, outcome) in outcomes {
        let p = &points[*idx];
        let params: Vec<String> = p.params.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        let _ = writeln!(s, "== point {idx}: {}", params.join(", "));
        match outcome {
            Ok(o) => s.push_str(&point_report(&p.config, o)),
            Err(e) => {
                let _ = writeln!(s, "error: {e}");
            }
        }
        s.push('\n');
    }
    s
}
