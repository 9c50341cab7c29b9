//! Plain-text rendering of reports, one `key: value` per line.

use std::fmt::Write as _;

use expseries_core::bounds::{BoundReport, DecayRecord};
use expseries_core::fieldeval::{AxisRange, Extremum, ResidualReport};

fn axis(a: &AxisRange) -> String {
    format!("{}:{}:{}", a.min, a.max, a.count)
}

fn at(e: &Extremum) -> String {
    format!(
        "{:.6e} at x=({}, {}, {}) t={}",
        e.value, e.x[0], e.x[1], e.x[2], e.t
    )
}

/// Checks applied by `verify` and their outcomes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checks {
    pub lines: Vec<(String, bool)>,
}

impl Checks {
    pub fn push(&mut self, name: impl Into<String>, ok: bool) {
        self.lines.push((name.into(), ok));
    }

    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|(_, ok)| *ok)
    }

    pub fn first_failure(&self) -> Option<&str> {
        self.lines.iter().find(|(_, ok)| !ok).map(|(n, _)| n.as_str())
    }
}

pub fn residual(kind: &str, r: &ResidualReport, closed: bool, checks: &Checks) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kind: {kind}");
    let _ = writeln!(s, "max_level: {}", r.max_level);
    if let Some(g) = &r.grid {
        let _ = writeln!(
            s,
            "grid: x1={} x2={} x3={} t={}",
            axis(&g.x[0]),
            axis(&g.x[1]),
            axis(&g.x[2]),
            axis(&g.t)
        );
    }
    let _ = writeln!(s, "points: {}", r.points);
    let _ = writeln!(s, "closed_form: {closed}");
    for j in 0..3 {
        let _ = writeln!(s, "max_residual_r{}: {}", j + 1, at(&r.max_residual[j]));
    }
    for j in 0..3 {
        let _ = writeln!(s, "mean_residual_r{}: {:.6e}", j + 1, r.mean_residual[j]);
    }
    let _ = writeln!(s, "max_divergence: {}", at(&r.max_divergence));
    let _ = writeln!(s, "max_divergence_ratio: {:.6e}", r.max_divergence_ratio);
    let _ = writeln!(s, "residual_scale: {:.6e}", r.max_scale);
    let _ = writeln!(s, "fd_points: {}", r.fd_points);
    for j in 0..3 {
        let _ = writeln!(s, "fd_max_residual_r{}: {:.6e}", j + 1, r.fd_max_residual[j]);
    }
    let _ = writeln!(s, "fd_max_divergence: {:.6e}", r.fd_max_divergence);
    match r.tail_estimate {
        Some(e) => {
            let _ = writeln!(s, "tail_estimate: {e:.6e}");
        }
        None => {
            let _ = writeln!(s, "tail_estimate: none");
        }
    }
    for (name, ok) in &checks.lines {
        let _ = writeln!(s, "check {name}: {}", if *ok { "pass" } else { "FAIL" });
    }
    s
}

fn record(r: Option<&DecayRecord>) -> String {
    match r {
        Some(r) => format!(
            "{:.6e} ({} at k={} t={}, value {:.6e}, bound {:.6e})",
            r.margin, r.quantity, r.k, r.t, r.value, r.bound
        ),
        None => "none".to_string(),
    }
}

pub fn bounds(r: &BoundReport, epsilon: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "epsilon: {epsilon}");
    let _ = writeln!(s, "max_level: {}", r.max_level);
    let a = &r.admissibility;
    let _ = writeln!(s, "zero_mode_admissible: {}", a.zero_mode_ok);
    let _ = writeln!(
        s,
        "data_admissible: {}",
        match a.first_failure() {
            None => "true".to_string(),
            Some(m) => format!("false (mode {} has {:.6e} > {:.6e})", m.k, m.magnitude, m.bound),
        }
    );
    let _ = writeln!(s, "records: {}", r.records.len());
    let _ = writeln!(s, "worst_velocity_margin: {}", record(r.worst_velocity()));
    let _ = writeln!(s, "worst_pressure_margin: {}", record(r.worst_pressure()));
    let _ = writeln!(s, "worst_forcing_margin: {}", record(r.worst_forcing()));
    let _ = writeln!(s, "violations: {}", r.violations().count());
    let _ = writeln!(s, "velocity_tail_bound: {:.6e}", r.tail);
    let _ = writeln!(s, "pressure_tail_bound: {:.6e}", r.pressure_tail);
    s
}
