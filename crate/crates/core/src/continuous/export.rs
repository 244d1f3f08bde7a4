use serde_json::json;

use super::{EventKind, NodeSnap, Trajectory};
use crate::phase::{JointState, Rat};

fn snap_json(s: &NodeSnap, scale: i64) -> serde_json::Value {
    // phi/beta are printed unreduced so a blink shows up as phi = 1/1.
    json!({
        "phi": Rat::from_ticks(s.phi, scale).to_string(),
        "beta": Rat::from_ticks(s.beta, scale).to_string(),
        "mu1": s.mu1.value(),
        "mu2": s.mu2,
        "mu3": s.mu3,
        "sigma": s.sigma,
    })
}

fn kind_name(k: EventKind) -> &'static str {
    match k {
        EventKind::Blink => "blink",
        EventKind::PulseReceived => "pulse_received",
        EventKind::Pulled => "pulled",
        EventKind::Excited => "excited",
        EventKind::BetaQuarter => "beta_quarter",
        EventKind::BetaOne => "beta_one",
    }
}

/// One JSON object per line: `{t, node, kind, before, after}`.
pub fn events_to_jsonl(traj: &Trajectory) -> String {
    let scale = traj.scale();
    let mut out = String::new();
    for e in traj.events() {
        let line = json!({
            "t": traj.time(e.tick).to_string(),
            "node": e.node,
            "kind": kind_name(e.kind),
            "before": snap_json(&e.before, scale),
            "after": snap_json(&e.after, scale),
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

/// `node,phi,beta,mu1,mu2,mu3,sigma` with a header row.
pub fn snapshot_to_csv(config: &[JointState]) -> String {
    let mut out = String::from("node,phi,beta,mu1,mu2,mu3,sigma\n");
    for (v, s) in config.iter().enumerate() {
        out.push_str(&format!("{v},{},{},{},{},{},{}\n", s.phi, s.beta, s.mu1.value(), s.mu2, s.mu3, s.sigma));
    }
    out
}
