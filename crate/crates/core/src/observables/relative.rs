use crate::continuous::Trajectory;
use crate::graph::{Graph, NodeId};
use crate::phase::{ccw_displacement, Phase, Rat};

/// Relative phases `Lambda_v(t) = phi_v(t) + alpha(0) - t mod 1` at each
/// probe time, together with the activator position `alpha(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelativeView {
    pub alpha0: Phase,
    /// `(t, alpha(t), Lambda(t))` per probe.
    pub samples: Vec<(Rat, Phase, Vec<Phase>)>,
}

pub fn relative_view(traj: &Trajectory, alpha0: &Phase) -> RelativeView {
    let samples = traj
        .probes()
        .map(|(t, cfg)| {
            let shift = alpha0.value() - &t;
            let lambda = cfg.iter().map(|s| Phase::new(s.phi.value() + &shift)).collect();
            (t, Phase::new(shift), lambda)
        })
        .collect();
    RelativeView { alpha0: alpha0.clone(), samples }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayEvent {
    pub time: Rat,
    pub node: NodeId,
    pub blink: bool,
    /// Absolute phase before and after the instant (1 for a blinker).
    pub phi_before: Rat,
    pub phi_after: Rat,
}

/// Replays the 4-coupling purely in the relative circular representation:
/// relative phases stay constant except when a blinking neighbor `u` lies at
/// displacement `delta(v, u)` in `[1/4, 1/2]` (shift by `-1/4`) or in
/// `(0, 1/4)` (merge onto `u`). Nodes blink when the activator reaches them.
/// Works directly in [`Rat`] with no lattice.
pub fn relative_replay(g: &Graph, phases: &[Phase], alpha0: &Phase, horizon: &Rat) -> Vec<ReplayEvent> {
    let quarter = Rat::new(1, 4);
    let half = Rat::new(1, 2);
    let mut lambda: Vec<Phase> = phases.iter().map(|p| Phase::new(p.value() + alpha0.value())).collect();
    // Earliest time strictly after `now` at which the activator sits on `x`.
    let next_hit = |x: &Phase, now: &Rat| -> Rat {
        let base = (alpha0.value() - x.value()).fract_pos();
        let k = (now - &base).floor() + 1;
        base + Rat::from_big(k, 1.into())
    };
    let mut now = Rat::zero();
    let mut out = Vec::new();
    loop {
        let hits: Vec<Rat> = lambda.iter().map(|x| next_hit(x, &now)).collect();
        let t = hits.iter().min().cloned().expect("nonempty graph");
        if t > *horizon {
            break;
        }
        let alpha_t = Phase::new(alpha0.value() - &t);
        let blinking: Vec<bool> = hits.iter().map(|h| *h == t).collect();
        let abs = |x: &Phase| ccw_displacement(x, &alpha_t);
        let mut next = lambda.clone();
        for v in 0..lambda.len() {
            if blinking[v] {
                out.push(ReplayEvent {
                    time: t.clone(),
                    node: v,
                    blink: true,
                    phi_before: Rat::one(),
                    phi_after: Rat::zero(),
                });
                continue;
            }
            if !g.neighbors(v).iter().any(|&u| blinking[u]) {
                continue;
            }
            // Every blinking neighbor sits on the activator.
            let delta = ccw_displacement(&lambda[v], &alpha_t);
            let updated = if delta >= quarter && delta <= half {
                Phase::new(lambda[v].value() - &quarter)
            } else if delta > Rat::zero() && delta < quarter {
                alpha_t.clone()
            } else {
                continue;
            };
            out.push(ReplayEvent {
                time: t.clone(),
                node: v,
                blink: false,
                phi_before: abs(&lambda[v]),
                phi_after: abs(&updated),
            });
            next[v] = updated;
        }
        lambda = next;
        now = t;
    }
    out.sort_by(|a, b| (&a.time, !a.blink, a.node).cmp(&(&b.time, !b.blink, b.node)));
    out
}
