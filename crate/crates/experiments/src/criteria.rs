//! One function per scenario. Each returns per-run rows plus an aggregate
//! verdict; nothing here touches the file system.

use std::collections::HashMap;
use std::sync::Mutex;

use pco_core::continuous::{
    initial_standard, random_joint_config, random_phases, simulate, Coupling, EventKind, LogLevel, PullCountRule,
    SimOptions, Trajectory,
};
use pco_core::discrete::{
    detect_free_running, random_discrete_states, run_system, BeatSchedule, DiscreteRule, Recording, StopRule,
    SystemConfig,
};
use pco_core::graph::{
    make_complete, make_random_connected, make_star, make_torus_moore, make_tree_random, uniform_spanning_tree, Graph,
};
use pco_core::layered::{
    composite_run, is_distance2_proper, run_coloring, ColoringRule, ColoringState, CompositeConfig, CompositeInit,
    ReferenceTree,
};
use pco_core::observables::{
    blink_frequency_violation, covering_arc_width, frame_csv, frame_pgm, relative_replay, width, ReplayEvent,
};
use pco_core::phase::{JointState, Phase, Rat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::spec::{Algorithm, ExperimentSpec, GraphFamily, PullRule, Schedule};
use crate::workers::par_map;
use crate::ExpError;

/// A rendered heatmap frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub name: String,
    pub pgm: String,
    pub csv: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
    pub metrics: Value,
    pub rows: Vec<Value>,
    pub frames: Vec<Frame>,
}

type Res<T> = Result<T, ExpError>;

/// Seed of the named random stream `name` for run `seed`.
pub fn stream(seed: u64, name: &str) -> u64 {
    let h = Sha256::new().chain_update(name.as_bytes()).chain_update(seed.to_le_bytes()).finalize();
    u64::from_le_bytes(h[..8].try_into().expect("8 bytes"))
}

fn seeds(spec: &ExperimentSpec) -> Vec<u64> {
    (spec.seed_base..spec.seed_base + spec.seeds).collect()
}

fn parse_rat(s: &Option<String>, what: &str) -> Res<Option<Rat>> {
    s.as_deref().map(|t| t.parse::<Rat>().map_err(|e| ExpError::Spec(format!("{what}: {e}")))).transpose()
}

fn pull_rule(spec: &ExperimentSpec) -> PullCountRule {
    match spec.pull_rule {
        PullRule::AsWritten => PullCountRule::AsWritten,
        PullRule::RunningCount => PullCountRule::RunningCount,
    }
}

fn modulus(spec: &ExperimentSpec) -> u32 {
    spec.m.unwrap_or(64)
}

fn row<T: Serialize>(r: &T) -> Value {
    serde_json::to_value(r).expect("plain row")
}

fn pick_n(spec: &ExperimentSpec, seed: u64) -> usize {
    let (lo, hi) = (spec.graph.n_min.max(1), spec.graph.n_max.max(spec.graph.n_min.max(1)));
    ChaCha8Rng::seed_from_u64(stream(seed, "size")).gen_range(lo..=hi)
}

/// The per-seed random graph of `spec`.
pub fn seeded_graph(spec: &ExperimentSpec, seed: u64) -> Res<Graph> {
    let n = pick_n(spec, seed);
    let cap = spec.graph.max_degree.unwrap_or(n).max(2);
    match spec.graph.family {
        GraphFamily::RandomTree => Ok(make_tree_random(n, cap, stream(seed, "graph"))?),
        GraphFamily::RandomConnected => {
            let extra = ChaCha8Rng::seed_from_u64(stream(seed, "chords")).gen_range(0..=n);
            Ok(make_random_connected(n, extra, cap, stream(seed, "graph"))?)
        }
        f => Err(ExpError::Spec(format!("graph family {f:?} is not a per-seed random family"))),
    }
}

fn diameter(g: &Graph) -> usize {
    g.diameter().expect("generated graphs are connected")
}

fn options(spec: &ExperimentSpec, log: LogLevel) -> SimOptions {
    let coupling = match spec.algorithm {
        Algorithm::FourCoupling => Coupling::FourCoupling,
        _ => Coupling::AdaptiveFourCoupling,
    };
    SimOptions::new(coupling).with_rule(pull_rule(spec)).with_log(log)
}

fn count<'a>(rows: impl IntoIterator<Item = &'a Value>, key: &str) -> usize {
    rows.into_iter().filter(|r| r[key] == Value::Bool(true)).count()
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        (xs[k / 2 - 1] + xs[k / 2]) / 2.0
    }
}

// ---------------------------------------------------------------------------
// Continuous dynamics

/// Star with 4 leaves, center and leaves arranged so that the center is
/// pulled back before every blink.
pub fn star_counterexample(spec: &ExperimentSpec) -> Res<Outcome> {
    let k = spec.graph.sizes.first().copied().unwrap_or(4);
    let g = make_star(k)?;
    let mut phases = vec![Phase::from_frac(1, 4)];
    phases.extend((0..k).map(|i| Phase::from_frac(((i + 1) % 4) as i64, 4)));
    let horizon = parse_rat(&spec.horizon, "horizon")?.unwrap_or(Rat::integer(100));
    let every = parse_rat(&spec.probe_every, "probe_every")?.unwrap_or(Rat::new(1, 4));
    let probes = probe_grid(&horizon, &every);
    let traj = simulate(&g, &initial_standard(&phases), &options(spec, LogLevel::Phase), &horizon, &probes)?;
    let center_blinks = traj.blink_count(0);
    let min_width = traj.probes().map(|(_, c)| width(&c.iter().map(|j| j.phi.clone()).collect::<Vec<_>>()).width).min();
    let passed = center_blinks == 0 && traj.sync_time().is_none() && min_width.as_ref().is_some_and(|w| !w.is_zero());
    let leaf_blinks: Vec<u64> = (1..=k).map(|v| traj.blink_count(v)).collect();
    let r = json!({"center_blinks": center_blinks, "leaf_blinks": leaf_blinks, "horizon": horizon.to_string(),
        "min_probed_width": min_width.as_ref().map(Rat::to_string), "sync_time": traj.sync_time().map(|t| t.to_string())});
    Ok(Outcome {
        passed,
        summary: format!(
            "center blinks {center_blinks} over [0, {horizon}], min probed width {}",
            min_width.map_or("-".into(), |w| w.to_string())
        ),
        metrics: r.clone(),
        rows: vec![r],
        frames: Vec::new(),
    })
}

fn probe_grid(horizon: &Rat, every: &Rat) -> Vec<Rat> {
    let mut out = Vec::new();
    let mut t = Rat::zero();
    while t <= *horizon {
        out.push(t.clone());
        t = &t + every;
    }
    out
}

#[derive(Serialize)]
struct TreeRow {
    seed: u64,
    n: usize,
    diameter: usize,
    max_degree: usize,
    bound: String,
    sync_time: Option<String>,
    within_bound: bool,
    blink_violation: Option<String>,
}

fn tree_bound_row(spec: &ExperimentSpec, seed: u64) -> Res<Value> {
    let g = seeded_graph(spec, seed)?;
    let n = g.node_count();
    let d = diameter(&g) as i64;
    let delta = g.max_degree();
    let init = match spec.algorithm {
        Algorithm::FourCoupling => initial_standard(&random_phases(n, 64, stream(seed, "phases"))),
        _ => random_joint_config(&g, 64, stream(seed, "init"))?,
    };
    let c = match spec.algorithm {
        Algorithm::FourCoupling => 51,
        _ => 51 + if delta >= 4 { 32 } else { 0 },
    };
    let bound = Rat::integer(c * d);
    let slack = parse_rat(&spec.horizon, "horizon")?.unwrap_or(Rat::integer(6));
    let horizon = (&bound + &slack).max(Rat::integer(6));
    let traj = simulate(&g, &init, &options(spec, LogLevel::Phase).stopping_after_sync(), &horizon, &[])?;
    let sync = traj.sync_time();
    Ok(row(&TreeRow {
        seed,
        n,
        diameter: d as usize,
        max_degree: delta,
        bound: bound.to_string(),
        within_bound: sync.as_ref().is_some_and(|t| *t <= bound),
        sync_time: sync.map(|t| t.to_string()),
        blink_violation: blink_frequency_violation(&traj).map(|(v, s)| format!("node {v}: {s}")),
    }))
}

static ROW_CACHE: Mutex<Option<HashMap<String, Vec<Value>>>> = Mutex::new(None);

/// Per-seed rows, memoized by spec hash so that the blink-frequency check
/// can reuse the trajectories' verdicts of the bound scenarios.
fn cached_rows(spec: &ExperimentSpec, f: fn(&ExperimentSpec, u64) -> Res<Value>) -> Res<Vec<Value>> {
    let key = spec.hash();
    if let Some(rows) = ROW_CACHE.lock().expect("cache").get_or_insert_with(HashMap::new).get(&key) {
        return Ok(rows.clone());
    }
    let rows = par_map(seeds(spec), |s| f(spec, s)).into_iter().collect::<Res<Vec<_>>>()?;
    ROW_CACHE.lock().expect("cache").get_or_insert_with(HashMap::new).insert(key, rows.clone());
    Ok(rows)
}

/// Every run synchronizes within `C * d`.
pub fn tree_bound(spec: &ExperimentSpec) -> Res<Outcome> {
    let rows = cached_rows(spec, tree_bound_row)?;
    let ok = count(&rows, "within_bound");
    let worst = rows
        .iter()
        .filter_map(|r| {
            let t: Rat = r["sync_time"].as_str()?.parse().ok()?;
            let d = r["diameter"].as_i64()?.max(1);
            Some((t.to_f64() / d as f64, r["seed"].as_u64()?))
        })
        .max_by(|a, b| a.0.total_cmp(&b.0));
    let max_ratio = worst.map_or(0.0, |w| w.0);
    Ok(Outcome {
        passed: ok == rows.len(),
        summary: format!("{ok}/{} within bound; max sync_time/d = {max_ratio:.3}", rows.len()),
        metrics: json!({"runs": rows.len(), "within_bound": ok, "max_sync_over_diameter": max_ratio,
            "worst_seed": worst.map(|w| w.1)}),
        rows,
        frames: Vec::new(),
    })
}

#[derive(Serialize)]
struct WidthRow {
    seed: u64,
    n: usize,
    diameter: usize,
    narrow_probes: usize,
    checked: usize,
    violations: usize,
    first_violation: Option<String>,
    pairwise_narrow_not_synced: usize,
    sync_time: Option<String>,
    blink_violation: Option<String>,
}

/// Covering arc below 1/2 at a probe forces width 0 exactly `7d` later.
fn width_lemma_row(spec: &ExperimentSpec, seed: u64) -> Res<Value> {
    let g = seeded_graph(spec, seed)?;
    let d = diameter(&g) as i64;
    let init = random_joint_config(&g, 64, stream(seed, "init"))?;
    let slack = parse_rat(&spec.horizon, "horizon")?.unwrap_or(Rat::integer(40));
    let horizon = &Rat::integer(7 * d) + &slack;
    let every = parse_rat(&spec.probe_every, "probe_every")?.unwrap_or(Rat::new(1, 4));
    let traj = simulate(&g, &init, &options(spec, LogLevel::Phase), &horizon, &probe_grid(&horizon, &every))?;
    let cfgs: Vec<(Rat, Vec<Phase>)> =
        traj.probes().map(|(t, js)| (t, js.into_iter().map(|j| j.phi).collect())).collect();
    let at: HashMap<String, usize> = cfgs.iter().enumerate().map(|(i, (t, _))| (t.to_string(), i)).collect();
    let half = Rat::new(1, 2);
    let lag = Rat::integer(7 * d);
    let (mut narrow, mut checked, mut violations, mut pairwise_bad) = (0, 0, 0, 0);
    let mut first = None;
    for (t, cfg) in &cfgs {
        let later = at.get(&(t + &lag).to_string()).map(|&i| &cfgs[i].1);
        if covering_arc_width(cfg) < half {
            narrow += 1;
            if let Some(c) = later {
                checked += 1;
                if !width(c).width.is_zero() {
                    violations += 1;
                    first.get_or_insert_with(|| format!("narrow at {t}, width {} at {}", width(c).width, t + &lag));
                }
            }
        } else if width(cfg).width < half && later.is_some_and(|c| !width(c).width.is_zero()) {
            pairwise_bad += 1;
        }
    }
    Ok(row(&WidthRow {
        seed,
        n: g.node_count(),
        diameter: d as usize,
        narrow_probes: narrow,
        checked,
        violations,
        first_violation: first,
        pairwise_narrow_not_synced: pairwise_bad,
        sync_time: traj.sync_time().map(|t| t.to_string()),
        blink_violation: blink_frequency_violation(&traj).map(|(v, s)| format!("node {v}: {s}")),
    }))
}

pub fn width_lemma(spec: &ExperimentSpec) -> Res<Outcome> {
    let rows = cached_rows(spec, width_lemma_row)?;
    let sum = |k: &str| rows.iter().map(|r| r[k].as_u64().unwrap_or(0)).sum::<u64>();
    let (checked, violations, pairwise) = (sum("checked"), sum("violations"), sum("pairwise_narrow_not_synced"));
    Ok(Outcome {
        passed: violations == 0 && checked > 0,
        summary: format!(
            "{checked} narrow probes checked over {} runs, {violations} violations \
             ({pairwise} probes with pairwise width < 1/2 but wide covering arc did not sync)",
            rows.len()
        ),
        metrics: json!({"runs": rows.len(), "checked": checked, "violations": violations,
            "pairwise_only_counterexamples": pairwise}),
        rows,
        frames: Vec::new(),
    })
}

/// Blink frequency on the trajectories of the three bound scenarios.
pub fn blink_frequency(spec: &ExperimentSpec) -> Res<Outcome> {
    let mut rows = Vec::new();
    for (name, f) in [
        ("theorem-tree-51d", tree_bound_row as fn(&ExperimentSpec, u64) -> Res<Value>),
        ("theorem-tree-83d", tree_bound_row),
        ("width-lemma", width_lemma_row),
    ] {
        let mut src = crate::scenarios::default_spec(name)?;
        src.seeds = spec.seeds;
        src.seed_base = spec.seed_base;
        for r in cached_rows(&src, f)? {
            rows.push(json!({"source": name, "seed": r["seed"], "blink_violation": r["blink_violation"]}));
        }
    }
    let bad: Vec<&Value> = rows.iter().filter(|r| !r["blink_violation"].is_null()).collect();
    Ok(Outcome {
        passed: bad.is_empty(),
        summary: format!("{} trajectories, {} violations", rows.len(), bad.len()),
        metrics: json!({"trajectories": rows.len(), "violations": bad.len(),
            "first_violation": bad.first().map(|r| (*r).clone())}),
        rows,
        frames: Vec::new(),
    })
}

/// Complete graphs with node `i` at `phases[i % len]`.
pub fn kn_periodic(spec: &ExperimentSpec, phases: &[Phase]) -> Res<Outcome> {
    let horizon = parse_rat(&spec.horizon, "horizon")?.unwrap_or(Rat::integer(50));
    let period = Rat::integer(5);
    let mut rows = Vec::new();
    for &n in &spec.graph.sizes {
        let g = make_complete(n)?;
        let init: Vec<Phase> = (0..n).map(|i| phases[i % phases.len()].clone()).collect();
        let traj = simulate(
            &g,
            &initial_standard(&init),
            &options(spec, LogLevel::Off),
            &horizon,
            &[Rat::zero(), period.clone()],
        )?;
        let snaps: Vec<Vec<JointState>> = traj.probes().map(|(_, c)| c).collect();
        let periodic = snaps.len() == 2 && snaps[0] == snaps[1];
        let at5: Vec<String> = snaps.get(1).map_or(Vec::new(), |c| c.iter().map(|j| j.phi.to_string()).collect());
        rows.push(json!({"n": n, "config_at_5": at5, "returns_at_5": periodic,
            "sync_time": traj.sync_time().map(|t| t.to_string())}));
    }
    let ok = rows.iter().filter(|r| r["returns_at_5"] == Value::Bool(true) && r["sync_time"].is_null()).count();
    let phases_s: Vec<String> = phases.iter().map(Phase::to_string).collect();
    Ok(Outcome {
        passed: ok == rows.len() && !rows.is_empty(),
        summary: format!(
            "phases {{{}}}: {ok}/{} cliques periodic and unsynchronized over [0, {horizon}]",
            phases_s.join(", "),
            rows.len()
        ),
        metrics: json!({"phases": phases_s, "cliques": rows.len(), "periodic_unsynchronized": ok}),
        rows,
        frames: Vec::new(),
    })
}

/// The adaptive rule leaves standard-initialized `Delta <= 3` trees on the
/// plain 4-coupling trajectory.
pub fn adaptive_restriction(spec: &ExperimentSpec) -> Res<Outcome> {
    let horizon = parse_rat(&spec.horizon, "horizon")?.unwrap_or(Rat::integer(60));
    let rule = pull_rule(spec);
    let rows = par_map(seeds(spec), |seed| -> Res<Value> {
        let g = seeded_graph(spec, seed)?;
        let init = initial_standard(&random_phases(g.node_count(), 64, stream(seed, "phases")));
        let log = |c| -> Res<Vec<_>> {
            let opts = SimOptions::new(c).with_rule(rule).with_log(LogLevel::Phase);
            let t = simulate(&g, &init, &opts, &horizon, &[])?;
            Ok(t.phase_events().map(|e| (e.tick, e.node, e.kind, e.before.phi, e.after.phi)).collect())
        };
        let (a, b) = (log(Coupling::AdaptiveFourCoupling)?, log(Coupling::FourCoupling)?);
        let first_diff =
            a.iter().zip(&b).position(|(x, y)| x != y).or((a.len() != b.len()).then(|| a.len().min(b.len())));
        Ok(json!({"seed": seed, "n": g.node_count(), "max_degree": g.max_degree(), "events": a.len(),
            "identical": first_diff.is_none(), "first_difference": first_diff}))
    })
    .into_iter()
    .collect::<Res<Vec<_>>>()?;
    let ok = count(&rows, "identical");
    let events: u64 = rows.iter().map(|r| r["events"].as_u64().unwrap_or(0)).sum();
    Ok(Outcome {
        passed: ok == rows.len(),
        summary: format!("{ok}/{} phase logs identical ({events} events)", rows.len()),
        metrics: json!({"runs": rows.len(), "identical": ok, "events": events}),
        rows,
        frames: Vec::new(),
    })
}

fn replay_of(traj: &Trajectory) -> Vec<ReplayEvent> {
    traj.phase_events()
        .map(|e| ReplayEvent {
            time: traj.time(e.tick),
            node: e.node,
            blink: e.kind == EventKind::Blink,
            phi_before: traj.time(e.before.phi),
            phi_after: traj.time(e.after.phi),
        })
        .collect()
}

/// Jumps recomputed in the relative frame match the engine's log.
pub fn relative_representation(spec: &ExperimentSpec) -> Res<Outcome> {
    let horizon = parse_rat(&spec.horizon, "horizon")?.unwrap_or(Rat::integer(20));
    let rows = par_map(seeds(spec), |seed| -> Res<Value> {
        let g = seeded_graph(spec, seed)?;
        let phases = random_phases(g.node_count(), 64, stream(seed, "phases"));
        let alpha0 = Phase::from_frac(ChaCha8Rng::seed_from_u64(stream(seed, "alpha")).gen_range(0..7), 7);
        let opts = SimOptions::new(Coupling::FourCoupling).with_log(LogLevel::Phase);
        let traj = simulate(&g, &initial_standard(&phases), &opts, &horizon, &[])?;
        let (engine, replay) = (replay_of(&traj), relative_replay(&g, &phases, &alpha0, &horizon));
        Ok(json!({"seed": seed, "n": g.node_count(), "alpha0": alpha0.to_string(), "events": engine.len(),
            "identical": engine == replay}))
    })
    .into_iter()
    .collect::<Res<Vec<_>>>()?;
    let ok = count(&rows, "identical");
    Ok(Outcome {
        passed: ok == rows.len(),
        summary: format!("{ok}/{} relative replays identical to the engine log", rows.len()),
        metrics: json!({"runs": rows.len(), "identical": ok}),
        rows,
        frames: Vec::new(),
    })
}

/// Adaptive 4-coupling on random trees under both pull-count rules.
pub fn pull_rule_comparison(spec: &ExperimentSpec) -> Res<Outcome> {
    let mut by_rule = Vec::new();
    let mut rows = Vec::new();
    for rule in [PullRule::RunningCount, PullRule::AsWritten] {
        let mut s = spec.clone();
        s.pull_rule = rule;
        let rs = cached_rows(&s, tree_bound_row)?;
        let ok = count(&rs, "within_bound");
        let synced = rs.iter().filter(|r| !r["sync_time"].is_null()).count();
        by_rule.push(json!({"rule": rule, "runs": rs.len(), "within_bound": ok, "synchronized": synced}));
        rows.extend(rs.into_iter().map(|mut r| {
            r["rule"] = json!(rule);
            r
        }));
    }
    let running_ok = by_rule[0]["within_bound"] == by_rule[0]["runs"];
    Ok(Outcome {
        passed: running_ok,
        summary: format!(
            "running-count {}/{} within bound; as-written {}/{} within bound",
            by_rule[0]["within_bound"], by_rule[0]["runs"], by_rule[1]["within_bound"], by_rule[1]["runs"]
        ),
        metrics: json!({"rules": by_rule}),
        rows,
        frames: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Discrete automaton and the layered stack

fn schedules(spec: &ExperimentSpec) -> Vec<bool> {
    match spec.schedule {
        Schedule::Synchronous => vec![true],
        Schedule::Asynchronous => vec![false],
        Schedule::Both => vec![true, false],
    }
}

fn beat_schedule(n: usize, m: u32, synchronous: bool, seed: u64) -> BeatSchedule {
    let eps = Rat::new(1, m as i64);
    if synchronous {
        BeatSchedule::synchronous(n, eps)
    } else {
        BeatSchedule::asynchronous(n, eps, 8, stream(seed, "schedule"))
    }
}

#[derive(Serialize)]
struct ClockRow {
    seed: u64,
    synchronous: bool,
    n: usize,
    diameter: usize,
    beats_run: u64,
    free_running_from: Option<u64>,
    /// `t0 / (M d)`.
    fitted_c: Option<f64>,
    max_offset_after: Option<u32>,
    ok: bool,
}

fn clock_row(spec: &ExperimentSpec, seed: u64, synchronous: bool) -> Res<ClockRow> {
    let g = seeded_graph(spec, seed)?;
    let (n, d) = (g.node_count(), diameter(&g).max(1) as u64);
    let m = modulus(spec);
    let mm = m as u64;
    let slack = parse_rat(&spec.horizon, "horizon")?.map_or(0, |h| h.floor().try_into().unwrap_or(0u64));
    let horizon = 200 * mm * d + 5 * mm + 3 + slack;
    let mut cfg = SystemConfig::new(m, beat_schedule(n, m, synchronous, seed), horizon);
    cfg.rule = DiscreteRule::Adaptive(pull_rule(spec));
    cfg.stop = StopRule::AfterFreeRunning { extra_beats: 4 * mm + 2 };
    cfg.record = Recording { offsets: true, ..Recording::default() };
    let trace = run_system(&g, &cfg, &random_discrete_states(&g, m, stream(seed, "init")))?;
    let t0 = detect_free_running(&trace);
    let from = t0.map(|t| t + 3 * mm + 1);
    let max_after =
        from.filter(|&f| f < trace.beats_run).and_then(|f| trace.offsets[f as usize..].iter().copied().max());
    let limit = if synchronous { 0 } else { 1 };
    Ok(ClockRow {
        seed,
        synchronous,
        n,
        diameter: d as usize,
        beats_run: trace.beats_run,
        free_running_from: t0,
        fitted_c: t0.map(|t| t as f64 / (mm * d) as f64),
        max_offset_after: max_after,
        ok: max_after.is_some_and(|o| o <= limit),
    })
}

/// Offset bound once the clocks run free.
pub fn a4cm_offset(spec: &ExperimentSpec) -> Res<Outcome> {
    let jobs: Vec<(u64, bool)> =
        seeds(spec).into_iter().flat_map(|s| schedules(spec).into_iter().map(move |b| (s, b))).collect();
    let rows: Vec<ClockRow> = par_map(jobs, |(s, b)| clock_row(spec, s, b)).into_iter().collect::<Res<_>>()?;
    let ok = rows.iter().filter(|r| r.ok).count();
    let worst = |sync: bool| rows.iter().filter(|r| r.synchronous == sync).filter_map(|r| r.max_offset_after).max();
    Ok(Outcome {
        passed: ok == rows.len(),
        summary: format!(
            "{ok}/{} runs within the offset bound; worst offset sync {:?}, async {:?}",
            rows.len(),
            worst(true),
            worst(false)
        ),
        metrics: json!({"runs": rows.len(), "ok": ok, "worst_sync": worst(true), "worst_async": worst(false)}),
        rows: rows.iter().map(row).collect(),
        frames: Vec::new(),
    })
}

/// Free-running within `C M d` beats from arbitrary states, `C` fitted.
pub fn a4cm_convergence(spec: &ExperimentSpec) -> Res<Outcome> {
    let jobs: Vec<(u64, bool)> =
        seeds(spec).into_iter().flat_map(|s| schedules(spec).into_iter().map(move |b| (s, b))).collect();
    let rows: Vec<ClockRow> = par_map(jobs, |(s, b)| clock_row(spec, s, b)).into_iter().collect::<Res<_>>()?;
    let certified = rows.iter().filter(|r| r.free_running_from.is_some()).count();
    let c = rows.iter().filter_map(|r| r.fitted_c).fold(0.0, f64::max);
    let med = median(rows.iter().filter_map(|r| r.fitted_c).collect());
    Ok(Outcome {
        passed: certified == rows.len() && c <= 200.0,
        summary: format!("{certified}/{} runs free-running; fitted C = {c:.3} (median {med:.3})", rows.len()),
        metrics: json!({"runs": rows.len(), "free_running": certified, "fitted_c": c, "median_c": med}),
        rows: rows.iter().map(row).collect(),
        frames: Vec::new(),
    })
}

/// Distance-2 coloring from arbitrary color states.
pub fn distance2_coloring(spec: &ExperimentSpec) -> Res<Outcome> {
    let horizon =
        parse_rat(&spec.horizon, "horizon")?.map_or(1_000_000, |h| h.floor().try_into().unwrap_or(1_000_000u64));
    let rows = par_map(seeds(spec), |seed| -> Res<Value> {
        let g = seeded_graph(spec, seed)?;
        let n = g.node_count();
        let delta = g.max_degree() as u32;
        let palette = delta * delta;
        let mut rng = ChaCha8Rng::seed_from_u64(stream(seed, "colors"));
        let init: Vec<ColoringState> =
            (0..n).map(|_| ColoringState::arbitrary(&mut rng, palette, delta as u16)).collect();
        let run = run_coloring(&g, init, ColoringRule::ConflictAware, stream(seed, "coins"), horizon, false);
        let proper = is_distance2_proper(&g, &run.colors);
        let max_color = run.colors.iter().copied().max().unwrap_or(0);
        let scale = (delta * delta).max(1) as f64 * (n.max(2) as f64).ln();
        Ok(json!({"seed": seed, "n": n, "max_degree": delta, "silent_at": run.silent_at, "proper_on_square": proper,
            "max_color": max_color, "colors_used": run.colors.iter().collect::<std::collections::BTreeSet<_>>().len(),
            "beats_over_delta2_log_n": run.silent_at.map(|b| b as f64 / scale),
            "ok": run.silent_at.is_some() && proper && max_color <= palette}))
    })
    .into_iter()
    .collect::<Res<Vec<_>>>()?;
    let ok = count(&rows, "ok");
    let beats = median(rows.iter().filter_map(|r| r["silent_at"].as_f64()).collect());
    let ratio = median(rows.iter().filter_map(|r| r["beats_over_delta2_log_n"].as_f64()).collect());
    Ok(Outcome {
        passed: ok == rows.len(),
        summary: format!(
            "{ok}/{} colorings proper on G^2 within Delta^2+1 colors; median {beats} beats, \
             median beats/(Delta^2 ln n) = {ratio:.3}",
            rows.len()
        ),
        metrics: json!({"runs": rows.len(), "ok": ok, "median_beats": beats, "median_ratio": ratio}),
        rows,
        frames: Vec::new(),
    })
}

/// Coloring, spanning tree and clocks from arbitrary states.
pub fn composite_stack(spec: &ExperimentSpec) -> Res<Outcome> {
    let m = modulus(spec);
    let mm = m as u64;
    let jobs: Vec<(u64, bool)> =
        seeds(spec).into_iter().flat_map(|s| schedules(spec).into_iter().map(move |b| (s, b))).collect();
    let rows = par_map(jobs, |(seed, synchronous)| -> Res<Value> {
        let g = seeded_graph(spec, seed)?;
        let n = g.node_count();
        let horizon = 200 * mm * n as u64 + 100_000;
        let cfg = CompositeConfig::new(&g, m, beat_schedule(n, m, synchronous, seed), horizon);
        let tree = ReferenceTree { dist_bound: n as u32 };
        let init = CompositeInit::arbitrary(&g, &cfg, &tree, stream(seed, "init"));
        let run = composite_run(&g, &tree, &cfg, init, stream(seed, "coins"))?;
        let r = &run.report;
        let from = r.a4cm_beats.map(|t| t + 3 * mm + 1);
        let after = from.filter(|&f| f < run.beats_run).and_then(|f| run.offset_after(f));
        let limit = if synchronous { 0 } else { 1 };
        Ok(json!({"seed": seed, "synchronous": synchronous, "n": n, "max_degree": g.max_degree(),
            "coloring_beats": r.coloring_beats, "tree_beats": r.tree_beats, "a4cm_beats": r.a4cm_beats,
            "overlay_diameter": r.overlay_diameter, "max_offset_after": after,
            "ok": r.coloring_beats.is_some() && r.tree_beats.is_some() && after.is_some_and(|o| o <= limit)}))
    })
    .into_iter()
    .collect::<Res<Vec<_>>>()?;
    let ok = count(&rows, "ok");
    let med = |k: &str| median(rows.iter().filter_map(|r| r[k].as_f64()).collect());
    Ok(Outcome {
        passed: ok == rows.len(),
        summary: format!(
            "{ok}/{} stacks converged with bounded offset; median beats coloring {}, tree {}, clocks {}",
            rows.len(),
            med("coloring_beats"),
            med("tree_beats"),
            med("a4cm_beats")
        ),
        metrics: json!({"runs": rows.len(), "ok": ok, "median_coloring_beats": med("coloring_beats"),
            "median_tree_beats": med("tree_beats"), "median_a4cm_beats": med("a4cm_beats")}),
        rows,
        frames: Vec::new(),
    })
}

#[derive(Serialize)]
struct TorusRow {
    side: usize,
    seed: u64,
    ust_diameter: usize,
    free_running_from: Option<u64>,
    /// First round from which all phases agree.
    sync_beat: Option<u64>,
    sync_seconds: Option<f64>,
}

/// Least-squares line `y = a + b x`; returns `(b, a, r2)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (b, my - b * mx, r2)
}

/// A4C/M on uniform spanning trees of Moore tori, one oscillation cycle
/// (M beats) per second.
pub fn figure1_torus(spec: &ExperimentSpec) -> Res<Outcome> {
    let m = modulus(spec);
    let mm = m as u64;
    let sides = spec.graph.sizes.clone();
    let frame_side = sides.iter().copied().max().unwrap_or(0);
    let jobs: Vec<(usize, u64)> = sides.iter().flat_map(|&w| seeds(spec).into_iter().map(move |s| (w, s))).collect();
    let rule = pull_rule(spec);
    let want_frames = spec.output.frames;
    let results = par_map(jobs, |(w, seed)| -> Res<(TorusRow, Vec<Frame>)> {
        let torus = make_torus_moore(w, w)?;
        let tree = uniform_spanning_tree(&torus, stream(seed, &format!("ust-{w}")))?;
        let d = diameter(&tree) as u64;
        let mut cfg =
            SystemConfig::new(m, BeatSchedule::synchronous(w * w, Rat::new(1, m as i64)), 200 * mm * d + 5 * mm + 3);
        cfg.rule = DiscreteRule::Adaptive(rule);
        cfg.stop = StopRule::AfterFreeRunning { extra_beats: 4 * mm + 2 };
        let framed = want_frames && w == frame_side && seed == spec.seed_base;
        cfg.record = Recording {
            offsets: true,
            frames: if framed { [0, 1, 4, 16, 64, 256].iter().map(|s| s * mm).collect() } else { Vec::new() },
            ..Recording::default()
        };
        let trace = run_system(&tree, &cfg, &random_discrete_states(&tree, m, stream(seed, &format!("init-{w}"))))?;
        let t0 = detect_free_running(&trace);
        let synced_at_end = trace.offsets.last() == Some(&0);
        let sync_beat = (t0.is_some() && synced_at_end)
            .then(|| trace.offsets.iter().rposition(|&o| o > 0).map_or(0, |k| k as u64 + 1));
        let mut frames = Vec::new();
        let mut shots = trace.frames.clone();
        shots.push((trace.beats_run, trace.final_states.iter().map(|s| s.phi).collect()));
        if framed {
            for (k, phis) in &shots {
                frames.push(Frame {
                    name: format!("torus{w}_seed{seed}_beat{k:06}"),
                    pgm: frame_pgm(phis, w, w, m - 1),
                    csv: frame_csv(phis, w),
                });
            }
        }
        Ok((
            TorusRow {
                side: w,
                seed,
                ust_diameter: d as usize,
                free_running_from: t0,
                sync_beat,
                sync_seconds: sync_beat.map(|b| b as f64 / mm as f64),
            },
            frames,
        ))
    })
    .into_iter()
    .collect::<Res<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut frames = Vec::new();
    for (r, f) in results {
        rows.push(r);
        frames.extend(f);
    }
    let synced = rows.iter().filter(|r| r.sync_beat.is_some()).count();
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter_map(|r| Some((r.ust_diameter as f64, r.sync_seconds?))).unzip();
    let (slope, intercept, r2) = if xs.len() >= 2 { linear_fit(&xs, &ys) } else { (0.0, 0.0, 0.0) };
    let per_side: Vec<Value> = sides
        .iter()
        .map(|&w| {
            let sel: Vec<&TorusRow> = rows.iter().filter(|r| r.side == w).collect();
            json!({"side": w,
                "median_ust_diameter": median(sel.iter().map(|r| r.ust_diameter as f64).collect()),
                "median_sync_seconds": median(sel.iter().filter_map(|r| r.sync_seconds).collect())})
        })
        .collect();
    let passed = synced == rows.len() && slope > 0.0 && r2 >= 0.8 && (!want_frames || !frames.is_empty());
    Ok(Outcome {
        passed,
        summary: format!(
            "{synced}/{} runs synchronized; sync seconds ~ {slope:.4} * diameter + {intercept:.2}, R^2 = {r2:.3}",
            rows.len()
        ),
        metrics: json!({"runs": rows.len(), "synchronized": synced, "slope": slope, "intercept": intercept,
            "r2": r2, "per_side": per_side, "frames": frames.len()}),
        rows: rows.iter().map(row).collect(),
        frames,
    })
}
