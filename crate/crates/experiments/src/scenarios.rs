use pco_core::phase::Phase;

use crate::criteria::{self, Outcome};
use crate::spec::{Algorithm, ExperimentSpec, GraphFamily, GraphSpec, OutputSpec, PullRule, Schedule};
use crate::ExpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioInfo {
    pub name: &'static str,
    /// Acceptance criterion this scenario decides, if any.
    pub criterion: Option<u8>,
    pub title: &'static str,
}

const CATALOG: &[ScenarioInfo] = &[
    ScenarioInfo { name: "star-counterexample", criterion: Some(1), title: "star with 4 leaves never synchronizes" },
    ScenarioInfo { name: "theorem-tree-51d", criterion: Some(2), title: "4-coupling trees, max degree 3: sync by 51d" },
    ScenarioInfo {
        name: "theorem-tree-83d",
        criterion: Some(3),
        title: "adaptive trees, arbitrary states: sync by C_Delta d",
    },
    ScenarioInfo { name: "width-lemma", criterion: Some(4), title: "narrow configuration synchronizes within 7d" },
    ScenarioInfo {
        name: "blink-frequency",
        criterion: Some(5),
        title: "one blink per unit at most, one per 5 units at least",
    },
    ScenarioInfo { name: "kn-periodic", criterion: Some(6), title: "complete graphs on {0, 1/4, 5/8} are periodic" },
    ScenarioInfo {
        name: "adaptive-restriction",
        criterion: Some(7),
        title: "adaptive equals 4-coupling on max degree 3 trees",
    },
    ScenarioInfo {
        name: "relative-representation",
        criterion: Some(8),
        title: "relative frame reproduces the event log",
    },
    ScenarioInfo { name: "a4cm-offset", criterion: Some(9), title: "A4C/M offset after free-running" },
    ScenarioInfo { name: "a4cm-tree-convergence", criterion: Some(10), title: "A4C/M free-running within C M d beats" },
    ScenarioInfo {
        name: "distance2-coloring",
        criterion: Some(11),
        title: "distance-2 coloring from arbitrary states",
    },
    ScenarioInfo { name: "composite-stack", criterion: Some(12), title: "coloring + tree + A4C/M converge" },
    ScenarioInfo {
        name: "figure1-torus",
        criterion: Some(13),
        title: "A4C/M on torus spanning trees, sync ~ diameter",
    },
    ScenarioInfo { name: "kn-periodic-corrected", criterion: None, title: "periodic K3 orbit (1/16, 1/4, 5/8)" },
    ScenarioInfo { name: "pull-rule-comparison", criterion: None, title: "adaptive trees under both pull-count rules" },
];

pub fn catalog() -> &'static [ScenarioInfo] {
    CATALOG
}

pub fn scenario_info(name: &str) -> Result<&'static ScenarioInfo, ExpError> {
    CATALOG.iter().find(|s| s.name == name).ok_or_else(|| ExpError::UnknownScenario(name.to_string()))
}

fn graph(family: GraphFamily, n_min: usize, n_max: usize, max_degree: Option<usize>) -> GraphSpec {
    GraphSpec { family, n_min, n_max, max_degree, sizes: Vec::new() }
}

fn sized(family: GraphFamily, sizes: &[usize]) -> GraphSpec {
    GraphSpec { family, n_min: 0, n_max: 0, max_degree: None, sizes: sizes.to_vec() }
}

/// The spec each scenario runs with when none is given.
pub fn default_spec(name: &str) -> Result<ExperimentSpec, ExpError> {
    scenario_info(name)?;
    let base = |algorithm, seeds, graph| ExperimentSpec {
        scenario: name.to_string(),
        algorithm,
        pull_rule: PullRule::RunningCount,
        seeds,
        seed_base: 0,
        m: None,
        schedule: Schedule::Synchronous,
        horizon: None,
        probe_every: None,
        graph,
        output: OutputSpec::default(),
    };
    use Algorithm::*;
    use GraphFamily::*;
    let spec = match name {
        "star-counterexample" => ExperimentSpec {
            horizon: Some("100".into()),
            probe_every: Some("1/4".into()),
            ..base(FourCoupling, 1, sized(Star, &[4]))
        },
        "theorem-tree-51d" => base(FourCoupling, 200, graph(RandomTree, 2, 64, Some(3))),
        "theorem-tree-83d" | "pull-rule-comparison" => base(Adaptive, 200, graph(RandomTree, 2, 64, None)),
        "width-lemma" => ExperimentSpec {
            probe_every: Some("1/4".into()),
            ..base(Adaptive, 200, graph(RandomConnected, 2, 40, None))
        },
        "blink-frequency" => base(Adaptive, 200, graph(RandomTree, 2, 64, None)),
        "kn-periodic" | "kn-periodic-corrected" => ExperimentSpec {
            horizon: Some("50".into()),
            ..base(FourCoupling, 1, sized(Complete, if name == "kn-periodic" { &[3, 4, 6] } else { &[3] }))
        },
        "adaptive-restriction" => base(Adaptive, 50, graph(RandomTree, 2, 64, Some(3))),
        "relative-representation" => base(FourCoupling, 50, graph(RandomConnected, 2, 30, None)),
        "a4cm-offset" => {
            ExperimentSpec { m: Some(64), schedule: Schedule::Both, ..base(A4cm, 50, graph(RandomTree, 2, 64, None)) }
        }
        "a4cm-tree-convergence" => ExperimentSpec { m: Some(64), ..base(A4cm, 100, graph(RandomTree, 2, 64, None)) },
        "distance2-coloring" => base(Coloring, 200, graph(RandomConnected, 2, 40, Some(6))),
        "composite-stack" => ExperimentSpec {
            m: Some(64),
            schedule: Schedule::Asynchronous,
            ..base(Composite, 50, graph(RandomConnected, 2, 40, None))
        },
        "figure1-torus" => ExperimentSpec {
            m: Some(64),
            output: OutputSpec { dir: None, frames: true },
            ..base(A4cm, 20, sized(TorusUst, &[10, 20, 30]))
        },
        _ => unreachable!("catalog checked above"),
    };
    Ok(spec)
}

/// Runs the scenario named in `spec` over all its seeds.
pub fn run_scenario(spec: &ExperimentSpec) -> Result<Outcome, ExpError> {
    scenario_info(&spec.scenario)?;
    match spec.scenario.as_str() {
        "star-counterexample" => criteria::star_counterexample(spec),
        "theorem-tree-51d" | "theorem-tree-83d" => criteria::tree_bound(spec),
        "width-lemma" => criteria::width_lemma(spec),
        "blink-frequency" => criteria::blink_frequency(spec),
        "kn-periodic" => {
            criteria::kn_periodic(spec, &[Phase::from_frac(0, 1), Phase::from_frac(1, 4), Phase::from_frac(5, 8)])
        }
        "kn-periodic-corrected" => {
            criteria::kn_periodic(spec, &[Phase::from_frac(1, 16), Phase::from_frac(1, 4), Phase::from_frac(5, 8)])
        }
        "adaptive-restriction" => criteria::adaptive_restriction(spec),
        "relative-representation" => criteria::relative_representation(spec),
        "a4cm-offset" => criteria::a4cm_offset(spec),
        "a4cm-tree-convergence" => criteria::a4cm_convergence(spec),
        "distance2-coloring" => criteria::distance2_coloring(spec),
        "composite-stack" => criteria::composite_stack(spec),
        "figure1-torus" => criteria::figure1_torus(spec),
        "pull-rule-comparison" => criteria::pull_rule_comparison(spec),
        other => Err(ExpError::UnknownScenario(other.to_string())),
    }
}
