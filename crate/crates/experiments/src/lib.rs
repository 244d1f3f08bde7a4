//! Named scenarios reproducing the theorem bounds, counterexamples and the
//! torus figure, each mapped to one acceptance criterion.

pub mod criteria;
pub mod report;
pub mod scenarios;
pub mod spec;
mod workers;

use std::path::PathBuf;

pub use report::{verify_all, write_outputs, ScenarioReport, Status, VerifyLine, VerifySummary};
pub use scenarios::{catalog, default_spec, run_scenario, scenario_info, ScenarioInfo};
pub use spec::ExperimentSpec;
pub use workers::worker_count;

#[derive(Debug, thiserror::Error)]
pub enum ExpError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("{0}: {1}")]
    Io(PathBuf, String),
    #[error(transparent)]
    Sim(#[from] pco_core::error::SimError),
    #[error(transparent)]
    Graph(#[from] pco_core::error::GraphError),
}
