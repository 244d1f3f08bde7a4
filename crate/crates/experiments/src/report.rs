use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::Value;

use crate::criteria::{Frame, Outcome};
use crate::scenarios::{catalog, default_spec, run_scenario, scenario_info};
use crate::spec::ExperimentSpec;
use crate::ExpError;

/// Machine-readable result of one scenario. Contains no timings, so equal
/// spec hashes give byte-identical reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub criterion: Option<u8>,
    pub title: String,
    pub spec_hash: String,
    pub spec: ExperimentSpec,
    pub passed: bool,
    pub summary: String,
    pub metrics: Value,
    pub runs: Vec<Value>,
}

impl ScenarioReport {
    pub fn build(spec: &ExperimentSpec, outcome: &Outcome) -> Result<Self, ExpError> {
        let info = scenario_info(&spec.scenario)?;
        let mut spec = spec.clone();
        spec.output.dir = None;
        Ok(ScenarioReport {
            scenario: spec.scenario.clone(),
            criterion: info.criterion,
            title: info.title.to_string(),
            spec_hash: spec.hash(),
            spec,
            passed: outcome.passed,
            summary: outcome.summary.clone(),
            metrics: outcome.metrics.clone(),
            runs: outcome.rows.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One CSV line per run; columns are the union of the run fields.
    pub fn runs_csv(&self) -> String {
        let mut cols: Vec<String> = Vec::new();
        for r in &self.runs {
            if let Value::Object(map) = r {
                for k in map.keys() {
                    if !cols.contains(k) {
                        cols.push(k.clone());
                    }
                }
            }
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&cols).expect("in-memory write");
        for r in &self.runs {
            let cells: Vec<String> = cols
                .iter()
                .map(|c| match &r[c] {
                    Value::Null => String::new(),
                    Value::String(s) => s.clone(),
                    v => v.to_string(),
                })
                .collect();
            w.write_record(&cells).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

fn write(path: &Path, text: &str) -> Result<(), ExpError> {
    std::fs::write(path, text).map_err(|e| ExpError::Io(path.to_path_buf(), e.to_string()))
}

/// Writes `report.json`, `runs.csv`, `spec.toml` and any frames under `dir`.
pub fn write_outputs(dir: &Path, report: &ScenarioReport, frames: &[Frame]) -> Result<(), ExpError> {
    std::fs::create_dir_all(dir).map_err(|e| ExpError::Io(dir.to_path_buf(), e.to_string()))?;
    write(&dir.join("report.json"), &report.to_json())?;
    write(&dir.join("runs.csv"), &report.runs_csv())?;
    write(&dir.join("spec.toml"), &report.spec.to_toml())?;
    if !frames.is_empty() {
        let fdir = dir.join("frames");
        std::fs::create_dir_all(&fdir).map_err(|e| ExpError::Io(fdir.clone(), e.to_string()))?;
        for f in frames {
            write(&fdir.join(format!("{}.pgm", f.name)), &f.pgm)?;
            write(&fdir.join(format!("{}.csv", f.name)), &f.csv)?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
            Status::Error => "ERROR",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyLine {
    pub criterion: u8,
    pub scenario: &'static str,
    pub status: Status,
    pub summary: String,
    pub seconds: f64,
}

impl fmt::Display for VerifyLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<24} {:<5} {:>7.2}s  {}",
            self.criterion, self.scenario, self.status, self.seconds, self.summary
        )
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifySummary {
    pub lines: Vec<VerifyLine>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        !self.lines.is_empty() && self.lines.iter().all(|l| l.status == Status::Pass)
    }

    pub fn count(&self, s: Status) -> usize {
        self.lines.iter().filter(|l| l.status == s).count()
    }
}

/// Runs every criterion scenario with its default spec. Criteria not yet
/// started when `budget` runs out are reported as skipped. `on_line` sees
/// each line as soon as it is decided.
pub fn verify_all(budget: Option<Duration>, mut on_line: impl FnMut(&VerifyLine)) -> VerifySummary {
    let start = Instant::now();
    let mut out = VerifySummary::default();
    for info in catalog() {
        let Some(criterion) = info.criterion else { continue };
        let line = if budget.is_some_and(|b| start.elapsed() >= b) {
            VerifyLine {
                criterion,
                scenario: info.name,
                status: Status::Skipped,
                summary: "time budget exhausted".into(),
                seconds: 0.0,
            }
        } else {
            let t = Instant::now();
            let res = default_spec(info.name).and_then(|s| run_scenario(&s));
            let secs = t.elapsed().as_secs_f64();
            match res {
                Ok(o) => {
                    // The star counterexample also carries a runtime target.
                    let fast = criterion != 1 || secs < 1.0;
                    let mut summary = o.summary;
                    if !fast {
                        summary.push_str(" (slower than 1s)");
                    }
                    let status = if o.passed && fast { Status::Pass } else { Status::Fail };
                    VerifyLine { criterion, scenario: info.name, status, summary, seconds: secs }
                }
                Err(e) => VerifyLine {
                    criterion,
                    scenario: info.name,
                    status: Status::Error,
                    summary: e.to_string(),
                    seconds: secs,
                },
            }
        };
        on_line(&line);
        out.lines.push(line);
    }
    out
}
