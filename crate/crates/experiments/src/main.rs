use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use pco_experiments::{
    catalog, default_spec, run_scenario, verify_all, write_outputs, ExpError, ExperimentSpec, ScenarioReport,
};

/// Batch experiments for the pulse-coupled oscillator simulators.
/// Worker threads: PCO_WORKERS (default: all cores).
#[derive(Parser)]
#[command(name = "pco", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a TOML spec file.
    Run {
        spec: PathBuf,
        /// Output directory (overrides the spec's).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in scenario with its default spec.
    Scenario {
        name: String,
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        seed_base: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    List,
    /// Run every acceptance criterion; exit code 0 iff all pass.
    Verify {
        /// Stop starting new criteria after this many seconds.
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Run a spec with frame output enabled and write only the frames.
    Frames {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn execute(spec: ExperimentSpec, frames_only: bool) -> Result<bool, ExpError> {
    let outcome = run_scenario(&spec)?;
    let report = ScenarioReport::build(&spec, &outcome)?;
    println!(
        "{} [{}] {}: {}",
        report.scenario,
        &report.spec_hash[..12],
        if report.passed { "PASS" } else { "FAIL" },
        report.summary
    );
    if let Some(dir) = &spec.output.dir {
        if frames_only {
            let fdir = dir.join("frames");
            std::fs::create_dir_all(&fdir).map_err(|e| ExpError::Io(fdir.clone(), e.to_string()))?;
            for f in &outcome.frames {
                for (ext, text) in [("pgm", &f.pgm), ("csv", &f.csv)] {
                    let p = fdir.join(format!("{}.{ext}", f.name));
                    std::fs::write(&p, text).map_err(|e| ExpError::Io(p.clone(), e.to_string()))?;
                }
            }
            println!("{} frames written to {}", outcome.frames.len(), fdir.display());
        } else {
            write_outputs(dir, &report, &outcome.frames)?;
            println!("results written to {}", dir.display());
        }
    }
    Ok(report.passed)
}

fn dispatch(cli: Cli) -> Result<bool, ExpError> {
    match cli.cmd {
        Cmd::Run { spec, out } => ExperimentSpec::load(&spec).and_then(|mut s| {
            s.output.dir = out.or(s.output.dir);
            execute(s, false)
        }),
        Cmd::Scenario { name, seeds, seed_base, out } => default_spec(&name).and_then(|mut s| {
            s.seeds = seeds.unwrap_or(s.seeds);
            s.seed_base = seed_base.unwrap_or(s.seed_base);
            s.output.dir = out;
            execute(s, false)
        }),
        Cmd::List => {
            for s in catalog() {
                let c = s.criterion.map_or("-".to_string(), |c| c.to_string());
                println!("{:<26} {:>2}  {}", s.name, c, s.title);
            }
            Ok(true)
        }
        Cmd::Verify { budget } => {
            let summary = verify_all(budget.map(Duration::from_secs_f64), |l| println!("{l}"));
            println!(
                "{} passed, {} failed, {} skipped",
                summary.count(pco_experiments::Status::Pass),
                summary.count(pco_experiments::Status::Fail) + summary.count(pco_experiments::Status::Error),
                summary.count(pco_experiments::Status::Skipped)
            );
            Ok(summary.all_passed())
        }
        Cmd::Frames { spec, out } => ExperimentSpec::load(&spec).and_then(|mut s| {
            s.output.frames = true;
            s.output.dir = Some(out.or(s.output.dir).unwrap_or_else(|| PathBuf::from(".")));
            execute(s, true)
        }),
    }
}

/// 0 when every assertion passed, 1 on a failed assertion, 2 on an error.
fn exit_code(res: &Result<bool, ExpError>) -> u8 {
    match res {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(_) => 2,
    }
}

fn main() -> ExitCode {
    let res = dispatch(Cli::parse());
    if let Err(e) = &res {
        eprintln!("error: {e}");
    }
    ExitCode::from(exit_code(&res))
}
