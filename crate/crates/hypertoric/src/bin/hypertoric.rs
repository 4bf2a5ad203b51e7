use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypertoric::cli::{run, CutShift, JobSpec};

#[derive(Parser)]
#[command(name = "hypertoric", version, about = "Arrangement, cosheaf and skeleton pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a job file (JSON).
    Run {
        job: PathBuf,
        /// Overrides the job's degree bound.
        #[arg(long)]
        degree: Option<u32>,
        /// "auto" or comma separated rationals, e.g. 1/2,1/3
        #[arg(long)]
        cut_shift: Option<String>,
        /// Relative tolerance of the flow integrator.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        max_flow_time: Option<f64>,
        /// Write flow trajectories as CSV to this path.
        #[arg(long)]
        emit_trajectories: Option<PathBuf>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let Cmd::Run {
        job,
        degree,
        cut_shift,
        tolerance,
        max_flow_time,
        emit_trajectories,
        json_out,
    } = Cli::parse().command;
    let text = match std::fs::read_to_string(&job) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", job.display());
            return ExitCode::from(2);
        }
    };
    let mut spec = match JobSpec::from_json(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if let Some(d) = degree {
        spec.degree = d;
    }
    if let Some(c) = cut_shift {
        match CutShift::parse(&c) {
            Ok(c) => spec.cut_shift = c,
            Err(e) => {
                eprintln!("{e}");
                return ExitCode::from(2);
            }
        }
    }
    if tolerance.is_some() || max_flow_time.is_some() {
        let f = spec.flow.get_or_insert_with(Default::default);
        if let Some(t) = tolerance {
            f.rtol = t;
        }
        if let Some(t) = max_flow_time {
            f.max_time = t;
        }
    }
    if let Err(e) = spec.validate() {
        eprintln!("{e}");
        return ExitCode::from(2);
    }
    let bundle = run(&spec);
    print!("{}", bundle.summary());
    let json = bundle.to_json();
    match &json_out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &json) {
                eprintln!("cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    if let (Some(path), Some(flow)) = (&emit_trajectories, &bundle.flow) {
        if let Err(e) = flow.write_csv(path) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(bundle.exit_code as u8)
}
