use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Args, ValueEnum};
use combimots::bandit::{
    check_failure_decay, check_log_bound, run_bandit_seeds, BanditError, BanditInstance,
    BanditOptions, InitMode, LOG_FIT_WINDOW, MIN_DECAY_SEEDS,
};
use combimots::engine::SelectionPolicy;
use serde_json::json;

use crate::{inputs, write_file, CliError, CliResult, EXIT_CHECK_FAILED, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum PolicyArg {
    ParetoPucb,
    ScalarizedUcb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    /// Pull every arm once before the policy takes over.
    Sweep,
    /// Let the zero-mean guard of unvisited arms do the initialization.
    Guard,
}

#[derive(Debug, Args)]
pub struct BanditArgs {
    /// Bundled instance name (dominated-arm, all-optimal) or a JSON instance file.
    #[arg(long)]
    pub instance: String,
    #[arg(long, value_enum, default_value = "pareto_pucb")]
    pub policy: PolicyArg,
    /// Weights for scalarized_ucb; equal weights by default.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100_000)]
    pub horizon: usize,
    #[arg(long, default_value_t = 200)]
    pub seeds: u64,
    #[arg(long, value_enum, default_value = "sweep")]
    pub init: InitArg,
    /// How many seeds to write to the step-level trace CSV.
    #[arg(long, default_value_t = 1)]
    pub trace_seeds: u64,
    /// Output directory for trace.csv and fit_report.json.
    #[arg(long)]
    pub out: PathBuf,
}

fn load_instance(spec: &str) -> CliResult<BanditInstance> {
    if let Some(instance) = BanditInstance::bundled(spec) {
        return Ok(instance);
    }
    let path = PathBuf::from(spec);
    let instance: BanditInstance =
        serde_json::from_reader(std::io::BufReader::new(inputs::open(&path)?))
            .with_context(|| path.display().to_string())
            .map_err(CliError::input)?;
    instance.validate().map_err(CliError::input)?;
    Ok(instance)
}

pub fn run(args: &BanditArgs, stdout: &mut dyn Write, _stderr: &mut dyn Write) -> CliResult<i32> {
    let instance = load_instance(&args.instance)?;
    let policy = match args.policy {
        PolicyArg::ParetoPucb => SelectionPolicy::Pareto,
        PolicyArg::ScalarizedUcb => {
            let d = instance.dim();
            SelectionPolicy::Scalarized(
                args.weights
                    .clone()
                    .unwrap_or_else(|| vec![1.0 / d as f64; d]),
            )
        }
    };
    if args.horizon < instance.arms() {
        return Err(CliError::input(anyhow!(
            "horizon {} shorter than the {} arms",
            args.horizon,
            instance.arms()
        )));
    }
    let needed = 10 * LOG_FIT_WINDOW.0;
    if args.horizon < needed {
        return Err(CliError::input(anyhow!(
            "horizon {} too short for the fits; need {needed}",
            args.horizon
        )));
    }
    if (args.seeds as usize) < MIN_DECAY_SEEDS {
        return Err(CliError::input(anyhow!(
            "need at least {MIN_DECAY_SEEDS} seeds, got {}",
            args.seeds
        )));
    }
    let options = BanditOptions {
        init: match args.init {
            InitArg::Sweep => InitMode::Sweep,
            InitArg::Guard => InitMode::Guard,
        },
        record_fronts: false,
    };
    let traces = run_bandit_seeds(&instance, &policy, args.horizon, 0..args.seeds, &options)
        .map_err(CliError::input)?;

    let log_bound = match check_log_bound(&traces, &instance, LOG_FIT_WINDOW) {
        Ok(r) => json!({ "applicable": true, "passed": r.passed, "report": r }),
        // nothing is dominated, so there is nothing to bound
        Err(BanditError::NoDominatedArm) => json!({ "applicable": false, "passed": true }),
        Err(e) => return Err(CliError::input(e)),
    };
    let decay = check_failure_decay(&traces, &instance).map_err(CliError::input)?;
    let passed = log_bound["passed"] == json!(true) && decay.passed;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::input(anyhow!("cannot create {}: {e}", args.out.display())))?;
    let trace_path = args.out.join("trace.csv");
    let file = File::create(&trace_path)
        .map_err(|e| CliError::input(anyhow!("{}: {e}", trace_path.display())))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| CliError::input(anyhow!("{}: {e}", trace_path.display()));
    w.write_record(["seed", "step", "arm", "failure"])
        .map_err(csv_err)?;
    for trace in traces.iter().take(args.trace_seeds as usize) {
        for (i, &arm) in trace.selections.iter().enumerate() {
            let failed = u8::from(trace.failed(i + 1));
            w.write_record([
                trace.seed.to_string(),
                (i + 1).to_string(),
                arm.to_string(),
                failed.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()
        .map_err(|e| CliError::input(anyhow!("{}: {e}", trace_path.display())))?;

    let report = json!({
        "instance": instance,
        "policy": policy.name(),
        "horizon": args.horizon,
        "seeds": args.seeds,
        "log_bound": log_bound,
        "failure_decay": decay,
        "passed": passed,
    });
    let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
    bytes.push(b'\n');
    write_file(&args.out.join("fit_report.json"), &bytes)?;
    let _ = writeln!(
        stdout,
        "log bound: {}, failure decay: {}",
        if log_bound["passed"] == json!(true) {
            "pass"
        } else {
            "FAIL"
        },
        if decay.passed { "pass" } else { "FAIL" }
    );
    Ok(if passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}
