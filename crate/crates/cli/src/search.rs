use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::anyhow;
use clap::Args;
use combimots::chem::ChemSpace;
use combimots::engine::{Search, SearchConfig, SelectionPolicy};
use combimots::oracle::{
    CachedOracle, ExternalOracle, Oracle, SyntheticKind, SyntheticOracle, TableOracle,
    DEFAULT_TIMEOUT,
};
use combimots::pareto::ObjectiveSpec;
use serde::Serialize;
use serde_json::json;

use crate::{inputs, write_file, CliError, CliResult, EXIT_OK, TIMEOUT_ENV};

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Building blocks, JSON lines.
    #[arg(long)]
    pub blocks: PathBuf,
    /// Reaction templates, a JSON array.
    #[arg(long)]
    pub templates: PathBuf,
    /// Scoring backend: table:FILE.csv, exec:COMMAND or synthetic:NAME (bit-fraction, deceptive-front).
    #[arg(long)]
    pub oracle: String,
    /// Objective definitions (JSON); defaults to two identity activities and two docking scores.
    #[arg(long)]
    pub objectives: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub rollouts: usize,
    /// Exploration constant C of the upper confidence bound.
    #[arg(long = "exploration-c", default_value_t = 1.0)]
    pub exploration: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest block tuple a tree node may hold (2 to 4).
    #[arg(long, default_value_t = 3)]
    pub max_blocks: usize,
    /// Comma-separated weights; switches to weighted-sum selection.
    #[arg(long = "scalarized-weights", value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    /// Report output, JSON lines.
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest output; defaults to the report path with `.manifest.json` appended.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Include wall time in the report summary (makes reports differ between runs).
    #[arg(long)]
    pub timing: bool,
    /// Suppress the rollout counter.
    #[arg(long)]
    pub quiet: bool,
}

enum Backend {
    Table(PathBuf),
    Exec(String),
    Synthetic(String),
}

impl Backend {
    fn parse(s: &str) -> CliResult<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| CliError::input(anyhow!("--oracle expects KIND:VALUE, got {s:?}")))?;
        match kind {
            "table" => Ok(Self::Table(rest.into())),
            "exec" => Ok(Self::Exec(rest.into())),
            "synthetic" => Ok(Self::Synthetic(rest.into())),
            _ => Err(CliError::input(anyhow!("unknown oracle kind {kind:?}"))),
        }
    }
}

fn oracle_timeout() -> CliResult<Duration> {
    match std::env::var(TIMEOUT_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .ok()
            .filter(|&ms| ms > 0)
            .map(Duration::from_millis)
            .ok_or_else(|| {
                CliError::input(anyhow!(
                    "{TIMEOUT_ENV} must be a positive integer, got {v:?}"
                ))
            }),
        Err(_) => Ok(DEFAULT_TIMEOUT),
    }
}

#[derive(Serialize)]
struct Input {
    path: String,
    sha256: String,
}

fn input(path: &Path) -> CliResult<Input> {
    Ok(Input {
        path: path.display().to_string(),
        sha256: inputs::digest(path)?,
    })
}

pub fn run(args: &SearchArgs, _stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    let backend = Backend::parse(&args.oracle)?;
    let mut spec = inputs::objectives(args.objectives.as_deref())?;
    let space = ChemSpace::new(
        inputs::blocks(&args.blocks)?,
        inputs::templates(&args.templates)?,
    )
    .map_err(CliError::input)?;
    let config = SearchConfig {
        rollouts: args.rollouts,
        exploration: args.exploration,
        max_blocks: args.max_blocks,
        seed: args.seed,
    };
    config.validate().map_err(CliError::input)?;

    let mut oracle_config = json!({ "spec": args.oracle });
    let mut digests = serde_json::Map::new();
    digests.insert(
        "blocks".into(),
        serde_json::to_value(input(&args.blocks)?).unwrap(),
    );
    digests.insert(
        "templates".into(),
        serde_json::to_value(input(&args.templates)?).unwrap(),
    );
    if let Some(p) = &args.objectives {
        digests.insert(
            "objectives".into(),
            serde_json::to_value(input(p)?).unwrap(),
        );
    }

    let backend: Box<dyn Oracle> = match backend {
        Backend::Table(path) => {
            digests.insert(
                "oracle_table".into(),
                serde_json::to_value(input(&path)?).unwrap(),
            );
            let table = TableOracle::from_csv(spec.clone(), inputs::open(&path)?)
                .map_err(|e| CliError::input(anyhow!("{}: {e}", path.display())))?;
            Box::new(table)
        }
        Backend::Exec(command) => {
            let timeout = oracle_timeout()?;
            oracle_config["timeout_ms"] = json!(timeout.as_millis() as u64);
            Box::new(
                ExternalOracle::from_shell(spec.clone(), &command, timeout)
                    .map_err(CliError::input)?,
            )
        }
        Backend::Synthetic(name) => {
            let kind = SyntheticKind::by_name(&name)
                .ok_or_else(|| CliError::input(anyhow!("unknown synthetic oracle {name:?}")))?;
            // synthetic scores are already in maximize space
            let synthetic = SyntheticOracle::new(kind, spec.dim());
            spec = synthetic.spec().clone();
            Box::new(synthetic)
        }
    };
    check_block_scores(&space, &spec)?;
    let oracle = CachedOracle::new(backend);

    let policy = match &args.weights {
        Some(w) => SelectionPolicy::Scalarized(w.clone()),
        None => SelectionPolicy::Pareto,
    };
    let manifest = json!({
        "tool": "combimots",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "search",
        "seed": args.seed,
        "config": {
            "mode": policy.name(),
            "rollouts": config.rollouts,
            "exploration_c": config.exploration,
            "max_blocks": config.max_blocks,
            "seed": config.seed,
            "scalarized_weights": args.weights,
            "oracle": oracle_config,
            "objectives": spec,
            "timing": args.timing,
        },
        "inputs": digests,
    });
    let manifest_path = args.manifest.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".manifest.json");
        p.into()
    });
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_file(&manifest_path, &bytes)?;

    let start = Instant::now();
    let mut search =
        Search::new(config.clone(), policy, &space, &oracle).map_err(CliError::input)?;
    let step = (config.rollouts / 20).max(1);
    search.run_observed(|done| {
        if !args.quiet && (done % step == 0 || done == config.rollouts) {
            let _ = writeln!(stderr, "rollouts {done}/{}", config.rollouts);
        }
    });
    let protocol_failures = search.protocol_failures();
    let report = search.report(start.elapsed());

    let mut out = Vec::new();
    report
        .write_jsonl(&mut out, args.timing)
        .map_err(|e| CliError::input(anyhow!("writing report: {e}")))?;
    write_file(&args.out, &out)?;
    if let Some(d) = &report.diagnostic {
        let _ = writeln!(stderr, "note: {d}");
    }

    let requests = report.oracle_requests;
    if requests > 0 && protocol_failures * 2 > requests {
        return Err(CliError::environment(anyhow!(
            "oracle failed on {protocol_failures} of {requests} requests"
        )));
    }
    Ok(EXIT_OK)
}

fn check_block_scores(space: &ChemSpace, spec: &ObjectiveSpec) -> CliResult<()> {
    for block in space.blocks() {
        if let Some(Err(e)) = block.precomputed(spec) {
            return Err(CliError::input(anyhow!("block {}: {e}", block.id)));
        }
    }
    Ok(())
}
