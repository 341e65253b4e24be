use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::Args;
use combimots::engine::read_report;
use combimots::metrics::{
    activity_success_rate, diversity, mean_r2_by_front, novelty, pareto_consistency, uniqueness,
    GenerationEntry, ACTIVITY_CUTOFF, NOVELTY_THRESHOLD,
};
use combimots::pareto::ObjectiveVector;
use serde::Serialize;

use crate::{inputs, write_file, CliError, CliResult, EXIT_OK};

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Search report, JSON lines.
    #[arg(long)]
    pub report: PathBuf,
    /// Reference actives, JSON lines of {"id","fp"}; enables novelty.
    #[arg(long)]
    pub actives: Option<PathBuf>,
    /// Comma-separated utopia point; defaults to all ones.
    #[arg(long, value_delimiter = ',')]
    pub utopia: Option<Vec<f64>>,
    /// Objectives that must all exceed the cutoff for an activity hit.
    #[arg(
        long = "activity-indices",
        value_delimiter = ',',
        default_value = "0,1"
    )]
    pub activity: Vec<usize>,
    #[arg(long, default_value_t = ACTIVITY_CUTOFF)]
    pub activity_cutoff: f64,
    #[arg(long, default_value_t = NOVELTY_THRESHOLD)]
    pub novelty_threshold: f64,
    /// Metrics output, JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional per-rank CSV (rank, count, mean R2).
    #[arg(long)]
    pub histogram_csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct MetricsOutput {
    products: usize,
    /// Every reported product came from a validated template, so all are valid.
    validity: f64,
    uniqueness: f64,
    novelty: Option<f64>,
    diversity: Option<f64>,
    activity_success_rate: f64,
    mean_r2_first_front: f64,
    first_front_size: usize,
    rank_histogram: BTreeMap<usize, usize>,
    mean_r2_by_rank: Vec<f64>,
}

pub fn run(args: &MetricsArgs, stdout: &mut dyn Write, _stderr: &mut dyn Write) -> CliResult<i32> {
    let file = inputs::open(&args.report)?;
    let (products, _) = read_report(BufReader::new(file))
        .with_context(|| args.report.display().to_string())
        .map_err(CliError::input)?;
    if products.is_empty() {
        return Err(CliError::input(anyhow!(
            "{} contains no products",
            args.report.display()
        )));
    }
    let entries: Vec<GenerationEntry<f64>> = products
        .into_iter()
        .map(|p| {
            let objectives = ObjectiveVector::new(p.objectives)
                .map_err(|e| CliError::input(anyhow!("product {}: {e}", p.id)))?;
            Ok(GenerationEntry {
                id: p.id,
                fingerprint: p.fingerprint,
                objectives,
            })
        })
        .collect::<CliResult<_>>()?;
    let dim = entries[0].objectives.dim();
    if entries.iter().any(|e| e.objectives.dim() != dim) {
        return Err(CliError::input(anyhow!(
            "products have differing objective counts"
        )));
    }
    let utopia = args.utopia.clone().unwrap_or_else(|| vec![1.0; dim]);
    if utopia.len() != dim {
        return Err(CliError::input(anyhow!(
            "utopia has {} values for {dim} objectives",
            utopia.len()
        )));
    }

    let novelty = match &args.actives {
        Some(path) => {
            let reference: Vec<_> = inputs::fragments(path)?
                .into_iter()
                .map(|f| f.fingerprint)
                .collect();
            Some(novelty(&entries, &reference, args.novelty_threshold).map_err(CliError::input)?)
        }
        None => None,
    };
    let consistency = pareto_consistency(&entries, &utopia).map_err(CliError::input)?;
    let by_rank = mean_r2_by_front(&entries, &utopia).map_err(CliError::input)?;
    let output = MetricsOutput {
        products: entries.len(),
        validity: 1.0,
        uniqueness: uniqueness(&entries).map_err(CliError::input)?,
        novelty,
        diversity: diversity(&entries).ok(),
        activity_success_rate: activity_success_rate(
            &entries,
            &args.activity,
            args.activity_cutoff,
        )
        .map_err(CliError::input)?,
        mean_r2_first_front: consistency.mean_r2_first_front,
        first_front_size: consistency.first_front_size,
        rank_histogram: consistency
            .front_sizes
            .iter()
            .enumerate()
            .map(|(r, &n)| (r + 1, n))
            .collect(),
        mean_r2_by_rank: by_rank.clone(),
    };

    let mut bytes = serde_json::to_vec_pretty(&output).expect("metrics serialize");
    bytes.push(b'\n');
    write_file(&args.out, &bytes)?;
    if let Some(path) = &args.histogram_csv {
        let file =
            File::create(path).map_err(|e| CliError::input(anyhow!("{}: {e}", path.display())))?;
        let mut w = csv::Writer::from_writer(file);
        let csv_err = |e: csv::Error| CliError::input(anyhow!("{}: {e}", path.display()));
        w.write_record(["rank", "count", "mean_r2"])
            .map_err(csv_err)?;
        for (r, (&n, r2)) in consistency.front_sizes.iter().zip(&by_rank).enumerate() {
            w.write_record([(r + 1).to_string(), n.to_string(), r2.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()
            .map_err(|e| CliError::input(anyhow!("{}: {e}", path.display())))?;
    }
    let _ = writeln!(
        stdout,
        "{} products, uniqueness {:.3}, first front {} (mean R2 {:.4})",
        output.products, output.uniqueness, output.first_front_size, output.mean_r2_first_front
    );
    Ok(EXIT_OK)
}
