use std::io::Write;
use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use combimots::chem::{
    count_possible_products, io::write_blocks, reduce_space, Fingerprint, SpaceError,
    DEFAULT_PRODUCT_CAP, DEFAULT_THRESHOLD,
};
use serde::Serialize;

use crate::{inputs, write_file, CliError, CliResult, EXIT_OK};

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Fragment fingerprints, JSON lines of {"id","fp"}.
    #[arg(long)]
    pub fragments: PathBuf,
    /// Building blocks, JSON lines of {"id","tags","fp","scores"?}.
    #[arg(long)]
    pub blocks: PathBuf,
    /// Minimum Tanimoto similarity to some fragment for a block to be kept.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Reaction templates; when given, the summary includes the number of possible products.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Template applications counted for possible products (1 or 2).
    #[arg(long, default_value_t = 2)]
    pub max_steps: usize,
    /// Stop counting products beyond this many.
    #[arg(long, default_value_t = DEFAULT_PRODUCT_CAP)]
    pub cap: u64,
    /// Output path for the reduced blocks.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Summary {
    blocks_in: usize,
    blocks: usize,
    threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    possible_products: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    possible_products_lower_bound: Option<u64>,
}

pub fn run(args: &ReduceArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<i32> {
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(CliError::input(anyhow!(
            "threshold {} outside [0,1]",
            args.threshold
        )));
    }
    let fragments: Vec<Fingerprint> = inputs::fragments(&args.fragments)?
        .into_iter()
        .map(|f| f.fingerprint)
        .collect();
    let blocks = inputs::blocks(&args.blocks)?;
    let templates = args
        .templates
        .as_deref()
        .map(inputs::templates)
        .transpose()?;
    let kept = reduce_space(&fragments, &blocks, args.threshold).map_err(CliError::input)?;

    let mut summary = Summary {
        blocks_in: blocks.len(),
        blocks: kept.len(),
        threshold: args.threshold,
        possible_products: None,
        possible_products_lower_bound: None,
    };
    if let Some(templates) = &templates {
        match count_possible_products(&kept, templates, args.max_steps, args.cap) {
            Ok(n) => summary.possible_products = Some(n),
            Err(SpaceError::Capacity { cap, lower_bound }) => {
                let _ = writeln!(
                    stderr,
                    "warning: more than {cap} possible products; counting stopped"
                );
                summary.possible_products_lower_bound = Some(lower_bound);
            }
            Err(e) => return Err(CliError::input(e)),
        }
    }

    let mut buf = Vec::new();
    write_blocks(&mut buf, &kept).map_err(CliError::input)?;
    write_file(&args.out, &buf)?;
    let line = serde_json::to_string(&summary).expect("summary serializes");
    let _ = writeln!(stdout, "{line}");
    Ok(EXIT_OK)
}
