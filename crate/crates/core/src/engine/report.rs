//! Search results and their JSON-lines form.
//!
//! One object per product, followed by a single `{"summary": {...}}` record.

use std::io::{BufRead, Write};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::chem::{Fingerprint, SpaceError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportedProduct {
    pub id: String,
    pub blocks: Vec<String>,
    pub template_path: Vec<String>,
    pub objectives: Vec<f64>,
    /// Visits summed over every tree path reaching this product.
    pub visits: u64,
    /// 1-based rank over the discovered set.
    pub pareto_rank: usize,
    #[serde(rename = "fp")]
    pub fingerprint: Fingerprint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub mode: String,
    pub seed: u64,
    pub rollouts: usize,
    pub barren_rollouts: usize,
    pub oracle_requests: u64,
    pub oracle_failures: u64,
    /// Sorted by rank, then id.
    pub products: Vec<ReportedProduct>,
    pub diagnostic: Option<String>,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub mode: String,
    pub seed: u64,
    pub rollouts: usize,
    pub barren_rollouts: usize,
    pub oracle_requests: u64,
    pub oracle_failures: u64,
    pub products: usize,
    pub first_front: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u128>,
}

#[derive(Serialize, Deserialize)]
struct SummaryRecord {
    summary: ReportSummary,
}

impl SearchReport {
    pub fn first_front(&self) -> impl Iterator<Item = &ReportedProduct> {
        self.products.iter().filter(|p| p.pareto_rank == 1)
    }

    pub fn summary(&self, include_timing: bool) -> ReportSummary {
        ReportSummary {
            mode: self.mode.clone(),
            seed: self.seed,
            rollouts: self.rollouts,
            barren_rollouts: self.barren_rollouts,
            oracle_requests: self.oracle_requests,
            oracle_failures: self.oracle_failures,
            products: self.products.len(),
            first_front: self.first_front().count(),
            diagnostic: self.diagnostic.clone(),
            wall_time_ms: include_timing.then_some(self.elapsed.as_millis()),
        }
    }

    /// Writes the JSON-lines form. Wall time is only included on request so
    /// that identical runs produce identical bytes.
    pub fn write_jsonl<W: Write>(&self, mut out: W, include_timing: bool) -> std::io::Result<()> {
        for p in &self.products {
            serde_json::to_writer(&mut out, p)?;
            out.write_all(b"\n")?;
        }
        serde_json::to_writer(
            &mut out,
            &SummaryRecord {
                summary: self.summary(include_timing),
            },
        )?;
        out.write_all(b"\n")
    }
}

/// Reads the product lines and the summary (if present) of a report file.
pub fn read_report<R: BufRead>(
    reader: R,
) -> Result<(Vec<ReportedProduct>, Option<ReportSummary>), SpaceError> {
    let mut products = Vec::new();
    let mut summary = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |e: serde_json::Error| SpaceError::Parse {
            line: i + 1,
            message: e.to_string(),
        };
        let value: serde_json::Value = serde_json::from_str(&line).map_err(parse_err)?;
        if value.get("summary").is_some() {
            let record: SummaryRecord = serde_json::from_value(value).map_err(parse_err)?;
            summary = Some(record.summary);
        } else {
            products.push(serde_json::from_value(value).map_err(parse_err)?);
        }
    }
    Ok((products, summary))
}
