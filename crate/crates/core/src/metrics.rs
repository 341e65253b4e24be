//! Post-hoc evaluation of a generated set. Originality covers uniqueness,
//! novelty and diversity; the remaining scores measure activity success
//! and how well the set sits on the Pareto front.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::chem::{Fingerprint, SpaceError};
use crate::pareto::{pareto_partition, r2_distance, ObjectiveVector, ParetoError};
use crate::scalar::Scalar;

/// Novelty cutoff: an entry is novel below this similarity to every reference.
pub const NOVELTY_THRESHOLD: f64 = 0.4;

/// Activity cutoff; an activity counts only when strictly above it.
pub const ACTIVITY_CUTOFF: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("need at least {needed} entries, got {got}")]
    Insufficient { needed: usize, got: usize },
    #[error("objective index {index} out of range for dimension {dim}")]
    Dimension { index: usize, dim: usize },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Pareto(#[from] ParetoError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationEntry<T> {
    pub id: String,
    pub fingerprint: Fingerprint,
    pub objectives: ObjectiveVector<T>,
}

/// Generated entries plus the reference actives novelty is measured against.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GenerationSet<T> {
    pub entries: Vec<GenerationEntry<T>>,
    pub reference: Vec<Fingerprint>,
}

/// Fraction of distinct ids.
pub fn uniqueness<T>(entries: &[GenerationEntry<T>]) -> Result<f64, MetricsError> {
    if entries.is_empty() {
        return Err(MetricsError::EmptyInput("generation set"));
    }
    let distinct: HashSet<&str> = entries.iter().map(|e| e.id.as_str()).collect();
    Ok(distinct.len() as f64 / entries.len() as f64)
}

/// Fraction of entries whose best similarity to any reference is below `threshold`.
pub fn novelty<T>(
    entries: &[GenerationEntry<T>],
    reference: &[Fingerprint],
    threshold: f64,
) -> Result<f64, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyInput("reference actives"));
    }
    if entries.is_empty() {
        return Err(MetricsError::EmptyInput("generation set"));
    }
    let mut novel = 0usize;
    for e in entries {
        let mut best: f64 = 0.0;
        for r in reference {
            best = best.max(e.fingerprint.tanimoto(r)?);
        }
        if best < threshold {
            novel += 1;
        }
    }
    Ok(novel as f64 / entries.len() as f64)
}

/// One minus the mean Tanimoto similarity over all unordered pairs.
pub fn diversity<T>(entries: &[GenerationEntry<T>]) -> Result<f64, MetricsError> {
    if entries.len() < 2 {
        return Err(MetricsError::Insufficient {
            needed: 2,
            got: entries.len(),
        });
    }
    let mut total = 0.0;
    let mut pairs = 0u64;
    for (i, a) in entries.iter().enumerate() {
        for b in &entries[i + 1..] {
            total += a.fingerprint.tanimoto(&b.fingerprint)?;
            pairs += 1;
        }
    }
    Ok(1.0 - total / pairs as f64)
}

/// Fraction of entries with every listed activity objective strictly above `cutoff`.
pub fn activity_success_rate<T: Scalar>(
    entries: &[GenerationEntry<T>],
    activity: &[usize],
    cutoff: T,
) -> Result<f64, MetricsError> {
    if entries.is_empty() {
        return Err(MetricsError::EmptyInput("generation set"));
    }
    for e in entries {
        if let Some(&index) = activity.iter().find(|&&i| i >= e.objectives.dim()) {
            return Err(MetricsError::Dimension {
                index,
                dim: e.objectives.dim(),
            });
        }
    }
    let hits = entries
        .iter()
        .filter(|e| activity.iter().all(|&i| e.objectives[i] > cutoff))
        .count();
    Ok(hits as f64 / entries.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoConsistency<T> {
    /// Mean utopia distance over every rank-1 entry, duplicates included.
    pub mean_r2_first_front: T,
    pub first_front_size: usize,
    /// Entry count per rank, rank 1 first.
    pub front_sizes: Vec<usize>,
}

pub fn pareto_consistency<T: Scalar>(
    entries: &[GenerationEntry<T>],
    utopia: &[T],
) -> Result<ParetoConsistency<T>, MetricsError> {
    if entries.is_empty() {
        return Err(MetricsError::EmptyInput("generation set"));
    }
    let vectors: Vec<&[T]> = entries.iter().map(|e| e.objectives.as_slice()).collect();
    let fronts = pareto_partition(&vectors)?;
    let first = &fronts[0];
    let mut sum = T::zero();
    for &i in first {
        sum = sum + r2_distance(vectors[i], utopia)?;
    }
    Ok(ParetoConsistency {
        mean_r2_first_front: sum / T::from_count(first.len() as u64),
        first_front_size: first.len(),
        front_sizes: fronts.iter().map(Vec::len).collect(),
    })
}

/// Mean utopia distance of every front, rank 1 first.
pub fn mean_r2_by_front<T: Scalar>(
    entries: &[GenerationEntry<T>],
    utopia: &[T],
) -> Result<Vec<T>, MetricsError> {
    if entries.is_empty() {
        return Err(MetricsError::EmptyInput("generation set"));
    }
    let vectors: Vec<&[T]> = entries.iter().map(|e| e.objectives.as_slice()).collect();
    pareto_partition(&vectors)?
        .iter()
        .map(|front| {
            let mut sum = T::zero();
            for &i in front {
                sum = sum + r2_distance(vectors[i], utopia)?;
            }
            Ok(sum / T::from_count(front.len() as u64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, bits: &str, objectives: &[f64]) -> GenerationEntry<f64> {
        GenerationEntry {
            id: id.into(),
            fingerprint: Fingerprint::from_bit_str(bits).unwrap(),
            objectives: ObjectiveVector::new(objectives.to_vec()).unwrap(),
        }
    }

    #[test]
    fn uniqueness_examples() {
        let set = [
            entry("p1", "1", &[0.0]),
            entry("p1", "1", &[0.0]),
            entry("p2", "1", &[0.0]),
        ];
        assert_eq!(uniqueness(&set).unwrap(), 2.0 / 3.0);
        assert_eq!(uniqueness(&set[1..]).unwrap(), 1.0);
        let ten: Vec<_> = (0..10)
            .map(|i| entry(&format!("p{}", i % 4), "1", &[0.0]))
            .collect();
        assert_eq!(uniqueness(&ten).unwrap(), 0.4);
        assert_eq!(
            uniqueness::<f64>(&[]),
            Err(MetricsError::EmptyInput("generation set"))
        );
    }

    #[test]
    fn novelty_examples() {
        let reference = vec![Fingerprint::from_bit_str("1100").unwrap()];
        let set = [entry("same", "1100", &[0.0]), entry("far", "0011", &[0.0])];
        assert_eq!(
            novelty(&set[..1], &reference, NOVELTY_THRESHOLD).unwrap(),
            0.0
        );
        assert_eq!(
            novelty(&set[1..], &reference, NOVELTY_THRESHOLD).unwrap(),
            1.0
        );
        assert_eq!(novelty(&set, &reference, NOVELTY_THRESHOLD).unwrap(), 0.5);
        assert_eq!(
            novelty(&set, &[], 0.4),
            Err(MetricsError::EmptyInput("reference actives"))
        );
    }

    #[test]
    fn diversity_examples() {
        let same = [entry("a", "1100", &[0.0]), entry("b", "1100", &[0.0])];
        assert_eq!(diversity(&same).unwrap(), 0.0);
        let disjoint = [entry("a", "1100", &[0.0]), entry("b", "0011", &[0.0])];
        assert_eq!(diversity(&disjoint).unwrap(), 1.0);
        assert!(matches!(
            diversity(&same[..1]),
            Err(MetricsError::Insufficient { .. })
        ));
    }

    #[test]
    fn activity_examples() {
        let all = [entry("a", "1", &[1.0, 1.0, 0.2])];
        assert_eq!(
            activity_success_rate(&all, &[0, 1], ACTIVITY_CUTOFF).unwrap(),
            1.0
        );
        let boundary = [entry("a", "1", &[0.5, 0.9])];
        assert_eq!(
            activity_success_rate(&boundary, &[0, 1], ACTIVITY_CUTOFF).unwrap(),
            0.0
        );
        let table: Vec<_> = [
            [0.9, 0.9],
            [0.6, 0.4],
            [0.51, 0.7],
            [0.5, 0.5],
            [0.2, 0.8],
            [1.0, 0.55],
            [0.7, 0.7],
            [0.49, 0.99],
            [0.8, 0.501],
            [0.0, 0.0],
        ]
        .iter()
        .map(|v| entry("x", "1", v))
        .collect();
        // manual count: rows 0, 2, 5, 6, 8
        assert_eq!(activity_success_rate(&table, &[0, 1], 0.5).unwrap(), 0.5);
        assert_eq!(
            activity_success_rate(&all, &[3], 0.5),
            Err(MetricsError::Dimension { index: 3, dim: 3 })
        );
    }

    #[test]
    fn consistency_examples() {
        let same: Vec<_> = (0..3)
            .map(|i| entry(&format!("e{i}"), "1", &[0.5, 1.0]))
            .collect();
        let c = pareto_consistency(&same, &[1.0, 1.0]).unwrap();
        assert_eq!(c.first_front_size, 3);
        assert_eq!(c.front_sizes, vec![3]);
        assert_eq!(c.mean_r2_first_front, 0.5);

        let mixed = [
            entry("a", "1", &[1.0, 0.0]),
            entry("b", "1", &[0.0, 1.0]),
            entry("c", "1", &[0.0, 0.0]),
        ];
        let c = pareto_consistency(&mixed, &[1.0, 1.0]).unwrap();
        assert_eq!(c.front_sizes, vec![2, 1]);
        assert_eq!(c.mean_r2_first_front, 1.0);
        assert_eq!(
            mean_r2_by_front(&mixed, &[1.0, 1.0]).unwrap(),
            vec![1.0, 2f64.sqrt()]
        );
    }
}
