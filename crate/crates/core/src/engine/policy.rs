//! Child scoring and selection.

use rand::Rng;

use crate::pareto::pareto_partition;
use crate::scalar::Scalar;

/// Pareto upper confidence bound of one child, component-wise:
///
/// `W/N + C * Ora * sqrt((ln D + 4 ln(1 + N_parent)) / (1 + N))`
///
/// An unvisited child has a zero exploitation term.
pub fn pucb<T: Scalar>(
    reward: &[T],
    visits: u64,
    ora: &[T],
    parent_visits: u64,
    exploration: T,
    dim: usize,
) -> Vec<T> {
    debug_assert_eq!(reward.len(), ora.len());
    let n = T::from_count(visits);
    let bonus = ((T::from_count(dim as u64).ln()
        + T::lit(4.0) * (T::one() + T::from_count(parent_visits)).ln())
        / (T::one() + n))
        .sqrt();
    reward
        .iter()
        .zip(ora)
        .map(|(&w, &o)| {
            let mean = if visits == 0 { T::zero() } else { w / n };
            mean + exploration * o * bonus
        })
        .collect()
}

/// How a parent picks among its live children.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectionPolicy {
    /// Uniform draw from the first Pareto front of the children's PUCB vectors.
    Pareto,
    /// Maximize the weighted sum of the PUCB vector; ties drawn uniformly.
    Scalarized(Vec<f64>),
}

impl SelectionPolicy {
    /// Picks a position in `scores` (one PUCB vector per candidate).
    pub fn choose<R: Rng + ?Sized>(&self, scores: &[Vec<f64>], rng: &mut R) -> usize {
        assert!(!scores.is_empty(), "selection over no candidates");
        match self {
            SelectionPolicy::Pareto => {
                let fronts = pareto_partition(scores).expect("uniform PUCB dimension");
                uniform(&fronts[0], rng)
            }
            SelectionPolicy::Scalarized(weights) => {
                let values: Vec<f64> = scores
                    .iter()
                    .map(|s| s.iter().zip(weights).map(|(v, w)| v * w).sum())
                    .collect();
                let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let ties: Vec<usize> = (0..values.len()).filter(|&i| values[i] == best).collect();
                uniform(&ties, rng)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SelectionPolicy::Pareto => "pareto",
            SelectionPolicy::Scalarized(_) => "scalarized",
        }
    }
}

/// Uniform pick; a single candidate consumes no randomness.
fn uniform<R: Rng + ?Sized>(candidates: &[usize], rng: &mut R) -> usize {
    if candidates.len() == 1 {
        candidates[0]
    } else {
        candidates[rng.gen_range(0..candidates.len())]
    }
}
